#include "branchpath/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "branchpath/numeric.hpp"

namespace branchpath {
namespace {

constexpr std::uint64_t kStartSeed = 0x9e3779b97f4a7c15ULL;
constexpr int kStarts = 20;
constexpr int kMaxSweeps = 5000;

std::vector<Point> terminal_points(const TransportInstance& in) {
  auto pts = in.mu_minus.points();
  for (const auto& p : in.mu_plus.points()) pts.push_back(p);
  return pts;
}

// Net supply per terminal: sources emit, sinks absorb.
std::vector<double> terminal_supply(const TransportInstance& in) {
  std::vector<double> s;
  for (const auto& a : in.mu_minus.atoms()) s.push_back(a.w);
  for (const auto& a : in.mu_plus.atoms()) s.push_back(-a.w);
  return s;
}

// Orients the edges of a tree by the flow forced by conservation and drops
// the edges that carry none.
std::vector<Topology::Edge> forced_flows(int n, const std::vector<std::pair<int, int>>& tree, const std::vector<double>& supply,
                                         double zero) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& [u, v] : tree) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<int> parent(static_cast<std::size_t>(n), -1), order{0};
  parent[0] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (int v : adj[order[i]])
      if (parent[v] < 0) {
        parent[v] = order[i];
        order.push_back(v);
      }
  std::vector<CompensatedSum> below(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v)
    if (v < static_cast<int>(supply.size())) below[v].add(supply[v]);
  std::vector<Topology::Edge> out;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    if (v == 0) continue;
    const double f = below[v].value();
    below[parent[v]].add(f);
    if (std::abs(f) <= zero) continue;
    out.push_back(f > 0 ? Topology::Edge{v, parent[v], f} : Topology::Edge{parent[v], v, -f});
  }
  return out;
}

std::vector<std::pair<int, int>> prufer_decode(const std::vector<int>& seq, int n) {
  std::vector<int> degree(static_cast<std::size_t>(n), 1);
  for (int x : seq) ++degree[x];
  std::vector<std::pair<int, int>> edges;
  for (int x : seq) {
    int leaf = 0;
    while (degree[leaf] != 1) ++leaf;
    edges.push_back({leaf, x});
    --degree[leaf];
    --degree[x];
  }
  int u = -1, v = -1;
  for (int i = 0; i < n; ++i)
    if (degree[i] == 1) (u < 0 ? u : v) = i;
  edges.push_back({u, v});
  return edges;
}

using Key = std::vector<std::pair<int, int>>;

Key canonical_key(const std::vector<Topology::Edge>& edges, int terminals, int steiner) {
  std::vector<int> perm(static_cast<std::size_t>(steiner));
  std::iota(perm.begin(), perm.end(), 0);
  Key best;
  do {
    Key k;
    for (const auto& e : edges) {
      auto relabel = [&](int v) { return v < terminals ? v : terminals + perm[v - terminals]; };
      k.push_back({relabel(e.from), relabel(e.to)});
    }
    std::sort(k.begin(), k.end());
    if (best.empty() || k < best) best = std::move(k);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double tree_energy(const Topology& t, const std::vector<Point>& pos, const CostSpec& cost) {
  std::vector<double> terms;
  for (const auto& e : t.edges) terms.push_back(cost(e.flow) * (pos[e.from] - pos[e.to]).norm());
  return pairwise_sum(terms);
}

// argmin_x sum w_i |x - p_i|: a data point when it satisfies the vertex
// optimality test |sum_{j != k} w_j u_j| <= w_k, Weiszfeld iterations otherwise.
Point fermat_weber(const std::vector<Point>& p, const std::vector<double>& w, Point x, double scale, bool& converged) {
  const double tol = 1e-12 * scale;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0)) return x;
  for (std::size_t k = 0; k < p.size(); ++k) {
    Point pull = Point::Zero(x.size());
    double here = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double dist = (p[i] - p[k]).norm();
      if (dist <= tol)
        here += w[i];
      else
        pull += w[i] * (p[i] - p[k]) / dist;
    }
    if (pull.norm() <= here * (1 + 1e-12)) return p[k];
  }
  auto near_point = [&](const Point& y) {
    for (const auto& q : p)
      if ((y - q).norm() <= tol) return true;
    return false;
  };
  if (near_point(x)) {
    x = Point::Zero(x.size());
    for (std::size_t i = 0; i < p.size(); ++i) x += w[i] * p[i];
    x /= total;
    for (int tries = 0; near_point(x) && tries < 8; ++tries) x[tries % x.size()] += 1e-6 * scale;
  }
  for (int it = 0; it < 20000; ++it) {
    Point num = Point::Zero(x.size());
    double den = 0;
    bool hit = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double dist = (x - p[i]).norm();
      if (dist <= tol) {
        hit = true;
        break;
      }
      num += w[i] / dist * p[i];
      den += w[i] / dist;
    }
    if (hit) {
      // Stuck on a data point that failed the optimality test: step off it.
      x[it % x.size()] += 1e-7 * scale;
      continue;
    }
    const Point next = num / den;
    const double step = (next - x).norm();
    x = next;
    if (step <= 1e-15 * scale) return x;
  }
  converged = false;
  return x;
}

}  // namespace

void validate(const TransportInstance& in) {
  auto fail = [](const char* what) { throw Error(ErrorKind::InstanceInvalid, what); };
  if (in.d < 1) fail("dimension must be positive");
  if (in.domain.dim() != in.d) fail("domain dimension differs from d");
  if (in.mu_minus.empty() || in.mu_plus.empty()) fail("both marginals need at least one atom");
  if (in.mu_minus.dim() != in.d || in.mu_plus.dim() != in.d) fail("atom dimension differs from d");
  if (!in.mu_minus.is_positive() || !in.mu_plus.is_positive()) fail("marginals must be positive");
  if (std::abs(in.mu_minus.total() - in.mu_plus.total()) > 1e-9) fail("marginals must have equal mass");
  for (const auto& a : in.mu_minus.atoms())
    for (const auto& b : in.mu_plus.atoms())
      if (sup_dist(a.x, b.x) <= kAtomTol) fail("marginals must be mutually singular");
  for (const auto& p : terminal_points(in))
    if (!in.domain.contains(p)) fail("atom outside the domain");
}

std::vector<Topology> enumerate_topologies(const TransportInstance& in, int max_steiner) {
  validate(in);
  const int sources = static_cast<int>(in.mu_minus.size()), sinks = static_cast<int>(in.mu_plus.size());
  const int m = sources + sinks;
  if (m > kMaxTerminals) throw Error(ErrorKind::TooManyTerminals, "at most 6 terminals are supported");
  if (max_steiner < 0 || max_steiner > kMaxSteiner) throw Error(ErrorKind::InvalidArgument, "max_steiner must lie in [0, 3]");
  const auto supply = terminal_supply(in);
  const double zero = 1e-12 * in.mu_minus.total();

  std::vector<Topology> out;
  std::set<Key> seen;
  for (int s = 0; s <= max_steiner; ++s) {
    const int n = m + s;
    auto consider = [&](const std::vector<std::pair<int, int>>& tree) {
      Topology t{sources, sinks, s, forced_flows(n, tree, supply, zero)};
      std::vector<int> degree(static_cast<std::size_t>(n), 0);
      for (const auto& e : t.edges) {
        ++degree[e.from];
        ++degree[e.to];
      }
      for (int v = m; v < n; ++v)
        if (degree[v] < 3) return;
      if (seen.insert(canonical_key(t.edges, m, s)).second) out.push_back(std::move(t));
    };
    if (n == 2) {
      consider({{0, 1}});
      continue;
    }
    // Odometer over Pruefer sequences; a Steiner node needs degree >= 3, i.e. two occurrences.
    std::vector<int> seq(static_cast<std::size_t>(n - 2), 0);
    std::vector<int> count(static_cast<std::size_t>(n), 0);
    for (;;) {
      std::fill(count.begin(), count.end(), 0);
      for (int x : seq) ++count[x];
      bool ok = true;
      for (int v = m; v < n && ok; ++v) ok = count[v] >= 2;
      if (ok) consider(prufer_decode(seq, n));
      std::size_t i = 0;
      while (i < seq.size() && ++seq[i] == n) seq[i++] = 0;
      if (i == seq.size()) break;
    }
  }
  return out;
}

TopologyOptimum optimize_topology(const Topology& t, const TransportInstance& in) {
  auto pos = terminal_points(in);
  const int m = t.terminals();
  TopologyOptimum best;
  if (t.steiner == 0) {
    best.energy = tree_energy(t, pos, in.cost);
    return best;
  }

  Point lo = pos[0], hi = pos[0], centroid = Point::Zero(in.d);
  for (int i = 0; i < m; ++i) {
    lo = lo.cwiseMin(pos[i]);
    hi = hi.cwiseMax(pos[i]);
    centroid += pos[i] / m;
  }
  const double scale = std::max((hi - lo).norm(), 1e-300);
  lo.array() -= 0.1 * scale;
  hi.array() += 0.1 * scale;

  // Neighbours and weights of every Steiner node.
  std::vector<std::vector<std::pair<int, double>>> nbr(static_cast<std::size_t>(t.steiner));
  for (const auto& e : t.edges) {
    const double w = in.cost(e.flow);
    if (e.from >= m) nbr[e.from - m].push_back({e.to, w});
    if (e.to >= m) nbr[e.to - m].push_back({e.from, w});
  }

  std::mt19937_64 rng(kStartSeed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  pos.resize(static_cast<std::size_t>(t.nodes()));
  best.energy = std::numeric_limits<double>::infinity();
  for (int start = 0; start < kStarts; ++start) {
    for (int k = 0; k < t.steiner; ++k) {
      if (start == 0) {
        pos[m + k] = centroid;
        pos[m + k][0] += 1e-3 * scale * k;
      } else {
        Point x(in.d);
        for (int j = 0; j < in.d; ++j) x[j] = lo[j] + unit(rng) * (hi[j] - lo[j]);
        pos[m + k] = x;
      }
    }
    bool converged = false, inner_ok = true;
    double energy = tree_energy(t, pos, in.cost);
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
      double moved = 0;
      for (int k = 0; k < t.steiner; ++k) {
        std::vector<Point> p;
        std::vector<double> w;
        for (const auto& [v, wt] : nbr[k]) {
          p.push_back(pos[v]);
          w.push_back(wt);
        }
        const Point x = fermat_weber(p, w, pos[m + k], scale, inner_ok);
        moved = std::max(moved, (x - pos[m + k]).norm());
        pos[m + k] = x;
      }
      const double next = tree_energy(t, pos, in.cost);
      converged = moved <= 1e-12 * scale || (energy - next <= 1e-15 * (1 + energy) && moved <= 1e-9 * scale);
      energy = next;
    }
    if (energy < best.energy) {
      best.energy = energy;
      best.steiner.assign(pos.begin() + m, pos.end());
      best.converged = converged && inner_ok;
    }
  }
  return best;
}

Solution solve(const TransportInstance& in, int max_steiner) {
  const auto topologies = enumerate_topologies(in, max_steiner);
  const auto terminals = terminal_points(in);
  Solution best;
  best.energy = std::numeric_limits<double>::infinity();
  best.topologies = topologies.size();
  for (const auto& t : topologies) {
    auto opt = optimize_topology(t, in);
    auto pos = terminals;
    for (auto& s : opt.steiner) {
      for (const auto& q : pos)
        if ((s - q).norm() <= kSteinerMergeTol) {
          s = q;
          break;
        }
      pos.push_back(s);
    }
    std::vector<Segment> raw;
    for (const auto& e : t.edges) raw.push_back({pos[e.from], pos[e.to], e.flow});
    auto current = canonicalize(std::move(raw));
    const double energy = h_mass(current, in.cost);
    if (energy < best.energy) {
      best.current = std::move(current);
      best.energy = energy;
      best.topology = t;
      best.steiner = std::move(opt.steiner);
      best.optimality = opt.converged ? Optimality::ExactOverEnumeration : Optimality::Heuristic;
    }
  }
  return best;
}

double oracle_small(const TransportInstance& in, double grid_step) {
  validate(in);
  if (in.d != 2) throw Error(ErrorKind::InvalidArgument, "the oracle is planar");
  const auto pts = terminal_points(in);
  const auto supply = terminal_supply(in);
  const int m = static_cast<int>(pts.size());
  if (m > 3) throw Error(ErrorKind::TooManyTerminals, "the oracle handles at most 3 terminals");
  if (!(grid_step > 0)) throw Error(ErrorKind::InvalidArgument, "grid step must be positive");
  const auto& h = in.cost;

  if (m == 2) return h(supply[0]) * (pts[0] - pts[1]).norm();

  // Steiner-free trees on three terminals are the three paths; the flow on
  // the edge (centre, leaf) equals the leaf's supply.
  double best = std::numeric_limits<double>::infinity();
  for (int c = 0; c < 3; ++c) {
    double e = 0;
    for (int leaf = 0; leaf < 3; ++leaf)
      if (leaf != c) e += h(supply[leaf]) * (pts[c] - pts[leaf]).norm();
    best = std::min(best, e);
  }
  // Star around a free centre x.
  auto star = [&](double x, double y) {
    double e = 0;
    for (int i = 0; i < 3; ++i) e += h(supply[i]) * std::hypot(x - pts[i][0], y - pts[i][1]);
    return e;
  };
  const Point lo = in.domain.lower();
  const auto n = static_cast<long long>(std::floor(in.domain.edge() / grid_step)) + 1;
  if (static_cast<double>(n) * static_cast<double>(n) > 2e7) throw Error(ErrorKind::BudgetExceeded, "oracle lattice too large");
  double bx = lo[0], by = lo[1], be = std::numeric_limits<double>::infinity();
  for (long long i = 0; i < n; ++i)
    for (long long j = 0; j < n; ++j) {
      const double x = lo[0] + i * grid_step, y = lo[1] + j * grid_step;
      const double e = star(x, y);
      if (e < be) {
        be = e;
        bx = x;
        by = y;
      }
    }
  // Alternating golden-section refinement in a window of one lattice step.
  const double g = (std::sqrt(5.0) - 1) / 2;
  auto golden = [&](auto f, double a, double b) {
    double c = b - g * (b - a), d = a + g * (b - a), fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = f(d);
      }
    }
    return (a + b) / 2;
  };
  double window = grid_step;
  for (int round = 0; round < 60; ++round) {
    bx = golden([&](double x) { return star(x, by); }, bx - window, bx + window);
    by = golden([&](double y) { return star(bx, y); }, by - window, by + window);
    window = std::max(window * 0.7, 1e-12);
  }
  be = std::min(be, star(bx, by));
  return std::min(best, be);
}

}  // namespace branchpath
