#include "branchpath/flatnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include "branchpath/numeric.hpp"

namespace branchpath {

TriComplex::TriComplex(const Cube& domain, double h) : domain_(domain), h_(h) {
  if (domain.dim() != 2) throw Error(ErrorKind::InvalidArgument, "flat norm complexes are planar");
  if (!(h > 0) || !std::isfinite(h)) throw Error(ErrorKind::InvalidArgument, "mesh step must be positive");
  const double cells = domain.edge() / h;
  n_ = static_cast<int>(std::lround(cells));
  if (n_ < 1 || std::abs(cells - n_) > 1e-9 * cells) throw Error(ErrorKind::InvalidArgument, "mesh step must divide the domain edge");
  if (n_ > 4096) throw Error(ErrorKind::BudgetExceeded, "mesh too fine");

  auto vid = [&](int i, int j) { return static_cast<Eigen::Index>(j) * (n_ + 1) + i; };
  edges_.resize(static_cast<std::size_t>(3 * n_ * n_ + 2 * n_));
  for (int j = 0; j <= n_; ++j)
    for (int i = 0; i < n_; ++i) edges_[h_edge(i, j)] = {vid(i, j), vid(i + 1, j)};
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i <= n_; ++i) edges_[v_edge(i, j)] = {vid(i, j), vid(i, j + 1)};
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i) edges_[d_edge(i, j)] = {vid(i, j), vid(i + 1, j + 1)};

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(3 * triangle_count()));
  for (Eigen::Index t = 0; t < triangle_count(); ++t)
    for (const auto& [e, sign] : triangle(t)) entries.emplace_back(e, t, sign);
  boundary_.resize(edge_count(), triangle_count());
  boundary_.setFromTriplets(entries.begin(), entries.end());
}

Eigen::Index TriComplex::h_edge(int i, int j) const { return static_cast<Eigen::Index>(j) * n_ + i; }
Eigen::Index TriComplex::v_edge(int i, int j) const {
  return static_cast<Eigen::Index>(n_) * (n_ + 1) + static_cast<Eigen::Index>(j) * (n_ + 1) + i;
}
Eigen::Index TriComplex::d_edge(int i, int j) const {
  return 2 * static_cast<Eigen::Index>(n_) * (n_ + 1) + static_cast<Eigen::Index>(j) * n_ + i;
}

Point TriComplex::vertex(int i, int j) const {
  const Point lo = domain_.lower();
  return Point{{lo[0] + i * h_, lo[1] + j * h_}};
}

double TriComplex::edge_length(Eigen::Index e) const { return e >= 2 * static_cast<Eigen::Index>(n_) * (n_ + 1) ? h_ * std::sqrt(2.0) : h_; }

std::pair<Eigen::Index, int> TriComplex::edge_between(int ui, int uj, int vi, int vj) const {
  int di = vi - ui, dj = vj - uj, sign = 1;
  if (di < 0 || (di == 0 && dj < 0)) {
    std::swap(ui, vi);
    std::swap(uj, vj);
    di = -di;
    dj = -dj;
    sign = -1;
  }
  if (ui < 0 || uj < 0 || vi > n_ || vj > n_) return {-1, 0};
  if (di == 1 && dj == 0) return {h_edge(ui, uj), sign};
  if (di == 0 && dj == 1) return {v_edge(ui, uj), sign};
  if (di == 1 && dj == 1) return {d_edge(ui, uj), sign};
  return {-1, 0};
}

std::array<std::pair<Eigen::Index, int>, 3> TriComplex::triangle(Eigen::Index t) const {
  const auto square = t / 2;
  const int i = static_cast<int>(square % n_), j = static_cast<int>(square / n_);
  if (t % 2 == 0) return {{{h_edge(i, j), 1}, {v_edge(i + 1, j), 1}, {d_edge(i, j), -1}}};
  return {{{d_edge(i, j), 1}, {h_edge(i, j + 1), -1}, {v_edge(i, j), -1}}};
}

std::optional<std::pair<int, int>> TriComplex::lattice_point(const Point& p) const {
  if (p.size() != 2) return std::nullopt;
  const Point lo = domain_.lower();
  const double x = (p[0] - lo[0]) / h_, y = (p[1] - lo[1]) / h_;
  const double i = std::round(x), j = std::round(y);
  if (std::abs(x - i) > 1e-6 || std::abs(y - j) > 1e-6) return std::nullopt;
  if (i < 0 || j < 0 || i > n_ || j > n_) return std::nullopt;
  return std::pair{static_cast<int>(i), static_cast<int>(j)};
}

namespace {

// Lattice steps between two vertices when moves are +-x, +-y and +-(1,1).
int lattice_steps(int di, int dj) {
  if ((di >= 0) == (dj >= 0)) return std::max(std::abs(di), std::abs(dj));
  return std::abs(di) + std::abs(dj);
}

}  // namespace

Chain rasterize(const PolyhedralCurrent& t, const TriComplex& c) {
  Chain chain = Chain::Zero(c.edge_count());
  static constexpr std::array<std::pair<int, int>, 6> kMoves{{{1, 1}, {-1, -1}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  for (const auto& e : t.edges()) {
    const auto a = c.lattice_point(e.a), b = c.lattice_point(e.b);
    if (!a || !b) throw Error(ErrorKind::SnapError, "segment endpoint is not a lattice vertex; snap the current first");
    auto [i, j] = *a;
    const auto [ti, tj] = *b;
    // Greedy walk that always shortens the lattice distance and stays closest to the segment.
    const double lx = ti - i, ly = tj - j, ll = std::hypot(lx, ly);
    const int i0 = i, j0 = j;
    while (i != ti || j != tj) {
      const int remaining = lattice_steps(ti - i, tj - j);
      int best = -1;
      double best_off = std::numeric_limits<double>::infinity();
      for (int m = 0; m < static_cast<int>(kMoves.size()); ++m) {
        const int ni = i + kMoves[m].first, nj = j + kMoves[m].second;
        if (lattice_steps(ti - ni, tj - nj) != remaining - 1) continue;
        const double off = std::abs(lx * (nj - j0) - ly * (ni - i0)) / ll;
        if (off < best_off - 1e-12) {
          best_off = off;
          best = m;
        }
      }
      const int ni = i + kMoves[best].first, nj = j + kMoves[best].second;
      const auto [edge, sign] = c.edge_between(i, j, ni, nj);
      chain(edge) += sign * e.theta;
      i = ni;
      j = nj;
    }
  }
  return chain;
}

PolyhedralCurrent snap_to_lattice(const PolyhedralCurrent& t, const TriComplex& c) {
  const Point lo = c.domain().lower();
  const double h = c.step();
  const int n = c.cells_per_axis();
  auto snap = [&](const Point& p) {
    Point q(2);
    for (int k = 0; k < 2; ++k) {
      const double s = std::round((p[k] - lo[k]) / h);
      if (s < 0 || s > n) throw Error(ErrorKind::SnapError, "vertex outside the complex");
      q[k] = lo[k] + s * h;
    }
    return q;
  };
  std::vector<Segment> raw;
  for (const auto& e : t.edges()) {
    if (e.a.size() != 2) throw Error(ErrorKind::DimensionMismatch, "flat norm complexes are planar");
    raw.push_back({snap(e.a), snap(e.b), e.theta});
  }
  return canonicalize(std::move(raw));
}

double chain_mass(const Chain& chain, const TriComplex& c) {
  std::vector<double> terms;
  for (Eigen::Index e = 0; e < chain.size(); ++e)
    if (chain(e) != 0) terms.push_back(std::abs(chain(e)) * c.edge_length(e));
  return pairwise_sum(terms);
}

SignedAtomicMeasure chain_boundary(const Chain& chain, const TriComplex& c) {
  std::vector<Atom> raw;
  for (Eigen::Index e = 0; e < chain.size(); ++e) {
    if (chain(e) == 0) continue;
    const auto [u, v] = c.edge(e);
    raw.push_back({c.vertex(v), chain(e)});
    raw.push_back({c.vertex(u), -chain(e)});
  }
  return canonicalize(std::move(raw));
}

namespace {

// Min-cost flow with real capacities: successive shortest paths with Dijkstra on reduced costs.
class FlowNetwork {
 public:
  explicit FlowNetwork(int nodes) : out_(static_cast<std::size_t>(nodes)), potential_(static_cast<std::size_t>(nodes), 0.0) {}

  int add_arc(int u, int v, double cap, double cost) {
    const int a = static_cast<int>(to_.size());
    to_.push_back(v);
    cap_.push_back(cap);
    cost_.push_back(cost);
    out_[u].push_back(a);
    to_.push_back(u);
    cap_.push_back(0.0);
    cost_.push_back(-cost);
    out_[v].push_back(a + 1);
    return a;
  }

  int nodes() const { return static_cast<int>(out_.size()); }
  int tail(int a) const { return to_[a ^ 1]; }
  double cap(int a) const { return cap_[a]; }
  double cost(int a) const { return cost_[a]; }
  void push(int a, double f) {
    cap_[a] -= f;
    cap_[a ^ 1] += f;
  }
  double potential(int v) const { return potential_[v]; }

  // Primal-dual min-cost flow from s to t: every phase runs Dijkstra on
  // reduced costs, then a blocking max flow over the arcs of zero reduced
  // cost. All residual arcs must have non-negative reduced cost on entry.
  void min_cost_flow(int s, int t, double eps, double cost_tol) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(out_.size());
    std::vector<char> done(out_.size());
    using Item = std::pair<double, int>;
    for (;;) {
      std::fill(dist.begin(), dist.end(), inf);
      std::fill(done.begin(), done.end(), 0);
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      dist[s] = 0;
      heap.push({0.0, s});
      while (!heap.empty()) {
        const auto [du, u] = heap.top();
        heap.pop();
        if (done[u]) continue;
        done[u] = 1;
        if (u == t) break;
        for (int a : out_[u]) {
          if (cap_[a] <= eps) continue;
          const int v = to_[a];
          const double reduced = std::max(0.0, cost_[a] + potential_[u] - potential_[v]);
          if (du + reduced < dist[v]) {
            dist[v] = du + reduced;
            heap.push({dist[v], v});
          }
        }
      }
      if (!done[t]) return;
      for (std::size_t v = 0; v < out_.size(); ++v) potential_[v] += done[v] ? dist[v] : dist[t];
      if (blocking_flow(s, t, eps, cost_tol) <= 0) return;
    }
  }

 private:
  bool admissible(int u, int a, double eps, double cost_tol) const {
    return cap_[a] > eps && cost_[a] + potential_[u] - potential_[to_[a]] <= cost_tol;
  }

  // Dinic on the admissible subgraph; returns the amount sent.
  double blocking_flow(int s, int t, double eps, double cost_tol) {
    double total = 0;
    std::vector<int> level(out_.size());
    std::vector<std::size_t> next(out_.size());
    for (;;) {
      std::fill(level.begin(), level.end(), -1);
      std::vector<int> queue{s};
      level[s] = 0;
      for (std::size_t q = 0; q < queue.size(); ++q) {
        const int u = queue[q];
        for (int a : out_[u]) {
          if (level[to_[a]] >= 0 || !admissible(u, a, eps, cost_tol)) continue;
          level[to_[a]] = level[u] + 1;
          queue.push_back(to_[a]);
        }
      }
      if (level[t] < 0) return total;
      std::fill(next.begin(), next.end(), 0);
      // Iterative DFS with current-arc pointers.
      std::vector<int> path;
      int u = s;
      for (;;) {
        if (u == t) {
          double f = std::numeric_limits<double>::infinity();
          for (int a : path) f = std::min(f, cap_[a]);
          for (int a : path) push(a, f);
          total += f;
          path.clear();
          u = s;
          continue;
        }
        bool advanced = false;
        for (; next[u] < out_[u].size(); ++next[u]) {
          const int a = out_[u][next[u]];
          if (level[to_[a]] == level[u] + 1 && admissible(u, a, eps, cost_tol)) {
            path.push_back(a);
            u = to_[a];
            advanced = true;
            break;
          }
        }
        if (advanced) continue;
        if (u == s) break;
        level[u] = -1;  // dead end
        u = tail(path.back());
        path.pop_back();
      }
    }
  }

  std::vector<int> to_;
  std::vector<double> cap_, cost_;
  std::vector<std::vector<int>> out_;
  std::vector<double> potential_;
};

}  // namespace

FlatNormResult flat_norm(const Chain& chain, const TriComplex& c) {
  if (chain.size() != c.edge_count()) throw Error(ErrorKind::DimensionMismatch, "chain does not live on this complex");
  if (!chain.allFinite()) throw Error(ErrorKind::NonFinite, "chain coefficients");
  const auto nt = static_cast<int>(c.triangle_count());
  const int ext = nt, source = nt + 1, sink = nt + 2;
  FlowNetwork net(nt + 3);

  // Faces to the left and right of every edge (ext outside the domain).
  std::vector<int> left(static_cast<std::size_t>(c.edge_count()), ext), right(left);
  for (int t = 0; t < nt; ++t)
    for (const auto& [e, sign] : c.triangle(t)) (sign > 0 ? left : right)[e] = t;

  // Dual: maximise sum chain_e y_e with |y_e| <= len_e and |(B^T y)_t| <= area_t.
  // y_e is a flow from right(e) to left(e); triangle t drains into ext.
  std::vector<double> balance(static_cast<std::size_t>(nt + 1), 0.0);
  double scale = c.triangle_area();
  for (Eigen::Index e = 0; e < c.edge_count(); ++e) {
    const double w = c.edge_length(e), k = chain(e);
    scale = std::max(scale, w);
    const int fwd = net.add_arc(right[e], left[e], w, -k);
    const int bwd = net.add_arc(left[e], right[e], w, k);
    for (int a : {fwd, bwd}) {
      if (net.cost(a) >= 0) continue;
      // Saturate negative arcs so every residual cost is non-negative.
      net.push(a, w);
      balance[net.tail(a ^ 1)] += w;
      balance[net.tail(a)] -= w;
    }
  }
  const double area = c.triangle_area();
  for (int t = 0; t < nt; ++t) {
    net.add_arc(t, ext, area, 0.0);
    net.add_arc(ext, t, area, 0.0);
  }
  for (int v = 0; v <= nt; ++v) {
    if (balance[v] > 0) net.add_arc(source, v, balance[v], 0.0);
    if (balance[v] < 0) net.add_arc(v, sink, -balance[v], 0.0);
  }
  double cost_scale = 1.0;
  for (Eigen::Index e = 0; e < chain.size(); ++e) cost_scale = std::max(cost_scale, std::abs(chain(e)));
  net.min_cost_flow(source, sink, 1e-15 * scale, 1e-12 * cost_scale);

  FlatNormResult out;
  out.s.resize(nt);
  for (int t = 0; t < nt; ++t) out.s(t) = net.potential(ext) - net.potential(t);
  out.r = chain - c.boundary_matrix() * out.s;
  out.value = chain_mass(out.r, c) + area * out.s.cwiseAbs().sum();

  // Dual objective from the edge flows.
  CompensatedSum dual;
  for (Eigen::Index e = 0; e < c.edge_count(); ++e) {
    const int fwd = static_cast<int>(4 * e), bwd = fwd + 2;
    const double w = c.edge_length(e);
    const double y = (w - net.cap(fwd)) - (w - net.cap(bwd));
    dual.add(chain(e) * y);
  }
  out.dual_value = dual.value();
  return out;
}

}  // namespace branchpath
