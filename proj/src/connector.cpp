#include "branchpath/connector.hpp"

#include <cmath>
#include <map>

#include "branchpath/numeric.hpp"

namespace branchpath {
namespace {

constexpr double kDropImbalance = 1e-12;

std::int64_t cell_of(const Grid& g, const Point& x) {
  if (!g.root().contains(x, kSkeletonTol * g.root().edge())) throw Error(ErrorKind::InvalidArgument, "atom outside the cube");
  if (g.on_skeleton(x)) throw Error(ErrorKind::AtomOnSkeleton, "atom on a cell face; shift the grid first");
  return *g.locate(x);
}

}  // namespace

ConnectionResult connect(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu, const Cube& q, int k,
                         const CostSpec& cost) {
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "grid level must be >= 0");
  if (!mu.is_positive() || !nu.is_positive()) throw Error(ErrorKind::InvalidArgument, "connect needs positive measures");
  if (std::abs(mu.total() - nu.total()) > 1e-9) throw Error(ErrorKind::MassMismatch, "connect needs equal masses");
  for (const auto& a : mu.atoms()) q.check_dim(a.x);
  for (const auto& a : nu.atoms()) q.check_dim(a.x);

  const Grid grid(q, k);
  // Signed atoms of mu - nu and the cell imbalance nu(Q_l) - mu(Q_l), grouped by cell.
  struct Cell {
    std::vector<Atom> atoms;
    CompensatedSum imbalance;
  };
  std::map<std::int64_t, Cell> cells;
  for (const auto& a : mu.atoms()) {
    auto& c = cells[cell_of(grid, a.x)];
    c.atoms.push_back(a);
    c.imbalance.add(-a.w);
  }
  for (const auto& a : nu.atoms()) {
    auto& c = cells[cell_of(grid, a.x)];
    c.atoms.push_back({a.x, -a.w});
    c.imbalance.add(a.w);
  }

  std::vector<Segment> raw;
  std::vector<Atom> sigma;
  for (auto& [index, c] : cells) {
    const Point center = grid.cell(index).center();
    const auto local = cone(center, canonicalize(std::move(c.atoms)));
    raw.insert(raw.end(), local.edges().begin(), local.edges().end());
    const double theta = c.imbalance.value();
    if (std::abs(theta) >= kDropImbalance) sigma.push_back({center, theta});
  }
  ConnectionResult out;
  out.k = k;
  out.sigma = canonicalize(std::move(sigma));
  const auto spokes = cone(q.center(), out.sigma);
  for (const auto& s : spokes.edges()) raw.push_back({s.b, s.a, s.theta});
  out.current = canonicalize(std::move(raw));
  const double l = q.diameter();
  out.bound = std::ldexp(l, -k) * (h_mass_measure(mu, cost) + h_mass_measure(nu, cost)) + l * h_mass_measure(out.sigma, cost);
  return out;
}

std::vector<double> dyadic_connection_cost(const SignedAtomicMeasure& mu, const Cube& q, int kmax, const CostSpec& cost) {
  if (kmax < 0 || kmax > 30) throw Error(ErrorKind::InvalidArgument, "kmax must lie in [0, 30]");
  if (!mu.is_positive()) throw Error(ErrorKind::InvalidArgument, "dyadic chain needs a positive measure");
  if (std::abs(mu.total() - 1.0) > 1e-9) throw Error(ErrorKind::InvalidArgument, "dyadic chain needs a probability measure");
  std::vector<double> costs(static_cast<std::size_t>(kmax), 0.0);
  if (mu.empty() || kmax == 0) return costs;

  const int d = q.dim();
  const Grid fine(q, kmax);
  std::vector<std::vector<std::int64_t>> index;
  for (const auto& a : mu.atoms()) {
    q.check_dim(a.x);
    const auto i = fine.locate(a.x);
    if (!i) throw Error(ErrorKind::InvalidArgument, "atom outside the cube");
    index.push_back(fine.multi_index(*i));
  }

  struct Lump {
    CompensatedSum mass;
    std::vector<CompensatedSum> moment;
    Point barycenter() const {
      Point b(moment.size());
      for (std::size_t j = 0; j < moment.size(); ++j) b[j] = moment[j].value() / mass.value();
      return b;
    }
  };
  auto lumps_at = [&](int level) {
    std::map<std::vector<std::int64_t>, Lump> lumps;
    for (std::size_t n = 0; n < index.size(); ++n) {
      std::vector<std::int64_t> key(index[n]);
      for (auto& m : key) m >>= (kmax - level);
      auto& l = lumps[key];
      if (l.moment.empty()) l.moment.resize(d);
      const auto& a = mu.atoms()[n];
      l.mass.add(a.w);
      for (int j = 0; j < d; ++j) l.moment[j].add(a.w * a.x[j]);
    }
    return lumps;
  };

  auto parent = lumps_at(0);
  for (int level = 0; level < kmax; ++level) {
    auto child = lumps_at(level + 1);
    std::vector<double> terms;
    for (const auto& [key, c] : child) {
      std::vector<std::int64_t> up(key);
      for (auto& m : up) m >>= 1;
      const double m = c.mass.value();
      terms.push_back(cost(m) * (c.barycenter() - parent.at(up).barycenter()).norm());
    }
    costs[level] = pairwise_sum(terms);
    parent = std::move(child);
  }
  return costs;
}

}  // namespace branchpath
