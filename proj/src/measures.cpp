#include "branchpath/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "branchpath/lp.hpp"
#include "branchpath/numeric.hpp"

namespace branchpath {
namespace {

bool lex_less(const Point& a, const Point& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace

SignedAtomicMeasure canonicalize(std::vector<Atom> raw) {
  if (!raw.empty()) {
    const auto d = raw.front().x.size();
    for (const auto& a : raw) {
      if (a.x.size() != d) throw Error(ErrorKind::DimensionMismatch, "atoms of different dimension");
      require_finite(a.x, "atom position");
      if (!std::isfinite(a.w)) throw Error(ErrorKind::NonFinite, "atom weight");
    }
  }
  std::sort(raw.begin(), raw.end(), [](const Atom& a, const Atom& b) { return lex_less(a.x, b.x); });

  struct Group {
    Point x;
    CompensatedSum w;
    double contributions = 0;
  };
  std::vector<Group> groups;
  for (auto& a : raw) {
    // Sorted by first coordinate, so candidates lie in a trailing window.
    Group* match = nullptr;
    for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
      if (a.x[0] - it->x[0] > kAtomTol) break;
      if (sup_dist(a.x, it->x) <= kAtomTol) {
        match = &*it;
        break;
      }
    }
    if (!match) {
      groups.push_back({std::move(a.x), {}, 0.0});
      match = &groups.back();
    }
    match->w.add(a.w);
    match->contributions += std::abs(a.w);
  }

  SignedAtomicMeasure out;
  for (auto& g : groups) {
    const double w = g.w.value();
    if (std::abs(w) <= 1e-12 * g.contributions || w == 0.0) continue;
    out.atoms_.push_back({std::move(g.x), w});
  }
  std::sort(out.atoms_.begin(), out.atoms_.end(), [](const Atom& a, const Atom& b) { return lex_less(a.x, b.x); });
  return out;
}

double SignedAtomicMeasure::total() const {
  CompensatedSum s;
  for (const auto& a : atoms_) s.add(a.w);
  return s.value();
}

double SignedAtomicMeasure::total_variation() const {
  CompensatedSum s;
  for (const auto& a : atoms_) s.add(std::abs(a.w));
  return s.value();
}

double SignedAtomicMeasure::max_abs_weight() const {
  double m = 0;
  for (const auto& a : atoms_) m = std::max(m, std::abs(a.w));
  return m;
}

bool SignedAtomicMeasure::is_positive() const {
  return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.w > 0; });
}

std::vector<Point> SignedAtomicMeasure::points() const {
  std::vector<Point> out;
  out.reserve(atoms_.size());
  for (const auto& a : atoms_) out.push_back(a.x);
  return out;
}

double SignedAtomicMeasure::weight_at(const Point& p) const {
  for (const auto& a : atoms_)
    if (a.x.size() == p.size() && sup_dist(a.x, p) <= kAtomTol) return a.w;
  return 0.0;
}

SignedAtomicMeasure operator+(const SignedAtomicMeasure& a, const SignedAtomicMeasure& b) {
  std::vector<Atom> raw(a.atoms());
  raw.insert(raw.end(), b.atoms().begin(), b.atoms().end());
  return canonicalize(std::move(raw));
}

SignedAtomicMeasure operator-(const SignedAtomicMeasure& a, const SignedAtomicMeasure& b) {
  std::vector<Atom> raw(a.atoms());
  for (const auto& at : b.atoms()) raw.push_back({at.x, -at.w});
  return canonicalize(std::move(raw));
}

SignedAtomicMeasure operator*(double t, const SignedAtomicMeasure& a) {
  std::vector<Atom> raw(a.atoms());
  for (auto& at : raw) at.w *= t;
  return canonicalize(std::move(raw));
}

double atomwise_distance(const SignedAtomicMeasure& a, const SignedAtomicMeasure& b) {
  return (a - b).max_abs_weight();
}

CostSpec CostSpec::power(double alpha) {
  if (!(alpha > 0 && alpha <= 1)) throw Error(ErrorKind::InvalidArgument, "power cost needs alpha in (0, 1]");
  CostSpec c;
  c.kind_ = Kind::Power;
  c.alpha_ = alpha;
  return c;
}

CostSpec CostSpec::size() {
  CostSpec c;
  c.kind_ = Kind::Size;
  c.flags_.continuous_at_zero = false;
  return c;
}

CostSpec CostSpec::general(std::function<double(double)> h, CostFlags flags, std::uint64_t seed) {
  if (!h) throw Error(ErrorKind::InvalidArgument, "general cost needs an evaluation rule");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> expo(-6.0, 3.0);
  auto sample = [&] { return std::pow(10.0, expo(rng)); };
  auto close_le = [](double a, double b) { return a <= b + 1e-12 * (1.0 + std::abs(b)); };

  if (flags.zero_at_zero && h(0.0) != 0.0) throw Error(ErrorKind::CostFlagViolation, "H(0) != 0");
  for (int i = 0; i < 1000; ++i) {
    const double a = sample(), b = sample();
    const double ha = h(a), hb = h(b);
    if (!(ha >= 0) || !(hb >= 0) || !std::isfinite(ha)) throw Error(ErrorKind::CostFlagViolation, "H negative or not finite");
    if (flags.even && std::abs(h(-a) - ha) > 1e-12 * (1.0 + ha)) throw Error(ErrorKind::CostFlagViolation, "H not even");
    if (flags.subadditive && !close_le(h(a + b), ha + hb)) throw Error(ErrorKind::CostFlagViolation, "H not subadditive");
    if (flags.nondecreasing && !close_le(a < b ? ha : hb, a < b ? hb : ha))
      throw Error(ErrorKind::CostFlagViolation, "H not nondecreasing");
  }
  if (flags.continuous_at_zero) {
    const double ref = h(1.0);
    if (h(1e-12) > 1e-3 * (ref > 0 ? ref : 1.0)) throw Error(ErrorKind::CostFlagViolation, "H not continuous at 0");
  }
  CostSpec c;
  c.kind_ = Kind::General;
  c.flags_ = flags;
  c.h_ = std::move(h);
  return c;
}

double CostSpec::operator()(double theta) const {
  const double a = std::abs(theta);
  switch (kind_) {
    case Kind::Power:
      if (a == 0.0) return 0.0;
      return alpha_ == 1.0 ? a : std::pow(a, alpha_);
    case Kind::Size:
      return a == 0.0 ? 0.0 : 1.0;
    case Kind::General:
      return h_(flags_.even ? a : theta);
  }
  return 0.0;
}

double h_mass_measure(const SignedAtomicMeasure& mu, const CostSpec& cost) {
  std::vector<double> terms;
  terms.reserve(mu.size());
  for (const auto& a : mu.atoms()) terms.push_back(cost(a.w));
  return pairwise_sum(terms);
}

std::pair<SignedAtomicMeasure, SignedAtomicMeasure> jordan(const SignedAtomicMeasure& mu) {
  std::vector<Atom> pos, neg;
  for (const auto& a : mu.atoms()) {
    if (a.w > 0)
      pos.push_back(a);
    else
      neg.push_back({a.x, -a.w});
  }
  return {canonicalize(std::move(pos)), canonicalize(std::move(neg))};
}

SignedAtomicMeasure restrict_measure(const SignedAtomicMeasure& mu, const Region& region) {
  std::vector<Atom> kept;
  for (const auto& a : mu.atoms()) {
    switch (region.classify(a.x)) {
      case Location::Inside:
        kept.push_back(a);
        break;
      case Location::Boundary:
        throw Error(ErrorKind::AtomOnBoundary, "atom lies on the region boundary; shift the grid first");
      case Location::Outside:
        break;
    }
  }
  return canonicalize(std::move(kept));
}

SignedAtomicMeasure restrict_to_sup_ball(const SignedAtomicMeasure& mu, const Point& x, double r, double tol) {
  std::vector<Atom> kept;
  for (const auto& a : mu.atoms()) {
    const double dist = sup_dist(a.x, x);
    if (std::abs(dist - r) <= tol) throw Error(ErrorKind::NonGenericRadius, "atom on the sphere d_x = r");
    if (dist < r) kept.push_back(a);
  }
  return canonicalize(std::move(kept));
}

double mass_in(const SignedAtomicMeasure& mu, const Cube& q) {
  CompensatedSum s;
  for (const auto& a : mu.atoms())
    if (q.contains(a.x)) s.add(a.w);
  return s.value();
}

double w1_distance(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu) {
  if (!mu.is_positive() || !nu.is_positive()) throw Error(ErrorKind::InvalidArgument, "w1_distance needs positive measures");
  if (std::abs(mu.total() - nu.total()) > 1e-9) throw Error(ErrorKind::MassMismatch, "w1_distance needs equal masses");
  if (mu.empty() || nu.empty()) return 0.0;
  if (mu.dim() != nu.dim()) throw Error(ErrorKind::DimensionMismatch, "w1_distance");

  const auto n = static_cast<Eigen::Index>(mu.size()), m = static_cast<Eigen::Index>(nu.size());
  // Plan variables pi_ij >= 0 with row sums mu_i and column sums nu_j. The last
  // column constraint is implied by the others and dropped.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + m - 1, n * m);
  Eigen::VectorXd b(n + m - 1), c(n * m);
  for (Eigen::Index i = 0; i < n; ++i) {
    b(i) = mu.atoms()[i].w;
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index v = i * m + j;
      A(i, v) = 1.0;
      if (j < m - 1) A(n + j, v) = 1.0;
      c(v) = (mu.atoms()[i].x - nu.atoms()[j].x).norm();
    }
  }
  for (Eigen::Index j = 0; j + 1 < m; ++j) b(n + j) = nu.atoms()[j].w;
  // Rescale the small mass mismatch allowed by the precondition onto mu.
  b.head(n) *= nu.total() / mu.total();
  return lp::minimize(A, b, c).value;
}

}  // namespace branchpath
