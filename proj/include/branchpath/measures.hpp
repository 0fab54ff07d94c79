#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "branchpath/geometry.hpp"

namespace branchpath {

/// Coincident-atom tolerance (absolute, sup norm).
inline constexpr double kAtomTol = 1e-12;

struct Atom {
  Point x;
  double w;
};

/// Finite signed atomic measure. Instances are always canonical: atoms are
/// pairwise distinct, weights nonzero, sorted lexicographically by point.
class SignedAtomicMeasure {
 public:
  SignedAtomicMeasure() = default;

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  /// 0 for the empty measure.
  int dim() const { return atoms_.empty() ? 0 : static_cast<int>(atoms_.front().x.size()); }

  /// Signed total sum of weights.
  double total() const;
  double total_variation() const;
  double max_abs_weight() const;
  bool is_positive() const;
  std::vector<Point> points() const;

  /// Weight at p (0 if no atom within kAtomTol).
  double weight_at(const Point& p) const;

  friend SignedAtomicMeasure canonicalize(std::vector<Atom> raw);

 private:
  std::vector<Atom> atoms_;
};

/// Merges coincident points and drops weights that cancel.
SignedAtomicMeasure canonicalize(std::vector<Atom> raw);

SignedAtomicMeasure operator+(const SignedAtomicMeasure& a, const SignedAtomicMeasure& b);
SignedAtomicMeasure operator-(const SignedAtomicMeasure& a, const SignedAtomicMeasure& b);
SignedAtomicMeasure operator*(double t, const SignedAtomicMeasure& a);
inline SignedAtomicMeasure dirac(const Point& x, double w = 1.0) { return canonicalize({{x, w}}); }

/// max |w| of a - b; the natural atom-by-atom distance between canonical measures.
double atomwise_distance(const SignedAtomicMeasure& a, const SignedAtomicMeasure& b);

struct CostFlags {
  bool even = true;
  bool subadditive = true;
  bool nondecreasing = true;
  bool zero_at_zero = true;
  bool continuous_at_zero = true;
};

/// The integrand H of an H-mass. Power(alpha) is theta -> |theta|^alpha, Size
/// is 1 off zero, General wraps a caller rule whose asserted flags are
/// spot-checked on random samples at construction.
class CostSpec {
 public:
  enum class Kind { Power, Size, General };

  static CostSpec power(double alpha);
  static CostSpec size();
  static CostSpec general(std::function<double(double)> h, CostFlags flags, std::uint64_t seed = 1);

  double operator()(double theta) const;

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  const CostFlags& flags() const { return flags_; }

 private:
  CostSpec() = default;

  Kind kind_ = Kind::Power;
  double alpha_ = 1.0;
  CostFlags flags_{};
  std::function<double(double)> h_;
};

/// Sum of H(|w_i|) over the atoms.
double h_mass_measure(const SignedAtomicMeasure& mu, const CostSpec& cost);

/// (positive part, negative part), both nonnegative.
std::pair<SignedAtomicMeasure, SignedAtomicMeasure> jordan(const SignedAtomicMeasure& mu);

/// Keeps the atoms inside the region; an atom on the region boundary is an
/// AtomOnBoundary error.
SignedAtomicMeasure restrict_measure(const SignedAtomicMeasure& mu, const Region& region);

/// Atoms with d_x < r; atoms within tol of the sphere are a NonGenericRadius error.
SignedAtomicMeasure restrict_to_sup_ball(const SignedAtomicMeasure& mu, const Point& x, double r, double tol);

/// Mass of the atoms inside a closed cube (no boundary check).
double mass_in(const SignedAtomicMeasure& mu, const Cube& q);

/// Kantorovich 1-distance between positive measures of equal mass, solved as
/// a transportation linear program.
double w1_distance(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu);

}  // namespace branchpath
