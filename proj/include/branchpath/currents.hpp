#pragma once

#include <span>
#include <vector>

#include "branchpath/measures.hpp"

namespace branchpath {

/// Edge-length floor; shorter segments are discarded as degenerate.
inline constexpr double kMinEdgeLength = 1e-12;
/// Distance at which an endpoint of one edge is considered to lie on another.
inline constexpr double kOnSegmentTol = 1e-11;
/// Slack used by slicing to decide whether a radius is generic.
inline constexpr double kGenericRadiusTol = 1e-9;

/// Oriented segment a -> b carrying multiplicity theta.
struct Segment {
  Point a;
  Point b;
  double theta;

  double length() const { return (b - a).norm(); }
};

/// Polyhedral 1-current. Canonical form: vertices closer than kAtomTol are
/// identified, every endpoint lying inside another edge splits that edge,
/// collinear overlaps are merged by summing multiplicities, every edge is
/// oriented so that theta > 0, and edges are sorted.
class PolyhedralCurrent {
 public:
  PolyhedralCurrent() = default;

  const std::vector<Segment>& edges() const { return edges_; }
  std::size_t size() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }
  int dim() const { return edges_.empty() ? 0 : static_cast<int>(edges_.front().a.size()); }

  friend PolyhedralCurrent canonicalize(std::vector<Segment> raw);

 private:
  std::vector<Segment> edges_;
};

PolyhedralCurrent canonicalize(std::vector<Segment> raw);

PolyhedralCurrent operator+(const PolyhedralCurrent& s, const PolyhedralCurrent& t);
PolyhedralCurrent operator-(const PolyhedralCurrent& s, const PolyhedralCurrent& t);
PolyhedralCurrent operator*(double c, const PolyhedralCurrent& t);

/// Largest |theta| of s - t; zero iff the currents agree canonically.
double edgewise_distance(const PolyhedralCurrent& s, const PolyhedralCurrent& t);

/// Polyline current sum_i theta [v_i, v_{i+1}].
PolyhedralCurrent polyline(std::span<const Point> vertices, double theta = 1.0);

double mass(const PolyhedralCurrent& t);
double h_mass(const PolyhedralCurrent& t, const CostSpec& cost);
SignedAtomicMeasure boundary(const PolyhedralCurrent& t);

/// T restricted to the (closed) region, or to its complement. Edges are split
/// where they cross cube faces and each piece is assigned by its midpoint.
PolyhedralCurrent restrict_current(const PolyhedralCurrent& t, const Region& region, bool complement = false);

/// Segments x -> x_i with multiplicity theta_i; atoms at x contribute nothing.
PolyhedralCurrent cone(const Point& x, const SignedAtomicMeasure& mu);

struct SliceAtom {
  Point x;
  int sign;  // +1 where the edge leaves {d_x < r}, -1 where it enters
  double magnitude;
};

/// 0-dimensional slice <T, d_x, r>.
struct ZeroSlice {
  std::vector<SliceAtom> atoms;

  SignedAtomicMeasure measure() const;
};

bool is_generic_radius(const PolyhedralCurrent& t, const Point& x, double r);

/// Slice by the sup-norm sphere {d_x = r}. Throws NonGenericRadius when an
/// endpoint lies on the sphere or an edge touches it without crossing.
ZeroSlice slice(const PolyhedralCurrent& t, const Point& x, double r);

struct SliceRadius {
  double radius;
  /// Indices of currents whose slices exceed the Chebyshev bound at radius.
  std::vector<std::size_t> violators;
};

/// Radius r in (r0, eta0 r0), generic for every current, at which the slices
/// by d_x and d_y satisfy H(slice_x) + H(slice_y) <= 4 H(T) / ((eta0 - 1) r0)
/// for as many currents as possible. 1000 uniformly spaced candidates are
/// scanned; ties go to the smallest radius.
SliceRadius good_slice_radius(std::span<const PolyhedralCurrent> ts, const Point& x, const Point& y, double r0,
                              double eta0, const CostSpec& cost);

/// Common subdivision of several currents: every row is one elementary
/// segment, every column the signed multiplicity of one input current along
/// that segment's orientation.
struct Arrangement {
  std::vector<std::pair<Point, Point>> segments;
  Eigen::MatrixXd theta;

  Eigen::VectorXd lengths() const;
};

Arrangement common_refinement(std::span<const PolyhedralCurrent> currents);

}  // namespace branchpath
