#pragma once

// Axis-aligned cubes, dyadic grids, unions of cubes and the sup-norm
// distance. Header-only; everything is templated on the scalar type and
// instantiated for double by the rest of the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "branchpath/error.hpp"

namespace branchpath {

template <typename Scalar>
using PointT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Point = PointT<double>;

/// Relative tolerance used for skeleton and face membership.
inline constexpr double kSkeletonTol = 1e-12;

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& p, const char* what) {
  if (!p.allFinite()) throw Error(ErrorKind::NonFinite, what);
}

/// d_x(z) = |z - x|_inf
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar sup_dist(const Eigen::MatrixBase<DerivedA>& z,
                                   const Eigen::MatrixBase<DerivedB>& x) {
  if (z.size() != x.size()) throw Error(ErrorKind::DimensionMismatch, "sup_dist");
  if (z.size() == 0) return typename DerivedA::Scalar(0);
  return (z - x).cwiseAbs().maxCoeff();
}

template <typename Scalar>
class CubeT {
 public:
  CubeT(PointT<Scalar> center, Scalar edge) : center_(std::move(center)), edge_(edge) {
    if (center_.size() < 1) throw Error(ErrorKind::InvalidArgument, "cube dimension must be >= 1");
    require_finite(center_, "cube center");
    if (!(edge_ > 0) || !std::isfinite(edge_)) throw Error(ErrorKind::InvalidArgument, "cube edge must be positive");
  }

  /// The cube [lo, lo + edge]^d.
  static CubeT from_lower(const PointT<Scalar>& lo, Scalar edge) {
    return CubeT(lo + PointT<Scalar>::Constant(lo.size(), edge / 2), edge);
  }

  const PointT<Scalar>& center() const { return center_; }
  Scalar edge() const { return edge_; }
  int dim() const { return static_cast<int>(center_.size()); }
  PointT<Scalar> lower() const { return center_.array() - edge_ / 2; }
  PointT<Scalar> upper() const { return center_.array() + edge_ / 2; }

  /// Euclidean diameter edge * sqrt(d).
  Scalar diameter() const { return edge_ * std::sqrt(static_cast<Scalar>(dim())); }

  bool contains(const PointT<Scalar>& p, Scalar tol = 0) const {
    check_dim(p);
    return sup_dist(p, center_) <= edge_ / 2 + tol;
  }
  bool contains_open(const PointT<Scalar>& p, Scalar tol = 0) const {
    check_dim(p);
    return sup_dist(p, center_) < edge_ / 2 - tol;
  }

  void check_dim(const PointT<Scalar>& p) const {
    if (p.size() != center_.size()) throw Error(ErrorKind::DimensionMismatch, "point/cube dimension");
  }

  bool operator==(const CubeT& o) const { return edge_ == o.edge_ && center_ == o.center_; }

 private:
  PointT<Scalar> center_;
  Scalar edge_;
};
using Cube = CubeT<double>;

template <typename Scalar>
CubeT<Scalar> enlarge(const CubeT<Scalar>& q, Scalar rho) {
  if (!(rho > 0) || !std::isfinite(rho)) throw Error(ErrorKind::InvalidArgument, "homothety ratio must be positive");
  return CubeT<Scalar>(q.center(), q.edge() * rho);
}

/// Lambda(Q, k): the 2^{kd} subcubes of Q, indexed lexicographically with the
/// first coordinate most significant.
template <typename Scalar>
class GridT {
 public:
  GridT(CubeT<Scalar> root, int level) : root_(std::move(root)), level_(level) {
    if (level < 0) throw Error(ErrorKind::InvalidArgument, "grid level must be >= 0");
    if (level * root_.dim() > 62) throw Error(ErrorKind::BudgetExceeded, "grid has too many cells");
  }

  const CubeT<Scalar>& root() const { return root_; }
  int level() const { return level_; }
  int dim() const { return root_.dim(); }
  std::int64_t per_axis() const { return std::int64_t{1} << level_; }
  std::int64_t cell_count() const { return std::int64_t{1} << (level_ * dim()); }
  Scalar cell_edge() const { return root_.edge() / static_cast<Scalar>(per_axis()); }

  std::vector<std::int64_t> multi_index(std::int64_t index) const {
    std::vector<std::int64_t> m(dim());
    for (int j = dim() - 1; j >= 0; --j) {
      m[j] = index % per_axis();
      index /= per_axis();
    }
    return m;
  }

  std::int64_t flat_index(std::span<const std::int64_t> m) const {
    std::int64_t index = 0;
    for (int j = 0; j < dim(); ++j) index = index * per_axis() + m[j];
    return index;
  }

  CubeT<Scalar> cell(std::int64_t index) const {
    if (index < 0 || index >= cell_count()) throw Error(ErrorKind::InvalidArgument, "cell index out of range");
    const auto m = multi_index(index);
    PointT<Scalar> lo = root_.lower();
    for (int j = 0; j < dim(); ++j) lo[j] += static_cast<Scalar>(m[j]) * cell_edge();
    return CubeT<Scalar>::from_lower(lo, cell_edge());
  }

  std::vector<CubeT<Scalar>> cells() const {
    std::vector<CubeT<Scalar>> out;
    out.reserve(static_cast<std::size_t>(cell_count()));
    for (std::int64_t i = 0; i < cell_count(); ++i) out.push_back(cell(i));
    return out;
  }

  /// Index of the cell containing p using half-open cells [lo, hi), the last
  /// cell along each axis being closed. nullopt when p is outside the root.
  std::optional<std::int64_t> locate(const PointT<Scalar>& p) const {
    if (!root_.contains(p, kSkeletonTol * root_.edge())) return std::nullopt;
    const PointT<Scalar> lo = root_.lower();
    std::vector<std::int64_t> m(dim());
    for (int j = 0; j < dim(); ++j) {
      auto mj = static_cast<std::int64_t>(std::floor((p[j] - lo[j]) / cell_edge()));
      m[j] = std::clamp<std::int64_t>(mj, 0, per_axis() - 1);
    }
    return flat_index(m);
  }

  /// Membership in the (d-1)-skeleton S(Q, k), tolerance relative to the root edge.
  bool on_skeleton(const PointT<Scalar>& p) const {
    const Scalar tol = kSkeletonTol * root_.edge();
    if (!root_.contains(p, tol)) return false;
    const PointT<Scalar> lo = root_.lower();
    for (int j = 0; j < dim(); ++j) {
      const Scalar s = (p[j] - lo[j]) / cell_edge();
      if (std::abs(s - std::round(s)) * cell_edge() <= tol) return true;
    }
    return false;
  }

 private:
  CubeT<Scalar> root_;
  int level_;
};
using Grid = GridT<double>;

template <typename Scalar>
GridT<Scalar> subdivide(const CubeT<Scalar>& q, int k) {
  return GridT<Scalar>(q, k);
}

/// Returns Q' containing Q, with edge ceil(edge + 2), whose dyadic skeletons up
/// to level kmax miss every atom. Offsets are searched per axis among
/// m * h / (N + 1), h the finest cell edge and N the number of atoms; an atom
/// blocks at most one offset, so one of the N + 1 candidates is always free.
template <typename Scalar>
CubeT<Scalar> shift_grid_avoiding(const CubeT<Scalar>& q, std::span<const PointT<Scalar>> atoms, int kmax) {
  if (kmax < 0) throw Error(ErrorKind::InvalidArgument, "kmax must be >= 0");
  for (const auto& a : atoms) {
    q.check_dim(a);
    require_finite(a, "atom");
  }
  const Scalar edge = std::ceil(q.edge() + 2);
  const CubeT<Scalar> base(q.center(), edge);
  const Scalar fine = edge / std::ldexp(Scalar(1), kmax);
  const Scalar tol = kSkeletonTol * edge;
  const auto n = static_cast<Scalar>(atoms.size() + 1);
  if (fine / n <= 4 * tol) throw Error(ErrorKind::BudgetExceeded, "grid too fine to separate atoms");

  PointT<Scalar> shift = PointT<Scalar>::Zero(q.dim());
  const PointT<Scalar> lo = base.lower();
  for (int j = 0; j < q.dim(); ++j) {
    bool found = false;
    for (std::size_t m = 0; m <= atoms.size() && !found; ++m) {
      const Scalar rho = static_cast<Scalar>(m) * fine / n;
      found = std::none_of(atoms.begin(), atoms.end(), [&](const PointT<Scalar>& a) {
        const Scalar s = (a[j] - lo[j] - rho) / fine;
        return std::abs(s - std::round(s)) * fine <= tol;
      });
      if (found) shift[j] = rho;
    }
    if (!found) throw Error(ErrorKind::BudgetExceeded, "no free grid offset");
  }
  CubeT<Scalar> out(base.center() + shift, edge);
  for (int k = 0; k <= kmax; ++k) {
    const GridT<Scalar> g(out, k);
    for (const auto& a : atoms)
      if (g.on_skeleton(a)) throw Error(ErrorKind::AtomOnSkeleton, "grid shift verification failed");
  }
  return out;
}

enum class Location { Inside, Outside, Boundary };

/// A finite union of closed axis-aligned cubes.
template <typename Scalar>
class RegionT {
 public:
  RegionT() = default;
  explicit RegionT(std::vector<CubeT<Scalar>> cubes) : cubes_(std::move(cubes)) {
    for (const auto& c : cubes_)
      if (c.dim() != cubes_.front().dim()) throw Error(ErrorKind::DimensionMismatch, "region cubes");
  }
  RegionT(const CubeT<Scalar>& cube) : cubes_{cube} {}  // NOLINT(google-explicit-constructor)

  /// {z : d_x(z) < r}, which is a cube of edge 2r.
  static RegionT sup_ball(const PointT<Scalar>& x, Scalar r) { return RegionT(CubeT<Scalar>(x, 2 * r)); }

  const std::vector<CubeT<Scalar>>& cubes() const { return cubes_; }
  bool empty() const { return cubes_.empty(); }

  bool contains(const PointT<Scalar>& p) const {
    return std::any_of(cubes_.begin(), cubes_.end(), [&](const auto& c) { return c.contains(p); });
  }

  /// Inside/Outside/Boundary of the union. Points on a face shared by two
  /// cubes of the union are interior; this is decided by probing all 2^d
  /// orthants around p.
  Location classify(const PointT<Scalar>& p, Scalar tol = kSkeletonTol) const {
    if (cubes_.empty()) return Location::Outside;
    const Scalar scale = max_edge();
    const Scalar t = tol * scale;
    if (std::any_of(cubes_.begin(), cubes_.end(), [&](const auto& c) { return c.contains_open(p, t); }))
      return Location::Inside;
    if (std::none_of(cubes_.begin(), cubes_.end(), [&](const auto& c) { return c.contains(p, t); }))
      return Location::Outside;
    const Scalar eps = 1e3 * t;
    const int d = static_cast<int>(p.size());
    for (std::int64_t s = 0; s < (std::int64_t{1} << d); ++s) {
      PointT<Scalar> probe = p;
      for (int j = 0; j < d; ++j) probe[j] += ((s >> j) & 1) ? eps : -eps;
      if (!contains(probe)) return Location::Boundary;
    }
    return Location::Inside;
  }

  /// Parameters t in (0, 1) where the segment a + t(b - a) enters or leaves
  /// one of the cubes, sorted and deduplicated.
  std::vector<Scalar> crossings(const PointT<Scalar>& a, const PointT<Scalar>& b) const {
    std::vector<Scalar> ts;
    const PointT<Scalar> u = b - a;
    for (const auto& c : cubes_) {
      Scalar t0 = 0, t1 = 1;
      const PointT<Scalar> lo = c.lower(), hi = c.upper();
      bool hit = true;
      for (int j = 0; j < c.dim() && hit; ++j) {
        if (u[j] == 0) {
          if (a[j] < lo[j] || a[j] > hi[j]) hit = false;
          continue;
        }
        Scalar ta = (lo[j] - a[j]) / u[j], tb = (hi[j] - a[j]) / u[j];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) hit = false;
      }
      if (!hit) continue;
      if (t0 > 0 && t0 < 1) ts.push_back(t0);
      if (t1 > 0 && t1 < 1) ts.push_back(t1);
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
  }

 private:
  Scalar max_edge() const {
    Scalar m = 0;
    for (const auto& c : cubes_) m = std::max(m, c.edge());
    return m;
  }

  std::vector<CubeT<Scalar>> cubes_;
};
using Region = RegionT<double>;

}  // namespace branchpath
