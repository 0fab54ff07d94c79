#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>

#include "branchpath/currents.hpp"

namespace branchpath {

/// Triangulated square lattice of step h over a planar cube. Every lattice
/// square (i, j) carries the diagonal (i, j) -> (i+1, j+1) and two
/// counter-clockwise triangles, lower (i,j),(i+1,j),(i+1,j+1) and upper
/// (i,j),(i+1,j+1),(i,j+1). Edges are oriented along +x, +y and +(1,1).
class TriComplex {
 public:
  TriComplex(const Cube& domain, double h);

  const Cube& domain() const { return domain_; }
  double step() const { return h_; }
  int cells_per_axis() const { return n_; }

  Eigen::Index vertex_count() const { return static_cast<Eigen::Index>(n_ + 1) * (n_ + 1); }
  Eigen::Index edge_count() const { return static_cast<Eigen::Index>(edges_.size()); }
  Eigen::Index triangle_count() const { return 2 * static_cast<Eigen::Index>(n_) * n_; }

  Point vertex(int i, int j) const;
  Point vertex(Eigen::Index v) const { return vertex(static_cast<int>(v % (n_ + 1)), static_cast<int>(v / (n_ + 1))); }
  /// Endpoints (vertex indices) of edge e, tail first.
  std::pair<Eigen::Index, Eigen::Index> edge(Eigen::Index e) const { return edges_[e]; }
  double edge_length(Eigen::Index e) const;
  double triangle_area() const { return 0.5 * h_ * h_; }

  /// Index of the lattice edge joining neighbouring vertices, with +1 when
  /// u -> v follows its orientation and -1 otherwise; (-1, 0) if none.
  std::pair<Eigen::Index, int> edge_between(int ui, int uj, int vi, int vj) const;

  /// Triangle t as three (edge, sign) pairs forming its boundary.
  std::array<std::pair<Eigen::Index, int>, 3> triangle(Eigen::Index t) const;

  /// Edge-by-triangle incidence matrix of the boundary operator.
  const Eigen::SparseMatrix<double>& boundary_matrix() const { return boundary_; }

  /// Lattice coordinates of p when it lies within h * 1e-6 of a lattice vertex.
  std::optional<std::pair<int, int>> lattice_point(const Point& p) const;

 private:
  Eigen::Index h_edge(int i, int j) const;
  Eigen::Index v_edge(int i, int j) const;
  Eigen::Index d_edge(int i, int j) const;

  Cube domain_;
  double h_;
  int n_;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> edges_;
  Eigen::SparseMatrix<double> boundary_;
};

/// Edge coefficients of a 1-chain on a complex.
using Chain = Eigen::VectorXd;

/// Rewrites every segment of T as a straight lattice path. Throws SnapError
/// when an endpoint is not a lattice vertex of the complex.
Chain rasterize(const PolyhedralCurrent& t, const TriComplex& c);

/// Moves every vertex of T to the nearest lattice vertex; segments that
/// collapse are dropped. Throws SnapError for vertices outside the domain.
PolyhedralCurrent snap_to_lattice(const PolyhedralCurrent& t, const TriComplex& c);

double chain_mass(const Chain& chain, const TriComplex& c);
SignedAtomicMeasure chain_boundary(const Chain& chain, const TriComplex& c);

struct FlatNormResult {
  double value = 0;
  Chain r;                    // edge coefficients of R
  Eigen::VectorXd s;          // triangle coefficients of S
  double dual_value = 0;      // optimum of the dual program, equal to value up to rounding
};

/// Simplicial flat norm: min sum |R_e| len(e) + sum |S_t| area(t) over
/// chain = R + dS. Solved exactly through its dual, a min-cost circulation
/// on the planar dual graph.
FlatNormResult flat_norm(const Chain& chain, const TriComplex& c);

}  // namespace branchpath
