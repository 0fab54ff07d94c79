#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "branchpath/currents.hpp"

namespace branchpath {

/// Simple polyline carrying a positive weight.
struct WeightedPath {
  std::vector<Point> vertices;
  double weight = 0;

  double length() const;
  const Point& start() const { return vertices.front(); }
  const Point& end() const { return vertices.back(); }
};

struct PathDecomposition {
  std::vector<WeightedPath> paths;

  double total_weight() const;
};

/// Cancels every directed cycle of the flow graph of a canonical current.
/// The boundary is unchanged and the mass never grows; acyclic input is
/// returned as is.
PolyhedralCurrent remove_cycles(const PolyhedralCurrent& t);

bool is_acyclic(const PolyhedralCurrent& t);

/// Flow decomposition of an acyclic current into weighted source-to-sink
/// paths. Sources are visited in vertex order and each walk follows the
/// outgoing edge of largest residual multiplicity (lowest index on ties).
/// Throws NotAcyclic.
PathDecomposition good_decomposition(const PolyhedralCurrent& t);

/// sum of weight * I_gamma, canonicalized.
PolyhedralCurrent current_of(const PathDecomposition& d);

using CellKey = std::pair<std::int64_t, std::int64_t>;

/// Paths grouped by (start cell, end cell).
struct CellPartition {
  Grid grid;
  std::map<CellKey, PathDecomposition> pieces;
  std::map<CellKey, PolyhedralCurrent> parts;
};

/// Throws EndpointOnSkeleton when a path starts or ends on a cell face and
/// InvalidArgument when an endpoint lies outside the grid.
CellPartition partition_by_cells(const PathDecomposition& d, const Grid& grid);

struct CombinedMultiplicity {
  Arrangement arrangement;
  Eigen::VectorXd theta_bar;  // per arrangement segment, sum over parts of |theta|
};

CombinedMultiplicity combined_multiplicity(const CellPartition& p);

/// sum over segments of H(theta_bar) * length.
double combined_multiplicity_mass(const CellPartition& p, const CostSpec& cost);

}  // namespace branchpath
