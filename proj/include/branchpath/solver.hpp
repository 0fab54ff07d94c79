#pragma once

#include <vector>

#include "branchpath/currents.hpp"

namespace branchpath {

inline constexpr int kMaxTerminals = 6;
inline constexpr int kMaxSteiner = 3;
/// Steiner nodes closer than this to a terminal (or to each other) are merged.
inline constexpr double kSteinerMergeTol = 1e-9;

struct TransportInstance {
  int d = 2;
  SignedAtomicMeasure mu_minus;
  SignedAtomicMeasure mu_plus;
  CostSpec cost = CostSpec::power(0.5);
  Cube domain{Point::Zero(2), 2.0};
  int max_steiner = 2;
};

/// Throws InstanceInvalid unless both measures are positive with equal mass,
/// mutually singular and supported in the domain.
void validate(const TransportInstance& instance);

/// Node numbering: sources (atoms of mu_minus) first, then sinks (atoms of
/// mu_plus), then Steiner nodes.
struct Topology {
  struct Edge {
    int from;
    int to;
    double flow;  // > 0, carried from -> to
  };
  int sources = 0;
  int sinks = 0;
  int steiner = 0;
  std::vector<Edge> edges;

  int terminals() const { return sources + sinks; }
  int nodes() const { return terminals() + steiner; }
};

/// Every directed forest on the terminals and at most max_steiner Steiner
/// nodes (each of degree >= 3) whose flows, forced by conservation, are
/// nonzero; one representative per Steiner relabeling class. Throws
/// TooManyTerminals beyond 6 terminals and InvalidArgument beyond 3 Steiner nodes.
std::vector<Topology> enumerate_topologies(const TransportInstance& instance, int max_steiner);

struct TopologyOptimum {
  std::vector<Point> steiner;  // positions, in Steiner order
  double energy = 0;           // sum of H(flow) |p_u - p_v|
  bool converged = true;
};

/// Best local optimum over 20 deterministic starts of the fixed-topology
/// energy, by coordinate descent with exact Fermat-Weber steps per node.
TopologyOptimum optimize_topology(const Topology& t, const TransportInstance& instance);

enum class Optimality { ExactOverEnumeration, Heuristic };

struct Solution {
  PolyhedralCurrent current;
  double energy = 0;
  Topology topology;
  std::vector<Point> steiner;
  Optimality optimality = Optimality::ExactOverEnumeration;
  std::size_t topologies = 0;  // number examined
};

/// Traffic path of least energy among the enumerated topologies. The current
/// has boundary mu_plus - mu_minus and energy = h_mass(current, cost).
Solution solve(const TransportInstance& instance, int max_steiner);
inline Solution solve(const TransportInstance& instance) { return solve(instance, instance.max_steiner); }

/// Brute-force reference for planar instances with at most 3 terminals and
/// one Steiner node: every Steiner-free tree, plus the star whose centre is
/// scanned over the domain lattice of the given step and then refined by
/// golden-section search. Throws BudgetExceeded beyond 2e7 lattice points.
double oracle_small(const TransportInstance& instance, double grid_step);

}  // namespace branchpath
