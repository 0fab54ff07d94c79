#pragma once

#include <vector>

#include "branchpath/currents.hpp"

namespace branchpath {

struct ConnectionResult {
  PolyhedralCurrent current;
  int k = 0;
  double bound = 0;
  SignedAtomicMeasure sigma;
};

/// Connects two positive measures of equal mass inside Q: cones from every
/// level-k cell center onto (mu - nu) restricted to the cell, minus the cone
/// from the center of Q onto the cell imbalances sigma. The boundary is
/// exactly mu - nu and
///   h_mass(current) <= 2^-k l (H(mu) + H(nu)) + l H(sigma),  l = diam Q.
/// Throws MassMismatch, AtomOnSkeleton (shift the grid first) or
/// InvalidArgument for negative measures and atoms outside Q.
ConnectionResult connect(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu, const Cube& q, int k,
                         const CostSpec& cost);

/// Per-level transport costs of the dyadic chain of a probability measure.
/// The level-l discretization puts the mass of every level-l cell at the
/// barycenter of mu in that cell; entry l (0 <= l < kmax) is the H-mass of
/// the cones carrying level l to level l + 1. Cells are half-open.
std::vector<double> dyadic_connection_cost(const SignedAtomicMeasure& mu, const Cube& q, int kmax, const CostSpec& cost);

}  // namespace branchpath
