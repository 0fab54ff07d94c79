#pragma once

#include <Eigen/Dense>

namespace branchpath::lp {

struct Solution {
  double value = 0;
  Eigen::VectorXd x;
};

/// Dense two-phase tableau simplex for min c'x s.t. Ax = b, x >= 0.
/// Dantzig pricing with a switch to Bland's rule after a run of degenerate
/// pivots. Meant for desk-scale problems (a few thousand columns).
/// Throws Error(Infeasible) or Error(InvalidArgument) when unbounded.
Solution minimize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c);

}  // namespace branchpath::lp
