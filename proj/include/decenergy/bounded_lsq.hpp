#pragma once

// Bounded-variable linear least squares:
//
//   minimize ||A x - b||_2^2   subject to   lower <= x <= upper
//
// Active-set method in the Stark-Parker (BVLS) family. Every variable starts
// free; the iterate moves toward the unconstrained optimum of the current
// free set and pins variables as they reach a bound, and pinned variables
// whose gradient points into the feasible box are released again. Each
// subproblem is solved by a complete orthogonal decomposition, so
// rank-deficient free sets resolve to their minimum-norm solution.
//
// Columns are scaled to unit norm internally and, when A has more rows than
// columns, the problem is first reduced to the square triangular factor of
// a QR decomposition.

#include <Eigen/Dense>
#include <vector>

namespace decenergy {

enum class BoundState { Free, AtLower, AtUpper };

struct BoundedLsqOptions {
  // A pinned variable is released only when its gradient magnitude exceeds
  // tolerance * ||A^T b||_inf.
  double tolerance = 1e-10;
  // Cap on least-squares subproblem solves.
  int max_iterations = 500;
};

struct BoundedLsqResult {
  Eigen::VectorXd x;
  std::vector<BoundState> state;
  int iterations = 0;
  bool converged = false;
};

// Throws FitError on non-finite input, dimension mismatch or lower > upper.
BoundedLsqResult solve_bounded_lsq(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                   const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                   const BoundedLsqOptions& options = {});

}  // namespace decenergy
