#include "decenergy/bounded_lsq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "decenergy/errors.hpp"

namespace decenergy {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// The scaled, possibly QR-reduced problem the active-set loop works on.
struct Reduced {
  MatrixXd m;  // rows x J, unit-norm columns (zero columns stay zero)
  VectorXd c;
};

class ActiveSetSolver {
 public:
  ActiveSetSolver(const Reduced& problem, VectorXd lower, VectorXd upper, VectorXd gradient_scale,
                  double release_threshold, int max_solves)
      : m_(problem.m),
        c_(problem.c),
        lower_(std::move(lower)),
        upper_(std::move(upper)),
        scale_(std::move(gradient_scale)),
        threshold_(release_threshold),
        max_solves_(max_solves),
        cols_(m_.cols()),
        x_(cols_),
        state_(static_cast<std::size_t>(cols_), BoundState::Free) {}

  BoundedLsqResult run() {
    // Start from the feasible point closest to the origin with all variables
    // free, except those with a degenerate box which are pinned for good.
    for (Index j = 0; j < cols_; ++j) {
      x_(j) = std::clamp(0.0, lower_(j), upper_(j));
      if (lower_(j) == upper_(j)) state_[static_cast<std::size_t>(j)] = BoundState::AtLower;
    }
    bool converged = descend();
    std::vector<char> blocked(static_cast<std::size_t>(cols_), 0);
    while (converged) {
      const Index j = most_violating(blocked);
      if (j < 0) break;
      const BoundState previous = state_[static_cast<std::size_t>(j)];
      state_[static_cast<std::size_t>(j)] = BoundState::Free;
      if (!budget_left()) {
        state_[static_cast<std::size_t>(j)] = previous;
        converged = false;
        break;
      }
      const VectorXd z = solve_free();
      const bool moves_inward = previous == BoundState::AtLower ? z(j) > x_(j) : z(j) < x_(j);
      if (!moves_inward) {
        // Releasing j does not help the subproblem: keep it pinned and try
        // the next candidate.
        state_[static_cast<std::size_t>(j)] = previous;
        blocked[static_cast<std::size_t>(j)] = 1;
        continue;
      }
      std::fill(blocked.begin(), blocked.end(), 0);
      converged = descend(&z);
    }
    return {x_, state_, solves_, converged && budget_ok_};
  }

 private:
  bool budget_left() const { return solves_ < max_solves_; }

  // Index of the pinned variable with the largest gradient pointing into the
  // box, or -1 when the first-order conditions hold.
  Index most_violating(const std::vector<char>& blocked) const {
    const VectorXd w = m_.transpose() * (c_ - m_ * x_);  // negative half-gradient
    Index best = -1;
    double best_value = 0.0;
    for (Index j = 0; j < cols_; ++j) {
      const std::size_t s = static_cast<std::size_t>(j);
      if (state_[s] == BoundState::Free || blocked[s] || lower_(j) == upper_(j)) continue;
      const double push = (state_[s] == BoundState::AtLower ? w(j) : -w(j)) * scale_(j);
      if (push > threshold_ && push > best_value) {
        best_value = push;
        best = j;
      }
    }
    return best;
  }

  // Minimum-norm least-squares solution over the free variables with the
  // pinned ones held at their bounds. Entries of pinned variables are copied
  // from x_.
  VectorXd solve_free() {
    ++solves_;
    std::vector<Index> free;
    for (Index j = 0; j < cols_; ++j) {
      if (state_[static_cast<std::size_t>(j)] == BoundState::Free) free.push_back(j);
    }
    VectorXd z = x_;
    if (free.empty()) return z;
    VectorXd rhs = c_;
    MatrixXd sub(m_.rows(), static_cast<Index>(free.size()));
    for (Index j = 0, k = 0; j < cols_; ++j) {
      if (state_[static_cast<std::size_t>(j)] == BoundState::Free) {
        sub.col(k++) = m_.col(j);
      } else {
        rhs.noalias() -= m_.col(j) * x_(j);
      }
    }
    const Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(sub);
    const VectorXd sol = cod.solve(rhs);
    for (std::size_t k = 0; k < free.size(); ++k) z(free[k]) = sol(static_cast<Index>(k));
    return z;
  }

  // Moves toward successive free-set optima, pinning variables that reach a
  // bound, until the free-set optimum is feasible. `first` is a solution
  // already computed for the current free set (may be null).
  bool descend(const VectorXd* first = nullptr) {
    VectorXd z;
    if (first != nullptr) {
      z = *first;
    } else {
      if (!budget_left()) return budget_ok_ = false;
      z = solve_free();
    }
    VectorXd ratio(cols_);
    while (true) {
      double alpha = 1.0;
      for (Index j = 0; j < cols_; ++j) {
        ratio(j) = std::numeric_limits<double>::infinity();
        if (state_[static_cast<std::size_t>(j)] != BoundState::Free) continue;
        if (z(j) < lower_(j)) {
          ratio(j) = (lower_(j) - x_(j)) / (z(j) - x_(j));
        } else if (z(j) > upper_(j)) {
          ratio(j) = (upper_(j) - x_(j)) / (z(j) - x_(j));
        }
        alpha = std::min(alpha, ratio(j));
      }
      if (alpha >= 1.0) {
        for (Index j = 0; j < cols_; ++j) {
          if (state_[static_cast<std::size_t>(j)] == BoundState::Free) x_(j) = z(j);
        }
        return true;
      }
      alpha = std::max(alpha, 0.0);
      for (Index j = 0; j < cols_; ++j) {
        const std::size_t s = static_cast<std::size_t>(j);
        if (state_[s] != BoundState::Free) continue;
        if (ratio(j) <= alpha) {
          // Every variable whose step ratio attains the minimum lands on its
          // bound, so each pass shrinks the free set.
          const bool low = z(j) < lower_(j);
          x_(j) = low ? lower_(j) : upper_(j);
          state_[s] = low ? BoundState::AtLower : BoundState::AtUpper;
        } else {
          x_(j) = std::clamp(x_(j) + alpha * (z(j) - x_(j)), lower_(j), upper_(j));
        }
      }
      if (!budget_left()) return budget_ok_ = false;
      z = solve_free();
    }
  }

  const MatrixXd& m_;
  const VectorXd& c_;
  VectorXd lower_;
  VectorXd upper_;
  VectorXd scale_;
  double threshold_;
  int max_solves_;
  Index cols_;
  VectorXd x_;
  std::vector<BoundState> state_;
  int solves_ = 0;
  bool budget_ok_ = true;
};

}  // namespace

BoundedLsqResult solve_bounded_lsq(const MatrixXd& a, const VectorXd& b, const VectorXd& lower,
                                   const VectorXd& upper, const BoundedLsqOptions& options) {
  const Index rows = a.rows();
  const Index cols = a.cols();
  if (rows < 1 || cols < 1) throw FitError("least-squares problem must be nonempty");
  if (b.size() != rows) throw FitError("target length does not match the design matrix rows");
  if (lower.size() != cols || upper.size() != cols) {
    throw FitError("bound vectors must match the number of coefficients");
  }
  if (!a.allFinite() || !b.allFinite()) throw FitError("design matrix or target is not finite");
  for (Index j = 0; j < cols; ++j) {
    if (std::isnan(lower(j)) || std::isnan(upper(j)) || lower(j) > upper(j) ||
        lower(j) == std::numeric_limits<double>::infinity() ||
        upper(j) == -std::numeric_limits<double>::infinity()) {
      throw FitError("infeasible bounds for coefficient " + std::to_string(j));
    }
  }
  if (!(options.tolerance > 0.0) || options.max_iterations < 1) {
    throw FitError("tolerance and iteration cap must be positive");
  }

  // Unit-norm column scaling; x = y / d.
  VectorXd d = a.colwise().norm().transpose();
  for (Index j = 0; j < cols; ++j) {
    if (d(j) == 0.0) d(j) = 1.0;
  }
  Reduced problem;
  MatrixXd scaled = a * d.cwiseInverse().asDiagonal();
  if (rows > cols) {
    Eigen::HouseholderQR<MatrixXd> qr(std::move(scaled));
    problem.m = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    problem.c = (qr.householderQ().transpose() * b).head(cols);
  } else {
    problem.m = std::move(scaled);
    problem.c = b;
  }

  // Release test in original units: |(A^T r)_j| = d_j |(M^T r_m)_j|.
  const double gradient_norm = (a.transpose() * b).cwiseAbs().maxCoeff();
  const double threshold = options.tolerance * std::max(gradient_norm, 1e-300);

  ActiveSetSolver solver(problem, lower.cwiseProduct(d), upper.cwiseProduct(d), d, threshold,
                         options.max_iterations);
  BoundedLsqResult result = solver.run();
  result.x = result.x.cwiseQuotient(d);
  // Undo scaling exactly at the bounds so pinned coefficients equal them.
  for (Index j = 0; j < cols; ++j) {
    const std::size_t s = static_cast<std::size_t>(j);
    if (result.state[s] == BoundState::AtLower) result.x(j) = lower(j);
    if (result.state[s] == BoundState::AtUpper) result.x(j) = upper(j);
    result.x(j) = std::clamp(result.x(j), lower(j), upper(j));
  }
  return result;
}

}  // namespace decenergy
