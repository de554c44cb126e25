#ifndef SLPCA_NEWTON_HPP
#define SLPCA_NEWTON_HPP

#include <span>
#include <vector>

#include "slpca/matrix.hpp"
#include "slpca/model.hpp"

namespace slpca {

struct NewtonReport {
  std::vector<double> solution;
  int iterations = 0;          // accepted Newton steps
  double final_decrement = 0;  // grad^T H^{-1} grad at the returned point
  bool converged = false;      // final_decrement / 2 <= newton_tol
  double objective = 0;        // regularized loss at the returned point
  std::vector<double> objective_trace;  // start value plus one entry per accepted step
};

/// Minimizes sum_i log(1 + exp(-signs[i] <features_i, a>)) + ridge/2 ||a||^2
/// over a in R^r by damped Newton with Armijo backtracking. `features` is
/// M x r with one sample per row; ridge > 0 makes the problem strictly convex.
/// Starts from zero unless `start` is given. Caps (100 outer iterations,
/// 60 backtracks) produce converged=false, never an exception.
NewtonReport minimize_logistic_ridge(std::span<const double> signs, const Matrix& features,
                                     double ridge, const Hyperparams& hp,
                                     std::span<const double> start = {});

/// Per-row score subproblem: argmin_a h_t(a, loadings) + gamma/2 ||a||^2,
/// started from a = 0.
NewtonReport solve_row(std::span<const double> x_signed, const Matrix& loadings,
                       double gamma, const Hyperparams& hp);

}  // namespace slpca

#endif  // SLPCA_NEWTON_HPP
