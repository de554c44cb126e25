#include "slpca/newton.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "slpca/loss.hpp"

namespace slpca {

namespace {

constexpr int kMaxOuter = 100;
constexpr int kMaxBacktracks = 60;
// Extra full Newton steps after the decrement test passes. Each squares the
// residual, so the returned point satisfies first-order optimality to near
// machine precision, which the per-step stream identities rely on. The loop
// exits early once the decrement stops improving (rounding floor).
constexpr int kMaxPolishSteps = 8;
constexpr double kDecrementFloor = 1e-24;

/// Solves H x = rhs for symmetric positive definite H via Cholesky, in place.
std::vector<double> solve_spd(Matrix h, std::vector<double> rhs) {
  const std::size_t n = h.rows();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, h(i, i));
  for (std::size_t k = 0; k < n; ++k) {
    double pivot = h(k, k);
    for (std::size_t m = 0; m < k; ++m) pivot -= h(k, m) * h(k, m);
    if (!(pivot > max_diag * 1e-14))
      throw std::runtime_error("newton: Cholesky failed, pivot " + std::to_string(pivot) +
                               " vs diagonal scale " + std::to_string(max_diag) +
                               " (condition estimate " +
                               std::to_string(max_diag / std::max(pivot, 1e-300)) + ")");
    const double l = std::sqrt(pivot);
    h(k, k) = l;
    for (std::size_t i = k + 1; i < n; ++i) {
      double v = h(i, k);
      for (std::size_t m = 0; m < k; ++m) v -= h(i, m) * h(k, m);
      h(i, k) = v / l;
    }
  }
  // forward then backward substitution
  for (std::size_t i = 0; i < n; ++i) {
    double v = rhs[i];
    for (std::size_t m = 0; m < i; ++m) v -= h(i, m) * rhs[m];
    rhs[i] = v / h(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double v = rhs[i];
    for (std::size_t m = i + 1; m < n; ++m) v -= h(m, i) * rhs[m];
    rhs[i] = v / h(i, i);
  }
  return rhs;
}

}  // namespace

NewtonReport minimize_logistic_ridge(std::span<const double> signs, const Matrix& features,
                                     double ridge, const Hyperparams& hp,
                                     std::span<const double> start) {
  hp.validate();
  if (signs.size() != features.rows())
    throw std::invalid_argument("minimize_logistic_ridge: sign/feature row mismatch");
  if (!(ridge > 0.0))
    throw std::invalid_argument("minimize_logistic_ridge: ridge must be > 0");
  const std::size_t r = features.cols();
  const bool zero_start = start.empty();
  if (!zero_start && start.size() != r)
    throw std::invalid_argument("minimize_logistic_ridge: start has wrong length");

  std::vector<double> a(r, 0.0);
  if (!zero_start) a.assign(start.begin(), start.end());

  const auto objective = [&](std::span<const double> point) {
    return row_loss(signs, point, features) + 0.5 * ridge * norm_sq(point);
  };

  NewtonReport report;
  double obj = objective(a);
  report.objective_trace.push_back(obj);
  for (int outer = 0; outer <= kMaxOuter; ++outer) {
    auto g = row_gradients(signs, a, features, ridge);
    auto step = solve_spd(g.hessian_scores, g.grad_scores);
    for (double& v : step) v = -v;
    double decrement = -dot(g.grad_scores, step);  // grad^T H^{-1} grad
    if (decrement < 0.0) decrement = 0.0;          // rounding guard
    report.final_decrement = decrement;

    if (0.5 * decrement <= hp.newton_tol) {
      report.converged = true;
      // polish: full Newton steps. Near the optimum the true decrease sits
      // below objective rounding, so the guard allows noise-level increases.
      for (int k = 0; k < kMaxPolishSteps && decrement > kDecrementFloor; ++k) {
        std::vector<double> trial(a);
        add_scaled(trial, 1.0, step);
        const double trial_obj = objective(trial);
        if (trial_obj > obj + 1e-12 * std::max(1.0, std::abs(obj))) break;
        a = std::move(trial);
        obj = std::min(obj, trial_obj);
        auto pg = row_gradients(signs, a, features, ridge);
        step = solve_spd(pg.hessian_scores, pg.grad_scores);
        for (double& v : step) v = -v;
        const double next = std::max(0.0, -dot(pg.grad_scores, step));
        if (next >= decrement) {
          report.final_decrement = next;
          break;
        }
        decrement = next;
        report.final_decrement = decrement;
      }
      break;
    }
    if (outer == kMaxOuter) break;  // cap reached, converged stays false

    const double slope = dot(g.grad_scores, step);  // = -decrement < 0
    double d = hp.initial_step;
    std::vector<double> trial(r);
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      trial = a;
      add_scaled(trial, d, step);
      const double trial_obj = objective(trial);
      if (trial_obj <= obj + hp.armijo_alpha * d * slope) {
        accepted = true;
        obj = trial_obj;
        break;
      }
      d *= hp.armijo_beta;
    }
    if (!accepted) break;  // backtracking cap, converged stays false
    a = trial;
    ++report.iterations;
    report.objective_trace.push_back(obj);
  }

  report.solution = std::move(a);
  report.objective = objective(report.solution);

  // Descent from a = 0 keeps gamma/2 ||a||^2 <= M log 2, which is the
  // boundedness premise the regret analysis rests on.
  if (zero_start) {
    const double cap =
        2.0 * static_cast<double>(features.rows()) * std::log(2.0) / ridge;
    if (norm_sq(report.solution) > cap * (1.0 + 1e-9) + 1e-12)
      throw std::logic_error("minimize_logistic_ridge: solution norm exceeds descent bound");
  }
  return report;
}

NewtonReport solve_row(std::span<const double> x_signed, const Matrix& loadings,
                       double gamma, const Hyperparams& hp) {
  return minimize_logistic_ridge(x_signed, loadings, gamma, hp);
}

}  // namespace slpca
