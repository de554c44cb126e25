#ifndef SLPCA_LOSS_HPP
#define SLPCA_LOSS_HPP

#include <span>
#include <vector>

#include "slpca/matrix.hpp"

namespace slpca {

/// log(1 + exp(z)) without overflow; for z > 0 evaluated as z + log1p(exp(-z)).
inline double log1pexp(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// sigma(z) * (1 - sigma(z)), computed as sigma(z) * sigma(-z) so it does
/// not cancel at saturation.
inline double sigmoid_prime(double z) { return sigmoid(z) * sigmoid(-z); }

/// Bernoulli Bregman divergence of one cell: log(1 + exp(-x_signed * theta)).
double bregman_loss(double x_signed, double theta);

/// Per-row loss h_t = sum_j log(1 + exp(-x*_j <a, v_j>)).
double row_loss(std::span<const double> x_signed, std::span<const double> scores,
                const Matrix& loadings);

struct RowLossGradients {
  double loss = 0.0;                 // h_t, ridge excluded
  std::vector<double> grad_scores;   // length r; includes gamma*a when gamma > 0
  Matrix grad_loadings;              // P x r, row j = -x*_j sigma(-x*_j theta_j) a
  Matrix hessian_scores;             // r x r, sum_j s_j(1-s_j) v_j v_j^T (+ gamma I)
};

/// Loss, gradients and the score-block Hessian of one row. Pass gamma > 0 to
/// fold the ridge term into grad_scores and hessian_scores (the regularized
/// subproblem); gamma = 0 gives the bare loss derivatives.
RowLossGradients row_gradients(std::span<const double> x_signed,
                               std::span<const double> scores, const Matrix& loadings,
                               double gamma);

/// Curvature certificate for the loading-block Hessian: (1/4) ||a||_F^2.
double default_curvature(std::span<const double> scores);

/// Quadratic upper model of h_t anchored at the previous loadings.
struct SurrogateAnchor {
  Matrix anchor_loadings;   // P x r
  double anchor_loss = 0.0;
  Matrix anchor_gradient;   // P x r
  double curvature = 0.0;   // >= operator norm of the loading Hessian
};

/// Anchor with loss/gradient evaluated at `anchor_loadings` and the default
/// curvature certificate.
SurrogateAnchor make_surrogate_anchor(std::span<const double> x_signed,
                                      std::span<const double> scores,
                                      const Matrix& anchor_loadings);

/// anchor_loss + <anchor_gradient, V - anchor> + curvature/2 ||V - anchor||_F^2.
double surrogate_value(const SurrogateAnchor& anchor, const Matrix& loadings);

}  // namespace slpca

#endif  // SLPCA_LOSS_HPP
