#include "slpca/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace slpca {

namespace {

void check_row_dims(std::span<const double> x_signed, std::span<const double> scores,
                    const Matrix& loadings, const char* what) {
  if (x_signed.size() != loadings.rows())
    throw std::invalid_argument(std::string(what) + ": row length " +
                                std::to_string(x_signed.size()) + " != loading rows " +
                                std::to_string(loadings.rows()));
  if (scores.size() != loadings.cols())
    throw std::invalid_argument(std::string(what) + ": score length " +
                                std::to_string(scores.size()) + " != rank " +
                                std::to_string(loadings.cols()));
}

}  // namespace

double bregman_loss(double x_signed, double theta) {
  if (x_signed != 1.0 && x_signed != -1.0)
    throw std::domain_error("bregman_loss: x_signed must be -1 or +1");
  if (!std::isfinite(theta)) throw std::invalid_argument("bregman_loss: theta is not finite");
  return log1pexp(-x_signed * theta);
}

double row_loss(std::span<const double> x_signed, std::span<const double> scores,
                const Matrix& loadings) {
  check_row_dims(x_signed, scores, loadings, "row_loss");
  double loss = 0.0;
  for (std::size_t j = 0; j < loadings.rows(); ++j)
    loss += log1pexp(-x_signed[j] * dot(scores, loadings.row(j)));
  return loss;
}

RowLossGradients row_gradients(std::span<const double> x_signed,
                               std::span<const double> scores, const Matrix& loadings,
                               double gamma) {
  check_row_dims(x_signed, scores, loadings, "row_gradients");
  const std::size_t p = loadings.rows();
  const std::size_t r = loadings.cols();

  RowLossGradients out;
  out.grad_scores.assign(r, 0.0);
  out.grad_loadings = Matrix(p, r);
  out.hessian_scores = Matrix(r, r);

  for (std::size_t j = 0; j < p; ++j) {
    const auto v = loadings.row(j);
    const double theta = dot(scores, v);
    const double z = -x_signed[j] * theta;
    const double s = sigmoid(z);
    const double w = s * sigmoid(-z);  // s(1-s)
    out.loss += log1pexp(z);

    const double coef = -x_signed[j] * s;
    auto grow = out.grad_loadings.row(j);
    for (std::size_t k = 0; k < r; ++k) {
      grow[k] = coef * scores[k];
      out.grad_scores[k] += coef * v[k];
    }
    for (std::size_t k = 0; k < r; ++k)
      for (std::size_t l = k; l < r; ++l) out.hessian_scores(k, l) += w * v[k] * v[l];
  }
  // mirror the accumulated upper triangle; exact symmetry by construction
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t l = 0; l < k; ++l) out.hessian_scores(k, l) = out.hessian_scores(l, k);

  if (gamma > 0.0) {
    for (std::size_t k = 0; k < r; ++k) {
      out.grad_scores[k] += gamma * scores[k];
      out.hessian_scores(k, k) += gamma;
    }
  }
  return out;
}

double default_curvature(std::span<const double> scores) { return 0.25 * norm_sq(scores); }

SurrogateAnchor make_surrogate_anchor(std::span<const double> x_signed,
                                      std::span<const double> scores,
                                      const Matrix& anchor_loadings) {
  auto g = row_gradients(x_signed, scores, anchor_loadings, 0.0);
  SurrogateAnchor anchor;
  anchor.anchor_loadings = anchor_loadings;
  anchor.anchor_loss = g.loss;
  anchor.anchor_gradient = std::move(g.grad_loadings);
  anchor.curvature = default_curvature(scores);
  return anchor;
}

double surrogate_value(const SurrogateAnchor& anchor, const Matrix& loadings) {
  check_same_shape(anchor.anchor_loadings, loadings, "surrogate_value");
  double linear = 0.0;
  double dist_sq = 0.0;
  const auto& a = anchor.anchor_loadings.storage();
  const auto& g = anchor.anchor_gradient.storage();
  const auto& v = loadings.storage();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - a[i];
    linear += g[i] * d;
    dist_sq += d * d;
  }
  return anchor.anchor_loss + linear + 0.5 * anchor.curvature * dist_sq;
}

}  // namespace slpca
