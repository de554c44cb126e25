#include "slpca/batch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slpca/kernels.hpp"
#include "slpca/rng.hpp"

namespace slpca {

namespace {

/// Flips factor-pair signs so the first nonzero entry of each loading column
/// is positive. Losses are invariant; this only fixes the reported basis.
void canonicalize_signs(Matrix& scores, Matrix& loadings) {
  for (std::size_t k = 0; k < loadings.cols(); ++k) {
    double lead = 0.0;
    for (std::size_t j = 0; j < loadings.rows(); ++j) {
      if (loadings(j, k) != 0.0) {
        lead = loadings(j, k);
        break;
      }
    }
    if (lead >= 0.0) continue;
    for (std::size_t j = 0; j < loadings.rows(); ++j) loadings(j, k) = -loadings(j, k);
    for (std::size_t t = 0; t < scores.rows(); ++t) scores(t, k) = -scores(t, k);
  }
}

}  // namespace

BatchFitReport fit_batch(const BinaryMatrix& data, std::size_t rank, const Hyperparams& hp,
                         int max_alternations, double tol, std::uint64_t seed,
                         double residual_tol) {
  hp.validate();
  if (data.rows() < 1 || data.cols() < 1)
    throw std::invalid_argument("fit_batch: data must have at least one row and column");
  if (rank < 1 || rank > std::min(data.rows(), data.cols()))
    throw std::invalid_argument("fit_batch: rank must be in [1, min(N, P)]");
  if (!(hp.lambda > 0.0))
    throw std::invalid_argument("fit_batch: lambda must be > 0 for the loading step");

  const std::size_t n = data.rows();
  const std::size_t p = data.cols();

  Matrix scores(n, rank);
  Matrix loadings(p, rank);
  Rng rng(seed);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = 0; k < rank; ++k) loadings(j, k) = rng.uniform(-1e-2, 1e-2);

  const auto objective = [&] {
    return kernels::total_loss(data, scores, loadings) +
           0.5 * hp.gamma * scores.frobenius_norm_sq() +
           0.5 * hp.lambda * loadings.frobenius_norm_sq();
  };

  BatchFitReport report;
  double prev = objective();
  report.objective_history.push_back(prev);

  for (int alt = 1; alt <= max_alternations; ++alt) {
    scores = kernels::solve_score_rows(data, loadings, hp.gamma, hp).solutions;
    loadings = kernels::solve_loading_rows(data, scores, hp.lambda, hp).solutions;

    const double obj = objective();
    report.objective_history.push_back(obj);
    report.alternations = alt;

    // scores are stale by one half-step, so their residual drives the exit
    const auto score_res = kernels::score_residual_norms(data, scores, loadings, hp.gamma);
    const auto load_res = kernels::loading_residual_norms(data, scores, loadings, hp.lambda);
    double worst = 0.0;
    for (double v : score_res) worst = std::max(worst, v);
    for (double v : load_res) worst = std::max(worst, v);
    report.max_first_order_residual = worst;

    const double decrease = prev - obj;
    prev = obj;
    if (decrease < tol * std::max(1.0, std::abs(obj)) && worst <= residual_tol) {
      report.converged = true;
      break;
    }
  }

  canonicalize_signs(scores, loadings);
  report.model = FactorModel{std::move(scores), std::move(loadings)};
  report.batch_loss = batch_loss(report.model, data);
  return report;
}

double batch_loss(const FactorModel& model, const BinaryMatrix& data) {
  if (data.rows() < 1) throw std::invalid_argument("batch_loss: data has no rows");
  if (model.scores.rows() != data.rows() || model.loadings.rows() != data.cols())
    throw std::invalid_argument("batch_loss: model dimensions do not match data");
  return kernels::total_loss(data, model.scores, model.loadings) /
         static_cast<double>(data.rows());
}

}  // namespace slpca
