#ifndef SLPCA_BATCH_HPP
#define SLPCA_BATCH_HPP

#include <cstdint>
#include <vector>

#include "slpca/model.hpp"

namespace slpca {

struct BatchFitReport {
  FactorModel model;
  std::vector<double> objective_history;  // full regularized objective, initial value first
  double batch_loss = 0;                  // (1/N) sum_t h_t at the fit, ridge excluded
  int alternations = 0;
  bool converged = false;
  double max_first_order_residual = 0;    // worst residual over both blocks at exit
};

/// Alternating minimization: exact Newton solves for every score row against
/// the current loadings, then for every loading row against the new scores.
/// Stops when the relative objective decrease falls below `tol` and every
/// block residual is below `residual_tol`, or after `max_alternations`.
/// Loadings start uniform in [-1e-2, 1e-2] from `seed` (zero is a saddle).
BatchFitReport fit_batch(const BinaryMatrix& data, std::size_t rank, const Hyperparams& hp,
                         int max_alternations = 500, double tol = 1e-8,
                         std::uint64_t seed = 1234, double residual_tol = 1e-6);

/// Average per-row loss (1/N) sum_t h_t(a_t, V), regularizers excluded.
double batch_loss(const FactorModel& model, const BinaryMatrix& data);

}  // namespace slpca

#endif  // SLPCA_BATCH_HPP
