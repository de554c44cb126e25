#ifndef SLPCA_KERNELS_HPP
#define SLPCA_KERNELS_HPP

#include <vector>

#include "slpca/matrix.hpp"
#include "slpca/model.hpp"
#include "slpca/newton.hpp"
#include "slpca/stream.hpp"

namespace slpca::kernels {

/// Data-parallel inner loops shared by the batch fitter and the evaluation
/// functionals. Each kernel has a plain serial twin (`*_serial`) that serves
/// as the reference implementation in tests and in the benchmark; results
/// are identical bit for bit because parallel variants write per-index slots
/// and reduce in a fixed order.

struct SweepResult {
  Matrix solutions;                   // one solved row per input row
  std::vector<NewtonReport> reports;  // per-row solver reports
};

/// Solves the score subproblem for every data row against fixed loadings.
SweepResult solve_score_rows(const BinaryMatrix& data, const Matrix& loadings,
                             double gamma, const Hyperparams& hp);
SweepResult solve_score_rows_serial(const BinaryMatrix& data, const Matrix& loadings,
                                    double gamma, const Hyperparams& hp);

/// Solves the loading subproblem for every data column against fixed scores.
SweepResult solve_loading_rows(const BinaryMatrix& data, const Matrix& scores,
                               double lambda, const Hyperparams& hp);
SweepResult solve_loading_rows_serial(const BinaryMatrix& data, const Matrix& scores,
                                      double lambda, const Hyperparams& hp);

/// h_t(a_t, V) for every row (ridge excluded).
std::vector<double> per_row_losses(const BinaryMatrix& data, const Matrix& scores,
                                   const Matrix& loadings);
std::vector<double> per_row_losses_serial(const BinaryMatrix& data, const Matrix& scores,
                                          const Matrix& loadings);

/// Sum of per-row losses, accumulated in row order.
double total_loss(const BinaryMatrix& data, const Matrix& scores, const Matrix& loadings);
double total_loss_serial(const BinaryMatrix& data, const Matrix& scores,
                         const Matrix& loadings);

/// ||grad_a [h_t + gamma/2 ||a||^2]|| for every row (first-order residuals
/// of the score block).
std::vector<double> score_residual_norms(const BinaryMatrix& data, const Matrix& scores,
                                         const Matrix& loadings, double gamma);
std::vector<double> score_residual_norms_serial(const BinaryMatrix& data,
                                                const Matrix& scores,
                                                const Matrix& loadings, double gamma);

/// Residual norms of the loading block, one per column.
std::vector<double> loading_residual_norms(const BinaryMatrix& data, const Matrix& scores,
                                           const Matrix& loadings, double lambda);
std::vector<double> loading_residual_norms_serial(const BinaryMatrix& data,
                                                  const Matrix& scores,
                                                  const Matrix& loadings, double lambda);

/// sigma(A V^T) elementwise: the Bernoulli success probabilities.
Matrix link_probabilities(const Matrix& scores, const Matrix& loadings);
Matrix link_probabilities_serial(const Matrix& scores, const Matrix& loadings);

/// Prefix curve (1/t) sum_{s<=t} h_s(score_s, V^t) for t = 1..N. Needs the
/// trace snapshots; the final loadings stand in for V^N.
std::vector<double> sequential_prefix_curve(const BinaryMatrix& data,
                                            const StreamTrace& trace,
                                            const Matrix& final_loadings);
std::vector<double> sequential_prefix_curve_serial(const BinaryMatrix& data,
                                                   const StreamTrace& trace,
                                                   const Matrix& final_loadings);

}  // namespace slpca::kernels

#endif  // SLPCA_KERNELS_HPP
