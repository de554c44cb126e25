#include "slpca/kernels.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

#include "slpca/loss.hpp"

namespace slpca::kernels {

namespace {

/// Runs f(i) for i in [0, n), in parallel. Exceptions are captured and the
/// first message is rethrown after the loop (throwing across an OpenMP
/// region terminates the process).
template <typename F>
void parallel_for(std::int64_t n, F&& f) {
  bool failed = false;
  std::string message;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (const std::exception& e) {
#pragma omp critical
      {
        if (!failed) {
          failed = true;
          message = e.what();
        }
      }
    }
  }
  if (failed) throw std::runtime_error(message);
}

std::vector<double> signed_column(const BinaryMatrix& data, std::size_t j) {
  std::vector<double> s(data.rows());
  for (std::size_t t = 0; t < data.rows(); ++t) s[t] = data(t, j) ? 1.0 : -1.0;
  return s;
}

}  // namespace

SweepResult solve_score_rows(const BinaryMatrix& data, const Matrix& loadings,
                             double gamma, const Hyperparams& hp) {
  const std::int64_t n = static_cast<std::int64_t>(data.rows());
  SweepResult out{Matrix(data.rows(), loadings.cols()), std::vector<NewtonReport>(data.rows())};
  parallel_for(n, [&](std::int64_t t) {
    auto report = solve_row(data.signed_row(t), loadings, gamma, hp);
    auto dst = out.solutions.row(t);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = report.solution[k];
    out.reports[t] = std::move(report);
  });
  return out;
}

SweepResult solve_score_rows_serial(const BinaryMatrix& data, const Matrix& loadings,
                                    double gamma, const Hyperparams& hp) {
  SweepResult out{Matrix(data.rows(), loadings.cols()), std::vector<NewtonReport>(data.rows())};
  for (std::size_t t = 0; t < data.rows(); ++t) {
    auto report = solve_row(data.signed_row(t), loadings, gamma, hp);
    auto dst = out.solutions.row(t);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = report.solution[k];
    out.reports[t] = std::move(report);
  }
  return out;
}

SweepResult solve_loading_rows(const BinaryMatrix& data, const Matrix& scores,
                               double lambda, const Hyperparams& hp) {
  const std::int64_t p = static_cast<std::int64_t>(data.cols());
  SweepResult out{Matrix(data.cols(), scores.cols()), std::vector<NewtonReport>(data.cols())};
  parallel_for(p, [&](std::int64_t j) {
    auto report = minimize_logistic_ridge(signed_column(data, j), scores, lambda, hp);
    auto dst = out.solutions.row(j);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = report.solution[k];
    out.reports[j] = std::move(report);
  });
  return out;
}

SweepResult solve_loading_rows_serial(const BinaryMatrix& data, const Matrix& scores,
                                      double lambda, const Hyperparams& hp) {
  SweepResult out{Matrix(data.cols(), scores.cols()), std::vector<NewtonReport>(data.cols())};
  for (std::size_t j = 0; j < data.cols(); ++j) {
    auto report = minimize_logistic_ridge(signed_column(data, j), scores, lambda, hp);
    auto dst = out.solutions.row(j);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = report.solution[k];
    out.reports[j] = std::move(report);
  }
  return out;
}

std::vector<double> per_row_losses(const BinaryMatrix& data, const Matrix& scores,
                                   const Matrix& loadings) {
  std::vector<double> losses(data.rows());
  parallel_for(static_cast<std::int64_t>(data.rows()), [&](std::int64_t t) {
    losses[t] = row_loss(data.signed_row(t), scores.row(t), loadings);
  });
  return losses;
}

std::vector<double> per_row_losses_serial(const BinaryMatrix& data, const Matrix& scores,
                                          const Matrix& loadings) {
  std::vector<double> losses(data.rows());
  for (std::size_t t = 0; t < data.rows(); ++t)
    losses[t] = row_loss(data.signed_row(t), scores.row(t), loadings);
  return losses;
}

double total_loss(const BinaryMatrix& data, const Matrix& scores, const Matrix& loadings) {
  const auto losses = per_row_losses(data, scores, loadings);
  double s = 0.0;
  for (double v : losses) s += v;
  return s;
}

double total_loss_serial(const BinaryMatrix& data, const Matrix& scores,
                         const Matrix& loadings) {
  const auto losses = per_row_losses_serial(data, scores, loadings);
  double s = 0.0;
  for (double v : losses) s += v;
  return s;
}

std::vector<double> score_residual_norms(const BinaryMatrix& data, const Matrix& scores,
                                         const Matrix& loadings, double gamma) {
  std::vector<double> res(data.rows());
  parallel_for(static_cast<std::int64_t>(data.rows()), [&](std::int64_t t) {
    auto g = row_gradients(data.signed_row(t), scores.row(t), loadings, gamma);
    res[t] = norm(g.grad_scores);
  });
  return res;
}

std::vector<double> score_residual_norms_serial(const BinaryMatrix& data,
                                                const Matrix& scores,
                                                const Matrix& loadings, double gamma) {
  std::vector<double> res(data.rows());
  for (std::size_t t = 0; t < data.rows(); ++t) {
    auto g = row_gradients(data.signed_row(t), scores.row(t), loadings, gamma);
    res[t] = norm(g.grad_scores);
  }
  return res;
}

namespace {

double loading_residual_one(const BinaryMatrix& data, const Matrix& scores,
                            const Matrix& loadings, double lambda, std::size_t j) {
  const std::size_t r = scores.cols();
  std::vector<double> grad(r, 0.0);
  const auto v = loadings.row(j);
  for (std::size_t t = 0; t < data.rows(); ++t) {
    const auto a = scores.row(t);
    const double xs = data(t, j) ? 1.0 : -1.0;
    const double coef = -xs * sigmoid(-xs * dot(a, v));
    for (std::size_t k = 0; k < r; ++k) grad[k] += coef * a[k];
  }
  for (std::size_t k = 0; k < r; ++k) grad[k] += lambda * v[k];
  return norm(grad);
}

}  // namespace

std::vector<double> loading_residual_norms(const BinaryMatrix& data, const Matrix& scores,
                                           const Matrix& loadings, double lambda) {
  std::vector<double> res(data.cols());
  parallel_for(static_cast<std::int64_t>(data.cols()), [&](std::int64_t j) {
    res[j] = loading_residual_one(data, scores, loadings, lambda, j);
  });
  return res;
}

std::vector<double> loading_residual_norms_serial(const BinaryMatrix& data,
                                                  const Matrix& scores,
                                                  const Matrix& loadings, double lambda) {
  std::vector<double> res(data.cols());
  for (std::size_t j = 0; j < data.cols(); ++j)
    res[j] = loading_residual_one(data, scores, loadings, lambda, j);
  return res;
}

Matrix link_probabilities(const Matrix& scores, const Matrix& loadings) {
  Matrix probs(scores.rows(), loadings.rows());
  parallel_for(static_cast<std::int64_t>(scores.rows()), [&](std::int64_t t) {
    const auto a = scores.row(t);
    auto dst = probs.row(t);
    for (std::size_t j = 0; j < loadings.rows(); ++j)
      dst[j] = sigmoid(dot(a, loadings.row(j)));
  });
  return probs;
}

Matrix link_probabilities_serial(const Matrix& scores, const Matrix& loadings) {
  Matrix probs(scores.rows(), loadings.rows());
  for (std::size_t t = 0; t < scores.rows(); ++t) {
    const auto a = scores.row(t);
    auto dst = probs.row(t);
    for (std::size_t j = 0; j < loadings.rows(); ++j)
      dst[j] = sigmoid(dot(a, loadings.row(j)));
  }
  return probs;
}

namespace {

double prefix_mean_at(const BinaryMatrix& data, const StreamTrace& trace,
                      const Matrix& final_loadings, std::size_t t) {
  const Matrix& vt = trace.loadings_after(t, final_loadings);
  double s = 0.0;
  for (std::size_t i = 0; i < t; ++i)
    s += row_loss(data.signed_row(i), trace.steps[i].score, vt);
  return s / static_cast<double>(t);
}

}  // namespace

std::vector<double> sequential_prefix_curve(const BinaryMatrix& data,
                                            const StreamTrace& trace,
                                            const Matrix& final_loadings) {
  if (trace.size() != data.rows())
    throw std::invalid_argument("sequential_prefix_curve: trace/data length mismatch");
  std::vector<double> curve(trace.size());
  bool failed = false;
  std::string message;
  // dynamic schedule: the per-index work grows linearly with t
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t t = 1; t <= static_cast<std::int64_t>(trace.size()); ++t) {
    try {
      curve[t - 1] = prefix_mean_at(data, trace, final_loadings, t);
    } catch (const std::exception& e) {
#pragma omp critical
      {
        if (!failed) {
          failed = true;
          message = e.what();
        }
      }
    }
  }
  if (failed) throw std::runtime_error(message);
  return curve;
}

std::vector<double> sequential_prefix_curve_serial(const BinaryMatrix& data,
                                                   const StreamTrace& trace,
                                                   const Matrix& final_loadings) {
  if (trace.size() != data.rows())
    throw std::invalid_argument("sequential_prefix_curve: trace/data length mismatch");
  std::vector<double> curve(trace.size());
  for (std::size_t t = 1; t <= trace.size(); ++t)
    curve[t - 1] = prefix_mean_at(data, trace, final_loadings, t);
  return curve;
}

}  // namespace slpca::kernels
