#include "slpca/stream.hpp"

#include <stdexcept>
#include <string>

#include "slpca/loss.hpp"
#include "slpca/newton.hpp"
#include "slpca/rng.hpp"

namespace slpca {

const Matrix& StreamTrace::loadings_before(std::size_t t) const {
  if (!has_snapshots)
    throw std::runtime_error(
        "StreamTrace: loading snapshots were not retained; re-run the stream with "
        "snapshots enabled");
  if (t < 1 || t > anchors.size())
    throw std::out_of_range("StreamTrace::loadings_before: step out of range");
  return anchors[t - 1];
}

const Matrix& StreamTrace::loadings_after(std::size_t t, const Matrix& final_loadings) const {
  if (t < 1 || t > steps.size())
    throw std::out_of_range("StreamTrace::loadings_after: step out of range");
  if (t == steps.size()) return final_loadings;
  return loadings_before(t + 1);
}

double StreamTrace::max_score_norm() const {
  double m = 0.0;
  for (const auto& s : steps) m = std::max(m, s.score_norm);
  return m;
}

StreamState init_stream(std::size_t p, std::size_t rank, const StepSchedule& schedule,
                        const Hyperparams& params, std::uint64_t seed) {
  if (p < 1 || rank < 1) throw std::invalid_argument("init_stream: need p >= 1 and rank >= 1");
  params.validate();
  StreamState state;
  state.loadings = Matrix(p, rank);
  Rng rng(seed);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = 0; k < rank; ++k) state.loadings(j, k) = rng.uniform(-1e-2, 1e-2);
  state.schedule = schedule;
  state.params = params;
  return state;
}

StreamStep process_row(StreamState& state, std::span<const std::uint8_t> x) {
  const std::size_t p = state.loadings.rows();
  if (x.size() != p)
    throw std::invalid_argument("process_row: row length " + std::to_string(x.size()) +
                                " != " + std::to_string(p));
  std::vector<double> x_signed(p);
  for (std::size_t j = 0; j < p; ++j) {
    if (x[j] > 1)
      throw std::domain_error("process_row: entry at index " + std::to_string(j) +
                              " is not 0 or 1");
    x_signed[j] = x[j] ? 1.0 : -1.0;
  }

  const long t = state.step_index + 1;
  auto solved = solve_row(x_signed, state.loadings, state.params.gamma, state.params);
  const double eta = state.schedule.at(t);
  auto g = row_gradients(x_signed, solved.solution, state.loadings, 0.0);

  StreamStep rec;
  rec.t = t;
  rec.eta = eta;
  rec.curvature = default_curvature(solved.solution);
  rec.loss_at_anchor = g.loss;
  rec.grad_norm = g.grad_loadings.frobenius_norm();
  rec.score_norm = norm(solved.solution);
  rec.loading_delta_norm = eta * rec.grad_norm;
  rec.solver_converged = solved.converged;
  rec.score = std::move(solved.solution);

  add_scaled(state.loadings.storage(), -eta, g.grad_loadings.storage());
  if (!state.loadings.all_finite())
    throw std::runtime_error("process_row: loadings became non-finite at step " +
                             std::to_string(t));
  rec.loading_norm_sq = state.loadings.frobenius_norm_sq();
  rec.post_update_loss = row_loss(x_signed, rec.score, state.loadings);
  state.step_index = t;
  return rec;
}

StreamTrace run_stream(StreamState& state, const BinaryMatrix& data, bool snapshots) {
  if (data.rows() > 0 && data.cols() != state.loadings.rows())
    throw std::invalid_argument("run_stream: data column count does not match loadings");
  StreamTrace trace;
  trace.has_snapshots = snapshots;
  trace.steps.reserve(data.rows());
  if (snapshots) trace.anchors.reserve(data.rows());
  for (std::size_t t = 0; t < data.rows(); ++t) {
    if (snapshots) trace.anchors.push_back(state.loadings);
    trace.steps.push_back(process_row(state, data.row(t)));
  }
  return trace;
}

}  // namespace slpca
