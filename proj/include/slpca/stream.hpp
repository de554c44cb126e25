#ifndef SLPCA_STREAM_HPP
#define SLPCA_STREAM_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "slpca/matrix.hpp"
#include "slpca/model.hpp"

namespace slpca {

/// One per-arrival trace record. All norms are Frobenius.
struct StreamStep {
  long t = 0;                      // 1-based arrival index
  std::vector<double> score;       // solved score row
  double eta = 0;                  // step size used
  double curvature = 0;            // (1/4) ||score||^2
  double loss_at_anchor = 0;       // h_t(score, V^{t-1})
  double post_update_loss = 0;     // h_t(score, V^t)
  double grad_norm = 0;            // ||grad_V h_t|| at the anchor
  double score_norm = 0;
  double loading_norm_sq = 0;      // ||V^t||^2 after the update
  double loading_delta_norm = 0;   // eta * grad_norm (the update is a pure gradient step)
  bool solver_converged = true;
};

/// Complete record of one stream run. When snapshots are enabled, anchors[i]
/// holds the loadings *before* step i+1 (anchors[0] is the initial matrix).
struct StreamTrace {
  std::vector<StreamStep> steps;
  bool has_snapshots = false;
  std::vector<Matrix> anchors;

  std::size_t size() const { return steps.size(); }

  /// Loadings before step t (1-based). Requires snapshots.
  const Matrix& loadings_before(std::size_t t) const;

  /// Loadings after step t (1-based); the caller supplies the final matrix
  /// for t == N. Requires snapshots for t < N.
  const Matrix& loadings_after(std::size_t t, const Matrix& final_loadings) const;

  /// Largest score norm seen so far (0 for an empty trace).
  double max_score_norm() const;
};

struct StreamState {
  Matrix loadings;  // P x r
  long step_index = 0;
  StepSchedule schedule;
  Hyperparams params;
};

/// Fresh stream with loadings drawn uniformly from [-1e-2, 1e-2] (norm close
/// to, but not exactly, zero -- zero is a fixed point of the update).
StreamState init_stream(std::size_t p, std::size_t rank, const StepSchedule& schedule,
                        const Hyperparams& params, std::uint64_t seed);

/// Processes one {0,1} arrival: solves the score row against the current
/// loadings, then takes the gradient step on the loadings. Solver
/// non-convergence is flagged on the record; the stream continues.
StreamStep process_row(StreamState& state, std::span<const std::uint8_t> x);

/// Runs all rows of `data` in arrival order.
StreamTrace run_stream(StreamState& state, const BinaryMatrix& data, bool snapshots);

}  // namespace slpca

#endif  // SLPCA_STREAM_HPP
