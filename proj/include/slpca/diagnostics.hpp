#ifndef SLPCA_DIAGNOSTICS_HPP
#define SLPCA_DIAGNOSTICS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slpca/batch.hpp"
#include "slpca/model.hpp"
#include "slpca/stream.hpp"

namespace slpca {

/// Average sequential loss (1/N) sum_t h_t(score_t, V^N), scores taken from
/// the trace as solved, never re-fit.
double sequential_loss(const StreamTrace& trace, const Matrix& final_loadings,
                       const BinaryMatrix& data);

/// Average regret (1/N) sum_t h_t(score_t, V^t): each row paired with the
/// loadings right after its own update.
double regret(const StreamTrace& trace);

/// Average surrogate loss (1/N) sum_t h~_t(score_t, V^N), each term anchored
/// at V^{t-1} with the recorded curvature. Requires snapshots.
double surrogate_loss(const StreamTrace& trace, const Matrix& final_loadings,
                      const BinaryMatrix& data);

/// Right-hand side of the finite-N regret-gap bound for the given schedule,
/// with the score-norm bound instantiated empirically.
double regret_gap_bound(const StepSchedule& schedule, double gamma,
                          double max_score_norm, std::size_t n);

struct BoundCheck {
  std::string name;
  bool applicable = true;
  bool pass = true;
  double bound = 0;     // right-hand side at the worst step
  double measured = 0;  // left-hand side at the worst step
  double margin = 0;    // bound - measured; negative means violated
  std::string note;
};

struct BoundCheckReport {
  std::vector<BoundCheck> checks;
  ScheduleKind schedule_kind = ScheduleKind::diminishing;
  double omega_hat = 0;  // max_t ||score_t||, the empirical certificate
  double omega_cap = 0;  // sqrt(2 P log2 / gamma), the a-priori certificate
  std::size_t n = 0;

  bool all_pass() const;
  const BoundCheck* find(const std::string& name) const;
};

/// Evaluates every per-step identity and bound over a complete run plus the
/// whole-run orderings. `batch` may be null (its checks are then reported as
/// not applicable). Failures are reported, never thrown.
BoundCheckReport check_all_bounds(const StreamTrace& trace, const Matrix& final_loadings,
                                  const BinaryMatrix& data, const StepSchedule& schedule,
                                  const Hyperparams& hp,
                                  const BatchFitReport* batch = nullptr);

struct PhaseCurves {
  std::vector<double> batch;       // C_t
  std::vector<double> sequential;  // Chat_t
  std::vector<double> regret;      // Regret_t
};

/// Prefix curves of the three functionals. The batch curve reuses the
/// full-data fit (prefix means of its per-row losses); pass refit_per_prefix
/// to refit the batch model on every prefix instead (quadratic cost, small N
/// only). The sequential curve needs snapshots.
PhaseCurves phase_curves(const StreamTrace& trace, const BinaryMatrix& data,
                         const FactorModel& batch_model, const Matrix& final_loadings,
                         bool refit_per_prefix = false,
                         const Hyperparams* refit_hp = nullptr,
                         std::uint64_t refit_seed = 1234);

struct EvaluationReport {
  double batch_loss = 0;
  double sequential_loss = 0;
  double regret = 0;
  std::optional<double> surrogate_loss;
  double max_score_norm = 0;
  double gap = 0;        // |regret - sequential_loss|
  double gap_bound = 0;  // schedule-appropriate right-hand side
  PhaseCurves curves;
  std::size_t n = 0;
  ScheduleKind schedule_kind = ScheduleKind::diminishing;
};

/// Full evaluation of a run: scalars, gap bound and the three curves.
/// Requires snapshots (surrogate loss and the sequential curve need them).
EvaluationReport evaluate_run(const StreamTrace& trace, const Matrix& final_loadings,
                              const BinaryMatrix& data, const BatchFitReport& batch,
                              const StepSchedule& schedule, const Hyperparams& hp,
                              bool refit_per_prefix = false);

}  // namespace slpca

#endif  // SLPCA_DIAGNOSTICS_HPP
