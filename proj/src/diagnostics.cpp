#include "slpca/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "slpca/kernels.hpp"
#include "slpca/loss.hpp"

namespace slpca {

namespace {

constexpr double kEqualityRelTol = 1e-8;    // per-step identities
constexpr double kIdentityAbsTol = 1e-10;   // adjoint identity
constexpr double kInequalitySlack = 1e-12;  // hard inequalities
constexpr double kOrderingSlack = 1e-6;     // loss-functional ordering (solver slack)

void check_trace_matches_data(const StreamTrace& trace, const BinaryMatrix& data,
                              const char* what) {
  if (trace.size() != data.rows())
    throw std::invalid_argument(std::string(what) + ": trace covers " +
                                std::to_string(trace.size()) + " rows, data has " +
                                std::to_string(data.rows()));
}

}  // namespace

double sequential_loss(const StreamTrace& trace, const Matrix& final_loadings,
                       const BinaryMatrix& data) {
  check_trace_matches_data(trace, data, "sequential_loss");
  if (trace.size() == 0) return 0.0;
  double s = 0.0;
  for (std::size_t t = 0; t < trace.size(); ++t)
    s += row_loss(data.signed_row(t), trace.steps[t].score, final_loadings);
  return s / static_cast<double>(trace.size());
}

double regret(const StreamTrace& trace) {
  if (trace.size() == 0) return 0.0;
  double s = 0.0;
  for (const auto& step : trace.steps) s += step.post_update_loss;
  return s / static_cast<double>(trace.size());
}

double surrogate_loss(const StreamTrace& trace, const Matrix& final_loadings,
                      const BinaryMatrix& data) {
  check_trace_matches_data(trace, data, "surrogate_loss");
  if (trace.size() == 0) return 0.0;
  double s = 0.0;
  for (std::size_t t = 1; t <= trace.size(); ++t) {
    const auto& step = trace.steps[t - 1];
    const Matrix& anchor_loadings = trace.loadings_before(t);
    auto anchor = make_surrogate_anchor(data.signed_row(t - 1), step.score, anchor_loadings);
    anchor.curvature = step.curvature;
    s += surrogate_value(anchor, final_loadings);
  }
  return s / static_cast<double>(trace.size());
}

double regret_gap_bound(const StepSchedule& schedule, double gamma,
                          double max_score_norm, std::size_t n) {
  const double omega_sq = max_score_norm * max_score_norm;
  const double c = schedule.constant;
  if (schedule.kind == ScheduleKind::constant) return gamma * omega_sq + c * omega_sq;
  if (n == 0) throw std::invalid_argument("regret_gap_bound: n must be >= 1");
  const double dn = static_cast<double>(n);
  const double log_n = std::log(dn);
  const double sqrt_n = std::sqrt(dn);
  return 0.5 * omega_sq * c * log_n / dn + 0.25 * omega_sq * c * log_n / sqrt_n +
         omega_sq * (2.0 * gamma + c) / (2.0 * sqrt_n) + 0.5 * gamma * omega_sq;
}

bool BoundCheckReport::all_pass() const {
  for (const auto& c : checks)
    if (c.applicable && !c.pass) return false;
  return true;
}

const BoundCheck* BoundCheckReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

/// Tracks the worst (smallest-margin) step of one inequality or identity.
struct WorstCase {
  double margin = std::numeric_limits<double>::infinity();
  double bound = 0;
  double measured = 0;
  bool seen = false;

  void update(double b, double m) {
    seen = true;
    if (b - m < margin) {
      margin = b - m;
      bound = b;
      measured = m;
    }
  }

  BoundCheck finish(const std::string& name, const std::string& note = "") const {
    BoundCheck c;
    c.name = name;
    c.note = note;
    if (!seen) {
      c.applicable = false;
      c.note = note.empty() ? "not applicable" : note;
      return c;
    }
    c.bound = bound;
    c.measured = measured;
    c.margin = margin;
    c.pass = margin >= 0.0;
    return c;
  }
};

BoundCheck inapplicable(const std::string& name, const std::string& note) {
  BoundCheck c;
  c.name = name;
  c.applicable = false;
  c.pass = true;
  c.note = note;
  return c;
}

}  // namespace

BoundCheckReport check_all_bounds(const StreamTrace& trace, const Matrix& final_loadings,
                                  const BinaryMatrix& data, const StepSchedule& schedule,
                                  const Hyperparams& hp, const BatchFitReport* batch) {
  check_trace_matches_data(trace, data, "check_all_bounds");
  BoundCheckReport report;
  report.schedule_kind = schedule.kind;
  report.n = trace.size();
  report.omega_hat = trace.max_score_norm();
  report.omega_cap =
      std::sqrt(2.0 * static_cast<double>(data.cols()) * std::log(2.0) / hp.gamma);

  const char* kNames[] = {"schedule_consistency", "trace_consistency", "grad_row_bound",
                          "grad_matrix_bound",     "hessian_curvature_bound",    "update_step_equality",
                          "update_step_bound",         "update_step_certificate",      "adjoint_identity",
                          "ridge_step_identity",     "loading_growth_bound",       "score_bound",
                          "loss_ordering",        "regret_gap"};
  if (trace.size() == 0) {
    for (const char* name : kNames) report.checks.push_back(inapplicable(name, "empty trace"));
    return report;
  }

  const double omega = report.omega_hat;
  const double p = static_cast<double>(data.cols());
  const double score_cap = 2.0 * p * std::log(2.0) / hp.gamma;

  WorstCase schedule_ok, consistency, grad_row, grad_matrix, hess_bound, step_eq, step_bound,
      step_cert, adjoint, ridge_identity, growth, score_bound;

  double sum_eta = 0.0;
  double sum_eta_sq = 0.0;
  const double v0_norm_sq = trace.has_snapshots ? trace.loadings_before(1).frobenius_norm_sq() : 0.0;

  for (std::size_t t = 1; t <= trace.size(); ++t) {
    const auto& step = trace.steps[t - 1];
    const double eta = schedule.at(static_cast<long>(t));
    sum_eta += eta;
    sum_eta_sq += eta * eta;

    // stored step size must come from the schedule under test
    schedule_ok.update(kEqualityRelTol,
                       std::abs(step.eta - eta) / std::max(eta, 1e-300));

    score_bound.update(score_cap * (1.0 + 1e-9), step.score_norm * step.score_norm);
    step_cert.update(eta * omega + kInequalitySlack, step.loading_delta_norm);
    growth.update(v0_norm_sq + omega * omega * sum_eta_sq +
                       2.0 * hp.gamma * omega * omega * sum_eta + kInequalitySlack,
                   step.loading_norm_sq);

    if (!trace.has_snapshots) continue;

    const Matrix& anchor = trace.loadings_before(t);
    const Matrix& after = trace.loadings_after(t, final_loadings);
    const auto x_signed = data.signed_row(t - 1);
    const auto g = row_gradients(x_signed, step.score, anchor, 0.0);

    // recomputed quantities must agree with the stored trace
    const double scale = std::max({1.0, g.loss, step.score_norm});
    consistency.update(kEqualityRelTol * scale,
                       std::max({std::abs(g.loss - step.loss_at_anchor),
                                 std::abs(g.grad_loadings.frobenius_norm() - step.grad_norm),
                                 std::abs(norm(step.score) - step.score_norm),
                                 std::abs(default_curvature(step.score) - step.curvature),
                                 std::abs(after.frobenius_norm_sq() - step.loading_norm_sq)}));

    double row_max = 0.0;
    double w_max = 0.0;
    for (std::size_t j = 0; j < anchor.rows(); ++j) {
      row_max = std::max(row_max, norm(g.grad_loadings.row(j)));
      const double z = -x_signed[j] * dot(step.score, anchor.row(j));
      w_max = std::max(w_max, sigmoid(z) * sigmoid(-z));
    }
    const double grad_full = g.grad_loadings.frobenius_norm();

    // per-row form: each loading-row gradient is at most sigma * ||score||
    grad_row.update(step.score_norm + kInequalitySlack, row_max);
    // whole-matrix form carries the extra sqrt(P) factor
    grad_matrix.update(std::sqrt(p) * step.score_norm + kInequalitySlack, grad_full);
    hess_bound.update(0.25 + kInequalitySlack, w_max);

    // the update is exactly a gradient step: ||V^t - V^{t-1}|| = eta ||grad||.
    // Recovering the delta from the stored matrices cancels catastrophically
    // when eta*grad is far below the loading scale, hence the rounding floor.
    const double eps = std::numeric_limits<double>::epsilon();
    const double actual_delta = frobenius_distance(after, anchor);
    const double expected_delta = eta * grad_full;
    step_eq.update(kEqualityRelTol * expected_delta + 8.0 * eps * (1.0 + anchor.frobenius_norm()),
                   std::abs(actual_delta - expected_delta));
    step_bound.update(eta * std::sqrt(p) * step.score_norm + kInequalitySlack, actual_delta);

    // adjoint identity <a, grad_a h> = <V, grad_V h>
    const double lhs_id = dot(step.score, g.grad_scores);
    const double rhs_id = frobenius_inner(anchor, g.grad_loadings);
    adjoint.update(kIdentityAbsTol * std::max({1.0, std::abs(lhs_id), std::abs(rhs_id)}),
                       std::abs(lhs_id - rhs_id));

    // <V^{t-1}, V^t - V^{t-1}> = eta * gamma * ||score||^2 at the row optimum
    const double rhs_cor = eta * hp.gamma * norm_sq(step.score);
    double lhs_cor = 0.0;
    for (std::size_t i = 0; i < anchor.storage().size(); ++i)
      lhs_cor += anchor.storage()[i] * (after.storage()[i] - anchor.storage()[i]);
    ridge_identity.update(
        kEqualityRelTol * rhs_cor + 32.0 * eps * (1.0 + anchor.frobenius_norm_sq()),
        std::abs(lhs_cor - rhs_cor));
  }

  const std::string snap_note = "needs loading snapshots";
  report.checks.push_back(schedule_ok.finish("schedule_consistency"));
  report.checks.push_back(trace.has_snapshots ? consistency.finish("trace_consistency")
                                              : inapplicable("trace_consistency", snap_note));
  report.checks.push_back(trace.has_snapshots ? grad_row.finish("grad_row_bound")
                                              : inapplicable("grad_row_bound", snap_note));
  report.checks.push_back(trace.has_snapshots ? grad_matrix.finish("grad_matrix_bound")
                                              : inapplicable("grad_matrix_bound", snap_note));
  report.checks.push_back(trace.has_snapshots ? hess_bound.finish("hessian_curvature_bound")
                                              : inapplicable("hessian_curvature_bound", snap_note));
  report.checks.push_back(trace.has_snapshots ? step_eq.finish("update_step_equality")
                                              : inapplicable("update_step_equality", snap_note));
  report.checks.push_back(trace.has_snapshots ? step_bound.finish("update_step_bound")
                                              : inapplicable("update_step_bound", snap_note));
  report.checks.push_back(step_cert.finish("update_step_certificate"));
  report.checks.push_back(trace.has_snapshots ? adjoint.finish("adjoint_identity")
                                              : inapplicable("adjoint_identity", snap_note));
  report.checks.push_back(trace.has_snapshots ? ridge_identity.finish("ridge_step_identity")
                                              : inapplicable("ridge_step_identity", snap_note));
  report.checks.push_back(growth.finish(
      "loading_growth_bound", trace.has_snapshots ? "" : "initial-loading norm taken as 0"));
  report.checks.push_back(score_bound.finish("score_bound"));

  // whole-run orderings
  if (trace.has_snapshots) {
    const double c_seq = sequential_loss(trace, final_loadings, data);
    const double c_sur = surrogate_loss(trace, final_loadings, data);
    WorstCase ordering;
    ordering.update(c_sur + kOrderingSlack, c_seq);
    if (batch != nullptr) {
      const double c_batch = batch_loss(batch->model, data);
      ordering.update(c_seq + kOrderingSlack, c_batch);
      report.checks.push_back(ordering.finish("loss_ordering"));
    } else {
      report.checks.push_back(
          ordering.finish("loss_ordering", "no batch fit given; batch leg skipped"));
    }
  } else {
    report.checks.push_back(inapplicable("loss_ordering", snap_note));
  }

  {
    const double c_seq = sequential_loss(trace, final_loadings, data);
    const double gap = std::abs(regret(trace) - c_seq);
    WorstCase gap_check;
    gap_check.update(regret_gap_bound(schedule, hp.gamma, omega, trace.size()), gap);
    report.checks.push_back(gap_check.finish("regret_gap"));
  }

  return report;
}

PhaseCurves phase_curves(const StreamTrace& trace, const BinaryMatrix& data,
                         const FactorModel& batch_model, const Matrix& final_loadings,
                         bool refit_per_prefix, const Hyperparams* refit_hp,
                         std::uint64_t refit_seed) {
  check_trace_matches_data(trace, data, "phase_curves");
  PhaseCurves curves;
  const std::size_t n = trace.size();
  if (n == 0) return curves;

  if (refit_per_prefix) {
    Hyperparams hp = refit_hp ? *refit_hp : Hyperparams{};
    curves.batch.resize(n);
    for (std::size_t t = 1; t <= n; ++t) {
      auto fit = fit_batch(data.top_rows(t), batch_model.rank(), hp, 500, 1e-8, refit_seed);
      curves.batch[t - 1] = fit.batch_loss;
    }
  } else {
    const auto losses = kernels::per_row_losses(data, batch_model.scores, batch_model.loadings);
    curves.batch.resize(n);
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += losses[t];
      curves.batch[t] = acc / static_cast<double>(t + 1);
    }
  }

  curves.sequential = kernels::sequential_prefix_curve(data, trace, final_loadings);

  curves.regret.resize(n);
  double acc = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    acc += trace.steps[t].post_update_loss;
    curves.regret[t] = acc / static_cast<double>(t + 1);
  }
  return curves;
}

EvaluationReport evaluate_run(const StreamTrace& trace, const Matrix& final_loadings,
                              const BinaryMatrix& data, const BatchFitReport& batch,
                              const StepSchedule& schedule, const Hyperparams& hp,
                              bool refit_per_prefix) {
  EvaluationReport report;
  report.n = trace.size();
  report.schedule_kind = schedule.kind;
  report.batch_loss = batch_loss(batch.model, data);
  report.sequential_loss = sequential_loss(trace, final_loadings, data);
  report.regret = regret(trace);
  report.surrogate_loss = surrogate_loss(trace, final_loadings, data);
  report.max_score_norm = trace.max_score_norm();
  report.gap = std::abs(report.regret - report.sequential_loss);
  report.gap_bound = regret_gap_bound(schedule, hp.gamma, report.max_score_norm,
                                        std::max<std::size_t>(report.n, 1));
  report.curves = phase_curves(trace, data, batch.model, final_loadings, refit_per_prefix,
                               &hp);
  return report;
}

}  // namespace slpca
