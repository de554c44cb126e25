// Acceptance suite: one criterion per section, one PASS/FAIL line each,
// nonzero exit when anything fails. Criteria 9 and 10 drive the installed
// CLI binary end to end; everything else exercises the library directly.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "oracles.hpp"
#include "slpca/batch.hpp"
#include "slpca/diagnostics.hpp"
#include "slpca/io.hpp"
#include "slpca/kernels.hpp"
#include "slpca/loss.hpp"
#include "slpca/reconstruct.hpp"
#include "slpca/simgen.hpp"
#include "slpca/stream.hpp"

using namespace slpca;
namespace fs = std::filesystem;

namespace {

constexpr double kLog2 = 0.6931471805599453;

int failures = 0;

struct Criterion {
  int id;
  std::string label;
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }

  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }

  ~Criterion() {
    std::printf("criterion %2d %-4s %s%s%s\n", id, ok ? "PASS" : "FAIL", label.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++failures;
  }
};

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string(SLPCA_CLI_PATH) + " " + args + " >> " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct StreamRun {
  BinaryMatrix data;
  StreamTrace trace;
  Matrix final_loadings;
  StepSchedule schedule;
  Hyperparams hp;
  double seconds = 0;
};

/// Simulated configuration: P=8, N=1000, r=1, gamma=0.1.
StreamRun paper_stream(ScheduleKind kind, double c) {
  StreamRun run;
  CorrelatedBernoulliSpec spec;  // defaults: P=8, N=1000, p=0.5, mix=0.7
  spec.seed = 42;
  run.data = gen_correlated_bernoulli(spec);
  run.hp.gamma = 0.1;
  run.schedule = StepSchedule{kind, c};
  const auto start = std::chrono::steady_clock::now();
  auto state = init_stream(spec.dims, 1, run.schedule, run.hp, 7);
  run.trace = run_stream(state, run.data, true);
  run.seconds = seconds_since(start);
  run.final_loadings = state.loadings;
  return run;
}

void criterion1_gradients() {
  Criterion c{1, "gradient correctness vs central finite differences"};
  const auto start = std::chrono::steady_clock::now();
  Rng rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = trial % 2 == 0 ? 8 : 1;
    const std::size_t r = trial % 4 < 2 ? 1 : 2;
    const auto inst = testing::random_instance(rng, p, r);
    const auto g = row_gradients(inst.x_signed, inst.scores, inst.loadings, 0.0);
    const auto fd_a = testing::fd_grad_scores(inst.x_signed, inst.scores, inst.loadings);
    const auto fd_v = testing::fd_grad_loadings(inst.x_signed, inst.scores, inst.loadings);
    for (std::size_t k = 0; k < r; ++k)
      worst = std::max(worst, std::abs(g.grad_scores[k] - fd_a[k]) /
                                  std::max(1.0, std::abs(g.grad_scores[k])));
    for (std::size_t i = 0; i < fd_v.storage().size(); ++i)
      worst = std::max(worst, std::abs(g.grad_loadings.storage()[i] - fd_v.storage()[i]) /
                                  std::max(1.0, std::abs(g.grad_loadings.storage()[i])));
  }
  const double elapsed = seconds_since(start);
  c.require(worst < 1e-5, "worst relative error " + fmt(worst));
  c.require(elapsed < 1.0, "runtime " + fmt(elapsed) + "s");
  c.note("worst rel err " + fmt(worst) + ", " + fmt(elapsed) + "s");
}

void criterion2_inequalities(const StreamRun& dim_run) {
  Criterion c{2, "inequality suite on random instances and the streaming run"};
  const auto start = std::chrono::steady_clock::now();

  Rng rng(2002);
  double worst_margin = 1e300;
  double worst_identity = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t p = trial % 2 == 0 ? 8 : 1;
    const std::size_t r = trial % 4 < 2 ? 1 : 2;
    const auto inst = testing::random_instance(rng, p, r);
    const auto g = row_gradients(inst.x_signed, inst.scores, inst.loadings, 0.0);
    const double score_norm = norm(inst.scores);
    for (std::size_t j = 0; j < p; ++j) {
      // gradient-norm bound, per loading row
      worst_margin = std::min(worst_margin, score_norm - norm(g.grad_loadings.row(j)));
      // Hessian operator-norm bound via max_j s_j (1 - s_j)
      const double z = -inst.x_signed[j] * dot(inst.scores, inst.loadings.row(j));
      worst_margin = std::min(worst_margin, (0.25 - sigmoid_prime(z)) * score_norm * score_norm);
    }
    worst_identity = std::max(
        worst_identity, std::abs(dot(inst.scores, g.grad_scores) -
                                 frobenius_inner(inst.loadings, g.grad_loadings)));
  }
  c.require(worst_margin >= -1e-10, "bound margin " + fmt(worst_margin));
  c.require(worst_identity <= 1e-10, "identity residual " + fmt(worst_identity));

  const auto report = check_all_bounds(dim_run.trace, dim_run.final_loadings, dim_run.data,
                                       dim_run.schedule, dim_run.hp);
  for (const char* name : {"update_step_equality", "update_step_bound", "ridge_step_identity", "loading_growth_bound",
                           "score_bound"}) {
    const auto* chk = report.find(name);
    c.require(chk != nullptr && chk->applicable && chk->pass,
              std::string(name) + (chk ? " margin " + fmt(chk->margin) : " missing"));
  }
  const double elapsed = seconds_since(start);
  c.require(elapsed < 5.0, "runtime " + fmt(elapsed) + "s");
  c.note(fmt(elapsed) + "s");
}

void criterion3_majorization(const StreamRun& dim_run) {
  Criterion c{3, "surrogate majorization, pointwise and summed"};
  Rng rng(3003);
  double worst = 1e300;
  for (int anchor_idx = 0; anchor_idx < 50; ++anchor_idx) {
    const auto inst = testing::random_instance(rng, 8, 1);
    const auto anchor = make_surrogate_anchor(inst.x_signed, inst.scores, inst.loadings);
    for (int sample = 0; sample < 100; ++sample) {
      Matrix v = inst.loadings;
      for (auto& entry : v.storage()) entry += rng.uniform(-0.5, 0.5);
      worst = std::min(worst,
                       surrogate_value(anchor, v) - row_loss(inst.x_signed, inst.scores, v));
    }
  }
  c.require(worst >= -1e-9, "worst surrogate-loss margin " + fmt(worst));

  const double seq = sequential_loss(dim_run.trace, dim_run.final_loadings, dim_run.data);
  const double sur = surrogate_loss(dim_run.trace, dim_run.final_loadings, dim_run.data);
  c.require(sur >= seq - 1e-9, "Ctilde " + fmt(sur) + " < Chat " + fmt(seq));
  c.note("pointwise margin " + fmt(worst) + ", Ctilde-Chat " + fmt(sur - seq));
}

void criterion4_diminishing(const StreamRun& run, const BatchFitReport& batch) {
  Criterion c{4, "simulated config, diminishing schedule (P=8 N=1000 C=0.2 gamma=0.1)"};
  c.require(run.seconds < 10.0, "stream took " + fmt(run.seconds) + "s");

  const double c_batch = batch_loss(batch.model, run.data);
  const double c_seq = sequential_loss(run.trace, run.final_loadings, run.data);
  const double c_sur = surrogate_loss(run.trace, run.final_loadings, run.data);
  c.require(c_batch <= c_seq + 1e-6,
            "ordering C_N " + fmt(c_batch) + " > Chat_N " + fmt(c_seq));
  c.require(c_seq <= c_sur + 1e-6,
            "ordering Chat_N " + fmt(c_seq) + " > Ctilde_N " + fmt(c_sur));

  const double gap = std::abs(regret(run.trace) - c_seq);
  const double bound =
      regret_gap_bound(run.schedule, run.hp.gamma, run.trace.max_score_norm(),
                         run.trace.size());
  c.require(gap <= bound, "gap " + fmt(gap) + " > bound " + fmt(bound));

  const double first_loss = run.trace.steps.front().loss_at_anchor;
  c.require(std::abs(first_loss - 8 * kLog2) <= 0.01 * 8 * kLog2,
            "first-step loss " + fmt(first_loss));
  c.note("gap " + fmt(gap) + " <= " + fmt(bound) + ", first step " + fmt(first_loss));
}

void criterion5_constant(const StreamRun& run) {
  Criterion c{5, "simulated config, constant schedule (C=0.05 gamma=0.1)"};
  c.require(run.seconds < 10.0, "stream took " + fmt(run.seconds) + "s");
  const double omega = run.trace.max_score_norm();
  const double gap =
      std::abs(regret(run.trace) -
               sequential_loss(run.trace, run.final_loadings, run.data));
  const double bound = (run.hp.gamma + run.schedule.constant) * omega * omega;
  c.require(gap <= bound, "gap " + fmt(gap) + " > bound " + fmt(bound));
  c.note("gap " + fmt(gap) + " <= " + fmt(bound));
}

void criterion6_batch_monotone(const BatchFitReport& batch) {
  Criterion c{6, "batch alternation descends to first-order stationarity"};
  for (std::size_t i = 1; i < batch.objective_history.size(); ++i)
    c.require(batch.objective_history[i] <=
                  batch.objective_history[i - 1] + 1e-9 * batch.objective_history[i - 1],
              "objective rose at alternation " + std::to_string(i));
  c.require(batch.converged, "did not converge");
  c.require(batch.max_first_order_residual <= 1e-5,
            "residual " + fmt(batch.max_first_order_residual));
  c.note("alternations " + std::to_string(batch.alternations) + ", residual " +
         fmt(batch.max_first_order_residual));
}

void criterion7_planted() {
  Criterion c{7, "planted rank-1 recovery"};
  const auto start = std::chrono::steady_clock::now();
  Hyperparams hp;

  const auto soft = gen_planted_lowrank(200, 8, 1, 4.0, 4242);
  const auto soft_fit = fit_batch(soft.data, 1, hp);
  const double soft_err = hamming_error(reconstruct_batch(soft_fit.model).states, soft.data);
  c.require(soft_err <= 0.05, "|theta|>=4 error " + fmt(soft_err));

  const auto hard = gen_planted_lowrank(200, 8, 1, 50.0, 4242);
  const auto hard_fit = fit_batch(hard.data, 1, hp);
  const double hard_err = hamming_error(reconstruct_batch(hard_fit.model).states, hard.data);
  c.require(hard_err == 0.0, "|theta|>=50 error " + fmt(hard_err));

  const double elapsed = seconds_since(start);
  c.require(elapsed < 5.0, "runtime " + fmt(elapsed) + "s");
  c.note("errors " + fmt(soft_err) + " / " + fmt(hard_err) + ", " + fmt(elapsed) + "s");
}

void criterion8_generator() {
  Criterion c{8, "correlated-Bernoulli generator calibration"};
  CorrelatedBernoulliSpec spec;
  spec.length = 10000;
  spec.seed = 808;
  const auto data = gen_correlated_bernoulli(spec);
  const double n = static_cast<double>(spec.length);

  std::vector<double> mean(spec.dims, 0.0);
  for (std::size_t t = 0; t < spec.length; ++t)
    for (std::size_t j = 0; j < spec.dims; ++j) mean[j] += data(t, j);
  for (auto& v : mean) v /= n;

  const double sigma = std::sqrt(0.25 / n);
  for (std::size_t j = 0; j < spec.dims; ++j)
    c.require(std::abs(mean[j] - 0.5) <= 3.0 * sigma,
              "column " + std::to_string(j) + " mean " + fmt(mean[j]));

  double corr_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < spec.dims; ++i)
    for (std::size_t j = i + 1; j < spec.dims; ++j) {
      double cov = 0.0, var_i = 0.0, var_j = 0.0;
      for (std::size_t t = 0; t < spec.length; ++t) {
        const double di = data(t, i) - mean[i];
        const double dj = data(t, j) - mean[j];
        cov += di * dj;
        var_i += di * di;
        var_j += dj * dj;
      }
      corr_sum += cov / std::sqrt(var_i * var_j);
      ++pairs;
    }
  const double corr = corr_sum / static_cast<double>(pairs);
  c.require(std::abs(corr - 0.49) <= 0.05, "mean pairwise correlation " + fmt(corr));
  c.note("mean correlation " + fmt(corr));
}

fs::path pipeline_dir(const std::string& name) {
  const auto dir = fs::current_path() / "acceptance_work" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Day/night pipeline via the CLI. Returns false on any nonzero exit.
bool run_daynight_pipeline(const fs::path& dir, Criterion& c) {
  const auto log = dir / "log.txt";
  const std::string d = (dir / "data.csv").string();
  const std::string trace = (dir / "trace.jsonl").string();
  const std::string model = (dir / "model.json").string();
  const std::string batch = (dir / "batch.json").string();

  const std::vector<std::string> commands = {
      "simulate --kind daynight --out " + d +
          " --rows 2016 --cols 6 --period 144 --day-on 0.8 --night-on 0.05 --seed 77",
      "fit-batch --data " + d + " --out " + batch + " --rank 1 --seed 9",
      "fit-stream --data " + d + " --trace " + trace + " --out " + model +
          " --rank 1 --schedule constant --step-c 0.05 --seed 9 --snapshots",
      "evaluate --data " + d + " --trace " + trace + " --model " + model + " --batch " +
          batch + " --out " + (dir / "curves.csv").string(),
      "check-bounds --data " + d + " --trace " + trace + " --model " + model + " --batch " +
          batch + " --out " + (dir / "bounds.json").string(),
      "reconstruct --data " + d + " --pairing batch --batch " + batch + " --out " +
          (dir / "recon_batch.csv").string(),
      "reconstruct --data " + d + " --pairing sequential --trace " + trace + " --model " +
          model + " --out " + (dir / "recon_sequential.csv").string(),
      "reconstruct --data " + d + " --pairing regret --trace " + trace + " --model " + model +
          " --out " + (dir / "recon_regret.csv").string(),
  };
  for (const auto& cmd : commands) {
    if (run_cli(cmd, log) != 0) {
      c.require(false, "command failed: " + cmd.substr(0, cmd.find(' ')));
      return false;
    }
  }
  return true;
}

double hamming_from_sidecar(const fs::path& csv) {
  const auto text = read_file(fs::path(csv.string() + ".json"));
  const auto key = text.find("\"hamming_error\"");
  if (key == std::string::npos) return -1.0;
  return std::strtod(text.c_str() + text.find(':', key) + 1, nullptr);
}

void criterion9_daynight() {
  Criterion c{9, "day/night substitute pipeline end to end"};
  const auto dir = pipeline_dir("daynight");
  if (!run_daynight_pipeline(dir, c)) return;

  for (const char* name : {"curves.csv", "curves.csv.json", "recon_batch.csv",
                           "recon_sequential.csv", "recon_regret.csv", "bounds.json"})
    c.require(fs::exists(dir / name), std::string(name) + " missing");

  const auto bounds = read_file(dir / "bounds.json");
  c.require(bounds.find("\"all_pass\": true") != std::string::npos, "bound check failed");

  std::printf("    pairing      hamming error vs source\n");
  for (const char* name : {"recon_batch.csv", "recon_sequential.csv", "recon_regret.csv"}) {
    const double err = hamming_from_sidecar(dir / name);
    const std::string label = std::string(name).substr(6, std::strlen(name) - 6 - 4);
    std::printf("    %-12s %.4f\n", label.c_str(), err);
    c.require(err >= 0.0 && err <= 1.0, std::string(name) + " hamming out of range");
  }
}

void criterion10_determinism() {
  Criterion c{10, "seeded reruns are byte-identical"};
  const auto dir_a = pipeline_dir("det_a");
  const auto dir_b = pipeline_dir("det_b");
  Criterion* cp = &c;
  if (!run_daynight_pipeline(dir_a, *cp) || !run_daynight_pipeline(dir_b, *cp)) return;
  for (const char* name :
       {"data.csv", "batch.json", "trace.jsonl", "trace.jsonl.snapshots.json", "model.json",
        "curves.csv", "curves.csv.json", "bounds.json", "recon_batch.csv",
        "recon_sequential.csv", "recon_regret.csv"})
    c.require(read_file(dir_a / name) == read_file(dir_b / name),
              std::string(name) + " differs between reruns");
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");

  criterion1_gradients();

  const auto dim_run = paper_stream(ScheduleKind::diminishing, 0.2);
  Hyperparams batch_hp;
  const auto batch = fit_batch(dim_run.data, 1, batch_hp);

  criterion2_inequalities(dim_run);
  criterion3_majorization(dim_run);
  criterion4_diminishing(dim_run, batch);
  const auto const_run = paper_stream(ScheduleKind::constant, 0.05);
  criterion5_constant(const_run);
  criterion6_batch_monotone(batch);
  criterion7_planted();
  criterion8_generator();
  criterion9_daynight();
  criterion10_determinism();

  if (failures > 0) {
    std::printf("%d criterion(s) FAILED\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
