#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "slpca/batch.hpp"
#include "slpca/diagnostics.hpp"
#include "slpca/io.hpp"
#include "slpca/kernels.hpp"
#include "slpca/reconstruct.hpp"
#include "slpca/simgen.hpp"
#include "slpca/stream.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace slpca;

struct Options {
  // shared
  std::string data_path;
  std::string out_path;
  std::string trace_path;
  std::string batch_path;
  std::string model_path;
  std::size_t rank = 1;
  std::uint64_t seed = 1;
  int threads = 0;
  Hyperparams hp;

  // schedule
  std::string schedule = "diminishing";
  double step_c = 0.2;

  // stream
  bool snapshots = false;

  // batch fit
  double tol = 1e-8;
  int max_alternations = 500;

  // evaluate
  bool refit_prefix = false;

  // simulate
  std::string kind = "correlated";
  std::size_t rows = 1000;
  std::size_t cols = 8;
  double marginal_p = 0.5;
  double mixing_prob = 0.7;
  std::size_t period = 144;
  double day_on = 0.8;
  double night_on = 0.05;
  double day_fraction = 0.5;
  double magnitude = 4.0;
  double fraction = 1.0;
  std::string truth_path;

  // reconstruct
  std::string pairing = "batch";
};

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

StepSchedule make_schedule(const Options& opt) {
  return StepSchedule{schedule_from_name(opt.schedule), opt.step_c};
}

int cmd_simulate(const Options& opt) {
  if (opt.kind == "correlated") {
    CorrelatedBernoulliSpec spec;
    spec.dims = opt.cols;
    spec.length = opt.rows;
    spec.marginal_p = opt.marginal_p;
    spec.mixing_prob = opt.mixing_prob;
    spec.seed = opt.seed;
    io::emit_csv(opt.out_path, gen_correlated_bernoulli(spec));
  } else if (opt.kind == "daynight") {
    DayNightSpec spec;
    spec.dims = opt.cols;
    spec.length = opt.rows;
    spec.period = opt.period;
    spec.day_on_prob = opt.day_on;
    spec.night_on_prob = opt.night_on;
    spec.day_fraction = opt.day_fraction;
    spec.seed = opt.seed;
    std::vector<std::string> ts(spec.length);
    for (std::size_t t = 0; t < spec.length; ++t) ts[t] = "t" + std::to_string(t);
    io::emit_csv(opt.out_path, gen_day_night(spec), &ts);
    std::cout << "note: synthetic day/night stand-in, not real monitor data\n";
  } else if (opt.kind == "planted") {
    auto planted = gen_planted_lowrank(opt.rows, opt.cols, opt.rank, opt.magnitude,
                                       opt.seed, opt.fraction);
    io::emit_csv(opt.out_path, planted.data);
    if (!opt.truth_path.empty()) {
      BatchFitReport truth;
      truth.model = std::move(planted.truth);
      truth.converged = true;
      truth.batch_loss = batch_loss(truth.model, planted.data);
      io::emit_batch_report(opt.truth_path, truth, 0.0, 0.0);
    }
  } else {
    throw std::invalid_argument("unknown generator kind '" + opt.kind +
                                "' (expected correlated|daynight|planted)");
  }
  std::cout << "wrote " << opt.out_path << "\n";
  return 0;
}

int cmd_fit_batch(const Options& opt) {
  apply_threads(opt.threads);
  const auto dataset = io::ingest_csv(opt.data_path);
  auto report = fit_batch(dataset.data, opt.rank, opt.hp, opt.max_alternations, opt.tol,
                          opt.seed);
  io::emit_batch_report(opt.out_path, report, opt.hp.gamma, opt.hp.lambda);
  std::cout << "batch fit: N=" << dataset.data.rows() << " P=" << dataset.data.cols()
            << " r=" << opt.rank << " alternations=" << report.alternations
            << " converged=" << (report.converged ? "yes" : "no")
            << " batch_loss=" << io::format_double(report.batch_loss) << "\n";
  return 0;
}

int cmd_fit_stream(const Options& opt) {
  const auto dataset = io::ingest_csv(opt.data_path);
  const auto schedule = make_schedule(opt);
  Hyperparams hp = opt.hp;
  hp.schedule_constant = opt.step_c;
  auto state = init_stream(dataset.data.cols(), opt.rank, schedule, hp, opt.seed);
  const auto trace = run_stream(state, dataset.data, opt.snapshots);
  io::emit_trace(opt.trace_path, trace);
  if (!opt.out_path.empty()) {
    io::StreamModelFile model;
    model.loadings = state.loadings;
    model.rank = opt.rank;
    model.gamma = hp.gamma;
    model.schedule = schedule;
    model.seed = opt.seed;
    io::emit_stream_model(opt.out_path, model);
  }
  std::size_t flagged = 0;
  for (const auto& s : trace.steps)
    if (!s.solver_converged) ++flagged;
  std::cout << "stream: N=" << trace.size() << " schedule=" << opt.schedule
            << " C=" << opt.step_c << " snapshots=" << (opt.snapshots ? "yes" : "no")
            << " regret=" << io::format_double(regret(trace));
  if (flagged > 0) std::cout << " (" << flagged << " steps flagged non-converged)";
  std::cout << "\n";
  return 0;
}

StreamTrace load_trace_for_eval(const Options& opt, bool need_snapshots) {
  auto trace = io::load_trace(opt.trace_path);
  if (need_snapshots && !trace.has_snapshots)
    throw std::runtime_error("trace '" + opt.trace_path +
                             "' has no loading snapshots; re-run fit-stream with --snapshots");
  return trace;
}

int cmd_evaluate(const Options& opt) {
  apply_threads(opt.threads);
  if (opt.batch_path.empty())
    throw std::runtime_error(
        "evaluate needs the batch reference for the C_t curve; run fit-batch and pass "
        "--batch");
  const auto dataset = io::ingest_csv(opt.data_path);
  const auto trace = load_trace_for_eval(opt, true);
  const auto batch = io::load_batch_report(opt.batch_path);
  const auto model = io::load_stream_model(opt.model_path);
  Hyperparams hp = opt.hp;
  hp.gamma = model.gamma;
  const auto report = evaluate_run(trace, model.loadings, dataset.data, batch,
                                   model.schedule, hp, opt.refit_prefix);
  io::emit_curves(opt.out_path, report);
  std::cout << "evaluate: N=" << report.n
            << " C_N=" << io::format_double(report.batch_loss)
            << " Chat_N=" << io::format_double(report.sequential_loss)
            << " Ctilde_N=" << io::format_double(report.surrogate_loss.value_or(0.0))
            << " Regret_N=" << io::format_double(report.regret)
            << " gap=" << io::format_double(report.gap)
            << " bound=" << io::format_double(report.gap_bound) << "\n";
  return 0;
}

int cmd_check_bounds(const Options& opt) {
  apply_threads(opt.threads);
  const auto dataset = io::ingest_csv(opt.data_path);
  const auto trace = load_trace_for_eval(opt, true);
  const auto model = io::load_stream_model(opt.model_path);
  Hyperparams hp = opt.hp;
  hp.gamma = model.gamma;
  std::optional<BatchFitReport> batch;
  if (!opt.batch_path.empty()) batch = io::load_batch_report(opt.batch_path);
  const auto report = check_all_bounds(trace, model.loadings, dataset.data, model.schedule,
                                       hp, batch ? &*batch : nullptr);
  for (const auto& c : report.checks) {
    std::printf("%-22s %s", c.name.c_str(),
                !c.applicable ? "SKIP" : (c.pass ? "PASS" : "FAIL"));
    if (c.applicable)
      std::printf("  measured=%-12.5g bound=%-12.5g margin=%.5g", c.measured, c.bound,
                  c.margin);
    if (!c.note.empty()) std::printf("  (%s)", c.note.c_str());
    std::printf("\n");
  }
  if (!opt.out_path.empty()) io::emit_bound_report(opt.out_path, report);
  std::printf("score-norm certificates: empirical %.5g, analytic %.5g\n", report.omega_hat,
              report.omega_cap);
  std::cout << (report.all_pass() ? "all bounds hold" : "BOUND VIOLATION detected") << "\n";
  return report.all_pass() ? 0 : 2;
}

int cmd_reconstruct(const Options& opt) {
  apply_threads(opt.threads);
  const auto dataset = io::ingest_csv(opt.data_path);
  const auto pairing = pairing_from_name(opt.pairing);
  ReconstructionSeries series;
  if (pairing == Pairing::batch) {
    if (opt.batch_path.empty())
      throw std::runtime_error("the batch pairing needs --batch <fit-batch output>");
    series = reconstruct_batch(io::load_batch_report(opt.batch_path).model);
  } else {
    if (opt.trace_path.empty() || opt.model_path.empty())
      throw std::runtime_error("stream pairings need --trace and --model");
    const auto trace = load_trace_for_eval(opt, pairing == Pairing::regret);
    const auto model = io::load_stream_model(opt.model_path);
    series = pairing == Pairing::sequential_final
                 ? reconstruct_sequential(trace, model.loadings)
                 : reconstruct_regret(trace, model.loadings);
  }
  if (series.states.rows() != dataset.data.rows() ||
      series.states.cols() != dataset.data.cols())
    throw std::runtime_error("reconstruction shape does not match the data file");
  const double err = hamming_error(series.states, dataset.data);
  io::emit_reconstruction(opt.out_path, series,
                          dataset.timestamps.empty() ? nullptr : &dataset.timestamps,
                          &dataset.columns, err);
  std::cout << "reconstruct: pairing=" << opt.pairing
            << " hamming_error=" << io::format_double(err) << "\n";
  return 0;
}

void add_hyperparam_flags(CLI::App* cmd, Options& opt) {
  cmd->add_option("--gamma", opt.hp.gamma, "score ridge weight");
  cmd->add_option("--lambda", opt.hp.lambda, "loading ridge weight");
  cmd->add_option("--newton-tol", opt.hp.newton_tol, "Newton decrement tolerance");
  cmd->add_option("--armijo-alpha", opt.hp.armijo_alpha, "Armijo sufficient-decrease fraction");
  cmd->add_option("--armijo-beta", opt.hp.armijo_beta, "Armijo backtracking factor");
  cmd->add_option("--initial-step", opt.hp.initial_step, "first trial step length");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch and sequential logistic PCA for streaming binary data"};
  app.require_subcommand(1);
  Options opt;
  int status = 0;

  auto* sim = app.add_subcommand("simulate", "generate a binary data CSV");
  sim->add_option("--kind", opt.kind, "correlated|daynight|planted")->required();
  sim->add_option("--out", opt.out_path, "output CSV path")->required();
  sim->add_option("--rows", opt.rows, "number of samples N");
  sim->add_option("--cols", opt.cols, "number of columns P");
  sim->add_option("--seed", opt.seed, "generator seed");
  sim->add_option("--marginal-p", opt.marginal_p, "per-column ON probability");
  sim->add_option("--mixing-prob", opt.mixing_prob, "shared-component inclusion probability");
  sim->add_option("--period", opt.period, "samples per day");
  sim->add_option("--day-on", opt.day_on, "daytime ON probability");
  sim->add_option("--night-on", opt.night_on, "nighttime ON probability");
  sim->add_option("--day-fraction", opt.day_fraction, "fraction of the period that is day");
  sim->add_option("--magnitude", opt.magnitude, "planted |theta| level");
  sim->add_option("--fraction", opt.fraction, "fraction of cells at or above magnitude");
  sim->add_option("--rank", opt.rank, "planted rank");
  sim->add_option("--truth-out", opt.truth_path, "write the planted factors as JSON");
  sim->callback([&] { status = cmd_simulate(opt); });

  auto* fb = app.add_subcommand("fit-batch", "alternating-minimization batch fit");
  fb->add_option("--data", opt.data_path, "input CSV")->required();
  fb->add_option("--out", opt.out_path, "output report JSON")->required();
  fb->add_option("--rank", opt.rank, "factor rank");
  fb->add_option("--seed", opt.seed, "loading init seed");
  fb->add_option("--tol", opt.tol, "relative objective decrease tolerance");
  fb->add_option("--max-alternations", opt.max_alternations, "alternation cap");
  fb->add_option("--threads", opt.threads, "worker thread cap (0 = library default)");
  add_hyperparam_flags(fb, opt);
  fb->callback([&] { status = cmd_fit_batch(opt); });

  auto* fs = app.add_subcommand("fit-stream", "sequential fit over arrivals");
  fs->add_option("--data", opt.data_path, "input CSV")->required();
  fs->add_option("--trace", opt.trace_path, "output trace JSONL")->required();
  fs->add_option("--out", opt.out_path, "output final-model JSON");
  fs->add_option("--rank", opt.rank, "factor rank");
  fs->add_option("--seed", opt.seed, "loading init seed");
  fs->add_option("--schedule", opt.schedule, "diminishing|constant");
  fs->add_option("--step-c", opt.step_c, "schedule constant C");
  fs->add_flag("--snapshots", opt.snapshots, "retain per-step loadings");
  add_hyperparam_flags(fs, opt);
  fs->callback([&] { status = cmd_fit_stream(opt); });

  auto* ev = app.add_subcommand("evaluate", "loss functionals, gap bound and curves");
  ev->add_option("--data", opt.data_path, "input CSV")->required();
  ev->add_option("--trace", opt.trace_path, "trace JSONL from fit-stream")->required();
  ev->add_option("--model", opt.model_path, "final-model JSON from fit-stream")->required();
  ev->add_option("--batch", opt.batch_path, "report JSON from fit-batch");
  ev->add_option("--out", opt.out_path, "output curves CSV")->required();
  ev->add_flag("--refit-prefix", opt.refit_prefix, "refit the batch model per prefix (small N)");
  ev->add_option("--threads", opt.threads, "worker thread cap");
  ev->callback([&] { status = cmd_evaluate(opt); });

  auto* cb = app.add_subcommand("check-bounds", "verify per-step identities and bounds");
  cb->add_option("--data", opt.data_path, "input CSV")->required();
  cb->add_option("--trace", opt.trace_path, "trace JSONL (with snapshots)")->required();
  cb->add_option("--model", opt.model_path, "final-model JSON from fit-stream")->required();
  cb->add_option("--batch", opt.batch_path, "report JSON from fit-batch (optional)");
  cb->add_option("--out", opt.out_path, "output report JSON");
  cb->add_option("--threads", opt.threads, "worker thread cap");
  cb->callback([&] { status = cmd_check_bounds(opt); });

  auto* rc = app.add_subcommand("reconstruct", "binary reconstruction and aggregates");
  rc->add_option("--data", opt.data_path, "input CSV (reference and timestamps)")->required();
  rc->add_option("--pairing", opt.pairing, "batch|sequential|regret")->required();
  rc->add_option("--batch", opt.batch_path, "report JSON (batch pairing)");
  rc->add_option("--trace", opt.trace_path, "trace JSONL (stream pairings)");
  rc->add_option("--model", opt.model_path, "final-model JSON (stream pairings)");
  rc->add_option("--out", opt.out_path, "output CSV")->required();
  rc->add_option("--threads", opt.threads, "worker thread cap");
  rc->callback([&] { status = cmd_reconstruct(opt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return status;
}
