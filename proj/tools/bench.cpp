// Benchmark of the OpenMP kernels against their serial reference
// implementations. Same inputs, results asserted identical, wall times and
// speedups printed.

#include <chrono>
#include <cstdio>
#include <functional>
#include <stdexcept>

#include "slpca/kernels.hpp"
#include "slpca/simgen.hpp"
#include "slpca/stream.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace slpca;
using Clock = std::chrono::steady_clock;

double time_of(const std::function<void()>& fn, int repeats) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto start = Clock::now();
    fn();
    const auto stop = Clock::now();
    best = std::min(best, std::chrono::duration<double>(stop - start).count());
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-26s serial %9.4f s   parallel %9.4f s   speedup %.2fx\n", name, serial_s,
              parallel_s, serial_s / parallel_s);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; parallel kernels run serially\n");
#endif

  CorrelatedBernoulliSpec spec;
  spec.dims = 32;
  spec.length = 8000;
  spec.seed = 7;
  const auto data = gen_correlated_bernoulli(spec);

  Hyperparams hp;
  StepSchedule schedule{ScheduleKind::diminishing, 0.2};
  auto state = init_stream(spec.dims, 2, schedule, hp, 7);
  Matrix loadings = state.loadings;

  // score sweep
  kernels::SweepResult sweep_serial, sweep_parallel;
  const double t_sweep_serial = time_of(
      [&] { sweep_serial = kernels::solve_score_rows_serial(data, loadings, hp.gamma, hp); },
      2);
  const double t_sweep_parallel = time_of(
      [&] { sweep_parallel = kernels::solve_score_rows(data, loadings, hp.gamma, hp); }, 2);
  if (!(sweep_serial.solutions == sweep_parallel.solutions))
    throw std::runtime_error("score sweep: serial and parallel results differ");
  report("solve_score_rows", t_sweep_serial, t_sweep_parallel);

  const Matrix& scores = sweep_parallel.solutions;

  // loading sweep
  kernels::SweepResult load_serial, load_parallel;
  const double t_load_serial = time_of(
      [&] { load_serial = kernels::solve_loading_rows_serial(data, scores, hp.lambda, hp); },
      2);
  const double t_load_parallel = time_of(
      [&] { load_parallel = kernels::solve_loading_rows(data, scores, hp.lambda, hp); }, 2);
  if (!(load_serial.solutions == load_parallel.solutions))
    throw std::runtime_error("loading sweep: serial and parallel results differ");
  report("solve_loading_rows", t_load_serial, t_load_parallel);

  // loss sums
  double loss_serial = 0, loss_parallel = 0;
  const double t_loss_serial =
      time_of([&] { loss_serial = kernels::total_loss_serial(data, scores, loadings); }, 5);
  const double t_loss_parallel =
      time_of([&] { loss_parallel = kernels::total_loss(data, scores, loadings); }, 5);
  if (loss_serial != loss_parallel)
    throw std::runtime_error("total loss: serial and parallel results differ");
  report("total_loss", t_loss_serial, t_loss_parallel);

  // link probabilities
  Matrix probs_serial, probs_parallel;
  const double t_probs_serial =
      time_of([&] { probs_serial = kernels::link_probabilities_serial(scores, loadings); }, 5);
  const double t_probs_parallel =
      time_of([&] { probs_parallel = kernels::link_probabilities(scores, loadings); }, 5);
  if (!(probs_serial == probs_parallel))
    throw std::runtime_error("link probabilities: serial and parallel results differ");
  report("link_probabilities", t_probs_serial, t_probs_parallel);

  // prefix curve (quadratic work, smaller N)
  const auto small = data.top_rows(1500);
  auto curve_state = init_stream(spec.dims, 2, schedule, hp, 7);
  const auto trace = run_stream(curve_state, small, true);
  std::vector<double> curve_serial, curve_parallel;
  const double t_curve_serial = time_of(
      [&] {
        curve_serial =
            kernels::sequential_prefix_curve_serial(small, trace, curve_state.loadings);
      },
      2);
  const double t_curve_parallel = time_of(
      [&] {
        curve_parallel = kernels::sequential_prefix_curve(small, trace, curve_state.loadings);
      },
      2);
  if (curve_serial != curve_parallel)
    throw std::runtime_error("prefix curve: serial and parallel results differ");
  report("sequential_prefix_curve", t_curve_serial, t_curve_parallel);

  return 0;
}
