#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "slpca/diagnostics.hpp"
#include "slpca/io.hpp"
#include "slpca/simgen.hpp"
#include "slpca/stream.hpp"

using namespace slpca;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "slpca_io_tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const auto path = work_dir() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(SLPCA_CLI_PATH) + " " + args + " > " +
                          log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

StreamTrace small_run(BinaryMatrix& data_out, Matrix& final_out, bool snapshots = true) {
  CorrelatedBernoulliSpec spec;
  spec.dims = 4;
  spec.length = 25;
  spec.seed = 17;
  data_out = gen_correlated_bernoulli(spec);
  Hyperparams hp;
  auto state = init_stream(4, 1, StepSchedule{ScheduleKind::diminishing, 0.2}, hp, 17);
  auto trace = run_stream(state, data_out, snapshots);
  final_out = state.loadings;
  return trace;
}

}  // namespace

TEST_CASE("ingest parses a timestamped CSV") {
  const auto path = write_file("basic.csv", "ts,m1,m2\nt0,1,0\nt1,0,0\nt2,1,1\n");
  const auto ds = io::ingest_csv(path);
  CHECK(ds.data == BinaryMatrix::from_rows({{1, 0}, {0, 0}, {1, 1}}));
  CHECK(ds.timestamps == std::vector<std::string>{"t0", "t1", "t2"});
  CHECK(ds.columns == std::vector<std::string>{"m1", "m2"});
}

TEST_CASE("ingest rejects non-binary cells naming line and column") {
  const auto path = write_file("bad_cell.csv", "ts,m1,m2\nt0,1,0\nt1,0,2\n");
  CHECK_THROWS_WITH_AS(io::ingest_csv(path), doctest::Contains("line 3"),
                       std::runtime_error);
  try {
    io::ingest_csv(path);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("m2") != std::string::npos);
    CHECK(std::string(e.what()).find("'2'") != std::string::npos);
  }
}

TEST_CASE("ingest rejects degenerate files") {
  CHECK_THROWS_WITH_AS(io::ingest_csv(work_dir() / "missing.csv"),
                       doctest::Contains("missing.csv"), std::runtime_error);
  const auto header_only = write_file("header_only.csv", "ts,m1,m2\n");
  CHECK_THROWS_WITH_AS(io::ingest_csv(header_only), doctest::Contains("no data rows"),
                       std::runtime_error);
  const auto ragged = write_file("ragged.csv", "m1,m2\n1,0\n1\n");
  CHECK_THROWS_WITH_AS(io::ingest_csv(ragged), doctest::Contains("line 3"),
                       std::runtime_error);
}

TEST_CASE("csv round trip preserves the data") {
  CorrelatedBernoulliSpec spec;
  spec.dims = 5;
  spec.length = 40;
  spec.seed = 23;
  const auto data = gen_correlated_bernoulli(spec);
  const auto path = work_dir() / "roundtrip.csv";
  io::emit_csv(path, data);
  CHECK(io::ingest_csv(path).data == data);

  std::vector<std::string> ts(40);
  for (std::size_t i = 0; i < 40; ++i) ts[i] = "s" + std::to_string(i);
  io::emit_csv(path, data, &ts);
  const auto back = io::ingest_csv(path);
  CHECK(back.data == data);
  CHECK(back.timestamps == ts);
}

TEST_CASE("trace emission writes one line per step with the full schema") {
  BinaryMatrix data;
  Matrix final_loadings;
  auto trace = small_run(data, final_loadings);
  StreamTrace one;
  one.steps.push_back(trace.steps.front());
  const auto path = work_dir() / "one_step.jsonl";
  io::emit_trace(path, one);

  const auto text = read_file(path);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  for (const char* key :
       {"\"t\"", "\"eta\"", "\"score\"", "\"score_norm\"", "\"loss_at_anchor\"",
        "\"post_update_loss\"", "\"grad_norm\"", "\"loading_norm_sq\"",
        "\"loading_delta_norm\"", "\"curvature\""})
    CHECK(text.find(key) != std::string::npos);
}

TEST_CASE("trace round trip reproduces the functionals bitwise") {
  BinaryMatrix data;
  Matrix final_loadings;
  const auto trace = small_run(data, final_loadings);
  const auto path = work_dir() / "trace.jsonl";
  io::emit_trace(path, trace);
  const auto back = io::load_trace(path);
  REQUIRE(back.size() == trace.size());
  CHECK(back.has_snapshots);
  CHECK(sequential_loss(back, final_loadings, data) ==
        sequential_loss(trace, final_loadings, data));
  CHECK(regret(back) == regret(trace));
  CHECK(surrogate_loss(back, final_loadings, data) ==
        surrogate_loss(trace, final_loadings, data));
  for (std::size_t i = 0; i < trace.size(); ++i) {
    CHECK(back.steps[i].score == trace.steps[i].score);
    CHECK(back.steps[i].post_update_loss == trace.steps[i].post_update_loss);
  }
  for (std::size_t i = 0; i < trace.anchors.size(); ++i)
    CHECK(back.anchors[i] == trace.anchors[i]);
}

TEST_CASE("an empty trace file is valid") {
  const auto path = work_dir() / "empty.jsonl";
  io::emit_trace(path, StreamTrace{});
  CHECK(read_file(path).empty());
  CHECK(io::load_trace(path).size() == 0);
}

TEST_CASE("batch report round trip") {
  CorrelatedBernoulliSpec spec;
  spec.dims = 4;
  spec.length = 30;
  spec.seed = 3;
  const auto data = gen_correlated_bernoulli(spec);
  Hyperparams hp;
  const auto report = fit_batch(data, 1, hp);
  const auto path = work_dir() / "batch.json";
  io::emit_batch_report(path, report, hp.gamma, hp.lambda);
  const auto back = io::load_batch_report(path);
  CHECK(back.model.loadings == report.model.loadings);
  CHECK(back.model.scores == report.model.scores);
  CHECK(back.batch_loss == report.batch_loss);
  CHECK(back.objective_history == report.objective_history);
}

TEST_CASE("curve emission is full precision") {
  BinaryMatrix data;
  Matrix final_loadings;
  const auto trace = small_run(data, final_loadings);
  Hyperparams hp;
  const auto batch = fit_batch(data, 1, hp);
  const auto report = evaluate_run(trace, final_loadings, data, batch,
                                   StepSchedule{ScheduleKind::diminishing, 0.2}, hp);
  const auto path = work_dir() / "curves.csv";
  io::emit_curves(path, report);

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,C_t,Chat_t,Regret_t");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (rows == 0) {
      // re-parse the first row; 17 significant digits round-trip exactly
      std::stringstream ss(line);
      std::string field;
      std::getline(ss, field, ',');
      CHECK(field == "1");
      std::getline(ss, field, ',');
      CHECK(std::strtod(field.c_str(), nullptr) == report.curves.batch[0]);
      std::getline(ss, field, ',');
      CHECK(std::strtod(field.c_str(), nullptr) == report.curves.sequential[0]);
      std::getline(ss, field, ',');
      CHECK(std::strtod(field.c_str(), nullptr) == report.curves.regret[0]);
    }
    ++rows;
  }
  CHECK(rows == trace.size());
  CHECK(fs::exists(work_dir() / "curves.csv.json"));
}

TEST_CASE("cli: pipeline runs end to end") {
  const auto dir = work_dir() / "pipeline";
  fs::create_directories(dir);
  const auto log = dir / "log.txt";
  const auto d = (dir / "data.csv").string();

  CHECK(run_cli("simulate --kind correlated --out " + d + " --rows 80 --cols 4 --seed 2",
                log) == 0);
  CHECK(run_cli("fit-batch --data " + d + " --out " + (dir / "batch.json").string() +
                    " --rank 1 --seed 3",
                log) == 0);
  CHECK(run_cli("fit-stream --data " + d + " --trace " + (dir / "trace.jsonl").string() +
                    " --out " + (dir / "model.json").string() +
                    " --rank 1 --schedule diminishing --step-c 0.2 --seed 3 --snapshots",
                log) == 0);
  CHECK(run_cli("evaluate --data " + d + " --trace " + (dir / "trace.jsonl").string() +
                    " --model " + (dir / "model.json").string() + " --batch " +
                    (dir / "batch.json").string() + " --out " + (dir / "curves.csv").string(),
                log) == 0);
  CHECK(run_cli("check-bounds --data " + d + " --trace " + (dir / "trace.jsonl").string() +
                    " --model " + (dir / "model.json").string() + " --batch " +
                    (dir / "batch.json").string(),
                log) == 0);
  CHECK(run_cli("reconstruct --data " + d + " --pairing regret --trace " +
                    (dir / "trace.jsonl").string() + " --model " +
                    (dir / "model.json").string() + " --out " + (dir / "recon.csv").string(),
                log) == 0);
  CHECK(fs::exists(dir / "curves.csv"));
  CHECK(fs::exists(dir / "curves.csv.json"));
  CHECK(fs::exists(dir / "recon.csv"));
}

TEST_CASE("cli: missing input file fails and names the path") {
  const auto log = work_dir() / "missing_log.txt";
  const int code = run_cli(
      "fit-stream --data /nonexistent/nowhere.csv --trace /tmp/t.jsonl", log);
  CHECK(code != 0);
  CHECK(read_file(log).find("/nonexistent/nowhere.csv") != std::string::npos);
}

TEST_CASE("cli: evaluate without a batch fit points at fit-batch") {
  const auto dir = work_dir() / "pipeline";
  const auto log = work_dir() / "nobatch_log.txt";
  const int code = run_cli("evaluate --data " + (dir / "data.csv").string() + " --trace " +
                               (dir / "trace.jsonl").string() + " --model " +
                               (dir / "model.json").string() + " --out " +
                               (dir / "c2.csv").string(),
                           log);
  CHECK(code != 0);
  CHECK(read_file(log).find("fit-batch") != std::string::npos);
}

TEST_CASE("cli: evaluate without snapshots asks for them") {
  const auto dir = work_dir() / "nosnap";
  fs::create_directories(dir);
  const auto log = dir / "log.txt";
  const auto d = (dir / "data.csv").string();
  CHECK(run_cli("simulate --kind correlated --out " + d + " --rows 30 --cols 4 --seed 2",
                log) == 0);
  CHECK(run_cli("fit-batch --data " + d + " --out " + (dir / "batch.json").string(), log) ==
        0);
  CHECK(run_cli("fit-stream --data " + d + " --trace " + (dir / "trace.jsonl").string() +
                    " --out " + (dir / "model.json").string(),
                log) == 0);
  const int code =
      run_cli("evaluate --data " + d + " --trace " + (dir / "trace.jsonl").string() +
                  " --model " + (dir / "model.json").string() + " --batch " +
                  (dir / "batch.json").string() + " --out " + (dir / "curves.csv").string(),
              log);
  CHECK(code != 0);
  CHECK(read_file(log).find("--snapshots") != std::string::npos);
}

TEST_CASE("cli: check-bounds exit status encodes violations") {
  // a final model from a different run makes every step-N identity fail
  const auto dir = work_dir() / "pipeline";
  const auto other = work_dir() / "wrong_model";
  fs::create_directories(other);
  const auto log = other / "log.txt";
  const auto d = (dir / "data.csv").string();
  REQUIRE(run_cli("fit-stream --data " + d + " --trace " + (other / "t.jsonl").string() +
                      " --out " + (other / "model.json").string() +
                      " --seed 999 --snapshots",
                  log) == 0);
  const int code =
      run_cli("check-bounds --data " + d + " --trace " + (dir / "trace.jsonl").string() +
                  " --model " + (other / "model.json").string(),
              log);
  CHECK(code != 0);
  CHECK(read_file(log).find("FAIL") != std::string::npos);
}

TEST_CASE("cli: identical seeds give byte-identical outputs") {
  for (const char* sub : {"detA", "detB"}) {
    const auto dir = work_dir() / sub;
    fs::create_directories(dir);
    const auto log = dir / "log.txt";
    const auto d = (dir / "data.csv").string();
    REQUIRE(run_cli("simulate --kind daynight --out " + d +
                        " --rows 160 --cols 4 --period 16 --seed 9",
                    log) == 0);
    REQUIRE(run_cli("fit-stream --data " + d + " --trace " + (dir / "trace.jsonl").string() +
                        " --out " + (dir / "model.json").string() +
                        " --schedule constant --step-c 0.05 --seed 4 --snapshots",
                    log) == 0);
  }
  for (const char* name : {"data.csv", "trace.jsonl", "trace.jsonl.snapshots.json",
                           "model.json"})
    CHECK(read_file(work_dir() / "detA" / name) == read_file(work_dir() / "detB" / name));
}
