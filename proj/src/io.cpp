#include "slpca/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace slpca::io {

using nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return in;
}

ordered_json matrix_to_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const ordered_json& rows, const char* what) {
  if (!rows.is_array()) throw std::runtime_error(std::string(what) + ": expected an array");
  if (rows.empty()) return {};
  const std::size_t cols = rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols)
      throw std::runtime_error(std::string(what) + ": ragged matrix row " + std::to_string(i));
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

std::filesystem::path snapshots_path(const std::filesystem::path& trace_path) {
  return std::filesystem::path(trace_path.string() + ".snapshots.json");
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Dataset ingest_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("'" + path.string() + "' is empty");
  const auto header = split_csv_line(line);
  if (header.empty()) throw std::runtime_error("'" + path.string() + "': empty header");

  std::string first = header.front();
  for (auto& c : first) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const bool has_ts = first == "ts" || first == "timestamp" || first == "time";
  const std::size_t data_offset = has_ts ? 1 : 0;
  const std::size_t p = header.size() - data_offset;
  if (p == 0) throw std::runtime_error("'" + path.string() + "': no data columns");

  Dataset out;
  out.columns.assign(header.begin() + static_cast<long>(data_offset), header.end());

  std::vector<std::vector<int>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("'" + path.string() + "' line " + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    if (has_ts) out.timestamps.push_back(fields.front());
    std::vector<int> row(p);
    for (std::size_t j = 0; j < p; ++j) {
      const std::string& cell = fields[j + data_offset];
      if (cell == "0")
        row[j] = 0;
      else if (cell == "1")
        row[j] = 1;
      else
        throw std::runtime_error("'" + path.string() + "' line " + std::to_string(line_no) +
                                 ", column '" + out.columns[j] + "': '" + cell +
                                 "' is not 0 or 1");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw std::runtime_error("'" + path.string() + "' has a header but no data rows");
  out.data = BinaryMatrix::from_rows(rows);
  return out;
}

void emit_csv(const std::filesystem::path& path, const BinaryMatrix& data,
              const std::vector<std::string>* timestamps,
              const std::vector<std::string>* columns) {
  auto out = open_out(path);
  const bool has_ts = timestamps != nullptr && !timestamps->empty();
  if (has_ts && timestamps->size() != data.rows())
    throw std::invalid_argument("emit_csv: timestamp count does not match rows");
  if (has_ts) out << "ts";
  for (std::size_t j = 0; j < data.cols(); ++j) {
    if (has_ts || j > 0) out << ',';
    out << (columns && j < columns->size() ? (*columns)[j] : "m" + std::to_string(j + 1));
  }
  out << '\n';
  for (std::size_t t = 0; t < data.rows(); ++t) {
    if (has_ts) out << (*timestamps)[t];
    for (std::size_t j = 0; j < data.cols(); ++j) {
      if (has_ts || j > 0) out << ',';
      out << static_cast<int>(data(t, j));
    }
    out << '\n';
  }
}

void emit_trace(const std::filesystem::path& path, const StreamTrace& trace) {
  auto out = open_out(path);
  for (const auto& step : trace.steps) {
    ordered_json obj;
    obj["t"] = step.t;
    obj["eta"] = step.eta;
    obj["score"] = step.score;
    obj["score_norm"] = step.score_norm;
    obj["loss_at_anchor"] = step.loss_at_anchor;
    obj["post_update_loss"] = step.post_update_loss;
    obj["grad_norm"] = step.grad_norm;
    obj["loading_norm_sq"] = step.loading_norm_sq;
    obj["loading_delta_norm"] = step.loading_delta_norm;
    obj["curvature"] = step.curvature;
    out << obj.dump() << '\n';
  }
  if (trace.has_snapshots) {
    ordered_json snaps;
    snaps["anchors"] = ordered_json::array();
    for (const auto& m : trace.anchors) snaps["anchors"].push_back(matrix_to_json(m));
    auto sout = open_out(snapshots_path(path));
    sout << snaps.dump() << '\n';
  }
}

StreamTrace load_trace(const std::filesystem::path& path) {
  auto in = open_in(path);
  StreamTrace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("'" + path.string() + "' line " + std::to_string(line_no) +
                               ": " + e.what());
    }
    StreamStep step;
    step.t = obj.at("t").get<long>();
    step.eta = obj.at("eta").get<double>();
    step.score = obj.at("score").get<std::vector<double>>();
    step.score_norm = obj.at("score_norm").get<double>();
    step.loss_at_anchor = obj.at("loss_at_anchor").get<double>();
    step.post_update_loss = obj.at("post_update_loss").get<double>();
    step.grad_norm = obj.at("grad_norm").get<double>();
    step.loading_norm_sq = obj.at("loading_norm_sq").get<double>();
    step.loading_delta_norm = obj.at("loading_delta_norm").get<double>();
    step.curvature = obj.at("curvature").get<double>();
    trace.steps.push_back(std::move(step));
  }
  const auto spath = snapshots_path(path);
  if (std::filesystem::exists(spath)) {
    auto sin = open_in(spath);
    ordered_json snaps = ordered_json::parse(sin);
    for (const auto& m : snaps.at("anchors"))
      trace.anchors.push_back(matrix_from_json(m, "snapshots"));
    if (trace.anchors.size() != trace.steps.size())
      throw std::runtime_error("'" + spath.string() + "': " +
                               std::to_string(trace.anchors.size()) + " snapshots for " +
                               std::to_string(trace.steps.size()) + " steps");
    trace.has_snapshots = true;
  }
  return trace;
}

void emit_stream_model(const std::filesystem::path& path, const StreamModelFile& model) {
  ordered_json obj;
  obj["kind"] = "stream";
  obj["rank"] = model.rank;
  obj["gamma"] = model.gamma;
  obj["schedule"] = schedule_name(model.schedule.kind);
  obj["step_constant"] = model.schedule.constant;
  obj["seed"] = model.seed;
  obj["loadings"] = matrix_to_json(model.loadings);
  auto out = open_out(path);
  out << obj.dump(2) << '\n';
}

StreamModelFile load_stream_model(const std::filesystem::path& path) {
  auto in = open_in(path);
  ordered_json obj = ordered_json::parse(in);
  StreamModelFile model;
  model.rank = obj.at("rank").get<std::size_t>();
  model.gamma = obj.at("gamma").get<double>();
  model.schedule.kind = schedule_from_name(obj.at("schedule").get<std::string>());
  model.schedule.constant = obj.at("step_constant").get<double>();
  model.seed = obj.at("seed").get<std::uint64_t>();
  model.loadings = matrix_from_json(obj.at("loadings"), "stream model loadings");
  return model;
}

void emit_batch_report(const std::filesystem::path& path, const BatchFitReport& report,
                       double gamma, double lambda) {
  ordered_json obj;
  obj["kind"] = "batch";
  obj["rank"] = report.model.rank();
  obj["gamma"] = gamma;
  obj["lambda"] = lambda;
  obj["converged"] = report.converged;
  obj["alternations"] = report.alternations;
  obj["batch_loss"] = report.batch_loss;
  obj["max_first_order_residual"] = report.max_first_order_residual;
  obj["objective_history"] = report.objective_history;
  obj["loadings"] = matrix_to_json(report.model.loadings);
  obj["scores"] = matrix_to_json(report.model.scores);
  auto out = open_out(path);
  out << obj.dump(2) << '\n';
}

BatchFitReport load_batch_report(const std::filesystem::path& path) {
  auto in = open_in(path);
  ordered_json obj = ordered_json::parse(in);
  BatchFitReport report;
  report.converged = obj.at("converged").get<bool>();
  report.alternations = obj.at("alternations").get<int>();
  report.batch_loss = obj.at("batch_loss").get<double>();
  report.max_first_order_residual = obj.at("max_first_order_residual").get<double>();
  report.objective_history = obj.at("objective_history").get<std::vector<double>>();
  report.model.loadings = matrix_from_json(obj.at("loadings"), "batch loadings");
  report.model.scores = matrix_from_json(obj.at("scores"), "batch scores");
  return report;
}

void emit_curves(const std::filesystem::path& path, const EvaluationReport& report) {
  auto out = open_out(path);
  out << "t,C_t,Chat_t,Regret_t\n";
  for (std::size_t t = 0; t < report.curves.regret.size(); ++t)
    out << (t + 1) << ',' << format_double(report.curves.batch[t]) << ','
        << format_double(report.curves.sequential[t]) << ','
        << format_double(report.curves.regret[t]) << '\n';

  ordered_json obj;
  obj["n"] = report.n;
  obj["schedule"] = schedule_name(report.schedule_kind);
  obj["batch_loss"] = report.batch_loss;
  obj["sequential_loss"] = report.sequential_loss;
  obj["surrogate_loss"] =
      report.surrogate_loss ? ordered_json(*report.surrogate_loss) : ordered_json();
  obj["regret"] = report.regret;
  obj["max_score_norm"] = report.max_score_norm;
  obj["gap"] = report.gap;
  obj["gap_bound"] = report.gap_bound;
  auto sout = open_out(std::filesystem::path(path.string() + ".json"));
  sout << obj.dump(2) << '\n';
}

void emit_reconstruction(const std::filesystem::path& path,
                         const ReconstructionSeries& series,
                         const std::vector<std::string>* timestamps,
                         const std::vector<std::string>* columns,
                         double hamming_vs_reference) {
  auto out = open_out(path);
  const auto& probs = series.probabilities;
  const bool has_ts = timestamps != nullptr && !timestamps->empty();
  const auto col = [&](std::size_t j) {
    return columns && j < columns->size() ? (*columns)[j] : "m" + std::to_string(j + 1);
  };
  if (has_ts) out << "ts,";
  out << "t";
  for (std::size_t j = 0; j < probs.cols(); ++j) out << ",p_" << col(j);
  for (std::size_t j = 0; j < probs.cols(); ++j) out << ",s_" << col(j);
  out << ",aggregate\n";
  for (std::size_t t = 0; t < probs.rows(); ++t) {
    if (has_ts) out << (*timestamps)[t] << ',';
    out << (t + 1);
    for (std::size_t j = 0; j < probs.cols(); ++j) out << ',' << format_double(probs(t, j));
    for (std::size_t j = 0; j < probs.cols(); ++j)
      out << ',' << static_cast<int>(series.states(t, j));
    out << ',' << series.aggregate[t] << '\n';
  }

  ordered_json obj;
  obj["pairing"] = pairing_name(series.pairing);
  obj["hamming_error"] = hamming_vs_reference;
  auto sout = open_out(std::filesystem::path(path.string() + ".json"));
  sout << obj.dump(2) << '\n';
}

void emit_bound_report(const std::filesystem::path& path, const BoundCheckReport& report) {
  ordered_json obj;
  obj["n"] = report.n;
  obj["schedule"] = schedule_name(report.schedule_kind);
  obj["omega_hat"] = report.omega_hat;
  obj["omega_analytic_cap"] = report.omega_cap;
  obj["all_pass"] = report.all_pass();
  obj["checks"] = ordered_json::array();
  for (const auto& c : report.checks) {
    ordered_json entry;
    entry["name"] = c.name;
    entry["applicable"] = c.applicable;
    entry["pass"] = c.pass;
    entry["bound"] = c.bound;
    entry["measured"] = c.measured;
    entry["margin"] = c.margin;
    entry["note"] = c.note;
    obj["checks"].push_back(std::move(entry));
  }
  auto out = open_out(path);
  out << obj.dump(2) << '\n';
}

}  // namespace slpca::io
