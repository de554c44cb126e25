#ifndef SLPCA_IO_HPP
#define SLPCA_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "slpca/batch.hpp"
#include "slpca/diagnostics.hpp"
#include "slpca/model.hpp"
#include "slpca/reconstruct.hpp"
#include "slpca/stream.hpp"

namespace slpca::io {

/// Binary states plus the carried-through timestamp column (empty when the
/// source had none) and the data column names.
struct Dataset {
  BinaryMatrix data;
  std::vector<std::string> timestamps;
  std::vector<std::string> columns;
};

/// Reads a header-first CSV of 0/1 cells. A leading "ts"/"timestamp" header
/// column is carried through verbatim and ignored by the math. Any cell that
/// is not exactly 0 or 1 is rejected with its line and column.
Dataset ingest_csv(const std::filesystem::path& path);

void emit_csv(const std::filesystem::path& path, const BinaryMatrix& data,
              const std::vector<std::string>* timestamps = nullptr,
              const std::vector<std::string>* columns = nullptr);

/// JSON-lines trace, one object per step. Loading snapshots, when retained,
/// go to `<path>.snapshots.json` next to it.
void emit_trace(const std::filesystem::path& path, const StreamTrace& trace);
StreamTrace load_trace(const std::filesystem::path& path);

/// Final stream model: loadings plus the run configuration.
struct StreamModelFile {
  Matrix loadings;
  std::size_t rank = 1;
  double gamma = 0.1;
  StepSchedule schedule;
  std::uint64_t seed = 0;
};
void emit_stream_model(const std::filesystem::path& path, const StreamModelFile& model);
StreamModelFile load_stream_model(const std::filesystem::path& path);

void emit_batch_report(const std::filesystem::path& path, const BatchFitReport& report,
                       double gamma, double lambda);
BatchFitReport load_batch_report(const std::filesystem::path& path);

/// Plot-ready curves: CSV with columns t, C_t, Chat_t, Regret_t and a JSON
/// sidecar `<path>.json` carrying the scalar functionals.
void emit_curves(const std::filesystem::path& path, const EvaluationReport& report);

void emit_reconstruction(const std::filesystem::path& path,
                         const ReconstructionSeries& series,
                         const std::vector<std::string>* timestamps,
                         const std::vector<std::string>* columns,
                         double hamming_vs_reference);

void emit_bound_report(const std::filesystem::path& path, const BoundCheckReport& report);

/// 17-significant-digit decimal form; round-trips doubles exactly.
std::string format_double(double v);

}  // namespace slpca::io

#endif  // SLPCA_IO_HPP
