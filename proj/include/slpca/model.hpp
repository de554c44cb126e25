#ifndef SLPCA_MODEL_HPP
#define SLPCA_MODEL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "slpca/matrix.hpp"

namespace slpca {

/// N x P matrix of {0,1} states. Entries are validated on the way in;
/// the signed {-1,+1} view used by the loss is derived per row.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), cells_(rows * cols, 0) {}

  static BinaryMatrix from_rows(const std::vector<std::vector<int>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::uint8_t operator()(std::size_t t, std::size_t j) const {
    return cells_[t * cols_ + j];
  }

  void set(std::size_t t, std::size_t j, int value);

  std::span<const std::uint8_t> row(std::size_t t) const {
    return {cells_.data() + t * cols_, cols_};
  }

  /// Signed view of row t: entry j equals 2*x(t,j) - 1.
  std::vector<double> signed_row(std::size_t t) const;

  /// First t rows as a new matrix (prefix view for the per-prefix curves).
  BinaryMatrix top_rows(std::size_t t) const;

  friend bool operator==(const BinaryMatrix& a, const BinaryMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.cells_ == b.cells_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Maps a {0,1} row to the signed {-1,+1} row (2x - 1). Rejects anything
/// that is not exactly 0 or 1, naming the offending index.
std::vector<double> signed_transform(std::span<const double> x);

/// Low-rank factor pair: scores A (N x r) and loadings V (P x r). The
/// natural-parameter matrix is A * V^T.
struct FactorModel {
  Matrix scores;    // N x r
  Matrix loadings;  // P x r

  std::size_t rank() const { return loadings.cols(); }

  /// Natural parameters of row t: theta_j = <a_t, v_j> for each j.
  std::vector<double> natural_parameters(std::size_t t) const;
};

enum class ScheduleKind { diminishing, constant };

/// Step-size rule: diminishing C * t^(-1/2) or constant C.
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::diminishing;
  double constant = 0.2;

  double at(long t) const;
};

inline double step_size(const StepSchedule& schedule, long t) { return schedule.at(t); }

std::string schedule_name(ScheduleKind kind);
ScheduleKind schedule_from_name(const std::string& name);

struct Hyperparams {
  double gamma = 0.1;           // score ridge weight
  double lambda = 0.1;          // loading ridge weight
  double newton_tol = 1e-6;     // stop when decrement/2 <= newton_tol
  double armijo_alpha = 0.3;    // sufficient-decrease fraction, in (0,1)
  double armijo_beta = 0.5;     // backtracking shrink factor, in (0,1)
  double initial_step = 1.0;    // first trial step length d0
  double schedule_constant = 0.2;

  void validate() const;
};

}  // namespace slpca

#endif  // SLPCA_MODEL_HPP
