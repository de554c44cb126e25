#include "slpca/model.hpp"

#include <cmath>
#include <stdexcept>

namespace slpca {

BinaryMatrix BinaryMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
  if (rows.empty()) return {};
  BinaryMatrix out(rows.size(), rows.front().size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != out.cols_)
      throw std::invalid_argument("BinaryMatrix::from_rows: ragged row " + std::to_string(t));
    for (std::size_t j = 0; j < out.cols_; ++j) out.set(t, j, rows[t][j]);
  }
  return out;
}

void BinaryMatrix::set(std::size_t t, std::size_t j, int value) {
  if (t >= rows_ || j >= cols_) throw std::out_of_range("BinaryMatrix::set: index out of range");
  if (value != 0 && value != 1)
    throw std::domain_error("BinaryMatrix::set: entry (" + std::to_string(t) + "," +
                            std::to_string(j) + ") is " + std::to_string(value) +
                            ", expected 0 or 1");
  cells_[t * cols_ + j] = static_cast<std::uint8_t>(value);
}

std::vector<double> BinaryMatrix::signed_row(std::size_t t) const {
  if (t >= rows_) throw std::out_of_range("BinaryMatrix::signed_row: row index out of range");
  std::vector<double> out(cols_);
  for (std::size_t j = 0; j < cols_; ++j)
    out[j] = cells_[t * cols_ + j] ? 1.0 : -1.0;
  return out;
}

BinaryMatrix BinaryMatrix::top_rows(std::size_t t) const {
  if (t > rows_) throw std::out_of_range("BinaryMatrix::top_rows: prefix longer than data");
  BinaryMatrix out(t, cols_);
  for (std::size_t i = 0; i < t * cols_; ++i) out.cells_[i] = cells_[i];
  return out;
}

std::vector<double> signed_transform(std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] == 0.0)
      out[j] = -1.0;
    else if (x[j] == 1.0)
      out[j] = 1.0;
    else
      throw std::domain_error("signed_transform: entry at index " + std::to_string(j) +
                              " is not 0 or 1");
  }
  return out;
}

std::vector<double> FactorModel::natural_parameters(std::size_t t) const {
  if (t >= scores.rows())
    throw std::out_of_range("FactorModel::natural_parameters: row index out of range");
  std::vector<double> theta(loadings.rows());
  const auto a = scores.row(t);
  for (std::size_t j = 0; j < loadings.rows(); ++j) theta[j] = dot(a, loadings.row(j));
  return theta;
}

double StepSchedule::at(long t) const {
  if (t < 1) throw std::invalid_argument("StepSchedule::at: step index must be >= 1");
  if (!(constant > 0.0)) throw std::invalid_argument("StepSchedule::at: constant must be > 0");
  return kind == ScheduleKind::constant ? constant
                                        : constant / std::sqrt(static_cast<double>(t));
}

std::string schedule_name(ScheduleKind kind) {
  return kind == ScheduleKind::constant ? "constant" : "diminishing";
}

ScheduleKind schedule_from_name(const std::string& name) {
  if (name == "constant") return ScheduleKind::constant;
  if (name == "diminishing") return ScheduleKind::diminishing;
  throw std::invalid_argument("unknown schedule '" + name + "' (expected diminishing|constant)");
}

void Hyperparams::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("Hyperparams: gamma must be > 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("Hyperparams: lambda must be >= 0");
  if (!(newton_tol > 0.0)) throw std::invalid_argument("Hyperparams: newton_tol must be > 0");
  if (!(armijo_alpha > 0.0 && armijo_alpha < 1.0))
    throw std::invalid_argument("Hyperparams: armijo_alpha must be in (0,1)");
  if (!(armijo_beta > 0.0 && armijo_beta < 1.0))
    throw std::invalid_argument("Hyperparams: armijo_beta must be in (0,1)");
  if (!(initial_step > 0.0)) throw std::invalid_argument("Hyperparams: initial_step must be > 0");
  if (!(schedule_constant > 0.0))
    throw std::invalid_argument("Hyperparams: schedule_constant must be > 0");
}

}  // namespace slpca
