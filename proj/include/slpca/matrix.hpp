#ifndef SLPCA_MATRIX_HPP
#define SLPCA_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace slpca {

/// Dense row-major matrix of doubles. Desk-scale sizes only (N <= 1e5,
/// P <= 100, r <= 8), so no sparse or blocked storage.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double frobenius_norm_sq() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return s;
  }
  double frobenius_norm() const { return std::sqrt(frobenius_norm_sq()); }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(std::span<const double> a) { return dot(a, a); }
inline double norm(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

/// y += c * x
inline void add_scaled(std::span<double> y, double c, std::span<const double> x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * x[i];
}

inline void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

inline double frobenius_inner(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "frobenius_inner");
  return dot(a.storage(), b.storage());
}

inline double frobenius_distance_sq(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "frobenius_distance_sq");
  double s = 0.0;
  const auto& x = a.storage();
  const auto& y = b.storage();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

inline double frobenius_distance(const Matrix& a, const Matrix& b) {
  return std::sqrt(frobenius_distance_sq(a, b));
}

}  // namespace slpca

#endif  // SLPCA_MATRIX_HPP
