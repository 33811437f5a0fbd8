#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qnn {

using Vector = std::vector<double>;

/// Dense row-major matrix of 64-bit floats.
///
/// Zero-sized shapes are legal (a 3x0 matrix is the empty map R^0 -> R^3).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Throws DimensionMismatch unless data.size() == rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  /// The n x k coordinate inclusion R^k -> R^n into the first k coordinates.
  static Matrix inclusion(std::size_t n, std::size_t k);
  /// The k x n projection onto the first k coordinates.
  static Matrix projection(std::size_t k, std::size_t n);
  static Matrix column(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  Matrix transpose() const;
  Matrix block(std::size_t row0, std::size_t col0, std::size_t nrows, std::size_t ncols) const;
  void set_block(std::size_t row0, std::size_t col0, const Matrix& src);
  /// Columns picked in the given order.
  Matrix select_columns(std::span<const std::size_t> indices) const;
  Vector column_vector(std::size_t c) const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix m);
Vector operator*(const Matrix& m, std::span<const double> v);

/// Horizontal concatenation; all blocks must share a row count (`rows` covers the empty list).
Matrix hstack(std::span<const Matrix> blocks, std::size_t rows);

/// max that keeps a NaN once seen, so deviations cannot hide one.
inline double nan_max(double acc, double x) { return (x > acc || x != x) && acc == acc ? x : acc; }

bool all_finite(const Matrix& m);
double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

double norm2(std::span<const double> v);
/// Both max_abs variants return NaN if any entry is NaN.
double max_abs(std::span<const double> v);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace qnn
