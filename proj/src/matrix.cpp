#include "qnn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qnn/error.hpp"

namespace qnn {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(op) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorKind::DimensionMismatch,
                "matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::identity(std::size_t n) { return inclusion(n, n); }

Matrix Matrix::inclusion(std::size_t n, std::size_t k) {
  Matrix m(n, k);
  for (std::size_t i = 0; i < std::min(n, k); ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::projection(std::size_t k, std::size_t n) { return inclusion(k, n); }

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::block(std::size_t row0, std::size_t col0, std::size_t nrows,
                     std::size_t ncols) const {
  if (row0 + nrows > rows_ || col0 + ncols > cols_) {
    throw Error(ErrorKind::DimensionMismatch, "block out of range");
  }
  Matrix b(nrows, ncols);
  for (std::size_t r = 0; r < nrows; ++r)
    for (std::size_t c = 0; c < ncols; ++c) b(r, c) = (*this)(row0 + r, col0 + c);
  return b;
}

void Matrix::set_block(std::size_t row0, std::size_t col0, const Matrix& src) {
  if (row0 + src.rows() > rows_ || col0 + src.cols() > cols_) {
    throw Error(ErrorKind::DimensionMismatch, "set_block out of range");
  }
  for (std::size_t r = 0; r < src.rows(); ++r)
    for (std::size_t c = 0; c < src.cols(); ++c) (*this)(row0 + r, col0 + c) = src(r, c);
}

Matrix Matrix::select_columns(std::span<const std::size_t> indices) const {
  Matrix out(rows_, indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= cols_) throw Error(ErrorKind::DimensionMismatch, "column index out of range");
    for (std::size_t r = 0; r < rows_; ++r) out(r, j) = (*this)(r, indices[j]);
  }
  return out;
}

Vector Matrix::column_vector(std::size_t c) const {
  Vector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::DimensionMismatch,
                "product " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " * " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix m) { return m *= s; }

Vector operator*(const Matrix& m, std::span<const double> v) {
  if (m.cols() != v.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "matrix-vector product " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()) + " * " + std::to_string(v.size()));
  }
  Vector out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) acc += m(r, c) * v[c];
    out[r] = acc;
  }
  return out;
}

Matrix hstack(std::span<const Matrix> blocks, std::size_t rows) {
  std::size_t cols = 0;
  for (const Matrix& b : blocks) {
    if (b.rows() != rows) throw Error(ErrorKind::DimensionMismatch, "hstack row count mismatch");
    cols += b.cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Matrix& b : blocks) {
    out.set_block(0, offset, b);
    offset += b.cols();
  }
  return out;
}

bool all_finite(const Matrix& m) {
  return std::all_of(m.data().begin(), m.data().end(), [](double x) { return std::isfinite(x); });
}

double frobenius_norm(const Matrix& m) { return norm2(m.data()); }

double max_abs(const Matrix& m) { return max_abs(m.data()); }

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  return max_abs_diff(a.data(), b.data());
}

double norm2(std::span<const double> v) {
  // scaled accumulation keeps huge and tiny entries from over/underflowing
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x / scale) * (x / scale);
  return scale * std::sqrt(acc);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = nan_max(m, std::abs(x));
  return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "vector length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = nan_max(m, std::abs(a[i] - b[i]));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "vector length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace qnn
