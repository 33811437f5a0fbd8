#include "qnn/parameters.hpp"

#include <cmath>
#include <string>

#include "qnn/error.hpp"

namespace qnn {

namespace {

void require_same_size(const ParameterTuple& a, const ParameterTuple& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch, "parameter tuples have " + std::to_string(a.size()) +
                                                  " and " + std::to_string(b.size()) + " edges");
  }
}

}  // namespace

ParameterTuple ParameterTuple::zeros(const NeuralQuiver& q, const DimensionVector& d) {
  std::vector<Matrix> blocks;
  blocks.reserve(q.edge_count());
  for (const Edge& e : q.edges()) blocks.emplace_back(d[e.target], d[e.source]);
  return ParameterTuple(std::move(blocks));
}

ParameterTuple& ParameterTuple::operator+=(const ParameterTuple& other) {
  require_same_size(*this, other);
  for (std::size_t e = 0; e < blocks_.size(); ++e) blocks_[e] += other.blocks_[e];
  return *this;
}

ParameterTuple& ParameterTuple::operator-=(const ParameterTuple& other) {
  require_same_size(*this, other);
  for (std::size_t e = 0; e < blocks_.size(); ++e) blocks_[e] -= other.blocks_[e];
  return *this;
}

ParameterTuple& ParameterTuple::operator*=(double s) {
  for (Matrix& m : blocks_) m *= s;
  return *this;
}

ParameterTuple operator+(ParameterTuple a, const ParameterTuple& b) { return a += b; }
ParameterTuple operator-(ParameterTuple a, const ParameterTuple& b) { return a -= b; }
ParameterTuple operator*(double s, ParameterTuple p) { return p *= s; }

double max_abs_diff(const ParameterTuple& a, const ParameterTuple& b) {
  require_same_size(a, b);
  double m = 0.0;
  for (std::size_t e = 0; e < a.size(); ++e) m = nan_max(m, max_abs_diff(a[e], b[e]));
  return m;
}

double max_abs(const ParameterTuple& p) {
  double m = 0.0;
  for (const Matrix& block : p) m = nan_max(m, max_abs(block));
  return m;
}

double norm2(const ParameterTuple& p) {
  double acc = 0.0;
  for (const Matrix& block : p) {
    const double n = frobenius_norm(block);
    acc += n * n;
  }
  return std::sqrt(acc);
}

void check_parameters(const NeuralQuiver& q, const DimensionVector& d, const ParameterTuple& p) {
  if (p.size() != q.edge_count()) {
    throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(q.edge_count()) +
                                                  " weight matrices, got " + std::to_string(p.size()));
  }
  for (const Edge& e : q.edges()) {
    const Matrix& w = p[e.id];
    if (w.rows() != d[e.target] || w.cols() != d[e.source]) {
      throw Error(ErrorKind::DimensionMismatch,
                  "edge " + std::to_string(e.id) + " (" + std::to_string(e.source) + "->" +
                      std::to_string(e.target) + "): expected " + std::to_string(d[e.target]) + "x" +
                      std::to_string(d[e.source]) + ", got " + std::to_string(w.rows()) + "x" +
                      std::to_string(w.cols()));
    }
  }
}

Matrix OrthogonalTuple::factor_or_identity(VertexId v, std::size_t dim) const {
  const auto it = factors.find(v);
  if (it == factors.end()) return Matrix::identity(dim);
  if (it->second.rows() != dim || it->second.cols() != dim) {
    throw Error(ErrorKind::DimensionMismatch,
                "orthogonal factor at vertex " + std::to_string(v) + " is not " +
                    std::to_string(dim) + "x" + std::to_string(dim));
  }
  return it->second;
}

OrthogonalTuple OrthogonalTuple::inverse() const {
  OrthogonalTuple out;
  for (const auto& [v, q] : factors) out.factors.emplace(v, q.transpose());
  return out;
}

}  // namespace qnn
