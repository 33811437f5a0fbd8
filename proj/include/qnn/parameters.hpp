#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "qnn/matrix.hpp"
#include "qnn/quiver.hpp"

namespace qnn {

/// One weight matrix per edge, indexed by edge id. Entry e has shape d_t(e) x d_s(e).
class ParameterTuple {
 public:
  ParameterTuple() = default;
  explicit ParameterTuple(std::vector<Matrix> blocks) : blocks_(std::move(blocks)) {}

  static ParameterTuple zeros(const NeuralQuiver& q, const DimensionVector& d);

  std::size_t size() const noexcept { return blocks_.size(); }
  Matrix& operator[](EdgeId e) { return blocks_.at(e); }
  const Matrix& operator[](EdgeId e) const { return blocks_.at(e); }
  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }
  auto begin() const noexcept { return blocks_.begin(); }
  auto end() const noexcept { return blocks_.end(); }

  ParameterTuple& operator+=(const ParameterTuple& other);
  ParameterTuple& operator-=(const ParameterTuple& other);
  ParameterTuple& operator*=(double s);

  friend bool operator==(const ParameterTuple&, const ParameterTuple&) = default;

 private:
  std::vector<Matrix> blocks_;
};

ParameterTuple operator+(ParameterTuple a, const ParameterTuple& b);
ParameterTuple operator-(ParameterTuple a, const ParameterTuple& b);
ParameterTuple operator*(double s, ParameterTuple p);

/// Max entrywise deviation over all edges.
double max_abs_diff(const ParameterTuple& a, const ParameterTuple& b);
double max_abs(const ParameterTuple& p);
double norm2(const ParameterTuple& p);

/// Throws DimensionMismatch naming the first edge whose shape is wrong.
void check_parameters(const NeuralQuiver& q, const DimensionVector& d, const ParameterTuple& p);

/// One orthogonal matrix per hidden vertex; every other vertex implicitly carries the identity.
struct OrthogonalTuple {
  std::map<VertexId, Matrix> factors;

  Matrix factor_or_identity(VertexId v, std::size_t dim) const;
  OrthogonalTuple inverse() const;
};

}  // namespace qnn
