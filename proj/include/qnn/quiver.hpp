#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qnn {

using VertexId = std::size_t;
using EdgeId = std::size_t;

struct Edge {
  VertexId source;
  VertexId target;
  EdgeId id;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Partition of the vertex set. Each list is sorted by ascending id.
struct VertexClassification {
  std::vector<VertexId> inputs;  // sources other than the bias
  std::vector<VertexId> outputs;  // sinks
  std::vector<VertexId> hidden;
  VertexId bias = 0;
};

/// A connected acyclic multigraph with a distinguished bias source whose removal
/// creates no new sources. Immutable; only obtainable through validate().
class NeuralQuiver {
 public:
  /// Edge k of `edges` gets edge id k. Throws EmptyQuiver, InvalidVertex,
  /// CycleDetected, BiasNotSource, BiasRemovalCreatesSource or Disconnected,
  /// checked in that order.
  static NeuralQuiver validate(std::size_t vertex_count,
                               std::span<const std::pair<VertexId, VertexId>> edges,
                               VertexId bias);

  std::size_t vertex_count() const noexcept { return vertex_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }
  VertexId bias() const noexcept { return bias_; }

  /// Incoming edges of v by ascending edge id; this order fixes every merged column layout.
  std::span<const EdgeId> in_edges(VertexId v) const { return in_edges_.at(v); }
  std::span<const EdgeId> out_edges(VertexId v) const { return out_edges_.at(v); }

  /// Kahn's algorithm, ties broken by smallest vertex id.
  const std::vector<VertexId>& topological_order() const noexcept { return order_; }
  const VertexClassification& classification() const noexcept { return classes_; }

  bool is_source(VertexId v) const { return in_edges(v).empty(); }
  bool is_sink(VertexId v) const { return out_edges(v).empty(); }
  bool is_hidden(VertexId v) const { return !is_source(v) && !is_sink(v); }
  bool has_parallel_edges() const;

  std::vector<std::pair<VertexId, VertexId>> edge_pairs() const;

 private:
  NeuralQuiver() = default;

  std::size_t vertex_count_ = 0;
  std::vector<Edge> edges_;
  VertexId bias_ = 0;
  std::vector<std::vector<EdgeId>> in_edges_;
  std::vector<std::vector<EdgeId>> out_edges_;
  std::vector<VertexId> order_;
  VertexClassification classes_;
};

inline const std::vector<VertexId>& topological_order(const NeuralQuiver& q) {
  return q.topological_order();
}
inline const VertexClassification& classify(const NeuralQuiver& q) { return q.classification(); }

/// Same quiver with vertex v renamed to new_id[v]; edge ids are preserved.
/// Throws InvalidVertex if new_id is not a permutation.
NeuralQuiver relabel(const NeuralQuiver& q, std::span<const VertexId> new_id);

/// Per-vertex widths, all positive.
class DimensionVector {
 public:
  DimensionVector() = default;
  /// Throws DimensionMismatch on a zero entry.
  explicit DimensionVector(std::vector<std::size_t> values);

  std::size_t operator[](VertexId v) const { return values_.at(v); }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<std::size_t>& values() const noexcept { return values_; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  friend bool operator==(const DimensionVector&, const DimensionVector&) = default;

 private:
  std::vector<std::size_t> values_;
};

std::string to_string(const DimensionVector& d);

/// Throws DimensionMismatch unless d has one entry per vertex and d[bias] == 1.
void check_dimensions(const NeuralQuiver& q, const DimensionVector& d);

/// Sum of d over the sources of edges entering i (one term per edge); 0 at sources.
std::size_t incoming_dimension(const NeuralQuiver& q, const DimensionVector& d, VertexId i);

/// Sources and sinks keep their width; any other vertex gets
/// min(d_i, sum of reduced widths over its incoming edges).
DimensionVector reduced_dimension_vector(const NeuralQuiver& q, const DimensionVector& d);

}  // namespace qnn
