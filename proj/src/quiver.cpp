#include "qnn/quiver.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

#include "qnn/error.hpp"

namespace qnn {

namespace {

// Returns the order found; it is shorter than vertex_count exactly when a cycle exists.
std::vector<VertexId> kahn_min_id(std::size_t vertex_count,
                                  const std::vector<std::vector<EdgeId>>& in_edges,
                                  const std::vector<std::vector<EdgeId>>& out_edges,
                                  const std::vector<Edge>& edges) {
  std::vector<std::size_t> indegree(vertex_count);
  std::priority_queue<VertexId, std::vector<VertexId>, std::greater<>> ready;
  for (VertexId v = 0; v < vertex_count; ++v) {
    indegree[v] = in_edges[v].size();
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<VertexId> order;
  order.reserve(vertex_count);
  while (!ready.empty()) {
    const VertexId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (EdgeId e : out_edges[v]) {
      if (--indegree[edges[e].target] == 0) ready.push(edges[e].target);
    }
  }
  return order;
}

}  // namespace

NeuralQuiver NeuralQuiver::validate(std::size_t vertex_count,
                                    std::span<const std::pair<VertexId, VertexId>> edges,
                                    VertexId bias) {
  if (vertex_count < 2) {
    throw Error(ErrorKind::EmptyQuiver, "a neural quiver needs a bias and at least one more vertex");
  }
  if (bias >= vertex_count) {
    throw Error(ErrorKind::InvalidVertex, "bias id " + std::to_string(bias) + " out of range");
  }

  NeuralQuiver q;
  q.vertex_count_ = vertex_count;
  q.bias_ = bias;
  q.in_edges_.resize(vertex_count);
  q.out_edges_.resize(vertex_count);
  q.edges_.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [s, t] = edges[e];
    if (s >= vertex_count || t >= vertex_count) {
      throw Error(ErrorKind::InvalidVertex, "edge " + std::to_string(e) + " references vertex " +
                                                std::to_string(std::max(s, t)));
    }
    if (s == t) {
      throw Error(ErrorKind::CycleDetected, "edge " + std::to_string(e) + " is a self-loop at vertex " +
                                                std::to_string(s));
    }
    q.edges_.push_back({s, t, e});
    q.out_edges_[s].push_back(e);
    q.in_edges_[t].push_back(e);
  }

  q.order_ = kahn_min_id(vertex_count, q.in_edges_, q.out_edges_, q.edges_);
  if (q.order_.size() != vertex_count) {
    std::vector<bool> placed(vertex_count, false);
    for (VertexId v : q.order_) placed[v] = true;
    const auto stuck = std::find(placed.begin(), placed.end(), false) - placed.begin();
    throw Error(ErrorKind::CycleDetected, "vertex " + std::to_string(stuck) + " lies on a cycle");
  }

  if (!q.in_edges_[bias].empty()) {
    throw Error(ErrorKind::BiasNotSource, "bias vertex " + std::to_string(bias) + " has incoming edges");
  }

  for (VertexId v = 0; v < vertex_count; ++v) {
    const auto& in = q.in_edges_[v];
    if (in.empty()) continue;
    const bool only_bias =
        std::all_of(in.begin(), in.end(), [&](EdgeId e) { return q.edges_[e].source == bias; });
    if (only_bias) {
      throw Error(ErrorKind::BiasRemovalCreatesSource,
                  "vertex " + std::to_string(v) + " is fed only by the bias");
    }
  }

  std::vector<std::size_t> parent(vertex_count);
  for (VertexId v = 0; v < vertex_count; ++v) parent[v] = v;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Edge& e : q.edges_) parent[find(e.source)] = find(e.target);
  for (VertexId v = 1; v < vertex_count; ++v) {
    if (find(v) != find(0)) {
      throw Error(ErrorKind::Disconnected,
                  "vertex " + std::to_string(v) + " is not connected to vertex 0");
    }
  }

  for (VertexId v = 0; v < vertex_count; ++v) {
    if (v == bias) continue;
    if (q.is_source(v)) {
      q.classes_.inputs.push_back(v);
    } else if (q.is_sink(v)) {
      q.classes_.outputs.push_back(v);
    } else {
      q.classes_.hidden.push_back(v);
    }
  }
  q.classes_.bias = bias;
  return q;
}

bool NeuralQuiver::has_parallel_edges() const {
  std::set<std::pair<VertexId, VertexId>> seen;
  for (const Edge& e : edges_) {
    if (!seen.insert({e.source, e.target}).second) return true;
  }
  return false;
}

std::vector<std::pair<VertexId, VertexId>> NeuralQuiver::edge_pairs() const {
  std::vector<std::pair<VertexId, VertexId>> out;
  out.reserve(edges_.size());
  for (const Edge& e : edges_) out.emplace_back(e.source, e.target);
  return out;
}

NeuralQuiver relabel(const NeuralQuiver& q, std::span<const VertexId> new_id) {
  const std::size_t n = q.vertex_count();
  std::vector<bool> hit(n, false);
  if (new_id.size() != n) throw Error(ErrorKind::InvalidVertex, "relabeling has wrong length");
  for (VertexId v : new_id) {
    if (v >= n || hit[v]) throw Error(ErrorKind::InvalidVertex, "relabeling is not a permutation");
    hit[v] = true;
  }
  auto pairs = q.edge_pairs();
  for (auto& [s, t] : pairs) {
    s = new_id[s];
    t = new_id[t];
  }
  return NeuralQuiver::validate(n, pairs, new_id[q.bias()]);
}

DimensionVector::DimensionVector(std::vector<std::size_t> values) : values_(std::move(values)) {
  for (std::size_t v = 0; v < values_.size(); ++v) {
    if (values_[v] == 0) {
      throw Error(ErrorKind::DimensionMismatch, "vertex " + std::to_string(v) + " has width 0");
    }
  }
}

std::string to_string(const DimensionVector& d) {
  std::string out = "(";
  for (std::size_t v = 0; v < d.size(); ++v) {
    if (v > 0) out += ",";
    out += std::to_string(d[v]);
  }
  return out + ")";
}

void check_dimensions(const NeuralQuiver& q, const DimensionVector& d) {
  if (d.size() != q.vertex_count()) {
    throw Error(ErrorKind::DimensionMismatch, "dimension vector has " + std::to_string(d.size()) +
                                                  " entries for " +
                                                  std::to_string(q.vertex_count()) + " vertices");
  }
  if (d[q.bias()] != 1) {
    throw Error(ErrorKind::DimensionMismatch, "bias vertex must have width 1");
  }
}

std::size_t incoming_dimension(const NeuralQuiver& q, const DimensionVector& d, VertexId i) {
  std::size_t total = 0;
  for (EdgeId e : q.in_edges(i)) total += d[q.edge(e).source];
  return total;
}

DimensionVector reduced_dimension_vector(const NeuralQuiver& q, const DimensionVector& d) {
  check_dimensions(q, d);
  std::vector<std::size_t> reduced = d.values();
  for (VertexId i : q.topological_order()) {
    if (!q.is_hidden(i)) continue;
    std::size_t incoming = 0;
    for (EdgeId e : q.in_edges(i)) incoming += reduced[q.edge(e).source];
    reduced[i] = std::min(d[i], incoming);
  }
  return DimensionVector(std::move(reduced));
}

}  // namespace qnn
