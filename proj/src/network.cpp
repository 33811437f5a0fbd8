#include "qnn/network.hpp"

#include <algorithm>
#include <string>

#include "qnn/error.hpp"

namespace qnn {

void Architecture::check() const {
  if (!quiver) throw Error(ErrorKind::ShapeMismatch, "architecture has no quiver");
  check_dimensions(*quiver, dims);
  if (activations.size() != quiver->vertex_count()) {
    throw Error(ErrorKind::ShapeMismatch, "expected " + std::to_string(quiver->vertex_count()) +
                                              " activations, got " +
                                              std::to_string(activations.size()));
  }
  for (VertexId v = 0; v < quiver->vertex_count(); ++v) {
    const Activation& a = activations[v];
    if (quiver->is_source(v)) {
      if (a.kind() != ActivationKind::Identity) {
        throw Error(ErrorKind::ShapeMismatch,
                    "source vertex " + std::to_string(v) + " carries a non-identity activation");
      }
      continue;
    }
    if (!a.accepts_dim(dims[v])) {
      throw Error(ErrorKind::DimensionMismatch,
                  "activation at vertex " + std::to_string(v) + " acts on width " +
                      std::to_string(*a.required_dim()) + ", vertex has width " +
                      std::to_string(dims[v]));
    }
  }
}

std::size_t Architecture::input_dim() const {
  std::size_t total = 0;
  for (VertexId v : quiver->classification().inputs) total += dims[v];
  return total;
}

std::size_t Architecture::output_dim() const {
  std::size_t total = 0;
  for (VertexId v : quiver->classification().outputs) total += dims[v];
  return total;
}

bool Architecture::is_rescaling() const {
  return std::all_of(activations.begin(), activations.end(),
                     [](const Activation& a) { return a.is_rescaling(); });
}

bool Architecture::is_radial() const {
  return std::all_of(activations.begin(), activations.end(),
                     [](const Activation& a) { return a.is_radial(); });
}

QuiverNetwork::QuiverNetwork(Architecture arch, ParameterTuple weights)
    : arch_(std::move(arch)), weights_(std::move(weights)) {
  arch_.check();
  check_parameters(*arch_.quiver, arch_.dims, weights_);
}

QuiverNetwork QuiverNetwork::with_weights(ParameterTuple weights) const {
  return QuiverNetwork(arch_, std::move(weights));
}

FeedforwardResult feedforward(const Architecture& arch, const ParameterTuple& weights,
                              std::span<const double> x) {
  const NeuralQuiver& q = *arch.quiver;
  const auto& classes = q.classification();
  if (x.size() != arch.input_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "input has length " + std::to_string(x.size()) +
                                                  ", network expects " +
                                                  std::to_string(arch.input_dim()));
  }

  FeedforwardResult result;
  auto& features = result.assignment.features;
  auto& pre = result.assignment.preactivations;
  features.resize(q.vertex_count());
  pre.resize(q.vertex_count());

  features[q.bias()] = Vector{1.0};
  std::size_t offset = 0;
  for (VertexId v : classes.inputs) {
    features[v].assign(x.begin() + static_cast<long>(offset),
                       x.begin() + static_cast<long>(offset + arch.dims[v]));
    offset += arch.dims[v];
  }

  for (VertexId v : q.topological_order()) {
    if (q.is_source(v)) continue;
    Vector z(arch.dims[v], 0.0);
    for (EdgeId e : q.in_edges(v)) {
      const Vector contribution = weights[e] * features[q.edge(e).source];
      for (std::size_t r = 0; r < z.size(); ++r) z[r] += contribution[r];
    }
    features[v] = arch.activations[v].apply(z);
    pre[v] = std::move(z);
  }

  result.output.reserve(arch.output_dim());
  for (VertexId v : classes.outputs) {
    result.output.insert(result.output.end(), features[v].begin(), features[v].end());
  }
  return result;
}

FeedforwardResult feedforward(const QuiverNetwork& net, std::span<const double> x) {
  return feedforward(net.architecture(), net.weights(), x);
}

Vector evaluate(const QuiverNetwork& net, std::span<const double> x) {
  return feedforward(net, x).output;
}

QuiverNetwork relabel(const QuiverNetwork& net, std::span<const VertexId> new_id) {
  auto quiver = std::make_shared<const NeuralQuiver>(relabel(net.quiver(), new_id));
  const std::size_t n = net.quiver().vertex_count();
  std::vector<std::size_t> dims(n);
  std::vector<Activation> activations(n);
  for (VertexId v = 0; v < n; ++v) {
    dims[new_id[v]] = net.dims()[v];
    activations[new_id[v]] = net.activation(v);
  }
  return QuiverNetwork(Architecture{std::move(quiver), DimensionVector(std::move(dims)),
                                    std::move(activations)},
                       net.weights());
}

}  // namespace qnn
