#include "qnn/presets.hpp"

#include <utility>

#include "qnn/error.hpp"

namespace qnn {

namespace {

NamedQuiver make(std::string name, std::vector<std::string> vertex_names,
                 const std::vector<std::pair<VertexId, VertexId>>& edges) {
  const VertexId bias = vertex_names.size() - 1;
  auto quiver = std::make_shared<const NeuralQuiver>(
      NeuralQuiver::validate(vertex_names.size(), edges, bias));
  return {std::move(name), std::move(vertex_names), std::move(quiver)};
}

}  // namespace

NamedQuiver skip_chain_quiver() {
  // a=0 b=1 c=2 d=3 bias=4
  return make("fig6-left", {"a", "b", "c", "d", "bias"},
              {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {4, 1}, {4, 2}, {4, 3}});
}

NamedQuiver merge_split_quiver() {
  // a=0 b=1 c=2 d=3 e=4 bias=5
  return make("fig6-middle", {"a", "b", "c", "d", "e", "bias"},
              {{0, 2}, {1, 2}, {2, 3}, {2, 4}, {5, 2}, {5, 3}, {5, 4}});
}

NamedQuiver diamond_quiver() {
  // a=0 b=1 c=2 d=3 e=4 bias=5
  return make("fig6-right", {"a", "b", "c", "d", "e", "bias"},
              {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 4}, {5, 1}, {5, 2}, {5, 3}, {5, 4}});
}

std::vector<std::string> preset_names() { return {"fig6-left", "fig6-middle", "fig6-right"}; }

std::optional<NamedQuiver> find_preset(std::string_view name) {
  if (name == "fig6-left") return skip_chain_quiver();
  if (name == "fig6-middle") return merge_split_quiver();
  if (name == "fig6-right") return diamond_quiver();
  return std::nullopt;
}

DimensionVector dims_with_bias(const NeuralQuiver& q, const std::vector<std::size_t>& widths) {
  const std::size_t n = q.vertex_count();
  if (widths.size() == n) {
    DimensionVector d(widths);
    check_dimensions(q, d);
    return d;
  }
  if (widths.size() + 1 != n) {
    throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(n - 1) +
                                                  " widths (one per non-bias vertex), got " +
                                                  std::to_string(widths.size()));
  }
  std::vector<std::size_t> full;
  full.reserve(n);
  std::size_t next = 0;
  for (VertexId v = 0; v < n; ++v) full.push_back(v == q.bias() ? 1 : widths[next++]);
  return DimensionVector(std::move(full));
}

std::optional<ActivationFamily> parse_activation_family(std::string_view name) {
  if (name == "identity") return ActivationFamily::Identity;
  if (name == "step_relu") return ActivationFamily::StepReLU;
  if (name == "squashing") return ActivationFamily::Squashing;
  if (name == "shifted_relu") return ActivationFamily::ShiftedReLU;
  if (name == "shifted_norm") return ActivationFamily::ShiftedNorm;
  if (name == "relu") return ActivationFamily::PointwiseReLU;
  return std::nullopt;
}

std::string_view to_string(ActivationFamily family) {
  switch (family) {
    case ActivationFamily::Identity: return "identity";
    case ActivationFamily::StepReLU: return "step_relu";
    case ActivationFamily::Squashing: return "squashing";
    case ActivationFamily::ShiftedReLU: return "shifted_relu";
    case ActivationFamily::ShiftedNorm: return "shifted_norm";
    case ActivationFamily::PointwiseReLU: return "relu";
  }
  return "unknown";
}

QuiverNetwork random_network(std::shared_ptr<const NeuralQuiver> quiver, const DimensionVector& dims,
                             const ActivationChoice& activation, Xoshiro256pp& rng) {
  check_dimensions(*quiver, dims);
  std::vector<Matrix> blocks;
  blocks.reserve(quiver->edge_count());
  for (const Edge& e : quiver->edges()) blocks.push_back(rng.uniform_matrix(dims[e.target], dims[e.source]));

  std::vector<Activation> activations(quiver->vertex_count());
  for (VertexId v = 0; v < quiver->vertex_count(); ++v) {
    if (quiver->is_source(v)) continue;
    switch (activation.family) {
      case ActivationFamily::Identity: activations[v] = Identity{}; break;
      case ActivationFamily::StepReLU: activations[v] = StepReLU{}; break;
      case ActivationFamily::Squashing: activations[v] = Squashing{}; break;
      case ActivationFamily::ShiftedReLU: activations[v] = ShiftedReLU{activation.shift}; break;
      case ActivationFamily::ShiftedNorm: activations[v] = ShiftedNorm{rng.uniform_vector(dims[v])}; break;
      case ActivationFamily::PointwiseReLU: activations[v] = PointwiseReLU{}; break;
    }
  }
  return QuiverNetwork(Architecture{std::move(quiver), dims, std::move(activations)},
                       ParameterTuple(std::move(blocks)));
}

}  // namespace qnn
