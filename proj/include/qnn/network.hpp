#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "qnn/activation.hpp"
#include "qnn/parameters.hpp"
#include "qnn/quiver.hpp"

namespace qnn {

/// Everything about a network except its weights.
struct Architecture {
  std::shared_ptr<const NeuralQuiver> quiver;
  DimensionVector dims;
  /// One per vertex; sources carry Identity.
  std::vector<Activation> activations;

  /// Throws DimensionMismatch / ShapeMismatch on inconsistent widths or activations.
  void check() const;

  /// Sum of widths over input vertices, ascending id order.
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  bool is_rescaling() const;
  bool is_radial() const;
};

/// A (d, W, rho) triple over a neural quiver. Validated on construction.
class QuiverNetwork {
 public:
  QuiverNetwork(Architecture arch, ParameterTuple weights);

  const Architecture& architecture() const noexcept { return arch_; }
  const NeuralQuiver& quiver() const noexcept { return *arch_.quiver; }
  const std::shared_ptr<const NeuralQuiver>& quiver_ptr() const noexcept { return arch_.quiver; }
  const DimensionVector& dims() const noexcept { return arch_.dims; }
  const ParameterTuple& weights() const noexcept { return weights_; }
  const std::vector<Activation>& activations() const noexcept { return arch_.activations; }
  const Activation& activation(VertexId v) const { return arch_.activations.at(v); }

  std::size_t input_dim() const { return arch_.input_dim(); }
  std::size_t output_dim() const { return arch_.output_dim(); }

  QuiverNetwork with_weights(ParameterTuple weights) const;

 private:
  Architecture arch_;
  ParameterTuple weights_;
};

/// Per-vertex features F_i(x) and the pre-activation sums that produced them.
struct FeatureAssignment {
  std::vector<Vector> features;
  std::vector<Vector> preactivations;  // empty at sources
};

struct FeedforwardResult {
  Vector output;
  FeatureAssignment assignment;
};

/// Evaluates F_i = rho_i(sum over incoming edges of W_e F_s(e)) along the topological
/// order. Inputs and outputs are concatenated by ascending vertex id.
FeedforwardResult feedforward(const Architecture& arch, const ParameterTuple& weights,
                              std::span<const double> x);
FeedforwardResult feedforward(const QuiverNetwork& net, std::span<const double> x);
Vector evaluate(const QuiverNetwork& net, std::span<const double> x);

/// The same network with vertex v renamed to new_id[v].
QuiverNetwork relabel(const QuiverNetwork& net, std::span<const VertexId> new_id);

}  // namespace qnn
