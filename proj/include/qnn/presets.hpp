#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qnn/network.hpp"
#include "qnn/random.hpp"

namespace qnn {

/// A built-in quiver with human-readable vertex names. The bias is the last vertex and
/// alphabetical order of the other names is a topological order.
struct NamedQuiver {
  std::string name;
  std::vector<std::string> vertex_names;
  std::shared_ptr<const NeuralQuiver> quiver;
};

/// a->b->c->d with a skip edge a->c; bias feeds b, c, d.  ("fig6-left")
NamedQuiver skip_chain_quiver();
/// Inputs a, b merge into c, which fans out to outputs d, e; bias feeds c, d, e.  ("fig6-middle")
NamedQuiver merge_split_quiver();
/// a fans out to b and c, which merge into d, then d->e; bias feeds b, c, d, e.  ("fig6-right")
NamedQuiver diamond_quiver();

std::vector<std::string> preset_names();
std::optional<NamedQuiver> find_preset(std::string_view name);

/// Accepts one width per non-bias vertex (ascending id; the bias gets 1) or one per vertex.
/// Throws DimensionMismatch on any other length.
DimensionVector dims_with_bias(const NeuralQuiver& q, const std::vector<std::size_t>& widths);

enum class ActivationFamily { Identity, StepReLU, Squashing, ShiftedReLU, ShiftedNorm, PointwiseReLU };

struct ActivationChoice {
  ActivationFamily family = ActivationFamily::StepReLU;
  double shift = 0.5;  // ShiftedReLU only
};

std::optional<ActivationFamily> parse_activation_family(std::string_view name);
std::string_view to_string(ActivationFamily family);

/// Weights drawn from U[0,1) edge by edge (ascending edge id, row-major). ShiftedNorm
/// centers are drawn afterwards from U[0,1), vertex by vertex in ascending id.
QuiverNetwork random_network(std::shared_ptr<const NeuralQuiver> quiver, const DimensionVector& dims,
                             const ActivationChoice& activation, Xoshiro256pp& rng);

}  // namespace qnn
