#pragma once

#include <map>
#include <vector>

#include "qnn/optim.hpp"

namespace qnn {

/// A representation together with its merged matrix A_{->i} = [A_e ...] at every non-source
/// vertex, in-edges by ascending id.
struct RepresentationView {
  ParameterTuple maps;
  std::map<VertexId, Matrix> merged;
};

RepresentationView representation_view(const NeuralQuiver& q, const DimensionVector& d, const ParameterTuple& a);

/// A = Q . R with every hidden R_{->i} upper triangular (non-negative diagonal).
struct QuiverQR {
  OrthogonalTuple q;
  ParameterTuple r;
};

/// Column permutation of R^{d_{->i}} per vertex; entry j names the merged column moved to position j.
using VertexPermutations = std::map<VertexId, std::vector<std::size_t>>;

/// Throws DoubleEdge when the quiver has parallel edges.
QuiverQR quiver_qr(const NeuralQuiver& q, const DimensionVector& d, const ParameterTuple& a);

/// Factors A_{->i} P_i at each hidden vertex and moves the columns of R back, so R_{->i} P_i
/// is upper triangular. Vertices without an entry use the identity. Throws InvalidPermutation
/// or DoubleEdge.
QuiverQR quiver_qr_permuted(const NeuralQuiver& q, const DimensionVector& d, const ParameterTuple& a,
                            const VertexPermutations& permutations);

/// At each hidden vertex, the first `reduced[s]` coordinates of every in-edge block, in edge
/// order, followed by the remaining coordinates in edge order.
VertexPermutations reduced_first_permutations(const NeuralQuiver& q, const DimensionVector& d,
                                              const DimensionVector& reduced);

struct FactoredDescentReport {
  std::vector<double> deviations;  // |gamma^k(W) - Q . gamma^k(R)| for k = 0 .. steps
  std::vector<double> scales;      // max(1, |gamma^k(W)|)
  /// With `relative`, each step's deviation is divided by its scale first.
  double max_deviation(bool relative = false) const;
};

/// Factors the weights with quiver_qr and runs gradient descent on both factorizations.
/// Throws NotRadial or DoubleEdge.
FactoredDescentReport verify_factored_descent(const QuiverNetwork& net, const Batch& batch, const GDConfig& config);

}  // namespace qnn
