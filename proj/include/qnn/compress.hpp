#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "qnn/network.hpp"

namespace qnn {

enum class Algorithm { QR, RankAware, ChangeOfBasis };

std::string_view to_string(Algorithm algorithm);
/// "qr", "rank" or "basis".
std::optional<Algorithm> parse_algorithm(std::string_view name);

/// Injective embed (d_i x k_i) and its left inverse (k_i x d_i) at one vertex.
struct BasisMaps {
  Matrix embed;
  Matrix retract;
};

struct CompressionResult {
  /// Shares the quiver object of the input network.
  QuiverNetwork reduced;
  /// Orthogonal factor per hidden vertex (empty for ChangeOfBasis).
  OrthogonalTuple q_tuple;
  Algorithm algorithm = Algorithm::QR;
  /// ChangeOfBasis only: maps at every hidden vertex.
  std::optional<std::map<VertexId, BasisMaps>> basis_maps;
};

/// Merge, factor, pass the orthogonal factor downstream. Reduced widths are exactly
/// reduced_dimension_vector. Radial activations stay the same variant; the others are
/// wrapped in Conjugated. Throws NotRescaling.
CompressionResult qr_compress(const QuiverNetwork& net);

struct RankAwareOptions {
  /// Rank tolerance; the singular-value default when absent.
  std::optional<double> tol;
  /// Lossy mode: singular values at or below this are dropped from every merged matrix
  /// before factoring.
  std::optional<double> singular_value_threshold;
};

/// Keeps only numerical_rank(M) coordinates at each hidden vertex (at least one).
CompressionResult qr_compress_rank_aware(const QuiverNetwork& net, const RankAwareOptions& options = {});

/// Greedy column basis of the merged matrix at each hidden vertex; a column is dropped when
/// its residual against the kept ones is at most tol times its norm.
CompressionResult compress_change_of_basis(const QuiverNetwork& net, double tol = 1e-10);

/// Injective alpha_i : R^{k_i} -> R^{d_i} per vertex relating a small network to a big one.
struct SubnetworkWitness {
  std::vector<Matrix> alpha;
};

/// Q_i Inc_i (or the basis embed) at hidden vertices, identity elsewhere.
SubnetworkWitness compression_witness(const CompressionResult& result);

struct SubnetworkReport {
  double edge_deviation = 0.0;
  double activation_deviation = 0.0;
  double feedforward_deviation = 0.0;
  std::vector<EdgeId> failing_edges;
  std::vector<VertexId> failing_vertices;
  bool feedforward_ok = true;

  bool passed() const { return failing_edges.empty() && failing_vertices.empty() && feedforward_ok; }
};

struct SubnetworkCheckOptions {
  double tol = 1e-9;
  std::uint64_t seed = 0;
  std::size_t activation_points = 200;
  std::size_t feedforward_inputs = 50;
};

/// Checks W_e alpha_s = alpha_t V_e per edge, rho_i alpha_i = alpha_i tau_i at random points,
/// and F_big alpha_in = alpha_out F_small at random inputs. Deviations are scaled by
/// max(1, |reference|_inf). Throws ShapeMismatch when the quivers or witness shapes disagree.
SubnetworkReport verify_subnetwork(const QuiverNetwork& big, const QuiverNetwork& small,
                                   const SubnetworkWitness& witness, const SubnetworkCheckOptions& options = {});

struct EqualityReport {
  double max_deviation = 0.0;
  bool passed = true;
};

/// Max over `trials` U[0,1) inputs of |F_a(x) - F_b(x)|_inf. Throws DimensionMismatch.
EqualityReport feedforward_equality(const QuiverNetwork& a, const QuiverNetwork& b, std::size_t trials,
                                    double tol, std::uint64_t seed);

}  // namespace qnn
