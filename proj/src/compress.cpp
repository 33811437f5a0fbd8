#include "qnn/compress.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qnn/error.hpp"
#include "qnn/linalg.hpp"
#include "qnn/random.hpp"

namespace qnn {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::QR: return "qr";
    case Algorithm::RankAware: return "rank";
    case Algorithm::ChangeOfBasis: return "basis";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "qr") return Algorithm::QR;
  if (name == "rank") return Algorithm::RankAware;
  if (name == "basis") return Algorithm::ChangeOfBasis;
  return std::nullopt;
}

namespace {

void require_rescaling(const QuiverNetwork& net) {
  for (VertexId v = 0; v < net.quiver().vertex_count(); ++v) {
    if (!net.activation(v).is_rescaling()) {
      throw Error(ErrorKind::NotRescaling, "vertex " + std::to_string(v) + " carries a " +
                                               std::string(to_string(net.activation(v).kind())) +
                                               " activation");
    }
  }
}

// What one hidden vertex turns into.
struct VertexReduction {
  Matrix frame;    // d_i x k_i, injective; fed to the out-edges
  Matrix reduced;  // k_i x (merged width); column blocks become the reduced weights
  Activation activation;
  std::optional<Matrix> orthogonal;
  std::optional<BasisMaps> basis;
};

template <typename ReduceHidden>
CompressionResult compress_with(const QuiverNetwork& net, Algorithm algorithm, ReduceHidden reduce_hidden) {
  require_rescaling(net);
  const NeuralQuiver& q = net.quiver();
  const std::size_t n = q.vertex_count();

  std::vector<Matrix> frame(n);
  std::vector<std::size_t> width(n);
  std::vector<Activation> activations = net.activations();
  std::vector<Matrix> blocks(q.edge_count());
  CompressionResult result{net, {}, algorithm, std::nullopt};
  if (algorithm == Algorithm::ChangeOfBasis) result.basis_maps.emplace();

  for (VertexId i : q.topological_order()) {
    const std::size_t d = net.dims()[i];
    if (q.is_source(i)) {
      frame[i] = Matrix::identity(d);
      width[i] = d;
      continue;
    }
    const auto in = q.in_edges(i);
    std::vector<Matrix> parts;
    parts.reserve(in.size());
    for (EdgeId e : in) parts.push_back(net.weights()[e] * frame[q.edge(e).source]);
    const Matrix merged = hstack(parts, d);

    Matrix reduced;
    if (q.is_sink(i)) {
      frame[i] = Matrix::identity(d);
      width[i] = d;
      reduced = merged;
    } else {
      VertexReduction r = reduce_hidden(merged, net.activation(i));
      width[i] = r.frame.cols();
      frame[i] = std::move(r.frame);
      reduced = std::move(r.reduced);
      activations[i] = std::move(r.activation);
      if (r.orthogonal) result.q_tuple.factors.emplace(i, std::move(*r.orthogonal));
      if (r.basis) result.basis_maps->emplace(i, std::move(*r.basis));
    }

    std::size_t offset = 0;
    for (EdgeId e : in) {
      const std::size_t w = width[q.edge(e).source];
      blocks[e] = reduced.block(0, offset, reduced.rows(), w);
      offset += w;
    }
  }

  Architecture arch{net.quiver_ptr(), DimensionVector(width), std::move(activations)};
  result.reduced = QuiverNetwork(std::move(arch), ParameterTuple(std::move(blocks)));
  return result;
}

Activation restricted_activation(const Activation& rho, const Matrix& q, std::size_t k) {
  if (rho.is_radial()) return rho.radial_core(k);
  return Activation::conjugated(rho, q, k);
}

// Columns permuted so that position j holds original column perm[j]; this undoes it.
Matrix unpermute_columns(const Matrix& m, const std::vector<std::size_t>& perm) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t j = 0; j < perm.size(); ++j)
    for (std::size_t r = 0; r < m.rows(); ++r) out(r, perm[j]) = m(r, j);
  return out;
}

Matrix drop_small_singular_values(const Matrix& m, double threshold) {
  const Svd d = svd(m);
  Matrix out(m.rows(), m.cols());
  for (std::size_t p = 0; p < d.s.size(); ++p) {
    if (d.s[p] <= threshold) continue;
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) += d.u(r, p) * d.s[p] * d.v(c, p);
  }
  return out;
}

}  // namespace

CompressionResult qr_compress(const QuiverNetwork& net) {
  return compress_with(net, Algorithm::QR, [](const Matrix& merged, const Activation& rho) {
    CompleteQR f = complete_qr(merged);
    const std::size_t k = f.r.rows();
    Matrix frame = f.q * Matrix::inclusion(f.q.rows(), k);
    Activation tau = restricted_activation(rho, f.q, k);
    return VertexReduction{std::move(frame), std::move(f.r), std::move(tau), std::move(f.q), std::nullopt};
  });
}

CompressionResult qr_compress_rank_aware(const QuiverNetwork& net, const RankAwareOptions& options) {
  return compress_with(net, Algorithm::RankAware, [&](const Matrix& input, const Activation& rho) {
    const Matrix merged = options.singular_value_threshold
                              ? drop_small_singular_values(input, *options.singular_value_threshold)
                              : input;
    const std::size_t rank = numerical_rank(merged, options.tol);
    std::size_t k = std::max<std::size_t>(rank, 1);
    std::vector<std::size_t> perm(merged.cols());
    if (rank == 0) {
      // Nothing survives; keep one coordinate so the vertex still has a width.
      std::iota(perm.begin(), perm.end(), 0);
    } else {
      perm = pivot_permutation(merged, k, options.tol);
    }
    CompleteQR f = complete_qr(merged.select_columns(perm));
    k = std::min(k, f.r.rows());
    Matrix reduced = unpermute_columns(f.r.block(0, 0, k, f.r.cols()), perm);
    Matrix frame = f.q * Matrix::inclusion(f.q.rows(), k);
    Activation tau = restricted_activation(rho, f.q, k);
    return VertexReduction{std::move(frame), std::move(reduced), std::move(tau), std::move(f.q), std::nullopt};
  });
}

CompressionResult compress_change_of_basis(const QuiverNetwork& net, double tol) {
  return compress_with(net, Algorithm::ChangeOfBasis, [tol](const Matrix& merged, const Activation& rho) {
    const std::size_t d = merged.rows();
    std::vector<Vector> kept_dirs;
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < merged.cols(); ++j) {
      Vector col = merged.column_vector(j);
      const double col_norm = norm2(col);
      if (col_norm == 0.0) continue;
      for (int pass = 0; pass < 2; ++pass) {
        for (const Vector& u : kept_dirs) {
          const double p = dot(u, col);
          for (std::size_t r = 0; r < d; ++r) col[r] -= p * u[r];
        }
      }
      const double res = norm2(col);
      if (res <= tol * col_norm) continue;
      for (double& x : col) x /= res;
      kept_dirs.push_back(std::move(col));
      kept.push_back(j);
    }
    Matrix embed = kept.empty() ? Matrix::inclusion(d, 1) : merged.select_columns(kept);
    Matrix retract = left_inverse(embed);
    Matrix reduced = retract * merged;
    Activation tau = Activation::embedded(rho, embed, retract);
    Matrix frame = embed;
    return VertexReduction{std::move(frame), std::move(reduced), std::move(tau), std::nullopt,
                           BasisMaps{std::move(embed), std::move(retract)}};
  });
}

SubnetworkWitness compression_witness(const CompressionResult& result) {
  const QuiverNetwork& small = result.reduced;
  const NeuralQuiver& q = small.quiver();
  SubnetworkWitness w;
  w.alpha.reserve(q.vertex_count());
  for (VertexId v = 0; v < q.vertex_count(); ++v) {
    const std::size_t k = small.dims()[v];
    if (result.basis_maps) {
      if (auto it = result.basis_maps->find(v); it != result.basis_maps->end()) {
        w.alpha.push_back(it->second.embed);
        continue;
      }
    }
    if (auto it = result.q_tuple.factors.find(v); it != result.q_tuple.factors.end()) {
      w.alpha.push_back(it->second * Matrix::inclusion(it->second.rows(), k));
      continue;
    }
    w.alpha.push_back(Matrix::identity(k));
  }
  return w;
}

namespace {

double scaled_deviation(const Vector& reference, const Vector& other) {
  return max_abs_diff(reference, other) / std::max(1.0, max_abs(reference));
}

Matrix block_diagonal(const std::vector<Matrix>& alpha, const std::vector<VertexId>& vertices) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  for (VertexId v : vertices) {
    rows += alpha[v].rows();
    cols += alpha[v].cols();
  }
  Matrix out(rows, cols);
  std::size_t r0 = 0;
  std::size_t c0 = 0;
  for (VertexId v : vertices) {
    out.set_block(r0, c0, alpha[v]);
    r0 += alpha[v].rows();
    c0 += alpha[v].cols();
  }
  return out;
}

}  // namespace

SubnetworkReport verify_subnetwork(const QuiverNetwork& big, const QuiverNetwork& small,
                                   const SubnetworkWitness& witness, const SubnetworkCheckOptions& options) {
  const NeuralQuiver& q = big.quiver();
  if (q.vertex_count() != small.quiver().vertex_count() || q.bias() != small.quiver().bias() ||
      q.edge_pairs() != small.quiver().edge_pairs()) {
    throw Error(ErrorKind::ShapeMismatch, "networks are not over the same quiver");
  }
  if (witness.alpha.size() != q.vertex_count()) {
    throw Error(ErrorKind::ShapeMismatch, "witness needs one map per vertex");
  }
  for (VertexId v = 0; v < q.vertex_count(); ++v) {
    const Matrix& a = witness.alpha[v];
    if (a.rows() != big.dims()[v] || a.cols() != small.dims()[v]) {
      throw Error(ErrorKind::ShapeMismatch, "witness at vertex " + std::to_string(v) + " is " +
                                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                                ", expected " + std::to_string(big.dims()[v]) + "x" +
                                                std::to_string(small.dims()[v]));
    }
  }

  SubnetworkReport report;
  for (const Edge& e : q.edges()) {
    const Matrix lhs = big.weights()[e.id] * witness.alpha[e.source];
    const Matrix rhs = witness.alpha[e.target] * small.weights()[e.id];
    const double dev = max_abs_diff(lhs, rhs) / std::max(1.0, max_abs(lhs));
    report.edge_deviation = nan_max(report.edge_deviation, dev);
    if (!(dev <= options.tol)) report.failing_edges.push_back(e.id);
  }

  Xoshiro256pp rng(options.seed);
  for (VertexId v = 0; v < q.vertex_count(); ++v) {
    if (q.is_source(v)) continue;
    const Matrix& a = witness.alpha[v];
    double worst = 0.0;
    for (std::size_t t = 0; t < options.activation_points; ++t) {
      // spans both sides of the unit sphere, where the step-type factors switch
      const Vector x = rng.uniform_vector(a.cols(), -2.0, 2.0);
      const Vector lhs = big.activation(v).apply(a * x);
      const Vector rhs = a * small.activation(v).apply(x);
      worst = nan_max(worst, scaled_deviation(lhs, rhs));
    }
    report.activation_deviation = nan_max(report.activation_deviation, worst);
    if (!(worst <= options.tol)) report.failing_vertices.push_back(v);
  }

  const auto& cls = q.classification();
  const Matrix alpha_in = block_diagonal(witness.alpha, cls.inputs);
  const Matrix alpha_out = block_diagonal(witness.alpha, cls.outputs);
  for (std::size_t t = 0; t < options.feedforward_inputs; ++t) {
    const Vector x = rng.uniform_vector(alpha_in.cols());
    const Vector lhs = evaluate(big, alpha_in * x);
    const Vector rhs = alpha_out * evaluate(small, x);
    report.feedforward_deviation = nan_max(report.feedforward_deviation, scaled_deviation(lhs, rhs));
  }
  report.feedforward_ok = report.feedforward_deviation <= options.tol;
  return report;
}

EqualityReport feedforward_equality(const QuiverNetwork& a, const QuiverNetwork& b, std::size_t trials,
                                    double tol, std::uint64_t seed) {
  if (a.input_dim() != b.input_dim() || a.output_dim() != b.output_dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "input/output widths differ: " + std::to_string(a.input_dim()) + "->" +
                    std::to_string(a.output_dim()) + " vs " + std::to_string(b.input_dim()) + "->" +
                    std::to_string(b.output_dim()));
  }
  Xoshiro256pp rng(seed);
  EqualityReport report;
  for (std::size_t t = 0; t < trials; ++t) {
    const Vector x = rng.uniform_vector(a.input_dim());
    report.max_deviation = nan_max(report.max_deviation, max_abs_diff(evaluate(a, x), evaluate(b, x)));
  }
  report.passed = report.max_deviation < tol;
  return report;
}

}  // namespace qnn
