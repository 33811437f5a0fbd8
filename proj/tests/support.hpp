#pragma once

// Independent reference computations for the test suites. Nothing here calls the code
// under test for the quantity being checked.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qnn/linalg.hpp"
#include "qnn/network.hpp"
#include "qnn/optim.hpp"
#include "qnn/presets.hpp"
#include "qnn/random.hpp"
#include "qnn/verify.hpp"

namespace qnn::test {

inline std::vector<double> naive_matvec(const Matrix& m, const std::vector<double>& v) {
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r] += m(r, c) * v[c];
  return out;
}

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double acc = 0.0L;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += static_cast<long double>(a(i, k)) * b(k, j);
      out(i, j) = static_cast<double>(acc);
    }
  return out;
}

inline double frob_diff(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a.data()[i] - b.data()[i]) * (a.data()[i] - b.data()[i]);
  return std::sqrt(s);
}

inline double frob(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

inline double inf_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double inf_norm(const std::vector<double>& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

/// F_i straight from the recursive definition, memoized depth-first from each output.
inline std::vector<double> oracle_feedforward(const QuiverNetwork& net, const std::vector<double>& x) {
  const NeuralQuiver& q = net.quiver();
  const auto& cls = q.classification();
  std::map<VertexId, std::vector<double>> memo;
  memo[q.bias()] = {1.0};
  std::size_t offset = 0;
  for (VertexId v : cls.inputs) {
    memo[v] = std::vector<double>(x.begin() + static_cast<long>(offset),
                                  x.begin() + static_cast<long>(offset + net.dims()[v]));
    offset += net.dims()[v];
  }
  std::function<const std::vector<double>&(VertexId)> feature = [&](VertexId v) -> const std::vector<double>& {
    if (auto it = memo.find(v); it != memo.end()) return it->second;
    std::vector<double> z(net.dims()[v], 0.0);
    for (const Edge& e : q.edges()) {
      if (e.target != v) continue;
      const std::vector<double> part = naive_matvec(net.weights()[e.id], feature(e.source));
      for (std::size_t r = 0; r < z.size(); ++r) z[r] += part[r];
    }
    return memo[v] = net.activation(v).apply(z);
  };
  std::vector<double> out;
  for (VertexId v : cls.outputs) {
    const auto& f = feature(v);
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

/// Reduced widths by memoized recursion over predecessors (no topological order used).
inline std::vector<std::size_t> oracle_reduced_dims(const NeuralQuiver& q, const std::vector<std::size_t>& d) {
  std::map<VertexId, std::size_t> memo;
  std::function<std::size_t(VertexId)> red = [&](VertexId v) -> std::size_t {
    if (auto it = memo.find(v); it != memo.end()) return it->second;
    bool source = true;
    bool sink = true;
    std::size_t incoming = 0;
    for (const Edge& e : q.edges()) {
      if (e.target == v) {
        source = false;
        incoming += red(e.source);
      }
      if (e.source == v) sink = false;
    }
    return memo[v] = (source || sink) ? d[v] : std::min(d[v], incoming);
  };
  std::vector<std::size_t> out;
  for (VertexId v = 0; v < q.vertex_count(); ++v) out.push_back(red(v));
  return out;
}

/// Central finite differences of the loss, entry by entry.
inline ParameterTuple fd_gradient(const Architecture& arch, const ParameterTuple& w, const Batch& batch,
                                  double h = 1e-6) {
  ParameterTuple g = w;
  for (std::size_t e = 0; e < w.size(); ++e) {
    for (std::size_t i = 0; i < w[e].size(); ++i) {
      ParameterTuple plus = w;
      ParameterTuple minus = w;
      plus[e].data()[i] += h;
      minus[e].data()[i] -= h;
      g[e].data()[i] = (loss(arch, plus, batch) - loss(arch, minus, batch)) / (2.0 * h);
    }
  }
  return g;
}

/// |a - b| / |b| over the whole tuple, 2-norm.
inline double tuple_relative_error(const ParameterTuple& a, const ParameterTuple& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t e = 0; e < a.size(); ++e)
    for (std::size_t i = 0; i < a[e].size(); ++i) {
      const double d = a[e].data()[i] - b[e].data()[i];
      num += d * d;
      den += b[e].data()[i] * b[e].data()[i];
    }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

inline Matrix random_orthogonal(std::size_t n, Xoshiro256pp& rng) {
  Matrix m(n, n);
  for (double& x : m.data()) x = rng.uniform(-1.0, 1.0);
  return complete_qr(m).q;
}

inline Matrix random_matrix(std::size_t r, std::size_t c, Xoshiro256pp& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (double& x : m.data()) x = rng.uniform(lo, hi);
  return m;
}

inline QuiverNetwork preset_network(const std::string& preset, ActivationFamily family, std::uint64_t seed) {
  const NamedQuiver nq = *find_preset(preset);
  Xoshiro256pp rng(seed);
  return random_network(nq.quiver, dims_with_bias(*nq.quiver, preset_default_widths(preset)), {family}, rng);
}

inline const std::vector<std::string>& presets() {
  static const std::vector<std::string> names = preset_names();
  return names;
}

inline std::shared_ptr<const NeuralQuiver> make_quiver(std::size_t n, std::vector<std::pair<VertexId, VertexId>> edges,
                                                      VertexId bias) {
  return std::make_shared<const NeuralQuiver>(NeuralQuiver::validate(n, edges, bias));
}

}  // namespace qnn::test

namespace qnn::test {

/// Random valid neural quiver: vertices 0..n-2 in a random DAG (edges only go up in id),
/// bias = n-1 feeding every non-source. Retries until validation succeeds.
inline std::shared_ptr<const NeuralQuiver> random_neural_quiver(Xoshiro256pp& rng, std::size_t max_vertices = 7,
                                                                bool allow_parallel = true) {
  for (;;) {
    const std::size_t n = 3 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_vertices - 2));
    const VertexId bias = n - 1;
    std::vector<std::pair<VertexId, VertexId>> edges;
    std::vector<bool> has_in(n, false);
    for (VertexId i = 0; i + 1 < bias; ++i)
      for (VertexId j = i + 1; j < bias; ++j) {
        if (rng.uniform() < 0.45) {
          edges.emplace_back(i, j);
          has_in[j] = true;
          if (allow_parallel && rng.uniform() < 0.1) edges.emplace_back(i, j);
        }
      }
    for (VertexId j = 0; j < bias; ++j)
      if (has_in[j]) edges.emplace_back(bias, j);
    try {
      return make_quiver(n, edges, bias);
    } catch (const std::exception&) {
    }
  }
}

inline std::vector<std::size_t> random_widths(const NeuralQuiver& q, Xoshiro256pp& rng, std::size_t max_width = 6) {
  std::vector<std::size_t> d(q.vertex_count());
  for (VertexId v = 0; v < d.size(); ++v)
    d[v] = v == q.bias() ? 1 : 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_width));
  return d;
}

}  // namespace qnn::test
