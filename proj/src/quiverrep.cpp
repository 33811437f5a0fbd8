#include "qnn/quiverrep.hpp"

#include <algorithm>
#include <string>

#include "qnn/error.hpp"
#include "qnn/linalg.hpp"

namespace qnn {

RepresentationView representation_view(const NeuralQuiver& q, const DimensionVector& d, const ParameterTuple& a) {
  check_parameters(q, d, a);
  RepresentationView view{a, {}};
  for (VertexId v = 0; v < q.vertex_count(); ++v) {
    if (q.is_source(v)) continue;
    std::vector<Matrix> parts;
    for (EdgeId e : q.in_edges(v)) parts.push_back(a[e]);
    view.merged.emplace(v, hstack(parts, d[v]));
  }
  return view;
}

namespace {

void check_permutation(VertexId v, const std::vector<std::size_t>& perm, std::size_t n) {
  if (perm.size() != n) {
    throw Error(ErrorKind::InvalidPermutation, "vertex " + std::to_string(v) + ": permutation has length " +
                                                   std::to_string(perm.size()) + ", expected " + std::to_string(n));
  }
  std::vector<bool> seen(n, false);
  for (std::size_t p : perm) {
    if (p >= n || seen[p]) {
      throw Error(ErrorKind::InvalidPermutation, "vertex " + std::to_string(v) + ": not a permutation of 0.." +
                                                     std::to_string(n - 1));
    }
    seen[p] = true;
  }
}

}  // namespace

QuiverQR quiver_qr_permuted(const NeuralQuiver& q, const DimensionVector& d, const ParameterTuple& a,
                            const VertexPermutations& permutations) {
  if (q.has_parallel_edges()) throw Error(ErrorKind::DoubleEdge, "quiver has parallel edges");
  check_parameters(q, d, a);
  for (const auto& [v, perm] : permutations) {
    if (v >= q.vertex_count() || q.is_source(v)) {
      throw Error(ErrorKind::InvalidPermutation, "permutation given for source or unknown vertex " + std::to_string(v));
    }
    check_permutation(v, perm, incoming_dimension(q, d, v));
  }

  QuiverQR out;
  std::vector<Matrix> r(q.edge_count());
  for (VertexId i : q.topological_order()) {
    if (q.is_source(i)) continue;
    const auto in = q.in_edges(i);
    if (q.is_sink(i)) {
      for (EdgeId e : in) {
        const VertexId s = q.edge(e).source;
        r[e] = a[e] * out.q.factor_or_identity(s, d[s]);
      }
      continue;
    }
    std::vector<Matrix> parts;
    for (EdgeId e : in) {
      const VertexId s = q.edge(e).source;
      parts.push_back(a[e] * out.q.factor_or_identity(s, d[s]));
    }
    const Matrix merged = hstack(parts, d[i]);
    const auto it = permutations.find(i);
    const CompleteQR f = complete_qr(it == permutations.end() ? merged : merged.select_columns(it->second));

    Matrix full(d[i], merged.cols());
    if (it == permutations.end()) {
      full.set_block(0, 0, f.r);
    } else {
      for (std::size_t j = 0; j < it->second.size(); ++j)
        for (std::size_t row = 0; row < f.r.rows(); ++row) full(row, it->second[j]) = f.r(row, j);
    }
    std::size_t offset = 0;
    for (EdgeId e : in) {
      const std::size_t w = d[q.edge(e).source];
      r[e] = full.block(0, offset, d[i], w);
      offset += w;
    }
    out.q.factors.emplace(i, f.q);
  }
  out.r = ParameterTuple(std::move(r));
  return out;
}

QuiverQR quiver_qr(const NeuralQuiver& q, const DimensionVector& d, const ParameterTuple& a) {
  return quiver_qr_permuted(q, d, a, {});
}

VertexPermutations reduced_first_permutations(const NeuralQuiver& q, const DimensionVector& d,
                                              const DimensionVector& reduced) {
  VertexPermutations out;
  for (VertexId i = 0; i < q.vertex_count(); ++i) {
    if (!q.is_hidden(i)) continue;
    std::vector<std::size_t> head;
    std::vector<std::size_t> tail;
    std::size_t offset = 0;
    for (EdgeId e : q.in_edges(i)) {
      const VertexId s = q.edge(e).source;
      for (std::size_t c = 0; c < d[s]; ++c) (c < reduced[s] ? head : tail).push_back(offset + c);
      offset += d[s];
    }
    head.insert(head.end(), tail.begin(), tail.end());
    out.emplace(i, std::move(head));
  }
  return out;
}

double FactoredDescentReport::max_deviation(bool relative) const {
  double m = 0.0;
  for (std::size_t k = 0; k < deviations.size(); ++k) m = nan_max(m, relative ? deviations[k] / scales[k] : deviations[k]);
  return m;
}

FactoredDescentReport verify_factored_descent(const QuiverNetwork& net, const Batch& batch, const GDConfig& config) {
  if (!net.architecture().is_radial()) throw Error(ErrorKind::NotRadial, "factored descent needs radial activations");
  config.check();
  const QuiverQR f = quiver_qr(net.quiver(), net.dims(), net.weights());
  FactoredDescentReport report;
  ParameterTuple w = net.weights();
  ParameterTuple r = f.r;
  for (std::size_t k = 0;; ++k) {
    report.deviations.push_back(max_abs_diff(w, group_action(net.quiver(), f.q, r)));
    const double scale = max_abs(w);
    report.scales.push_back(scale == scale ? std::max(1.0, scale) : 1.0);
    if (k == config.steps) break;
    w = gd_step(net.architecture(), w, batch, config);
    r = gd_step(net.architecture(), r, batch, config);
  }
  return report;
}

}  // namespace qnn
