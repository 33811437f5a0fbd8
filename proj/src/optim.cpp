#include "qnn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qnn/error.hpp"

namespace qnn {

void GDConfig::check() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::ShapeMismatch, "learning rate must be positive, got " + std::to_string(learning_rate));
  }
}

void check_batch(const Architecture& arch, const Batch& batch) {
  if (batch.empty()) throw Error(ErrorKind::DimensionMismatch, "batch is empty");
  const std::size_t din = arch.input_dim();
  const std::size_t dout = arch.output_dim();
  for (std::size_t j = 0; j < batch.size(); ++j) {
    if (batch[j].x.size() != din || batch[j].y.size() != dout) {
      throw Error(ErrorKind::DimensionMismatch,
                  "sample " + std::to_string(j) + " has shape " + std::to_string(batch[j].x.size()) + "->" +
                      std::to_string(batch[j].y.size()) + ", expected " + std::to_string(din) + "->" +
                      std::to_string(dout));
    }
  }
}

Batch random_batch(const Architecture& arch, std::size_t size, Xoshiro256pp& rng) {
  Batch batch;
  batch.reserve(size);
  for (std::size_t j = 0; j < size; ++j) {
    Vector x = rng.uniform_vector(arch.input_dim());
    Vector y = rng.uniform_vector(arch.output_dim());
    batch.push_back({std::move(x), std::move(y)});
  }
  return batch;
}

double loss(const Architecture& arch, const ParameterTuple& w, const Batch& batch, Cost /*cost*/) {
  check_batch(arch, batch);
  double total = 0.0;
  for (const Sample& s : batch) {
    const Vector out = feedforward(arch, w, s.x).output;
    double sq = 0.0;
    for (std::size_t r = 0; r < out.size(); ++r) sq += (out[r] - s.y[r]) * (out[r] - s.y[r]);
    total += 0.5 * sq;
  }
  return total;
}

ParameterTuple gradient(const Architecture& arch, const ParameterTuple& w, const Batch& batch, Cost /*cost*/) {
  check_batch(arch, batch);
  const NeuralQuiver& q = *arch.quiver;
  check_parameters(q, arch.dims, w);
  ParameterTuple grad = ParameterTuple::zeros(q, arch.dims);
  const auto& order = q.topological_order();

  for (const Sample& s : batch) {
    const FeedforwardResult fwd = feedforward(arch, w, s.x);
    const auto& features = fwd.assignment.features;
    const auto& pre = fwd.assignment.preactivations;

    std::vector<Vector> upstream(q.vertex_count());
    for (VertexId v = 0; v < q.vertex_count(); ++v) upstream[v].assign(arch.dims[v], 0.0);
    std::size_t offset = 0;
    for (VertexId v : q.classification().outputs) {
      for (std::size_t r = 0; r < arch.dims[v]; ++r) upstream[v][r] = fwd.output[offset + r] - s.y[offset + r];
      offset += arch.dims[v];
    }

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const VertexId v = *it;
      if (q.is_source(v)) continue;
      const Vector delta = arch.activations[v].jacobian(pre[v]).transpose() * upstream[v];
      for (EdgeId e : q.in_edges(v)) {
        const VertexId src = q.edge(e).source;
        const Vector& f = features[src];
        Matrix& g = grad[e];
        for (std::size_t r = 0; r < delta.size(); ++r)
          for (std::size_t c = 0; c < f.size(); ++c) g(r, c) += delta[r] * f[c];
        if (q.is_source(src)) continue;
        const Vector back = w[e].transpose() * delta;
        for (std::size_t c = 0; c < back.size(); ++c) upstream[src][c] += back[c];
      }
    }
  }
  return grad;
}

ParameterTuple group_action(const NeuralQuiver& q, const OrthogonalTuple& factors, const ParameterTuple& w) {
  if (w.size() != q.edge_count()) {
    throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(q.edge_count()) + " weight matrices, got " +
                                                  std::to_string(w.size()));
  }
  std::vector<Matrix> out;
  out.reserve(w.size());
  for (const Edge& e : q.edges()) {
    const Matrix& we = w[e.id];
    const Matrix qt = factors.factor_or_identity(e.target, we.rows());
    const Matrix qs = factors.factor_or_identity(e.source, we.cols());
    out.push_back(qt * we * qs.transpose());
  }
  return ParameterTuple(std::move(out));
}

ParameterTuple gd_step(const Architecture& arch, const ParameterTuple& w, const Batch& batch, const GDConfig& config) {
  config.check();
  ParameterTuple g = gradient(arch, w, batch, config.cost);
  g *= config.learning_rate;
  return w - g;
}

ParameterTuple gd(const Architecture& arch, const ParameterTuple& w, const Batch& batch, const GDConfig& config) {
  ParameterTuple cur = w;
  for (std::size_t k = 0; k < config.steps; ++k) cur = gd_step(arch, cur, batch, config);
  return cur;
}

namespace {

void check_reduced(const NeuralQuiver& q, const DimensionVector& dims, const DimensionVector& reduced) {
  check_dimensions(q, dims);
  if (reduced.size() != dims.size()) {
    throw Error(ErrorKind::DimensionMismatch, "reduced widths " + to_string(reduced) + " do not match " +
                                                  to_string(dims));
  }
  for (VertexId v = 0; v < dims.size(); ++v) {
    if (reduced[v] > dims[v]) {
      throw Error(ErrorKind::DimensionMismatch, "reduced width exceeds full width at vertex " + std::to_string(v));
    }
  }
}

}  // namespace

ParameterTuple proj(const NeuralQuiver& q, const ParameterTuple& w, const DimensionVector& dims,
                    const DimensionVector& reduced) {
  check_reduced(q, dims, reduced);
  check_parameters(q, dims, w);
  ParameterTuple out = w;
  for (const Edge& e : q.edges()) {
    Matrix& m = out[e.id];
    for (std::size_t r = reduced[e.target]; r < dims[e.target]; ++r)
      for (std::size_t c = 0; c < reduced[e.source]; ++c) m(r, c) = 0.0;
  }
  return out;
}

ParameterTuple pgd_step(const Architecture& arch, const DimensionVector& reduced, const ParameterTuple& w,
                        const Batch& batch, const GDConfig& config) {
  return proj(*arch.quiver, gd_step(arch, w, batch, config), arch.dims, reduced);
}

ParameterTuple pgd(const Architecture& arch, const DimensionVector& reduced, const ParameterTuple& w,
                   const Batch& batch, const GDConfig& config) {
  ParameterTuple cur = w;
  for (std::size_t k = 0; k < config.steps; ++k) cur = pgd_step(arch, reduced, cur, batch, config);
  return cur;
}

InterpolatingSpace::InterpolatingSpace(const NeuralQuiver& q, DimensionVector dims, DimensionVector reduced)
    : quiver_(&q), dims_(std::move(dims)), reduced_(std::move(reduced)) {
  check_reduced(q, dims_, reduced_);
}

ParameterTuple InterpolatingSpace::iota1(const ParameterTuple& t, double tol) const {
  const double res = residual(t);
  if (res > tol) {
    throw Error(ErrorKind::ShapeMismatch,
                "tuple is not in the interpolating space (block entry " + std::to_string(res) + ")");
  }
  return t;
}

ParameterTuple InterpolatingSpace::q1(const ParameterTuple& w) const { return proj(*quiver_, w, dims_, reduced_); }

ParameterTuple InterpolatingSpace::iota2(const ParameterTuple& x) const {
  check_parameters(*quiver_, reduced_, x);
  ParameterTuple out = ParameterTuple::zeros(*quiver_, dims_);
  for (const Edge& e : quiver_->edges()) out[e.id].set_block(0, 0, x[e.id]);
  return out;
}

ParameterTuple InterpolatingSpace::q2(const ParameterTuple& t) const {
  check_parameters(*quiver_, dims_, t);
  std::vector<Matrix> out;
  out.reserve(t.size());
  for (const Edge& e : quiver_->edges()) out.push_back(t[e.id].block(0, 0, reduced_[e.target], reduced_[e.source]));
  return ParameterTuple(std::move(out));
}

ParameterTuple InterpolatingSpace::iota(const ParameterTuple& x) const { return iota1(iota2(x)); }

double InterpolatingSpace::residual(const ParameterTuple& w) const {
  check_parameters(*quiver_, dims_, w);
  double worst = 0.0;
  for (const Edge& e : quiver_->edges()) {
    const Matrix& m = w[e.id];
    for (std::size_t r = reduced_[e.target]; r < dims_[e.target]; ++r)
      for (std::size_t c = 0; c < reduced_[e.source]; ++c) worst = nan_max(worst, std::abs(m(r, c)));
  }
  return worst;
}

double DescentReport::max_equivariance(bool relative) const {
  double m = 0.0;
  for (const auto& s : steps) m = nan_max(m, relative ? s.equivariance / s.scale : s.equivariance);
  return m;
}

double DescentReport::max_projected(bool relative) const {
  double m = 0.0;
  for (const auto& s : steps) m = nan_max(m, relative ? s.projected / s.scale : s.projected);
  return m;
}

namespace {

void require_radial(const Architecture& arch) {
  for (VertexId v = 0; v < arch.activations.size(); ++v) {
    if (!arch.activations[v].is_radial()) {
      throw Error(ErrorKind::NotRadial, "vertex " + std::to_string(v) + " carries a non-radial " +
                                            std::string(to_string(arch.activations[v].kind())) + " activation");
    }
  }
}

}  // namespace

DescentSetup descent_setup(const QuiverNetwork& net) {
  require_radial(net.architecture());
  CompressionResult c = qr_compress(net);
  ParameterTuple t = group_action(net.quiver(), c.q_tuple.inverse(), net.weights());
  return DescentSetup{net.architecture(), net.weights(), std::move(c.q_tuple), std::move(t), std::move(c.reduced)};
}

DescentSetup descent_setup_from_transformed(const QuiverNetwork& net) {
  const Architecture& arch = net.architecture();
  require_radial(arch);
  const NeuralQuiver& q = net.quiver();
  const DimensionVector reduced = reduced_dimension_vector(q, arch.dims);
  const InterpolatingSpace space(q, arch.dims, reduced);
  std::vector<Activation> small_acts = arch.activations;
  for (VertexId v = 0; v < q.vertex_count(); ++v) {
    if (q.is_hidden(v)) small_acts[v] = arch.activations[v].radial_core(reduced[v]);
  }
  QuiverNetwork small(Architecture{net.quiver_ptr(), reduced, std::move(small_acts)}, space.q2(net.weights()));
  return DescentSetup{arch, net.weights(), OrthogonalTuple{}, net.weights(), std::move(small)};
}

DescentReport verify_compressed_descent(const DescentSetup& setup, const Batch& batch, const GDConfig& config) {
  config.check();
  check_batch(setup.arch, batch);
  const NeuralQuiver& q = *setup.arch.quiver;
  const InterpolatingSpace space(q, setup.arch.dims, setup.reduced.dims());
  const Architecture& small = setup.reduced.architecture();

  DescentReport report;
  report.interpolating_residual = space.residual(setup.t);
  const ParameterTuple offset = setup.t - space.iota2(setup.reduced.weights());

  ParameterTuple w = setup.w;
  ParameterTuple t = setup.t;
  ParameterTuple t_proj = setup.t;
  ParameterTuple w_red = setup.reduced.weights();
  for (std::size_t k = 0;; ++k) {
    DescentStepDeviation dev;
    dev.step = k;
    dev.equivariance = max_abs_diff(w, group_action(q, setup.q, t));
    dev.projected = max_abs_diff(t_proj, space.iota2(w_red) + offset);
    dev.scale = std::max({1.0, max_abs(w), max_abs(t_proj)});
    if (std::isnan(dev.scale)) dev.scale = 1.0;
    report.steps.push_back(dev);
    if (k == config.steps) break;
    w = gd_step(setup.arch, w, batch, config);
    t = gd_step(setup.arch, t, batch, config);
    t_proj = pgd_step(setup.arch, space.reduced(), t_proj, batch, config);
    w_red = gd_step(small, w_red, batch, config);
  }
  return report;
}

DescentReport verify_compressed_descent(const QuiverNetwork& net, const Batch& batch, const GDConfig& config) {
  return verify_compressed_descent(descent_setup(net), batch, config);
}

}  // namespace qnn
