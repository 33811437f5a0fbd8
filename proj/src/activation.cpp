#include "qnn/activation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qnn/error.hpp"

namespace qnn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Matrix leading_columns(const Matrix& q, std::size_t k) { return q.block(0, 0, q.rows(), k); }

Vector scaled(std::span<const double> v, double s) {
  Vector out(v.begin(), v.end());
  for (double& x : out) x *= s;
  return out;
}

// g(r) I + (g'(r) / r) v v^T for a radial rescaling with factor g(|v|).
Matrix radial_jacobian(std::span<const double> v, double g, double g_prime) {
  const std::size_t d = v.size();
  const double r = norm2(v);
  Matrix j = g * Matrix::identity(d);
  if (r > 0.0 && g_prime != 0.0) {
    const double c = g_prime / r;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) j(a, b) += c * v[a] * v[b];
  }
  return j;
}

bool is_isometry(const Matrix& m) {
  return max_abs_diff(m.transpose() * m, Matrix::identity(m.cols())) <= 1e-12;
}

}  // namespace

bool operator==(const Conjugated& a, const Conjugated& b) {
  if (a.inner_dim != b.inner_dim || !(a.q == b.q)) return false;
  if (!a.base || !b.base) return a.base == b.base;
  return *a.base == *b.base;
}

bool operator==(const Embedded& a, const Embedded& b) {
  if (!(a.embed == b.embed) || !(a.retract == b.retract)) return false;
  if (!a.base || !b.base) return a.base == b.base;
  return *a.base == *b.base;
}

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Identity: return "identity";
    case ActivationKind::StepReLU: return "step_relu";
    case ActivationKind::Squashing: return "squashing";
    case ActivationKind::ShiftedReLU: return "shifted_relu";
    case ActivationKind::ShiftedNorm: return "shifted_norm";
    case ActivationKind::Conjugated: return "conjugated";
    case ActivationKind::Embedded: return "embedded";
    case ActivationKind::PointwiseReLU: return "relu";
  }
  return "unknown";
}

Activation Activation::conjugated(const Activation& base, Matrix q, std::size_t inner_dim) {
  if (q.rows() != q.cols() || inner_dim > q.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "conjugating matrix must be square with inner_dim <= size");
  }
  if (!base.accepts_dim(q.rows())) {
    throw Error(ErrorKind::DimensionMismatch, "base activation does not act on width " +
                                                  std::to_string(q.rows()));
  }
  // Conjugating a conjugated activation composes the two orthogonal changes of basis.
  if (const auto* inner = std::get_if<Conjugated>(&base.value_)) {
    const std::size_t outer_dim = inner->q.rows();
    Matrix lifted = Matrix::identity(outer_dim);
    lifted.set_block(0, 0, q);
    return Activation(Conjugated{inner->base, inner->q * lifted, inner_dim});
  }
  return Activation(Conjugated{std::make_shared<const Activation>(base), std::move(q), inner_dim});
}

Activation Activation::embedded(const Activation& base, Matrix embed, Matrix retract) {
  if (retract.rows() != embed.cols() || retract.cols() != embed.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "embed/retract shapes do not match");
  }
  if (!base.accepts_dim(embed.rows())) {
    throw Error(ErrorKind::DimensionMismatch, "base activation does not act on width " +
                                                  std::to_string(embed.rows()));
  }
  return Activation(
      Embedded{std::make_shared<const Activation>(base), std::move(embed), std::move(retract)});
}

bool Activation::is_rescaling() const {
  return std::visit(overloaded{
                        [](const PointwiseReLU&) { return false; },
                        [](const Conjugated& c) { return c.base->is_rescaling(); },
                        [](const Embedded& e) { return e.base->is_rescaling(); },
                        [](const auto&) { return true; },
                    },
                    value_);
}

bool Activation::is_radial() const {
  return std::visit(
      overloaded{
          [](const ShiftedNorm& s) {
            return std::all_of(s.center.begin(), s.center.end(), [](double c) { return c == 0.0; });
          },
          [](const PointwiseReLU&) { return false; },
          [](const Conjugated& c) { return c.base->is_radial(); },
          [](const Embedded& e) { return e.base->is_radial() && is_isometry(e.embed); },
          [](const auto&) { return true; },
      },
      value_);
}

std::optional<std::size_t> Activation::required_dim() const {
  return std::visit(overloaded{
                        [](const ShiftedNorm& s) -> std::optional<std::size_t> { return s.center.size(); },
                        [](const Conjugated& c) -> std::optional<std::size_t> { return c.inner_dim; },
                        [](const Embedded& e) -> std::optional<std::size_t> { return e.embed.cols(); },
                        [](const auto&) -> std::optional<std::size_t> { return std::nullopt; },
                    },
                    value_);
}

bool Activation::accepts_dim(std::size_t d) const {
  const auto required = required_dim();
  return !required || *required == d;
}

Vector Activation::apply(std::span<const double> v) const {
  if (!accepts_dim(v.size())) {
    throw Error(ErrorKind::DimensionMismatch, std::string(to_string(kind())) +
                                                  " activation applied to a vector of length " +
                                                  std::to_string(v.size()));
  }
  return std::visit(overloaded{
                        [&](const Conjugated& c) {
                          const Matrix lift = leading_columns(c.q, c.inner_dim);
                          return lift.transpose() * c.base->apply(lift * v);
                        },
                        [&](const Embedded& e) { return e.retract * e.base->apply(e.embed * v); },
                        [&](const PointwiseReLU&) {
                          Vector out(v.begin(), v.end());
                          for (double& x : out) x = std::max(x, 0.0);
                          return out;
                        },
                        [&](const auto&) { return scaled(v, factor(v)); },
                    },
                    value_);
}

double Activation::factor(std::span<const double> v) const {
  if (!accepts_dim(v.size())) {
    throw Error(ErrorKind::DimensionMismatch, std::string(to_string(kind())) +
                                                  " activation applied to a vector of length " +
                                                  std::to_string(v.size()));
  }
  return std::visit(
      overloaded{
          [](const Identity&) { return 1.0; },
          [&](const StepReLU&) { return norm2(v) >= 1.0 ? 1.0 : 0.0; },
          [&](const Squashing&) {
            const double r = norm2(v);
            return r / (r * r + 1.0);
          },
          [&](const ShiftedReLU& s) {
            const double r = norm2(v);
            return r > 0.0 ? std::max(r - s.shift, 0.0) / r : 0.0;
          },
          [&](const ShiftedNorm& s) {
            Vector diff(v.begin(), v.end());
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= s.center[i];
            return norm2(diff);
          },
          [&](const Conjugated& c) { return c.base->factor(leading_columns(c.q, c.inner_dim) * v); },
          [&](const Embedded& e) { return e.base->factor(e.embed * v); },
          [](const PointwiseReLU&) -> double {
            throw Error(ErrorKind::NotRescaling, "pointwise ReLU has no rescaling factor");
          },
      },
      value_);
}

Matrix Activation::jacobian(std::span<const double> v) const {
  if (!accepts_dim(v.size())) {
    throw Error(ErrorKind::DimensionMismatch, std::string(to_string(kind())) +
                                                  " activation applied to a vector of length " +
                                                  std::to_string(v.size()));
  }
  const std::size_t d = v.size();
  return std::visit(
      overloaded{
          [&](const Identity&) { return Matrix::identity(d); },
          // locally constant factor, including the kink |v| = 1
          [&](const StepReLU&) { return radial_jacobian(v, factor(v), 0.0); },
          [&](const Squashing&) {
            const double r = norm2(v);
            const double denom = (r * r + 1.0) * (r * r + 1.0);
            return radial_jacobian(v, factor(v), (1.0 - r * r) / denom);
          },
          [&](const ShiftedReLU& s) {
            const double r = norm2(v);
            const double g_prime = (r > 0.0 && r > s.shift) ? s.shift / (r * r) : 0.0;
            return radial_jacobian(v, factor(v), g_prime);
          },
          [&](const ShiftedNorm& s) {
            Vector diff(v.begin(), v.end());
            for (std::size_t i = 0; i < d; ++i) diff[i] -= s.center[i];
            const double n = norm2(diff);
            Matrix j = n * Matrix::identity(d);
            if (n > 0.0) {
              for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b) j(a, b) += v[a] * diff[b] / n;
            }
            return j;
          },
          [&](const Conjugated& c) {
            const Matrix lift = leading_columns(c.q, c.inner_dim);
            return lift.transpose() * c.base->jacobian(lift * v) * lift;
          },
          [&](const Embedded& e) { return e.retract * e.base->jacobian(e.embed * v) * e.embed; },
          [&](const PointwiseReLU&) {
            Matrix j(d, d);
            for (std::size_t i = 0; i < d; ++i) j(i, i) = v[i] > 0.0 ? 1.0 : 0.0;
            return j;
          },
      },
      value_);
}

Activation Activation::radial_core(std::size_t dim) const {
  if (!is_radial()) {
    throw Error(ErrorKind::NotRadial, std::string(to_string(kind())) + " activation is not radial");
  }
  return std::visit(overloaded{
                        [&](const ShiftedNorm&) { return Activation(ShiftedNorm{Vector(dim, 0.0)}); },
                        [&](const Conjugated& c) { return c.base->radial_core(dim); },
                        [&](const Embedded& e) { return e.base->radial_core(dim); },
                        [this](const auto&) { return *this; },
                    },
                    value_);
}

}  // namespace qnn
