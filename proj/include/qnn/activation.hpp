#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>

#include "qnn/matrix.hpp"

namespace qnn {

class Activation;

struct Identity {
  friend bool operator==(const Identity&, const Identity&) = default;
};

/// lambda(v) = 0 for |v| < 1, 1 otherwise.
struct StepReLU {
  friend bool operator==(const StepReLU&, const StepReLU&) = default;
};

/// h(r) = r^2 / (r^2 + 1), so lambda(v) = |v| / (|v|^2 + 1).
struct Squashing {
  friend bool operator==(const Squashing&, const Squashing&) = default;
};

/// h(r) = max(r - shift, 0) for r >= 0.
struct ShiftedReLU {
  double shift = 0.0;
  friend bool operator==(const ShiftedReLU&, const ShiftedReLU&) = default;
};

/// lambda(v) = |v - center|. Rescaling but not radial once center != 0.
struct ShiftedNorm {
  Vector center;
  friend bool operator==(const ShiftedNorm&, const ShiftedNorm&) = default;
};

/// x -> proj_k(q^T base(q Inc_k x)): the base activation seen through an orthogonal
/// change of basis and restricted to the first inner_dim coordinates.
struct Conjugated {
  std::shared_ptr<const Activation> base;
  Matrix q;  // d x d orthogonal
  std::size_t inner_dim = 0;

  friend bool operator==(const Conjugated& a, const Conjugated& b);
};

/// x -> retract(base(embed x)) for an injective embed (d x k) with retract * embed = I_k.
struct Embedded {
  std::shared_ptr<const Activation> base;
  Matrix embed;
  Matrix retract;

  friend bool operator==(const Embedded& a, const Embedded& b);
};

/// Coordinatewise max(v, 0). Not a rescaling function; compression rejects it.
struct PointwiseReLU {
  friend bool operator==(const PointwiseReLU&, const PointwiseReLU&) = default;
};

enum class ActivationKind {
  Identity,
  StepReLU,
  Squashing,
  ShiftedReLU,
  ShiftedNorm,
  Conjugated,
  Embedded,
  PointwiseReLU,
};

std::string_view to_string(ActivationKind kind);

class Activation {
 public:
  using Variant = std::variant<Identity, StepReLU, Squashing, ShiftedReLU, ShiftedNorm, Conjugated,
                               Embedded, PointwiseReLU>;

  Activation() : value_(Identity{}) {}
  Activation(Variant value) : value_(std::move(value)) {}  // NOLINT: implicit by design of the sum type
  template <typename T>
    requires std::is_constructible_v<Variant, T&&> && (!std::is_same_v<std::remove_cvref_t<T>, Variant>) &&
             (!std::is_same_v<std::remove_cvref_t<T>, Activation>)
  Activation(T&& alt) : value_(std::forward<T>(alt)) {}  // NOLINT

  /// Throws DimensionMismatch if q is not square or inner_dim exceeds it.
  static Activation conjugated(const Activation& base, Matrix q, std::size_t inner_dim);
  static Activation embedded(const Activation& base, Matrix embed, Matrix retract);

  const Variant& value() const noexcept { return value_; }
  ActivationKind kind() const noexcept { return static_cast<ActivationKind>(value_.index()); }

  bool is_rescaling() const;
  /// Rescaling factor depends only on |v|.
  bool is_radial() const;

  /// Some variants only act on one width (ShiftedNorm, Conjugated, Embedded).
  std::optional<std::size_t> required_dim() const;
  bool accepts_dim(std::size_t d) const;

  Vector apply(std::span<const double> v) const;
  /// lambda(v) with apply(v) == lambda(v) * v. Throws NotRescaling for PointwiseReLU.
  double factor(std::span<const double> v) const;
  /// Analytic Jacobian of apply at v.
  Matrix jacobian(std::span<const double> v) const;

  /// For a radial activation, the plain variant realizing the same function on width `dim`.
  /// Throws NotRadial.
  Activation radial_core(std::size_t dim) const;

  friend bool operator==(const Activation&, const Activation&) = default;

 private:
  Variant value_;
};

}  // namespace qnn
