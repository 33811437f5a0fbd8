#pragma once

#include <cstddef>
#include <vector>

#include "qnn/compress.hpp"
#include "qnn/network.hpp"
#include "qnn/random.hpp"

namespace qnn {

struct Sample {
  Vector x;
  Vector y;
};

using Batch = std::vector<Sample>;

enum class Cost { SquaredError };

struct GDConfig {
  double learning_rate = 0.01;
  std::size_t steps = 1;
  Cost cost = Cost::SquaredError;

  /// Throws ShapeMismatch unless the learning rate is positive and finite.
  void check() const;
};

/// Throws DimensionMismatch on an empty batch or a sample of the wrong width.
void check_batch(const Architecture& arch, const Batch& batch);

/// `size` samples with inputs and labels drawn from U[0,1), input first.
Batch random_batch(const Architecture& arch, std::size_t size, Xoshiro256pp& rng);

/// Sum over samples of the cost; 1/2 |F(x) - y|^2 for SquaredError.
double loss(const Architecture& arch, const ParameterTuple& w, const Batch& batch,
            Cost cost = Cost::SquaredError);

/// dL/dW_e for every edge, by reverse accumulation through the activation Jacobians.
ParameterTuple gradient(const Architecture& arch, const ParameterTuple& w, const Batch& batch,
                        Cost cost = Cost::SquaredError);

/// (Q_t W_e Q_s^T)_e, identity factors outside the hidden vertices.
ParameterTuple group_action(const NeuralQuiver& q, const OrthogonalTuple& factors, const ParameterTuple& w);

/// W - eta * grad L(W).
ParameterTuple gd_step(const Architecture& arch, const ParameterTuple& w, const Batch& batch, const GDConfig& config);
/// config.steps applications of gd_step.
ParameterTuple gd(const Architecture& arch, const ParameterTuple& w, const Batch& batch, const GDConfig& config);

/// Zeros the bottom-left (d_t - r_t) x r_s block of every entry, r = reduced widths.
ParameterTuple proj(const NeuralQuiver& q, const ParameterTuple& w, const DimensionVector& dims,
                    const DimensionVector& reduced);

/// proj(gd_step(W)).
ParameterTuple pgd_step(const Architecture& arch, const DimensionVector& reduced, const ParameterTuple& w,
                        const Batch& batch, const GDConfig& config);
ParameterTuple pgd(const Architecture& arch, const DimensionVector& reduced, const ParameterTuple& w,
                   const Batch& batch, const GDConfig& config);

/// Maps between Param(d_red), the interpolating subspace of Param(d) and Param(d).
/// Tuples in the interpolating subspace are stored as full-size Param(d) tuples.
class InterpolatingSpace {
 public:
  /// Throws DimensionMismatch unless reduced <= dims pointwise.
  InterpolatingSpace(const NeuralQuiver& q, DimensionVector dims, DimensionVector reduced);

  const DimensionVector& dims() const noexcept { return dims_; }
  const DimensionVector& reduced() const noexcept { return reduced_; }

  /// Inclusion of the subspace. Throws ShapeMismatch if t has a prescribed block entry above tol.
  ParameterTuple iota1(const ParameterTuple& t, double tol = 0.0) const;
  /// Zeroes the prescribed blocks (same as proj).
  ParameterTuple q1(const ParameterTuple& w) const;
  /// Zero padding of a reduced tuple.
  ParameterTuple iota2(const ParameterTuple& x) const;
  /// Top-left d_red_t x d_red_s block of every entry.
  ParameterTuple q2(const ParameterTuple& t) const;
  ParameterTuple iota(const ParameterTuple& x) const;

  /// Largest entry in the blocks that must vanish.
  double residual(const ParameterTuple& w) const;

 private:
  const NeuralQuiver* quiver_;
  DimensionVector dims_;
  DimensionVector reduced_;
};

struct DescentStepDeviation {
  std::size_t step = 0;
  double equivariance = 0.0;  // |gamma^k(W) - Q . gamma^k(T)|
  double projected = 0.0;     // |gamma_proj^k(T) - iota(gamma_red^k(W_red)) - (T - iota(W_red))|
  double scale = 1.0;         // max(1, |gamma^k(W)|, |gamma_proj^k(T)|)
};

struct DescentReport {
  std::vector<DescentStepDeviation> steps;  // k = 0 .. config.steps
  double interpolating_residual = 0.0;      // of T

  /// With `relative`, each step's deviation is divided by its scale first.
  double max_equivariance(bool relative = false) const;
  double max_projected(bool relative = false) const;
};

/// Inputs for the compressed-descent identities: W = Q . T with T in the interpolating space
/// and `reduced` carrying q2(T) with the reduced activations.
struct DescentSetup {
  Architecture arch;
  ParameterTuple w;
  OrthogonalTuple q;
  ParameterTuple t;
  QuiverNetwork reduced;
};

/// Compresses a radial network with qr_compress and sets T = Q^-1 . W. Throws NotRadial.
DescentSetup descent_setup(const QuiverNetwork& net);
/// Treats the weights of `net` as the transformed tuple T with Q = I; the reduced network is
/// q2(T) at reduced_dimension_vector widths. Throws NotRadial.
DescentSetup descent_setup_from_transformed(const QuiverNetwork& net);

DescentReport verify_compressed_descent(const DescentSetup& setup, const Batch& batch, const GDConfig& config);
DescentReport verify_compressed_descent(const QuiverNetwork& net, const Batch& batch, const GDConfig& config);

}  // namespace qnn
