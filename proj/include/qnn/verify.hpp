#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qnn/network.hpp"

namespace qnn {

struct CheckResult {
  std::string name;
  double deviation = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  /// Deviation divided by max(1, |iterate|_inf) instead of absolute.
  bool relative = false;
};

struct VerifyOptions {
  /// Random networks per preset quiver; trial t draws from seed + t.
  std::size_t trials = 10;
  /// Inputs per trial for the losslessness checks.
  std::size_t inputs = 10;
  std::size_t batch_size = 10;
  /// Batch size for descent runs longer than one step.
  std::size_t multi_step_batch_size = 1;
  double learning_rate = 0.01;
  std::uint64_t seed = 1;
  /// Descent steps to check; empty means the default schedule of the suite.
  std::vector<std::size_t> steps;
};

/// Thresholds used by the descent suites. One-step descent deviations are absolute; longer
/// runs are divided by max(1, |iterate|_inf) because the iterates may grow by orders of magnitude.
double equivariance_threshold(std::size_t steps);
double projected_threshold(std::size_t steps);
double factored_threshold(std::size_t steps);

/// All three algorithms with StepReLU, plus Squashing and ShiftedNorm through qr_compress,
/// on every preset quiver at its default widths.
std::vector<CheckResult> lossless_checks(const VerifyOptions& options);
/// Compressed-descent identities on the presets with StepReLU; default steps {1, 5}.
std::vector<CheckResult> descent_checks(const VerifyOptions& options);
/// Factored-descent identity on the presets with Squashing; default steps {1, 3}.
std::vector<CheckResult> factored_checks(const VerifyOptions& options);

/// Same checks for one user-supplied network. `transformed` reads its weights as the
/// transformed tuple T (with Q = I) and adds an interpolating-space membership check.
std::vector<CheckResult> lossless_checks(const QuiverNetwork& net, const VerifyOptions& options);
std::vector<CheckResult> descent_checks(const QuiverNetwork& net, bool transformed, const VerifyOptions& options);
std::vector<CheckResult> factored_checks(const QuiverNetwork& net, const VerifyOptions& options);

/// Default widths of the preset quivers: (2,4,8,2), (1,2,8,2,6), (2,4,4,8,2), bias appended.
std::vector<std::size_t> preset_default_widths(const std::string& preset);

}  // namespace qnn
