#include "qnn/verify.hpp"

#include <algorithm>
#include <cmath>

#include "qnn/compress.hpp"
#include "qnn/error.hpp"
#include "qnn/optim.hpp"
#include "qnn/presets.hpp"
#include "qnn/quiverrep.hpp"

namespace qnn {

double equivariance_threshold(std::size_t steps) { return steps <= 1 ? 1e-5 : 1e-4; }
double projected_threshold(std::size_t steps) { return steps <= 1 ? 1e-6 : 1e-4; }
double factored_threshold(std::size_t steps) { return steps <= 1 ? 1e-8 : 1e-6; }

std::vector<std::size_t> preset_default_widths(const std::string& preset) {
  if (preset == "fig6-left") return {2, 4, 8, 2};
  if (preset == "fig6-middle") return {1, 2, 8, 2, 6};
  if (preset == "fig6-right") return {2, 4, 4, 8, 2};
  throw Error(ErrorKind::InvalidVertex, "unknown preset " + preset);
}

namespace {

struct Accumulator {
  CheckResult result;

  Accumulator(std::string name, double threshold, std::uint64_t seed, std::size_t trials)
      : result{std::move(name), 0.0, threshold, false, seed, trials} {}

  void add(double deviation) {
    // NaN must not slip past the comparison
    if (std::isnan(deviation) || std::isnan(result.deviation)) {
      result.deviation = std::nan("");
    } else {
      result.deviation = std::max(result.deviation, deviation);
    }
  }

  CheckResult finish() {
    result.passed = result.deviation < result.threshold;
    return result;
  }
};

double lossless_deviation(const QuiverNetwork& net, Algorithm algorithm, std::size_t inputs, Xoshiro256pp& rng) {
  CompressionResult c = algorithm == Algorithm::QR          ? qr_compress(net)
                        : algorithm == Algorithm::RankAware ? qr_compress_rank_aware(net)
                                                            : compress_change_of_basis(net);
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs; ++k) {
    const Vector x = rng.uniform_vector(net.input_dim());
    worst = nan_max(worst, max_abs_diff(evaluate(net, x), evaluate(c.reduced, x)));
  }
  return worst;
}

template <typename PerTrial>
void for_each_trial(const VerifyOptions& options, const std::string& preset, ActivationFamily family, PerTrial body) {
  const NamedQuiver nq = *find_preset(preset);
  const DimensionVector d = dims_with_bias(*nq.quiver, preset_default_widths(preset));
  for (std::size_t t = 0; t < options.trials; ++t) {
    Xoshiro256pp rng(options.seed + t);
    const QuiverNetwork net = random_network(nq.quiver, d, ActivationChoice{family}, rng);
    body(net, rng);
  }
}

std::vector<std::size_t> steps_or(const VerifyOptions& options, std::vector<std::size_t> fallback) {
  return options.steps.empty() ? fallback : options.steps;
}

std::size_t batch_size_for(const VerifyOptions& options, std::size_t steps) {
  return steps > 1 ? options.multi_step_batch_size : options.batch_size;
}

GDConfig config_for(const VerifyOptions& options, std::size_t steps) {
  return GDConfig{options.learning_rate, steps, Cost::SquaredError};
}

}  // namespace

std::vector<CheckResult> lossless_checks(const VerifyOptions& options) {
  struct Case {
    Algorithm algorithm;
    ActivationFamily family;
  };
  const Case cases[] = {{Algorithm::QR, ActivationFamily::StepReLU},
                        {Algorithm::RankAware, ActivationFamily::StepReLU},
                        {Algorithm::ChangeOfBasis, ActivationFamily::StepReLU},
                        {Algorithm::QR, ActivationFamily::Squashing},
                        {Algorithm::QR, ActivationFamily::ShiftedNorm}};
  std::vector<CheckResult> out;
  for (const std::string& preset : preset_names()) {
    for (const Case& c : cases) {
      Accumulator acc("lossless/" + preset + "/" + std::string(to_string(c.algorithm)) + "/" +
                          std::string(to_string(c.family)),
                      1e-6, options.seed, options.trials);
      for_each_trial(options, preset, c.family, [&](const QuiverNetwork& net, Xoshiro256pp& rng) {
        acc.add(lossless_deviation(net, c.algorithm, options.inputs, rng));
      });
      out.push_back(acc.finish());
    }
  }
  return out;
}

std::vector<CheckResult> lossless_checks(const QuiverNetwork& net, const VerifyOptions& options) {
  std::vector<CheckResult> out;
  for (Algorithm a : {Algorithm::QR, Algorithm::RankAware, Algorithm::ChangeOfBasis}) {
    Accumulator acc("lossless/model/" + std::string(to_string(a)), 1e-6, options.seed, options.trials);
    for (std::size_t t = 0; t < options.trials; ++t) {
      Xoshiro256pp rng(options.seed + t);
      acc.add(lossless_deviation(net, a, options.inputs, rng));
    }
    out.push_back(acc.finish());
  }
  return out;
}

namespace {

void add_descent(std::vector<CheckResult>& out, const std::string& label, const VerifyOptions& options,
                 std::size_t k, const std::vector<DescentReport>& reports) {
  Accumulator eq(label + "/equivariance/k=" + std::to_string(k), equivariance_threshold(k), options.seed,
                 reports.size());
  Accumulator pr(label + "/projected/k=" + std::to_string(k), projected_threshold(k), options.seed, reports.size());
  const bool relative = k > 1;
  eq.result.relative = relative;
  pr.result.relative = relative;
  for (const DescentReport& r : reports) {
    eq.add(r.max_equivariance(relative));
    pr.add(r.max_projected(relative));
  }
  out.push_back(eq.finish());
  out.push_back(pr.finish());
}

}  // namespace

std::vector<CheckResult> descent_checks(const VerifyOptions& options) {
  std::vector<CheckResult> out;
  for (const std::string& preset : preset_names()) {
    for (std::size_t k : steps_or(options, {1, 5})) {
      std::vector<DescentReport> reports;
      for_each_trial(options, preset, ActivationFamily::StepReLU, [&](const QuiverNetwork& net, Xoshiro256pp& rng) {
        const Batch batch = random_batch(net.architecture(), batch_size_for(options, k), rng);
        reports.push_back(verify_compressed_descent(net, batch, config_for(options, k)));
      });
      add_descent(out, "pgd/" + preset, options, k, reports);
    }
  }
  return out;
}

std::vector<CheckResult> descent_checks(const QuiverNetwork& net, bool transformed, const VerifyOptions& options) {
  std::vector<CheckResult> out;
  const DescentSetup setup = transformed ? descent_setup_from_transformed(net) : descent_setup(net);
  if (transformed) {
    // Entries of the prescribed zero blocks, stored in the file itself.
    const InterpolatingSpace space(net.quiver(), net.dims(), setup.reduced.dims());
    Accumulator member("pgd/model/interpolating-membership", 1e-12, options.seed, 1);
    member.add(space.residual(net.weights()));
    out.push_back(member.finish());
  }
  for (std::size_t k : steps_or(options, {1, 5})) {
    std::vector<DescentReport> reports;
    for (std::size_t t = 0; t < options.trials; ++t) {
      Xoshiro256pp rng(options.seed + t);
      const Batch batch = random_batch(net.architecture(), batch_size_for(options, k), rng);
      reports.push_back(verify_compressed_descent(setup, batch, config_for(options, k)));
    }
    add_descent(out, "pgd/model", options, k, reports);
  }
  return out;
}

std::vector<CheckResult> factored_checks(const VerifyOptions& options) {
  std::vector<CheckResult> out;
  for (const std::string& preset : preset_names()) {
    for (std::size_t k : steps_or(options, {1, 3})) {
      Accumulator acc("corollary-c/" + preset + "/k=" + std::to_string(k), factored_threshold(k), options.seed,
                      options.trials);
      for_each_trial(options, preset, ActivationFamily::Squashing, [&](const QuiverNetwork& net, Xoshiro256pp& rng) {
        const Batch batch = random_batch(net.architecture(), options.batch_size, rng);
        acc.add(verify_factored_descent(net, batch, config_for(options, k)).max_deviation());
      });
      out.push_back(acc.finish());
    }
  }
  return out;
}

std::vector<CheckResult> factored_checks(const QuiverNetwork& net, const VerifyOptions& options) {
  std::vector<CheckResult> out;
  for (std::size_t k : steps_or(options, {1, 3})) {
    Accumulator acc("corollary-c/model/k=" + std::to_string(k), factored_threshold(k), options.seed, options.trials);
    // an arbitrary model may diverge over several full-batch steps; measure those runs like pgd
    const bool relative = k > 1;
    acc.result.relative = relative;
    for (std::size_t t = 0; t < options.trials; ++t) {
      Xoshiro256pp rng(options.seed + t);
      const Batch batch = random_batch(net.architecture(), batch_size_for(options, k), rng);
      acc.add(verify_factored_descent(net, batch, config_for(options, k)).max_deviation(relative));
    }
    out.push_back(acc.finish());
  }
  return out;
}

}  // namespace qnn
