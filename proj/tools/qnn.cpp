// qnn: generate, compress, evaluate and verify quiver neural networks.
//
// Exit codes: 0 success, 1 a check or model invariant failed, 2 usage or I/O error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qnn/compress.hpp"
#include "qnn/error.hpp"
#include "qnn/model_io.hpp"
#include "qnn/optim.hpp"
#include "qnn/presets.hpp"
#include "qnn/verify.hpp"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("QNN_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("QNN_SEED is not an unsigned integer: " + std::string(env));
  }
  return 1;
}

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError("--dims expects positive integers separated by commas, got \"" + text + "\"");
    }
  }
  if (out.empty()) throw UsageError("--dims is empty");
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw UsageError("cannot write " + path);
}

std::string widths_without_bias(const qnn::NeuralQuiver& q, const qnn::DimensionVector& d) {
  std::string out = "(";
  bool first = true;
  for (qnn::VertexId v = 0; v < d.size(); ++v) {
    if (v == q.bias()) continue;
    if (!first) out += ",";
    out += std::to_string(d[v]);
    first = false;
  }
  return out + ")";
}

std::size_t parameter_count(const qnn::QuiverNetwork& net) {
  std::size_t n = 0;
  for (const qnn::Matrix& m : net.weights()) n += m.size();
  return n;
}

// --- validate ---------------------------------------------------------------

int run_validate(const std::string& path) {
  const qnn::ModelFile model = qnn::parse_model(read_text(path));
  const qnn::QuiverNetwork& net = model.network;
  std::cout << "ok: " << net.quiver().vertex_count() << " vertices, " << net.quiver().edge_count()
            << " edges, dims " << qnn::to_string(net.dims()) << ", input " << net.input_dim() << ", output "
            << net.output_dim() << "\n";
  return kOk;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string quiver = "fig6-left";
  std::string dims;
  std::string activation = "step_relu";
  double shift = 0.5;
  std::optional<std::uint64_t> seed;
  std::string output;
};

qnn::NamedQuiver quiver_from_file(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw qnn::Error(qnn::ErrorKind::ParseError, e.what());
  }
  const json& qj = doc.contains("quiver") ? doc["quiver"] : doc;
  if (!qj.contains("vertex_count") || !qj.contains("bias") || !qj.contains("edges")) {
    throw qnn::Error(qnn::ErrorKind::ParseError, path + ": expected vertex_count, bias and edges");
  }
  std::vector<std::pair<qnn::VertexId, qnn::VertexId>> edges;
  try {
    for (const json& e : qj["edges"]) edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
    auto q = std::make_shared<const qnn::NeuralQuiver>(qnn::NeuralQuiver::validate(
        qj["vertex_count"].get<std::size_t>(), edges, qj["bias"].get<std::size_t>()));
    std::vector<std::string> names;
    if (qj.contains("names")) names = qj["names"].get<std::vector<std::string>>();
    return {path, std::move(names), std::move(q)};
  } catch (const json::exception& e) {
    throw qnn::Error(qnn::ErrorKind::ParseError, path + ": " + e.what());
  }
}

int run_generate(const GenerateArgs& args) {
  const auto family = qnn::parse_activation_family(args.activation);
  if (!family) throw UsageError("unknown --activation " + args.activation);
  const std::optional<qnn::NamedQuiver> preset = qnn::find_preset(args.quiver);
  const qnn::NamedQuiver nq = preset ? *preset : quiver_from_file(args.quiver);

  std::vector<std::size_t> widths;
  if (!args.dims.empty()) {
    widths = parse_widths(args.dims);
  } else if (preset) {
    widths = qnn::preset_default_widths(args.quiver);
  } else {
    throw UsageError("--dims is required for a quiver file");
  }
  const std::size_t n = nq.quiver->vertex_count();
  if (widths.size() != n - 1 && widths.size() != n) {
    throw UsageError("--dims needs " + std::to_string(n - 1) + " widths (one per non-bias vertex), got " +
                     std::to_string(widths.size()));
  }
  const qnn::DimensionVector d = qnn::dims_with_bias(*nq.quiver, widths);
  qnn::Xoshiro256pp rng(resolve_seed(args.seed));
  const qnn::QuiverNetwork net = qnn::random_network(nq.quiver, d, {*family, args.shift}, rng);
  write_output(args.output, qnn::serialize_model(net, nq.vertex_names));
  return kOk;
}

// --- compress ---------------------------------------------------------------

struct CompressArgs {
  std::string input;
  std::string output;
  std::string algorithm = "qr";
  std::optional<double> tol;
  std::optional<double> threshold;
  std::string transformed_output;
};

int run_compress(const CompressArgs& args) {
  const auto algorithm = qnn::parse_algorithm(args.algorithm);
  if (!algorithm) throw UsageError("--algorithm must be qr, rank or basis");
  if (args.threshold && *algorithm != qnn::Algorithm::RankAware) {
    throw UsageError("--threshold only applies to --algorithm rank");
  }
  if (args.tol && *algorithm == qnn::Algorithm::QR) throw UsageError("--tol does not apply to --algorithm qr");
  const qnn::ModelFile model = qnn::parse_model(read_text(args.input));
  const qnn::QuiverNetwork& net = model.network;

  qnn::CompressionResult result = [&] {
    switch (*algorithm) {
      case qnn::Algorithm::RankAware: return qnn::qr_compress_rank_aware(net, {args.tol, args.threshold});
      case qnn::Algorithm::ChangeOfBasis: return qnn::compress_change_of_basis(net, args.tol.value_or(1e-10));
      case qnn::Algorithm::QR: break;
    }
    return qnn::qr_compress(net);
  }();

  if (!args.transformed_output.empty()) {
    if (*algorithm != qnn::Algorithm::QR) throw UsageError("--transformed-out needs --algorithm qr");
    const qnn::ParameterTuple t = qnn::group_action(net.quiver(), result.q_tuple.inverse(), net.weights());
    write_output(args.transformed_output, qnn::serialize_model(net.with_weights(t), model.vertex_names));
  }
  const std::string text = qnn::serialize_model(result.reduced, model.vertex_names);
  std::ostream& summary = args.output.empty() || args.output == "-" ? std::cerr : std::cout;
  write_output(args.output, text);
  summary << "algorithm " << qnn::to_string(*algorithm) << "\n"
          << "dims " << widths_without_bias(net.quiver(), net.dims()) << " -> "
          << widths_without_bias(net.quiver(), result.reduced.dims()) << "\n"
          << "parameters " << parameter_count(net) << " -> " << parameter_count(result.reduced) << "\n";
  if (args.threshold) {
    const auto eq = qnn::feedforward_equality(net, result.reduced, 50, 1e-6, 0);
    summary << "lossy mode: max feedforward deviation " << eq.max_deviation << " over 50 inputs\n";
  }
  return kOk;
}

// --- eval -------------------------------------------------------------------

int run_eval(const std::string& model_path, const std::string& input) {
  const qnn::ModelFile model = qnn::parse_model(read_text(model_path));
  const std::string text = std::filesystem::exists(input) ? read_text(input) : input;
  json values;
  try {
    const auto start = text.find_first_not_of(" \t\r\n");
    values = start != std::string::npos && text[start] == '[' ? json::parse(text) : json::parse("[" + text + "]");
  } catch (const json::parse_error&) {
    throw UsageError("--input must be a comma-separated vector, a JSON array or a file holding one");
  }
  if (!values.is_array()) throw UsageError("--input must be an array of numbers");
  qnn::Vector x;
  for (const json& v : values) {
    if (!v.is_number()) throw UsageError("--input must be an array of numbers");
    x.push_back(v.get<double>());
  }
  std::cout << json(qnn::evaluate(model.network, x)).dump() << "\n";
  return kOk;
}

// --- verify -----------------------------------------------------------------

struct VerifyArgs {
  std::string check = "all";
  std::size_t trials = 10;
  std::optional<std::size_t> steps;
  double lr = 0.01;
  std::optional<std::uint64_t> seed;
  std::string model;
  bool transformed = false;
  std::string output;
};

int run_verify(const VerifyArgs& args) {
  const bool all = args.check == "all";
  if (!all && args.check != "lossless" && args.check != "pgd" && args.check != "corollary-c") {
    throw UsageError("--check must be lossless, pgd, corollary-c or all");
  }
  if (args.transformed && args.model.empty()) throw UsageError("--transformed needs --model");
  if (!(args.lr > 0.0)) throw UsageError("--lr must be positive");

  qnn::VerifyOptions options;
  options.trials = args.trials;
  options.learning_rate = args.lr;
  options.seed = resolve_seed(args.seed);
  if (args.steps) options.steps = {*args.steps};

  std::optional<qnn::ModelFile> model;
  if (!args.model.empty()) model = qnn::parse_model(read_text(args.model));

  std::vector<qnn::CheckResult> results;
  auto append = [&](std::vector<qnn::CheckResult> more) {
    results.insert(results.end(), more.begin(), more.end());
  };
  if (all || args.check == "lossless") {
    append(model ? qnn::lossless_checks(model->network, options) : qnn::lossless_checks(options));
  }
  if (all || args.check == "pgd") {
    append(model ? qnn::descent_checks(model->network, args.transformed, options) : qnn::descent_checks(options));
  }
  if (all || args.check == "corollary-c") {
    append(model ? qnn::factored_checks(model->network, options) : qnn::factored_checks(options));
  }

  bool passed = true;
  json checks = json::array();
  for (const auto& r : results) {
    passed = passed && r.passed;
    checks.push_back({{"name", r.name},
                      {"deviation", r.deviation},
                      {"threshold", r.threshold},
                      {"passed", r.passed},
                      {"seed", r.seed},
                      {"trials", r.trials},
                      {"measure", r.relative ? "relative" : "absolute"}});
    std::cerr << (r.passed ? "PASS " : "FAIL ") << r.name << "  deviation " << r.deviation
              << (r.passed ? " < " : ", threshold ") << r.threshold << "\n";
  }
  const json report{{"check", args.check}, {"seed", options.seed}, {"passed", passed}, {"checks", checks}};
  write_output(args.output, report.dump(2) + "\n");
  return passed ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quiver neural networks: lossless compression and descent checks"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Load a model file and check every invariant");
  validate->add_option("model,-i,--input", validate_path, "Model file")->required();

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Random model with U[0,1) weights");
  generate->add_option("--quiver", gen.quiver, "fig6-left, fig6-middle, fig6-right, or a quiver JSON file")
      ->capture_default_str();
  generate->add_option("--dims", gen.dims, "Comma-separated widths, one per non-bias vertex");
  generate->add_option("--activation", gen.activation,
                       "identity, step_relu, squashing, shifted_relu, shifted_norm or relu")
      ->capture_default_str();
  generate->add_option("--shift", gen.shift, "Shift for shifted_relu")->capture_default_str();
  generate->add_option("--seed", gen.seed, "PRNG seed (falls back to QNN_SEED, then 1)");
  generate->add_option("-o,--output", gen.output, "Output file (stdout when omitted)");

  CompressArgs comp;
  auto* compress = app.add_subcommand("compress", "Lossless compression of a model file");
  compress->add_option("-i,--input", comp.input, "Model file")->required();
  compress->add_option("-o,--output", comp.output, "Output file (stdout when omitted)");
  compress->add_option("--algorithm", comp.algorithm, "qr, rank or basis")->capture_default_str();
  compress->add_option("--tol", comp.tol, "Rank tolerance (rank) or span tolerance (basis)");
  compress->add_option("--threshold", comp.threshold, "Lossy: drop singular values at or below this (rank only)");
  compress->add_option("--transformed-out", comp.transformed_output,
                       "Also write the original network with weights Q^-1 . W (qr only)");

  std::string eval_model;
  std::string eval_input;
  auto* eval = app.add_subcommand("eval", "Evaluate a model on one input");
  eval->add_option("-i,--model", eval_model, "Model file")->required();
  eval->add_option("--input", eval_input, "Comma-separated vector, JSON array, or a file holding one")->required();

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Run the verification suites and print a JSON report");
  verify->add_option("--check", ver.check, "lossless, pgd, corollary-c or all")->capture_default_str();
  verify->add_option("--trials", ver.trials, "Random networks per quiver")->capture_default_str();
  verify->add_option("--steps", ver.steps, "Descent steps (default: 1 and 5 for pgd, 1 and 3 for corollary-c)");
  verify->add_option("--lr", ver.lr, "Learning rate")->capture_default_str();
  verify->add_option("--seed", ver.seed, "PRNG seed (falls back to QNN_SEED, then 1)");
  verify->add_option("--model", ver.model, "Check this model file instead of the preset quivers");
  verify->add_flag("--transformed", ver.transformed, "Treat --model weights as the transformed tuple T");
  verify->add_option("-o,--output", ver.output, "Report file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return run_validate(validate_path);
    if (*generate) return run_generate(gen);
    if (*compress) return run_compress(comp);
    if (*eval) return run_eval(eval_model, eval_input);
    if (*verify) return run_verify(ver);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const qnn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == qnn::ErrorKind::ParseError ? kUsage : kCheckFailed;
  }
  return kUsage;
}
