#include "qnn/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qnn/error.hpp"

namespace qnn {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.storage()}};
}

json activation_json(const Activation& a) {
  json params = json::object();
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ShiftedReLU>) {
          params["shift"] = v.shift;
        } else if constexpr (std::is_same_v<T, ShiftedNorm>) {
          params["center"] = v.center;
        } else if constexpr (std::is_same_v<T, Conjugated>) {
          params["base"] = activation_json(*v.base);
          params["q"] = matrix_json(v.q);
          params["inner_dim"] = v.inner_dim;
        } else if constexpr (std::is_same_v<T, Embedded>) {
          params["base"] = activation_json(*v.base);
          params["embed"] = matrix_json(v.embed);
          params["retract"] = matrix_json(v.retract);
        }
      },
      a.value());
  return json{{"kind", to_string(a.kind())}, {"params", std::move(params)}};
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ParseError, where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

std::size_t as_index(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(where, "expected a non-negative integer");
  return v.get<std::size_t>();
}

double as_double(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(where, "non-finite number");
  return x;
}

Vector as_vector(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array");
  Vector out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_double(v[k], where + "/" + std::to_string(k)));
  return out;
}

Matrix as_matrix(const json& v, const std::string& where) {
  const std::size_t rows = as_index(field(v, "rows", where), where + "/rows");
  const std::size_t cols = as_index(field(v, "cols", where), where + "/cols");
  Vector data = as_vector(field(v, "data", where), where + "/data");
  if (data.size() != rows * cols) {
    fail(where + "/data", "expected " + std::to_string(rows * cols) + " numbers, got " + std::to_string(data.size()));
  }
  return Matrix(rows, cols, std::move(data));
}

Activation as_activation(const json& v, const std::string& where) {
  const json& kind_node = field(v, "kind", where);
  if (!kind_node.is_string()) fail(where + "/kind", "expected a string");
  const std::string kind = kind_node.get<std::string>();
  static const json empty = json::object();
  const json& params = v.contains("params") ? v["params"] : empty;
  const std::string pw = where + "/params";
  if (kind == "identity") return Identity{};
  if (kind == "step_relu") return StepReLU{};
  if (kind == "squashing") return Squashing{};
  if (kind == "relu") return PointwiseReLU{};
  if (kind == "shifted_relu") return ShiftedReLU{as_double(field(params, "shift", pw), pw + "/shift")};
  if (kind == "shifted_norm") return ShiftedNorm{as_vector(field(params, "center", pw), pw + "/center")};
  if (kind == "conjugated") {
    return Activation::conjugated(as_activation(field(params, "base", pw), pw + "/base"),
                                  as_matrix(field(params, "q", pw), pw + "/q"),
                                  as_index(field(params, "inner_dim", pw), pw + "/inner_dim"));
  }
  if (kind == "embedded") {
    return Activation::embedded(as_activation(field(params, "base", pw), pw + "/base"),
                                as_matrix(field(params, "embed", pw), pw + "/embed"),
                                as_matrix(field(params, "retract", pw), pw + "/retract"));
  }
  fail(where + "/kind", "unknown activation kind \"" + kind + "\"");
}

}  // namespace

std::string serialize_model(const QuiverNetwork& net, const std::vector<std::string>& vertex_names) {
  const NeuralQuiver& q = net.quiver();
  json quiver{{"vertex_count", q.vertex_count()}, {"bias", q.bias()}, {"edges", json::array()}};
  for (const Edge& e : q.edges()) quiver["edges"].push_back({e.source, e.target});
  if (!vertex_names.empty()) quiver["names"] = vertex_names;

  json activations = json::array();
  for (VertexId v = 0; v < q.vertex_count(); ++v) {
    json a = activation_json(net.activation(v));
    a["vertex"] = v;
    activations.push_back(std::move(a));
  }
  json weights = json::array();
  for (const Edge& e : q.edges()) {
    json w = matrix_json(net.weights()[e.id]);
    w["edge"] = e.id;
    weights.push_back(std::move(w));
  }
  json doc{{"format_version", "1"},
           {"quiver", std::move(quiver)},
           {"dims", net.dims().values()},
           {"activations", std::move(activations)},
           {"weights", std::move(weights)}};
  return doc.dump(2) + "\n";
}

ModelFile parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  const json& version = field(doc, "format_version", "");
  if (version != "1") fail("/format_version", "unsupported version " + version.dump());

  const json& qj = field(doc, "quiver", "");
  const std::size_t n = as_index(field(qj, "vertex_count", "/quiver"), "/quiver/vertex_count");
  const VertexId bias = as_index(field(qj, "bias", "/quiver"), "/quiver/bias");
  const json& ej = field(qj, "edges", "/quiver");
  if (!ej.is_array()) fail("/quiver/edges", "expected an array");
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (std::size_t k = 0; k < ej.size(); ++k) {
    const std::string where = "/quiver/edges/" + std::to_string(k);
    if (!ej[k].is_array() || ej[k].size() != 2) fail(where, "expected [source, target]");
    edges.emplace_back(as_index(ej[k][0], where + "/0"), as_index(ej[k][1], where + "/1"));
  }
  std::vector<std::string> names;
  if (qj.contains("names")) {
    const json& nj = qj["names"];
    if (!nj.is_array() || nj.size() != n) fail("/quiver/names", "expected one name per vertex");
    for (const json& s : nj) {
      if (!s.is_string()) fail("/quiver/names", "expected strings");
      names.push_back(s.get<std::string>());
    }
  }
  auto quiver = std::make_shared<const NeuralQuiver>(NeuralQuiver::validate(n, edges, bias));

  const json& dj = field(doc, "dims", "");
  if (!dj.is_array()) fail("/dims", "expected an array");
  std::vector<std::size_t> dims;
  for (std::size_t k = 0; k < dj.size(); ++k) dims.push_back(as_index(dj[k], "/dims/" + std::to_string(k)));
  DimensionVector d(std::move(dims));
  check_dimensions(*quiver, d);

  const json& aj = field(doc, "activations", "");
  if (!aj.is_array()) fail("/activations", "expected an array");
  std::vector<std::optional<Activation>> acts(n);
  for (std::size_t k = 0; k < aj.size(); ++k) {
    const std::string where = "/activations/" + std::to_string(k);
    const VertexId v = as_index(field(aj[k], "vertex", where), where + "/vertex");
    if (v >= n) fail(where + "/vertex", "vertex " + std::to_string(v) + " out of range");
    if (acts[v]) fail(where + "/vertex", "duplicate activation for vertex " + std::to_string(v));
    acts[v] = as_activation(aj[k], where);
  }
  std::vector<Activation> activations(n);
  for (VertexId v = 0; v < n; ++v) {
    if (acts[v]) {
      activations[v] = std::move(*acts[v]);
    } else if (!quiver->is_source(v)) {
      fail("/activations", "no activation for vertex " + std::to_string(v));
    }
  }

  const json& wj = field(doc, "weights", "");
  if (!wj.is_array()) fail("/weights", "expected an array");
  std::vector<std::optional<Matrix>> blocks(quiver->edge_count());
  for (std::size_t k = 0; k < wj.size(); ++k) {
    const std::string where = "/weights/" + std::to_string(k);
    const EdgeId e = as_index(field(wj[k], "edge", where), where + "/edge");
    if (e >= blocks.size()) fail(where + "/edge", "edge " + std::to_string(e) + " out of range");
    if (blocks[e]) fail(where + "/edge", "duplicate weights for edge " + std::to_string(e));
    blocks[e] = as_matrix(wj[k], where);
  }
  std::vector<Matrix> weights;
  for (EdgeId e = 0; e < blocks.size(); ++e) {
    if (!blocks[e]) fail("/weights", "no weights for edge " + std::to_string(e));
    weights.push_back(std::move(*blocks[e]));
  }

  return ModelFile{QuiverNetwork(Architecture{std::move(quiver), std::move(d), std::move(activations)},
                                 ParameterTuple(std::move(weights))),
                   std::move(names)};
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

void save_model(const std::filesystem::path& path, const QuiverNetwork& net,
                const std::vector<std::string>& vertex_names) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ParseError, "cannot write " + path.string());
  out << serialize_model(net, vertex_names);
  if (!out) throw Error(ErrorKind::ParseError, "write failed for " + path.string());
}

}  // namespace qnn
