#include <doctest.h>

#include <filesystem>
#include <json.hpp>

#include "qnn/compress.hpp"
#include "qnn/error.hpp"
#include "qnn/model_io.hpp"
#include "support.hpp"

using namespace qnn;
using nlohmann::json;

namespace {

json doc_for(const QuiverNetwork& net) { return json::parse(serialize_model(net)); }

void expect_parse_error(const json& doc, const std::string& locus) {
  CAPTURE(locus);
  CHECK_THROWS_WITH_AS(parse_model(doc.dump()), doctest::Contains(locus.c_str()), Error);
  try {
    parse_model(doc.dump());
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
  }
}

}  // namespace

TEST_CASE("round trip keeps every bit") {
  for (const std::string& preset : test::presets()) {
    for (ActivationFamily family : {ActivationFamily::StepReLU, ActivationFamily::ShiftedNorm,
                                    ActivationFamily::ShiftedReLU, ActivationFamily::PointwiseReLU}) {
      const QuiverNetwork net = test::preset_network(preset, family, 61);
      const std::string text = serialize_model(net, find_preset(preset)->vertex_names);
      const ModelFile back = parse_model(text);
      CHECK(back.network.weights() == net.weights());
      CHECK(back.network.dims() == net.dims());
      CHECK(back.network.activations() == net.activations());
      CHECK(back.network.quiver().edges() == net.quiver().edges());
      CHECK(back.vertex_names == find_preset(preset)->vertex_names);
      CHECK(serialize_model(back.network, back.vertex_names) == text);
    }
  }
}

TEST_CASE("awkward doubles survive") {
  auto q = test::make_quiver(3, {{0, 1}, {2, 1}}, 2);
  Architecture arch{q, DimensionVector({2, 1, 1}), {Identity{}, ShiftedReLU{0.1}, Identity{}}};
  Matrix w(1, 2);
  w(0, 0) = 0.1 + 0.2;
  w(0, 1) = -5e-324;
  Matrix b(1, 1);
  b(0, 0) = 1.7976931348623157e308;
  const QuiverNetwork net(arch, ParameterTuple({w, b}));
  const QuiverNetwork back = parse_model(serialize_model(net)).network;
  CHECK(back.weights() == net.weights());
  CHECK(back.activation(1) == Activation(ShiftedReLU{0.1}));
}

TEST_CASE("compressed models round trip") {
  const QuiverNetwork net = test::preset_network("fig6-right", ActivationFamily::ShiftedNorm, 62);
  for (const CompressionResult& r : {qr_compress(net), compress_change_of_basis(net)}) {
    const QuiverNetwork back = parse_model(serialize_model(r.reduced)).network;
    CHECK(back.activations() == r.reduced.activations());
    CHECK(back.weights() == r.reduced.weights());
    CHECK(feedforward_equality(back, r.reduced, 5, 0.0, 1).max_deviation == 0.0);
  }
}

TEST_CASE("file helpers") {
  const auto path = std::filesystem::temp_directory_path() / "qnn_model_io_test.json";
  const QuiverNetwork net = test::preset_network("fig6-left", ActivationFamily::Squashing, 63);
  save_model(path, net, {"a", "b", "c", "d", "bias"});
  const ModelFile back = load_model(path);
  CHECK(back.network.weights() == net.weights());
  CHECK(back.vertex_names.size() == 5);
  std::filesystem::remove(path);
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("ParseError"), Error);
}

TEST_CASE("malformed documents name the offending field") {
  const QuiverNetwork net = test::preset_network("fig6-left", ActivationFamily::ShiftedNorm, 64);
  const json good = doc_for(net);
  REQUIRE_NOTHROW(parse_model(good.dump()));

  CHECK_THROWS_WITH_AS(parse_model("{ not json"), doctest::Contains("ParseError"), Error);

  json d = good;
  d["format_version"] = "2";
  expect_parse_error(d, "/format_version");

  d = good;
  d.erase("dims");
  expect_parse_error(d, "dims");

  d = good;
  d["weights"][3]["data"].erase(0);
  expect_parse_error(d, "/weights/3/data");

  d = good;
  d["weights"][1]["data"][0] = "x";
  expect_parse_error(d, "/weights/1/data");

  d = good;
  d["activations"][0]["kind"] = "tanh";
  expect_parse_error(d, "/activations/0/kind");

  // sources may omit their activation; vertex 1 is hidden
  d = good;
  for (std::size_t i = 0; i < d["activations"].size(); ++i)
    if (d["activations"][i]["vertex"] == 1) d["activations"].erase(i);
  expect_parse_error(d, "no activation for vertex 1");
  d = good;
  for (std::size_t i = 0; i < d["activations"].size(); ++i)
    if (d["activations"][i]["vertex"] == 0) d["activations"].erase(i);
  CHECK(parse_model(d.dump()).network.activation(0) == Activation(Identity{}));

  d = good;
  d["weights"].erase(2);
  expect_parse_error(d, "no weights for edge");

  d = good;
  d["quiver"]["edges"][0] = json::array({0});
  expect_parse_error(d, "/quiver/edges/0");

  d = good;
  d["quiver"]["names"] = json::array({"a"});
  expect_parse_error(d, "/quiver/names");
}

TEST_CASE("structural problems keep their own kinds") {
  const QuiverNetwork net = test::preset_network("fig6-left", ActivationFamily::StepReLU, 65);
  json d = doc_for(net);
  d["quiver"]["edges"].push_back(json::array({3, 1}));
  d["weights"].push_back({{"edge", 7}, {"rows", 4}, {"cols", 2}, {"data", std::vector<double>(8, 0.0)}});
  CHECK_THROWS_WITH_AS(parse_model(d.dump()), doctest::Contains("CycleDetected"), Error);

  d = doc_for(net);
  d["dims"][1] = 5;
  CHECK_THROWS_WITH_AS(parse_model(d.dump()), doctest::Contains("edge 0"), Error);
}
