#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "qnn/compress.hpp"
#include "qnn/error.hpp"
#include "qnn/quiverrep.hpp"
#include "support.hpp"

using namespace qnn;

namespace {

ParameterTuple random_rep(const NeuralQuiver& q, const DimensionVector& d, Xoshiro256pp& rng) {
  ParameterTuple p = ParameterTuple::zeros(q, d);
  for (EdgeId e = 0; e < p.size(); ++e) p[e] = test::random_matrix(p[e].rows(), p[e].cols(), rng);
  return p;
}

// Merged R at a hidden vertex, columns reordered by the permutation.
Matrix merged_r(const NeuralQuiver& q, const DimensionVector& d, const ParameterTuple& r, VertexId v,
                const std::vector<std::size_t>* perm = nullptr) {
  std::vector<Matrix> blocks;
  for (EdgeId e : q.in_edges(v)) blocks.push_back(r[e]);
  const Matrix m = hstack(blocks, d[v]);
  return perm ? m.select_columns(*perm) : m;
}

bool strictly_upper_zero(const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < std::min(i, m.cols()); ++j)
      if (m(i, j) != 0.0) return false;
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i)
    if (m(i, i) < 0.0) return false;
  return true;
}

double reconstruction_error(const NeuralQuiver& q, const QuiverQR& f, const ParameterTuple& a) {
  return max_abs_diff(group_action(q, f.q, f.r), a) / std::max(1.0, max_abs(a));
}

}  // namespace

TEST_CASE("identity chain") {
  auto q = test::make_quiver(5, {{0, 1}, {1, 2}, {2, 3}, {4, 1}, {4, 2}, {4, 3}}, 4);
  const DimensionVector d({3, 3, 3, 3, 1});
  ParameterTuple a = ParameterTuple::zeros(*q, d);
  for (EdgeId e = 0; e < 3; ++e) a[e] = Matrix::identity(3);
  const QuiverQR f = quiver_qr(*q, d, a);
  for (const auto& [v, m] : f.q.factors) CHECK(m == Matrix::identity(3));
  for (EdgeId e = 0; e < 3; ++e) CHECK(f.r[e] == Matrix::identity(3));
}

TEST_CASE("representation view stacks in-edges") {
  Xoshiro256pp rng(51);
  auto q = find_preset("fig6-middle")->quiver;
  const DimensionVector d = dims_with_bias(*q, {2, 3, 4, 2, 3});
  const ParameterTuple a = random_rep(*q, d, rng);
  const RepresentationView view = representation_view(*q, d, a);
  CHECK(view.maps == a);
  for (VertexId v = 0; v < q->vertex_count(); ++v) {
    if (q->is_source(v)) {
      CHECK(view.merged.count(v) == 0);
      continue;
    }
    const Matrix& m = view.merged.at(v);
    CHECK(m.rows() == d[v]);
    CHECK(m.cols() == incoming_dimension(*q, d, v));
    std::size_t off = 0;
    for (EdgeId e : q->in_edges(v)) {
      CHECK(m.block(0, off, d[v], a[e].cols()) == a[e]);
      off += a[e].cols();
    }
  }
}

TEST_CASE("reconstruction and triangularity on random quivers") {
  Xoshiro256pp rng(52);
  for (int t = 0; t < 200; ++t) {
    auto q = test::random_neural_quiver(rng, 7, false);
    const DimensionVector d(test::random_widths(*q, rng));
    const ParameterTuple a = random_rep(*q, d, rng);
    const QuiverQR f = quiver_qr(*q, d, a);
    CHECK(reconstruction_error(*q, f, a) <= 1e-12);
    for (VertexId v : q->classification().hidden) {
      CHECK(strictly_upper_zero(merged_r(*q, d, f.r, v)));
      const Matrix& qv = f.q.factors.at(v);
      CHECK(max_abs_diff(qv.transpose() * qv, Matrix::identity(d[v])) < 1e-12);
    }
    for (const auto& [v, m] : f.q.factors) CHECK(q->is_hidden(v));
    // fixed order and sign convention: same input, same bits
    const QuiverQR again = quiver_qr(*q, d, a);
    CHECK(again.r == f.r);
  }
}

TEST_CASE("one hidden vertex is a classical QR") {
  Xoshiro256pp rng(53);
  // a (3) -> h (4) -> out (2), no bias edge into h
  auto q = test::make_quiver(4, {{0, 1}, {1, 2}, {3, 2}}, 3);
  const DimensionVector d({3, 4, 2, 1});
  const ParameterTuple a = random_rep(*q, d, rng);
  const QuiverQR f = quiver_qr(*q, d, a);
  const CompleteQR classical = complete_qr(a[0]);
  Matrix padded(4, 3);
  padded.set_block(0, 0, classical.r);
  CHECK(max_abs_diff(f.r[0], padded) < 1e-14);
  CHECK(max_abs_diff(f.q.factors.at(1), classical.q) < 1e-14);
}

TEST_CASE("parallel edges are rejected") {
  auto q = test::make_quiver(4, {{0, 1}, {0, 1}, {1, 2}, {3, 1}, {3, 2}}, 3);
  const DimensionVector d({2, 2, 2, 1});
  CHECK_THROWS_WITH_AS(quiver_qr(*q, d, ParameterTuple::zeros(*q, d)), doctest::Contains("DoubleEdge"), Error);
}

TEST_CASE("invalid permutations") {
  auto q = find_preset("fig6-left")->quiver;
  const DimensionVector d = dims_with_bias(*q, {2, 4, 8, 2});
  const ParameterTuple a = ParameterTuple::zeros(*q, d);
  const auto bad = [&](VertexPermutations p) {
    CHECK_THROWS_WITH_AS(quiver_qr_permuted(*q, d, a, p), doctest::Contains("InvalidPermutation"), Error);
  };
  // vertex 1 takes a (2) and the bias (1)
  bad({{1, {0, 1}}});
  bad({{1, {0, 1, 1}}});
  bad({{1, {0, 1, 3}}});
  bad({{0, {0, 1}}});
  bad({{42, {0}}});
}

TEST_CASE("identity permutations change nothing") {
  Xoshiro256pp rng(54);
  for (int t = 0; t < 30; ++t) {
    auto q = test::random_neural_quiver(rng, 7, false);
    const DimensionVector d(test::random_widths(*q, rng));
    const ParameterTuple a = random_rep(*q, d, rng);
    VertexPermutations ids;
    for (VertexId v : q->classification().hidden) {
      ids[v].resize(incoming_dimension(*q, d, v));
      std::iota(ids[v].begin(), ids[v].end(), std::size_t{0});
    }
    const QuiverQR plain = quiver_qr(*q, d, a);
    const QuiverQR permuted = quiver_qr_permuted(*q, d, a, ids);
    CHECK(permuted.r == plain.r);
  }
}

TEST_CASE("reconstruction holds for any permutation") {
  Xoshiro256pp rng(55);
  for (int t = 0; t < 100; ++t) {
    auto q = test::random_neural_quiver(rng, 7, false);
    const DimensionVector d(test::random_widths(*q, rng));
    const ParameterTuple a = random_rep(*q, d, rng);
    VertexPermutations perms;
    for (VertexId v : q->classification().hidden) {
      perms[v].resize(incoming_dimension(*q, d, v));
      std::iota(perms[v].begin(), perms[v].end(), std::size_t{0});
      std::shuffle(perms[v].begin(), perms[v].end(), rng);
    }
    const QuiverQR f = quiver_qr_permuted(*q, d, a, perms);
    CHECK(reconstruction_error(*q, f, a) <= 1e-12);
    for (VertexId v : q->classification().hidden) CHECK(strictly_upper_zero(merged_r(*q, d, f.r, v, &perms.at(v))));
  }
}

TEST_CASE("reduced-first permutations recover the compressed weights") {
  for (const std::string& preset : test::presets()) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const QuiverNetwork net = test::preset_network(preset, ActivationFamily::StepReLU, seed);
      const NeuralQuiver& q = net.quiver();
      const DimensionVector red = reduced_dimension_vector(q, net.dims());
      const QuiverQR f = quiver_qr_permuted(q, net.dims(), net.weights(), reduced_first_permutations(q, net.dims(), red));
      const CompressionResult c = qr_compress(net);
      CHECK(reconstruction_error(q, f, net.weights()) <= 1e-12);
      for (const Edge& e : q.edges()) {
        const Matrix top_left = f.r[e.id].block(0, 0, red[e.target], red[e.source]);
        CHECK(max_abs_diff(top_left, c.reduced.weights()[e.id]) < 1e-10);
      }
    }
  }
}

TEST_CASE("factored descent") {
  const QuiverNetwork net = test::preset_network("fig6-left", ActivationFamily::Squashing, 3);
  Xoshiro256pp rng(56);
  const Batch batch = random_batch(net.architecture(), 10, rng);
  const FactoredDescentReport zero = verify_factored_descent(net, batch, {.steps = 0});
  REQUIRE(zero.deviations.size() == 1);
  CHECK(zero.deviations[0] <= 1e-12 * std::max(1.0, max_abs(net.weights())));
  const FactoredDescentReport one = verify_factored_descent(net, batch, {.steps = 1});
  CHECK(one.max_deviation() < 1e-8);
  const FactoredDescentReport three = verify_factored_descent(net, batch, {.steps = 3});
  REQUIRE(three.deviations.size() == 4);
  CHECK(three.max_deviation() < 1e-6);

  CHECK_THROWS_WITH_AS(
      verify_factored_descent(test::preset_network("fig6-left", ActivationFamily::ShiftedNorm, 3), batch, {}),
      doctest::Contains("NotRadial"), Error);
}
