#include <doctest.h>

#include <cmath>

#include "qnn/activation.hpp"
#include "qnn/error.hpp"
#include "support.hpp"

using namespace qnn;
using test::inf_diff;

namespace {

Matrix fd_jacobian(const Activation& a, const Vector& v, double h = 1e-6) {
  Matrix j(v.size(), v.size());
  for (std::size_t c = 0; c < v.size(); ++c) {
    Vector plus = v;
    Vector minus = v;
    plus[c] += h;
    minus[c] -= h;
    const Vector fp = a.apply(plus);
    const Vector fm = a.apply(minus);
    for (std::size_t r = 0; r < v.size(); ++r) j(r, c) = (fp[r] - fm[r]) / (2.0 * h);
  }
  return j;
}

double relative_frob(const Matrix& a, const Matrix& ref) {
  return test::frob_diff(a, ref) / std::max(test::frob(ref), 1e-300);
}

struct Named {
  const char* name;
  Activation act;
};

// All variants at width 3. Conjugated/Embedded wrap Squashing and ShiftedNorm at width 4.
std::vector<Named> width3_variants(Xoshiro256pp& rng) {
  const Matrix q4 = test::random_orthogonal(4, rng);
  Matrix embed = test::random_matrix(4, 3, rng);
  const Matrix retract = left_inverse(embed);
  return {
      {"identity", Identity{}},
      {"step_relu", StepReLU{}},
      {"squashing", Squashing{}},
      {"shifted_relu", ShiftedReLU{0.3}},
      {"shifted_norm", ShiftedNorm{{0.2, -0.5, 0.7}}},
      {"shifted_norm_zero", ShiftedNorm{{0.0, 0.0, 0.0}}},
      {"conjugated_squashing", Activation::conjugated(Squashing{}, q4, 3)},
      {"conjugated_shifted_norm", Activation::conjugated(ShiftedNorm{{0.1, 0.4, -0.3, 0.9}}, q4, 3)},
      {"embedded_squashing", Activation::embedded(Squashing{}, embed, retract)},
      {"embedded_shifted_norm", Activation::embedded(ShiftedNorm{{0.3, 0.3, 0.1, -0.2}}, embed, retract)},
  };
}

}  // namespace

TEST_CASE("activation values") {
  CHECK(Activation(StepReLU{}).apply(Vector{0.3, 0.4}) == Vector{0.0, 0.0});
  CHECK(Activation(StepReLU{}).apply(Vector{3.0, 4.0}) == Vector{3.0, 4.0});
  const Vector sq = Activation(Squashing{}).apply(Vector{1.0, 0.0});
  CHECK(sq[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sq[1] == 0.0);
  CHECK(Activation(Identity{}).apply(Vector{-2.0, 7.5, 0.0}) == Vector{-2.0, 7.5, 0.0});
  // h(r) = max(r - b, 0): (3,4) has r = 5, so the output has norm 4.5
  const Vector sr = Activation(ShiftedReLU{0.5}).apply(Vector{3.0, 4.0});
  CHECK(std::hypot(sr[0], sr[1]) == doctest::Approx(4.5).epsilon(1e-15));
  CHECK(Activation(ShiftedReLU{0.5}).apply(Vector{0.3, 0.0}) == Vector{0.0, 0.0});
  // lambda(v) = |v - c|
  const Vector sn = Activation(ShiftedNorm{{1.0, 1.0}}).apply(Vector{4.0, 5.0});
  CHECK(sn[0] == doctest::Approx(20.0));
  CHECK(sn[1] == doctest::Approx(25.0));
}

TEST_CASE("rescaling factors") {
  CHECK(Activation(StepReLU{}).factor(Vector{2.0, 0.0}) == 1.0);
  CHECK(Activation(StepReLU{}).factor(Vector{0.6, 0.8}) == 1.0);  // |v| = 1 is inclusive
  CHECK(Activation(Squashing{}).factor(Vector{0.0, 1.0}) == doctest::Approx(0.5).epsilon(1e-15));
  for (const Activation& a : {Activation(StepReLU{}), Activation(Squashing{}), Activation(ShiftedReLU{0.2})}) {
    CHECK(a.factor(Vector{0.0, 0.0}) == 0.0);
    CHECK(a.apply(Vector{0.0, 0.0}) == Vector{0.0, 0.0});
  }
  CHECK_THROWS_WITH_AS(Activation(PointwiseReLU{}).factor(Vector{1.0}), doctest::Contains("NotRescaling"), Error);
}

TEST_CASE("conjugated step factor only sees the norm") {
  Xoshiro256pp rng(7);
  const Matrix q = test::random_orthogonal(5, rng);
  const Activation c = Activation::conjugated(StepReLU{}, q, 3);
  for (int t = 0; t < 200; ++t) {
    const Vector v = rng.uniform_vector(3, -1.0, 1.0);
    const double expected = Activation(StepReLU{}).factor(v);
    if (std::abs(norm2(v) - 1.0) < 1e-12) continue;
    CHECK(c.factor(v) == expected);
  }
}

TEST_CASE("rescaling law for every variant") {
  Xoshiro256pp rng(8);
  for (const Named& n : width3_variants(rng)) {
    CAPTURE(n.name);
    for (int t = 0; t < 200; ++t) {
      const Vector v = rng.uniform_vector(3, -2.0, 2.0);
      const Vector out = n.act.apply(v);
      const double lambda = n.act.factor(v);
      Vector scaled = v;
      for (double& x : scaled) x *= lambda;
      CHECK(inf_diff(out, scaled) <= 1e-14 * std::max(1.0, test::inf_norm(out)));
    }
  }
}

TEST_CASE("radial variants commute with orthogonal maps") {
  Xoshiro256pp rng(9);
  const Activation radial[] = {Identity{}, StepReLU{}, Squashing{}, ShiftedReLU{0.4}, ShiftedNorm{Vector(4, 0.0)}};
  for (const Activation& a : radial) {
    CHECK(a.is_radial());
    for (int t = 0; t < 100; ++t) {
      const Matrix q = test::random_orthogonal(4, rng);
      const Vector v = rng.uniform_vector(4, -1.5, 1.5);
      if (std::abs(norm2(v) - 1.0) < 1e-9) continue;  // StepReLU threshold
      CHECK(inf_diff(a.apply(q * v), q * a.apply(v)) <= 1e-12);
    }
  }
}

TEST_CASE("shifted norm with a nonzero center is not orthogonally equivariant") {
  Xoshiro256pp rng(10);
  const Activation a(ShiftedNorm{{1.0, 0.0, 0.0}});
  CHECK_FALSE(a.is_radial());
  const Matrix q = test::random_orthogonal(3, rng);
  const Vector v{0.5, 0.2, -0.4};
  CHECK(inf_diff(a.apply(q * v), q * a.apply(v)) > 1e-3);
  CHECK_THROWS_WITH_AS(a.radial_core(3), doctest::Contains("NotRadial"), Error);
}

TEST_CASE("rescaling preserves coordinate subspaces exactly") {
  Xoshiro256pp rng(11);
  for (const Named& n : width3_variants(rng)) {
    // the rotated-frame variants only keep zeros up to rounding
    const bool rotated =
        n.act.kind() == ActivationKind::Conjugated || n.act.kind() == ActivationKind::Embedded;
    CAPTURE(n.name);
    for (int t = 0; t < 50; ++t) {
      Vector v = rng.uniform_vector(3, -2.0, 2.0);
      v[2] = 0.0;
      if (rotated) {
        CHECK(std::abs(n.act.apply(v)[2]) <= 1e-14);
      } else {
        CHECK(n.act.apply(v)[2] == 0.0);
      }
    }
  }
}

TEST_CASE("step jacobian") {
  CHECK(Activation(StepReLU{}).jacobian(Vector{2.0, 0.0}) == Matrix::identity(2));
  CHECK(Activation(StepReLU{}).jacobian(Vector{0.3, 0.4}) == Matrix(2, 2));
}

TEST_CASE("squashing jacobian at (1, 0)") {
  const Activation a(Squashing{});
  const Matrix j = a.jacobian(Vector{1.0, 0.0});
  CHECK(relative_frob(j, fd_jacobian(a, {1.0, 0.0})) < 1e-6);
  // g(1) = 1/2, g'(1) = 0, so the Jacobian is I/2
  CHECK(test::frob_diff(j, 0.5 * Matrix::identity(2)) < 1e-15);
}

TEST_CASE("jacobians match central differences at smooth points") {
  Xoshiro256pp rng(12);
  for (const Named& n : width3_variants(rng)) {
    CAPTURE(n.name);
    int checked = 0;
    while (checked < 100) {
      const Vector v = rng.uniform_vector(3, -2.0, 2.0);
      // stay away from the kinks of the step and shifted families
      const double r = norm2(v);
      if (std::abs(r - 1.0) < 1e-3 || std::abs(r - 0.3) < 1e-3 || r < 1e-3) continue;
      if (n.act.kind() == ActivationKind::StepReLU && std::abs(r - 1.0) < 1e-2) continue;
      const Matrix fd = fd_jacobian(n.act, v);
      const Matrix an = n.act.jacobian(v);
      if (test::frob(fd) < 1e-12) {
        CHECK(test::frob(an) < 1e-9);
      } else {
        CHECK(relative_frob(an, fd) < 1e-5);
      }
      ++checked;
    }
  }
}

TEST_CASE("width checks") {
  CHECK_THROWS_WITH_AS(Activation(ShiftedNorm{{0.0, 0.0}}).apply(Vector{1.0}), doctest::Contains("DimensionMismatch"),
                       Error);
  Xoshiro256pp rng(13);
  const Activation c = Activation::conjugated(Squashing{}, test::random_orthogonal(4, rng), 2);
  CHECK(c.required_dim() == 2u);
  CHECK_THROWS_AS(c.apply(Vector{1.0, 2.0, 3.0}), Error);
  CHECK_THROWS_AS(Activation::conjugated(Squashing{}, Matrix(3, 2), 1), Error);
  CHECK_THROWS_AS(Activation::conjugated(Squashing{}, Matrix::identity(3), 4), Error);
  CHECK_THROWS_AS(Activation::conjugated(ShiftedNorm{{0.0, 0.0}}, Matrix::identity(3), 2), Error);
}

TEST_CASE("flags and radial cores") {
  CHECK(Activation(StepReLU{}).is_rescaling());
  CHECK_FALSE(Activation(PointwiseReLU{}).is_rescaling());
  CHECK_FALSE(Activation(PointwiseReLU{}).is_radial());
  CHECK(Activation(StepReLU{}).radial_core(5) == Activation(StepReLU{}));
  CHECK(Activation(ShiftedNorm{Vector(4, 0.0)}).radial_core(2) == Activation(ShiftedNorm{Vector(2, 0.0)}));
  Xoshiro256pp rng(14);
  const Activation c = Activation::conjugated(Squashing{}, test::random_orthogonal(4, rng), 2);
  CHECK(c.is_radial());
  CHECK(c.radial_core(2) == Activation(Squashing{}));
}

TEST_CASE("conjugating twice composes the changes of basis") {
  Xoshiro256pp rng(15);
  const Activation base(ShiftedNorm{{0.5, -0.1, 0.2, 0.3, 0.0}});
  const Matrix q1 = test::random_orthogonal(5, rng);
  const Matrix q2 = test::random_orthogonal(3, rng);
  const Activation inner = Activation::conjugated(base, q1, 3);
  const Activation outer = Activation::conjugated(inner, q2, 2);
  REQUIRE(outer.kind() == ActivationKind::Conjugated);
  for (int t = 0; t < 50; ++t) {
    const Vector x = rng.uniform_vector(2, -1.0, 1.0);
    // direct nesting: pi_2 q2^T inner(q2 Inc x)
    const Matrix lift = q2 * Matrix::inclusion(3, 2);
    const Vector nested = lift.transpose() * inner.apply(lift * x);
    CHECK(inf_diff(outer.apply(x), nested) <= 1e-13);
  }
}
