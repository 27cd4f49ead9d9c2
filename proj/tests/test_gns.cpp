// Copyright 2026 The modular-ppt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch_amalgamated.hpp>

#include "modular_ppt/gns.hpp"
#include "oracles.hpp"

using namespace modular_ppt;
using Catch::Approx;

namespace {

DensityMatrix diag_density(std::initializer_list<double> d) {
  RealVector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index k = 0;
  for (double x : d) v(k++) = x;
  return DensityMatrix::from_matrix(v.cast<Complex>().asDiagonal());
}

DensityMatrix random_faithful(Eigen::Index n, SplitMix64& rng) {
  return DensityMatrix::from_matrix(random::faithful_density(n, rng));
}

}  // namespace

SCENARIO("GNS context of the tracial state") {
  const GnsContext ctx = build_gns(diag_density({0.5, 0.5}));
  CHECK(ctx.eigenvalues()(0) == Approx(0.5));
  CHECK(ctx.eigenvalues()(1) == Approx(0.5));
  CHECK(oracle::max_abs(ctx.omega().mat - ComplexMatrix::Identity(2, 2) / std::sqrt(2.0)) <
        1e-15);
  SplitMix64 rng(1);
  const GnsVector xi = ctx.vector(random::generic(2, 2, rng));
  CHECK(distance(apply_delta_power(ctx, 1.0, xi), xi) < 1e-15);
  const ModularReport rep = verify_modular_identities(ctx, 50, 3);
  CHECK(rep.max_residual() <= 1e-12);
  CHECK_FALSE(rep.condition_warning);
}

SCENARIO("GNS context of diag(2/3, 1/3)") {
  const GnsContext ctx = build_gns(diag_density({2.0 / 3.0, 1.0 / 3.0}));
  const GnsVector e12 = ctx.vector(matrix_unit(2, 0, 1));
  const GnsVector e21 = ctx.vector(matrix_unit(2, 1, 0));

  WHEN("Delta acts on matrix units") {
    CHECK(distance(apply_delta_power(ctx, 1.0, e12), ctx.vector(2.0 * e12.mat)) < 1e-14);
    CHECK(distance(apply_delta_power(ctx, 1.0, e21), ctx.vector(0.5 * e21.mat)) < 1e-14);
    CHECK(distance(apply_delta_power(ctx, 0.5, e12), ctx.vector(std::sqrt(2.0) * e12.mat)) <
          1e-14);
    CHECK(distance(apply_delta_power(ctx, 0.0, e12), e12) == 0.0);
    CHECK(distance(apply_delta_power(ctx, 0.25, ctx.omega()), ctx.omega()) < 1e-15);
    // Delta is rho . rho^{-1}.
    const ComplexMatrix rho = ctx.rho().matrix();
    SplitMix64 rng(2);
    const GnsVector xi = ctx.vector(random::generic(2, 2, rng));
    CHECK(oracle::max_abs(apply_delta_power(ctx, 1.0, xi).mat - rho * xi.mat * rho.inverse()) <
          1e-14);
  }
  WHEN("the modular conjugation acts on E12 Omega") {
    const GnsVector a_om = ctx.from_operator(matrix_unit(2, 0, 1));
    const GnsVector out = apply_conjugation(ctx, ctx.jm_op(), a_om);
    // rho^{1/2} E21 = sqrt(1/3) E21, and equals (a Omega)^dagger.
    CHECK(oracle::max_abs(out.mat - std::sqrt(1.0 / 3.0) * matrix_unit(2, 1, 0)) < 1e-15);
    CHECK(oracle::max_abs(out.mat - a_om.mat.adjoint()) < 1e-15);
  }
  WHEN("tau acts on E12 Omega") {
    const GnsVector a_om = ctx.from_operator(matrix_unit(2, 0, 1));
    const GnsVector expected = ctx.vector(matrix_unit(2, 1, 0) * ctx.sqrt_rho());
    CHECK(distance(apply_tau(ctx, a_om), expected) < 1e-15);
    CHECK(distance(apply_u(ctx, apply_delta_power(ctx, 0.5, a_om)), expected) < 1e-15);
  }
  WHEN("U acts") {
    CHECK(distance(apply_u(ctx, e12), e21) < 1e-15);
    CHECK(distance(apply_u(ctx, ctx.omega()), ctx.omega()) < 1e-15);
  }
  WHEN("transposing operators") {
    CHECK(oracle::max_abs(transpose_operator(ctx, matrix_unit(2, 0, 1)) - matrix_unit(2, 1, 0)) <
          1e-15);
    CHECK(oracle::max_abs(transpose_operator(ctx, ComplexMatrix::Identity(2, 2)) -
                          ComplexMatrix::Identity(2, 2)) < 1e-15);
  }
  WHEN("all identities are checked") {
    const ModularReport rep = verify_modular_identities(ctx, 100, 7);
    CHECK(rep.passed(1e-10));
    CHECK(rep.negative_control > 0.1);
  }
}

SCENARIO("Faithfulness and shape contracts") {
  REQUIRE_THROWS_AS(build_gns(diag_density({1.0, 0.0})), FaithfulnessError);
  try {
    build_gns(diag_density({0.7, 0.3, 0.0}));
    FAIL("expected a faithfulness error");
  } catch (const FaithfulnessError& e) {
    CHECK(e.index() == 2);
    CHECK(e.eigenvalue() == 0.0);
  }
  SplitMix64 rng(4);
  const GnsContext a = build_gns(random_faithful(2, rng));
  const GnsContext b = build_gns(random_faithful(2, rng));
  CHECK(a.id() != b.id());
  CHECK(build_gns(a.rho()).id() == a.id());
  const GnsVector xb = b.vector(random::generic(2, 2, rng));
  REQUIRE_THROWS_AS(apply_u(a, xb), ContractError);
  REQUIRE_THROWS_AS(apply_conjugation(a, b.j_op(), a.omega()), ContractError);
  REQUIRE_THROWS_AS(apply_conjugation(a, a.jc_op(), a.omega()), ContractError);
  REQUIRE_THROWS_AS(a.vector(ComplexMatrix::Identity(3, 3)), ShapeError);
  REQUIRE_THROWS_AS(transpose_operator(a, ComplexMatrix::Identity(3, 3)), ShapeError);
}

SCENARIO("Delta powers overflow into a condition error") {
  const GnsContext ctx = build_gns(diag_density({1.0 - 1e-11, 1e-11}));
  const GnsVector e12 = ctx.vector(matrix_unit(2, 0, 1));
  REQUIRE_NOTHROW(apply_delta_power(ctx, 1.0, e12));
  REQUIRE_THROWS_AS(apply_delta_power(ctx, 40.0, e12), ConditionError);
  const ModularReport rep = verify_modular_identities(ctx, 5, 1);
  CHECK(rep.condition_warning);
}

SCENARIO("Degenerate reference states use the canonical basis") {
  const GnsContext ctx = build_gns(diag_density({0.25, 0.25, 0.5}));
  ComplexMatrix expected = ComplexMatrix::Zero(3, 3);
  expected(2, 0) = expected(0, 1) = expected(1, 2) = 1.0;
  CHECK(oracle::max_abs(ctx.eigenvectors() - expected) < 1e-15);
}

SCENARIO("Modular operators on random faithful states") {
  SplitMix64 rng(8);
  for (Eigen::Index n = 2; n <= 4; ++n) {
    const GnsContext ctx = build_gns(random_faithful(n, rng));
    const ComplexMatrix& x = ctx.eigenvectors();
    // J conjugates eigen coordinates; J_m is the adjoint of the matrix.
    const GnsVector xi = ctx.vector(random::generic(n, n, rng));
    const Complex c(0.3, -1.7);
    const GnsVector cxi = ctx.vector(c * xi.mat);
    CHECK(distance(apply_conjugation(ctx, ctx.j_op(), cxi),
                   ctx.vector(std::conj(c) * apply_conjugation(ctx, ctx.j_op(), xi).mat)) <
          1e-14);
    CHECK(distance(apply_conjugation(ctx, ctx.jm_op(), xi), ctx.vector(xi.mat.adjoint())) <
          1e-13);
    CHECK(distance(apply_conjugation(ctx, ctx.j_op(), ctx.omega()), ctx.omega()) < 1e-14);
    CHECK(distance(apply_conjugation(ctx, ctx.jm_op(), ctx.omega()), ctx.omega()) < 1e-14);
    // The coordinates of Omega in its own eigenbasis are real.
    CHECK(ctx.eigen_coords(ctx.omega()).imag().cwiseAbs().maxCoeff() < 1e-15);

    // J_c from its definition and from its matrix agree; it is an involution.
    const ComplexVector f = random::unit_vector(n, rng);
    ComplexVector def = ComplexVector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) def += std::conj(x.col(i).dot(f)) * x.col(i);
    CHECK((apply_jc(ctx, f) - def).norm() < 1e-14);
    CHECK((ctx.jc_op().linear_part * f.conjugate() - def).norm() < 1e-14);
    CHECK((apply_jc(ctx, apply_jc(ctx, f)) - f).norm() < 1e-14);

    // U is self-adjoint.
    const GnsVector eta = ctx.vector(random::generic(n, n, rng));
    CHECK(std::abs(inner(xi, apply_u(ctx, eta)) - inner(apply_u(ctx, xi), eta)) < 1e-14);

    for (int t = 0; t < 50; ++t) {
      const ComplexMatrix a = random::generic(n, n, rng);
      const ComplexMatrix b = random::generic(n, n, rng);
      const ComplexMatrix at = transpose_operator(ctx, a);
      CHECK(oracle::max_abs(transpose_operator(ctx, at) - a) < 1e-13);
      CHECK(oracle::max_abs(transpose_operator(ctx, a * b) -
                            transpose_operator(ctx, b) * at) < 1e-13);
      // J_c a^* J_c applied to a vector, straight from the definition.
      const ComplexVector g = random::unit_vector(n, rng);
      CHECK((at * g - apply_jc(ctx, a.adjoint() * apply_jc(ctx, g))).norm() < 1e-13);

      const ComplexMatrix h = random::hermitian(n, rng);
      const auto e1 = oracle::eigenvalues(h);
      const auto e2 = oracle::eigenvalues(transpose_operator(ctx, h));
      for (std::size_t k = 0; k < e1.size(); ++k) CHECK(e1[k] == Approx(e2[k]).margin(1e-12));

      const GnsVector a_om = ctx.from_operator(a);
      CHECK(distance(apply_tau(ctx, a_om), apply_u(ctx, apply_delta_power(ctx, 0.5, a_om))) <=
            1e-10);
    }
    const ModularReport rep = verify_modular_identities(ctx, 100, 5);
    for (const auto& [key, value] : rep.residuals) {
      INFO(key);
      CHECK(value <= 1e-10);
    }
    CHECK(rep.negative_control > 0.1);
  }
}

SCENARIO("Delta power group law") {
  SplitMix64 rng(9);
  const GnsContext ctx = build_gns(random_faithful(3, rng));
  const GnsVector xi = ctx.vector(random::generic(3, 3, rng));
  for (double beta : {0.25, 0.5, 1.0, 1.7})
    CHECK(distance(apply_delta_power(ctx, -beta, apply_delta_power(ctx, beta, xi)), xi) < 1e-10);
  CHECK(distance(apply_delta_power(ctx, 0.25, apply_delta_power(ctx, 0.25, xi)),
                 apply_delta_power(ctx, 0.5, xi)) < 1e-12);
}
