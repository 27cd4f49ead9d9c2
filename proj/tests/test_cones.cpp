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

#include "modular_ppt/cones.hpp"
#include "modular_ppt/ppt_optim.hpp"
#include "oracles.hpp"

using namespace modular_ppt;
using Catch::Approx;

namespace {

GnsContext random_context(Eigen::Index n, SplitMix64& rng) {
  return build_gns(DensityMatrix::from_matrix(random::faithful_density(n, rng)));
}

CompositeGnsContext random_composite(Eigen::Index na, Eigen::Index nb, SplitMix64& rng) {
  return build_composite(random_context(na, rng), random_context(nb, rng));
}

}  // namespace

SCENARIO("V_beta membership") {
  SplitMix64 rng(1);
  const GnsContext ctx = random_context(3, rng);
  for (double beta : {0.0, 0.125, 0.25, 0.375, 0.5})
    CHECK(v_beta_membership(ctx, {beta, 1e-10}, ctx.omega()).inside);

  const MembershipVerdict neg = v_beta_membership(ctx, {0.25, 1e-10}, ctx.vector(-ComplexMatrix::Identity(3, 3)));
  CHECK_FALSE(neg.inside);
  // a = -rho^{-1/2}, so the certificate is -1/sqrt(lambda_min).
  CHECK(neg.certificate ==
        Approx(-1.0 / std::sqrt(ctx.eigenvalues().minCoeff())).epsilon(1e-10));

  for (int t = 0; t < 100; ++t) {
    const double beta = 0.5 * rng.uniform();
    const GnsVector xi = apply_delta_power(ctx, beta, ctx.from_operator(random::psd(3, rng)));
    CHECK(v_beta_membership(ctx, {beta, 1e-10}, xi).inside);
  }
  REQUIRE_THROWS_AS(v_beta_membership(ctx, {0.6, 1e-10}, ctx.omega()), ContractError);
  REQUIRE_THROWS_AS(v_beta_membership(ctx, {-0.1, 1e-10}, ctx.omega()), ContractError);

  // A non-Hermitian a is reported through its defect.
  const GnsVector skew = ctx.from_operator(ComplexMatrix::Identity(3, 3) + 0.1 * matrix_unit(3, 0, 1));
  const MembershipVerdict v = v_beta_membership(ctx, {0.0, 1e-10}, skew);
  CHECK_FALSE(v.inside);
  CHECK(v.hermiticity_defect == Approx(0.05));
}

SCENARIO("Natural cone membership by two routes") {
  SplitMix64 rng(2);
  for (Eigen::Index n = 2; n <= 4; ++n) {
    const GnsContext ctx = random_context(n, rng);
    CHECK(natural_cone_membership(ctx, ctx.omega()).inside);
    const GnsVector p = ctx.vector(random::psd(n, rng));
    const MembershipVerdict v = natural_cone_membership(ctx, p);
    CHECK(v.inside);
    CHECK(v.alt_certificate >= -1e-10);

    ComplexMatrix m = random::psd(n, rng);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
    const ComplexVector w = es.eigenvectors().col(0);
    m -= 0.5 * w * w.adjoint();
    const MembershipVerdict out = natural_cone_membership(ctx, ctx.vector(m));
    CHECK_FALSE(out.inside);
    CHECK(out.alt_certificate < 0.0);

    int agree = 0;
    for (int t = 0; t < 500; ++t) {
      const GnsVector xi = ctx.vector(t % 2 ? random::hermitian(n, rng) : random::psd(n, rng));
      const MembershipVerdict r = natural_cone_membership(ctx, xi, 1e-8);
      agree += r.inside == (r.alt_certificate >= -1e-8);
    }
    CHECK(agree == 500);
  }
}

SCENARIO("Duality of V_beta and V_{1/2-beta}") {
  SplitMix64 rng(3);
  const GnsContext ctx = random_context(3, rng);
  for (double beta : {0.0, 0.125, 0.25, 0.375, 0.5}) {
    const DualityReport rep = duality_check(ctx, beta, 100, 11);
    INFO(beta);
    CHECK(rep.passed);
    CHECK(rep.min_pairing >= -1e-10);
    CHECK(rep.outside_tested > 0);
    CHECK(rep.outside_separated == rep.outside_tested);
    CHECK(rep.max_imag_pairing < 1e-12);
  }
  // Self-dual case by hand: Tr(p q) >= 0 for PSD p, q.
  const GnsVector p = ctx.vector(random::psd(3, rng));
  const GnsVector q = ctx.vector(random::psd(3, rng));
  CHECK(inner(p, q).real() >= 0.0);
}

SCENARIO("U maps V_beta onto V_{1/2-beta}") {
  SplitMix64 rng(4);
  const GnsContext ctx = random_context(3, rng);
  for (double beta : {0.0, 0.125, 0.25, 0.375, 0.5}) {
    const UMapsReport rep = u_maps_cones(ctx, beta, 100, 13);
    INFO(beta);
    CHECK(rep.passed);
  }
}

SCENARIO("States and natural cone vectors") {
  SplitMix64 rng(5);
  for (Eigen::Index n = 2; n <= 4; ++n) {
    const GnsContext ctx = random_context(n, rng);
    CHECK(distance(state_to_cone_vector(ctx, ctx.rho()), ctx.omega()) < 1e-12);

    const ComplexVector v = random::unit_vector(n, rng);
    const DensityMatrix pure = DensityMatrix::from_matrix(hermitian_part(v * v.adjoint()));
    const GnsVector xi = state_to_cone_vector(ctx, pure);
    CHECK(oracle::max_abs(xi.mat - pure.matrix()) < 1e-7);

    const DensityMatrix sigma = DensityMatrix::from_matrix(random::psd(n, rng));
    const GnsVector s = state_to_cone_vector(ctx, sigma);
    CHECK(natural_cone_membership(ctx, s).inside);
    CHECK(norm(s) == Approx(1.0).epsilon(1e-12));
    for (int t = 0; t < 50; ++t) {
      const ComplexMatrix a = random::generic(n, n, rng);
      CHECK(std::abs((sigma.matrix() * a).trace() - inner(s, apply_operator(ctx, a, s))) < 1e-9);
    }
    for (int t = 0; t < 100; ++t) {
      const DensityMatrix sg = DensityMatrix::from_matrix(random::psd(n, rng));
      const auto [u, rep] = transpose_state_vector(ctx, state_to_cone_vector(ctx, sg));
      CHECK(rep.residual <= 1e-10);
    }
    // Complex pure state: the transposed state differs from the state.
    const auto [u, rep] = transpose_state_vector(ctx, xi);
    CHECK(rep.residual <= 1e-10);
    CHECK(oracle::max_abs(state_density(u) - pure.matrix()) > 1e-3);
    REQUIRE_THROWS_AS(transpose_state_vector(ctx, ctx.vector(-ComplexMatrix::Identity(n, n))),
                      ContractError);
  }
  GIVEN("a nearly pure diagonal state") {
    const GnsContext ctx = random_context(2, rng);
    const double eps = 1e-3;
    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = (1.0 + eps) / (1.0 + 2 * eps);
    d(1, 1) = eps / (1.0 + 2 * eps);
    const GnsVector xi = state_to_cone_vector(ctx, DensityMatrix::from_matrix(d));
    CHECK(std::abs(xi.mat(0, 0) - std::sqrt(d(0, 0).real())) < 1e-14);
    CHECK(std::abs(xi.mat(1, 1) - std::sqrt(d(1, 1).real())) < 1e-14);
    CHECK(std::abs(xi.mat(0, 1)) < 1e-14);
  }
  REQUIRE_THROWS_AS(state_to_cone_vector(random_context(2, rng),
                                         DensityMatrix::from_matrix(random::psd(3, rng))),
                    ShapeError);
}

SCENARIO("Composite contexts factor") {
  SplitMix64 rng(6);
  GIVEN("tracial factors") {
    const auto half = DensityMatrix::from_matrix(ComplexMatrix::Identity(2, 2) / 2.0);
    const CompositeGnsContext c = build_composite(build_gns(half), build_gns(half));
    CHECK(oracle::max_abs(c.joint.rho().matrix() - ComplexMatrix::Identity(4, 4) / 4.0) < 1e-15);
    CHECK(oracle::max_abs(c.joint.eigenvectors() - ComplexMatrix::Identity(4, 4)) < 1e-15);
  }
  GIVEN("diagonal factors") {
    ComplexMatrix ra = ComplexMatrix::Zero(2, 2), rb = ComplexMatrix::Zero(2, 2);
    ra(0, 0) = 2.0 / 3.0, ra(1, 1) = 1.0 / 3.0;
    rb(0, 0) = 0.75, rb(1, 1) = 0.25;
    const CompositeGnsContext c = build_composite(build_gns(DensityMatrix::from_matrix(ra)),
                                                  build_gns(DensityMatrix::from_matrix(rb)));
    const Eigen::MatrixXd& da = c.ctx_a.delta_log();
    const Eigen::MatrixXd& db = c.ctx_b.delta_log();
    const Eigen::MatrixXd& dj = c.joint.delta_log();
    for (int ia = 0; ia < 2; ++ia)
      for (int ja = 0; ja < 2; ++ja)
        for (int ib = 0; ib < 2; ++ib)
          for (int jb = 0; jb < 2; ++jb)
            CHECK(std::exp(dj(ia * 2 + ib, ja * 2 + jb)) ==
                  Approx(std::exp(da(ia, ja)) * std::exp(db(ib, jb))));
  }
  for (auto [na, nb] : {std::pair{2, 2}, {2, 3}, {3, 3}}) {
    const CompositeGnsContext c = random_composite(na, nb, rng);
    const CompositeReport rep = verify_composite(c, 50, 17);
    CHECK(rep.passed(1e-10));
  }
  GIVEN("a dimension over the cap") {
    const GnsContext big = build_gns(DensityMatrix::from_matrix(
        ComplexMatrix::Identity(70, 70) / 70.0));
    REQUIRE_THROWS_AS(build_composite(big, big), DimensionError);
  }
}

SCENARIO("P_n and its transposed cone") {
  SplitMix64 rng(7);
  for (auto [na, nb] : {std::pair{2, 2}, {2, 3}, {3, 3}}) {
    const CompositeGnsContext c = random_composite(na, nb, rng);
    const BipartiteShape shape = c.shape;
    const Eigen::Index n = na * nb;
    CHECK(pn_intersection_membership(c, c.joint.omega()).inside);

    // Constructive PPT samples are inside.
    for (int t = 0; t < 20; ++t) {
      const DensityMatrix a = sample_ppt_density(shape, rng);
      const GnsVector xi = apply_delta_power(c.joint, 0.25, c.joint.from_operator(a.matrix()));
      const MembershipVerdict v = pn_intersection_membership(c, xi);
      CHECK(v.inside);
      CHECK(commutant_cone_membership(c, xi).inside);
    }
    // Route certificates agree on mixed inputs.
    for (int t = 0; t < 100; ++t) {
      ComplexMatrix a;
      switch (t % 4) {
        case 0: a = random::psd(n, rng); break;
        case 1: a = sample_ppt_density(shape, rng).matrix(); break;
        case 2: a = random::hermitian(n, rng); break;
        default: a = random::generic(n, n, rng); break;
      }
      const GnsVector xi = apply_delta_power(c.joint, 0.25, c.joint.from_operator(a));
      const MembershipVerdict v = pn_intersection_membership(c, xi, 1e-10);
      CHECK(std::abs(v.certificate - v.alt_certificate) <= 1e-8);
      // (1 (x) U_B) maps the intersection onto itself.
      const MembershipVerdict w = pn_intersection_membership(c, apply_u_b(c, xi), 1e-10);
      CHECK(w.inside == v.inside);
      // Membership in P_n and P_n' coincides with the intersection.
      const bool both = natural_cone_membership(c.joint, xi).inside &&
                        commutant_cone_membership(c, xi).inside;
      CHECK(both == v.inside);
    }
  }
  GIVEN("the maximally entangled projector on 2x2") {
    const CompositeGnsContext c = random_composite(2, 2, rng);
    const GnsVector xi =
        apply_delta_power(c.joint, 0.25, c.joint.from_operator(oracle::max_entangled(2)));
    const MembershipVerdict v = pn_intersection_membership(c, xi);
    CHECK_FALSE(v.inside);
    CHECK(v.certificate == Approx(-0.5).margin(1e-10));
  }
}

SCENARIO("The commutant cone identity") {
  SplitMix64 rng(8);
  GIVEN("a single term with identity on B") {
    const CompositeGnsContext c = random_composite(2, 2, rng);
    const ComplexMatrix a = random::generic(2, 2, rng);
    const ComplexMatrix x = kron(a, ComplexMatrix::Identity(2, 2));
    const GnsVector lhs = apply_u_b(c, c.joint.vector(x * c.joint.sqrt_rho() * x.adjoint()));
    const GnsVector rhs = detail::commutant_generator(
        c, detail::commutant_operator(c, {a}, {ComplexMatrix::Identity(2, 2)}));
    CHECK(distance(lhs, rhs) < 1e-12);
  }
  for (auto [na, nb] : {std::pair{2, 2}, {2, 3}}) {
    const CompositeGnsContext c = random_composite(na, nb, rng);
    const CommutantReport rep = commutant_cone_check(c, 30, 21);
    CHECK(rep.generator_residual <= 1e-10);
    CHECK(rep.min_pairing >= -1e-10);
    CHECK(rep.min_generator_certificate >= -1e-10);
    CHECK(rep.outside_tested > 0);
    CHECK(rep.outside_separated == rep.outside_tested);
    CHECK(rep.passed);
  }
}

SCENARIO("Upper bounds on the distance to the separable cone") {
  SplitMix64 rng(9);
  const CompositeGnsContext c = random_composite(2, 2, rng);
  GIVEN("a product of cone vectors") {
    const GnsVector xa = c.ctx_a.vector(random::psd(2, rng));
    const GnsVector xb = c.ctx_b.vector(random::psd(2, rng));
    GnsVector xi = product_vector(c, xa, xb);
    xi.mat /= norm(xi);
    const SeparableDistanceResult r = separable_cone_distance(c, xi, 50, 1);
    CHECK(r.upper_bound <= 1e-8);
  }
  GIVEN("a mixture of three product cone vectors") {
    for (auto [na, nb] : {std::pair{2, 2}, {2, 3}}) {
      const CompositeGnsContext cc = random_composite(na, nb, rng);
      ComplexMatrix m = ComplexMatrix::Zero(na * nb, na * nb);
      for (int k = 0; k < 3; ++k)
        m += rng.uniform(0.2, 1.0) * kron(random::psd(na, rng), random::psd(nb, rng));
      const GnsVector xi = cc.joint.vector(m / m.norm());
      const SeparableDistanceResult r = separable_cone_distance(cc, xi, 500, 2);
      CHECK(r.upper_bound <= 1e-6);
      for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] <= r.history[k - 1]);
    }
  }
  GIVEN("the singlet") {
    const GnsVector xi =
        state_to_cone_vector(c.joint, DensityMatrix::from_matrix(oracle::singlet()));
    const SeparableDistanceResult r = separable_cone_distance(c, xi, 500, 3);
    // Lower bound from the decomposable witness W with ||W||_F = 1:
    // ||xi - s|| >= Tr(W (s - xi)) >= -Tr(W xi) = 1/2.
    const auto w = npt_witness(DensityMatrix::from_matrix(oracle::singlet()), {2, 2});
    REQUIRE(w.has_value());
    const double lower = -(w->matrix() * xi.mat).trace().real();
    CHECK(lower == Approx(0.5).margin(1e-10));
    CHECK(r.upper_bound >= lower - 1e-10);
    CHECK(r.upper_bound > 0.1);
    CHECK(r.upper_bound <= 1.0);
  }
}
