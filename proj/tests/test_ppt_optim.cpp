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

#include "modular_ppt/ppt_optim.hpp"
#include "oracles.hpp"

using namespace modular_ppt;
using Catch::Approx;

namespace {

ComplexMatrix random_trace_one_hermitian(Eigen::Index n, SplitMix64& rng) {
  ComplexMatrix h = random::hermitian(n, rng);
  h.diagonal().array() += (1.0 - h.trace().real()) / static_cast<double>(n);
  return h;
}

}  // namespace

SCENARIO("PSD projection") {
  SplitMix64 rng(1);
  const ComplexMatrix p = random::psd(4, rng);
  CHECK(oracle::max_abs(project_psd(HermitianOperator(p)).matrix() - p) < 1e-12);
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -1.0;
  ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  CHECK(oracle::max_abs(project_psd(HermitianOperator(d)).matrix() - expected) < 1e-15);

  const ComplexMatrix m = random::hermitian(4, rng);
  const ComplexMatrix proj = project_psd(HermitianOperator(m)).matrix();
  CHECK(oracle::min_eigenvalue(proj) >= -1e-14);
  for (int t = 0; t < 100; ++t) {
    const ComplexMatrix q = random::psd(4, rng) * rng.uniform(0.0, 2.0);
    CHECK((m - proj).norm() <= (m - q).norm() + 1e-14);
  }
}

SCENARIO("Projection onto the PPT states") {
  SplitMix64 rng(2);
  GIVEN("a PPT density") {
    const DensityMatrix d = sample_ppt_density({2, 2}, rng);
    const auto [out, trace] = project_ppt(d.op(), PptSetSpec{{2, 2}});
    CHECK(oracle::max_abs(out.matrix() - d.matrix()) <= 1e-10);
    CHECK(trace.iterates == 1);
    CHECK(trace.converged);
  }
  GIVEN("the singlet") {
    const auto [out, trace] = project_ppt(HermitianOperator(oracle::singlet()), PptSetSpec{{2, 2}});
    CHECK(trace.converged);
    CHECK(trace.feasibility_residual <= 1e-8);
    CHECK((out.matrix() - oracle::singlet()).norm() > 0.1);
    CHECK(oracle::min_eigenvalue(oracle::partial_transpose_b(out.matrix(), 2, 2)) >= -1e-8);
    // Nearest point is the Werner state with singlet weight 1/2.
    ComplexMatrix werner = 0.5 * oracle::singlet();
    werner += (0.5 / 3.0) * (ComplexMatrix::Identity(4, 4) - oracle::singlet());
    CHECK(oracle::max_abs(out.matrix() - werner) < 1e-6);
  }
  GIVEN("random trace-one Hermitian matrices up to 3x3") {
    for (auto [na, nb] : {std::pair{2, 2}, {2, 3}, {3, 3}}) {
      const BipartiteShape s{static_cast<std::size_t>(na), static_cast<std::size_t>(nb)};
      for (int t = 0; t < 10; ++t) {
        const ComplexMatrix h = random_trace_one_hermitian(na * nb, rng);
        const auto [out, trace] = project_ppt(HermitianOperator(h), PptSetSpec{s});
        CHECK(trace.feasibility_residual <= 1e-8);
        CHECK(oracle::min_eigenvalue(out.matrix()) >= -1e-8);
        CHECK(oracle::min_eigenvalue(oracle::partial_transpose_b(out.matrix(), na, nb)) >= -1e-8);
        CHECK(std::abs(out.matrix().trace().real() - 1.0) <= 1e-8);
        // Idempotent on its output.
        const auto [again, t2] = project_ppt(out, PptSetSpec{s});
        CHECK((again.matrix() - out.matrix()).norm() <= 1e-8);
      }
    }
  }
  GIVEN("the membership oracle on 2x2") {
    int agree = 0;
    for (int t = 0; t < 200; ++t) {
      ComplexMatrix h = random_trace_one_hermitian(4, rng) * rng.uniform(0.05, 0.6);
      h.diagonal().array() += (1.0 - h.trace().real()) / 4.0;
      const bool ppt = psd_check(HermitianOperator(h)).is_psd &&
                       psd_check(HermitianOperator(partial_transpose(h, {2, 2}, Subsystem::B))).is_psd;
      const auto [out, trace] = project_ppt(HermitianOperator(h), PptSetSpec{{2, 2}});
      agree += ppt == ((out.matrix() - h).norm() <= 1e-7);
    }
    CHECK(agree == 200);
  }
  REQUIRE_THROWS_AS(project_ppt(HermitianOperator(ComplexMatrix::Identity(5, 5)), PptSetSpec{{2, 2}}),
                    ShapeError);
}

SCENARIO("Feasibility restoration and sampling") {
  SplitMix64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const ComplexMatrix h = random_trace_one_hermitian(6, rng);
    const ComplexMatrix r = restore_ppt_feasibility(h, {2, 3});
    CHECK(ppt_feasibility_residual(r, {2, 3}) <= 1e-14);
    const DensityMatrix d = sample_ppt_density({3, 2}, rng);
    CHECK(is_ppt(d.matrix(), {3, 2}));
  }
  // Determinism of sampling.
  SplitMix64 r1(99), r2(99);
  CHECK(sample_ppt_density({2, 2}, r1).matrix() == sample_ppt_density({2, 2}, r2).matrix());
}

SCENARIO("Linear minimization over the PPT states") {
  const PptSetSpec spec{{2, 2}};
  GIVEN("the identity") {
    const auto r = min_trace_over_ppt(HermitianOperator(ComplexMatrix::Identity(4, 4)), spec);
    CHECK(r.value == Approx(1.0).margin(1e-6));
    CHECK(r.trace.restart_spread <= 1e-4);
  }
  GIVEN("SWAP") {
    const auto r = min_trace_over_ppt(HermitianOperator(oracle::swap(2)), spec);
    CHECK(r.value == Approx(0.0).margin(1e-4));
    CHECK(r.trace.restart_spread <= 1e-4);
    CHECK_FALSE(r.trace.low_confidence);
    CHECK(is_ppt(r.minimizer.matrix(), {2, 2}));
    // Optimal points satisfy <phi+|D^Gamma|phi+> = 0.
    const ComplexMatrix pt = oracle::partial_transpose_b(r.minimizer.matrix(), 2, 2);
    CHECK((oracle::max_entangled(2) * pt).trace().real() == Approx(0.0).margin(1e-4));
  }
  GIVEN("minus the maximally entangled projector") {
    const auto r = min_trace_over_ppt(HermitianOperator(-oracle::max_entangled(2)), spec);
    CHECK(r.value == Approx(-0.5).margin(1e-3));
    CHECK(r.trace.restart_spread <= 1e-4);
    // Brute force: no projected random PPT state does better.
    SplitMix64 rng(4);
    double best = 0.0;
    for (int t = 0; t < 200; ++t) {
      const DensityMatrix d = sample_ppt_density({2, 2}, rng);
      best = std::min(best, -(oracle::max_entangled(2) * d.matrix()).trace().real());
    }
    CHECK(best >= r.value - 1e-9);
  }
  GIVEN("any Hermitian objective") {
    SplitMix64 rng(5);
    const ComplexMatrix h = random::hermitian(6, rng);
    const auto r = min_trace_over_ppt(HermitianOperator(h), PptSetSpec{{2, 3}}, {}, 3);
    CHECK(r.value <= h.trace().real() / 6.0 + 1e-12);
    CHECK(r.trace.objective_history.size() >= 2);
    for (std::size_t k = 1; k < r.trace.objective_history.size(); ++k)
      CHECK(r.trace.objective_history[k] <= r.trace.objective_history[k - 1]);
    const auto again = min_trace_over_ppt(HermitianOperator(h), PptSetSpec{{2, 3}}, {}, 3);
    CHECK(again.value == r.value);
  }
}

SCENARIO("Decomposable witnesses of NPT states") {
  GIVEN("the singlet") {
    const DensityMatrix d = DensityMatrix::from_matrix(oracle::singlet());
    const auto w = npt_witness(d, {2, 2});
    REQUIRE(w.has_value());
    CHECK((w->matrix() * d.matrix()).trace().real() == Approx(-0.5).margin(1e-12));
    CHECK(w->matrix().norm() == Approx(1.0).margin(1e-12));
    const auto r = min_trace_over_ppt(*w, PptSetSpec{{2, 2}});
    CHECK(r.value >= -1e-6);
  }
  GIVEN("PPT states") {
    CHECK_FALSE(npt_witness(DensityMatrix::from_matrix(ComplexMatrix::Identity(4, 4) / 4.0), {2, 2})
                    .has_value());
    SplitMix64 rng(6);
    const DensityMatrix prod =
        DensityMatrix::from_matrix(kron(random::pure_state(2, rng), random::pure_state(3, rng)));
    CHECK_FALSE(npt_witness(prod, {2, 3}).has_value());
  }
  GIVEN("random entangled pure states") {
    SplitMix64 rng(7);
    for (int t = 0; t < 10; ++t) {
      const DensityMatrix d = DensityMatrix::from_matrix(random::pure_state(6, rng));
      const auto w = npt_witness(d, {2, 3});
      REQUIRE(w.has_value());
      CHECK((w->matrix() * d.matrix()).trace().real() < 0.0);
      for (int s = 0; s < 20; ++s) {
        const DensityMatrix p = sample_ppt_density({2, 3}, rng);
        CHECK((w->matrix() * p.matrix()).trace().real() >= -1e-12);
      }
    }
  }
}
