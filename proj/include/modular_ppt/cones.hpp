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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "modular_ppt/gns.hpp"
#include "modular_ppt/linalg.hpp"
#include "modular_ppt/random.hpp"

namespace modular_ppt {

struct ConeQuery {
  double beta = 0.25;
  double tol = 1e-10;
};

/// Outcome of a cone membership test. The certificate is the smallest
/// eigenvalue of the Hermitian part of the witnessing matrix, replaced by
/// -defect when the spectral norm of its anti-Hermitian part (the defect)
/// exceeds tol; inside <=> certificate >= -tol.
struct MembershipVerdict {
  bool inside = false;
  double certificate = 0.0;
  std::string route;
  /// Certificate of the second route, for tests that run two.
  double alt_certificate = std::numeric_limits<double>::quiet_NaN();
  double hermiticity_defect = 0.0;
  /// |certificate| <= tol: on the closure boundary, counted as inside.
  bool boundary = false;
};

namespace detail {

/// Spectral norm of the anti-Hermitian part; unitarily invariant.
inline double skew_norm(const ComplexMatrix& a) {
  const ComplexMatrix s = Complex(0.0, 0.5) * (a - a.adjoint());
  const RealVector e = eigenvalues_ascending(s);
  return std::max(std::abs(e(0)), std::abs(e(e.size() - 1)));
}

inline MembershipVerdict psd_verdict(const ComplexMatrix& a, double tol, std::string route) {
  MembershipVerdict v;
  v.route = std::move(route);
  v.hermiticity_defect = skew_norm(a);
  v.certificate = min_eigenvalue(hermitian_part(a));
  if (v.hermiticity_defect > tol) v.certificate = std::min(v.certificate, -v.hermiticity_defect);
  v.inside = v.certificate >= -tol;
  v.boundary = std::abs(v.certificate) <= tol;
  return v;
}

inline void check_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 0.5))
    throw ContractError("beta must lie in [0, 1/2], got " + std::to_string(beta));
}

/// Throws when two routes give opposite verdicts with a margin beyond 10 tol.
inline void require_agreement(const MembershipVerdict& x, const MembershipVerdict& y,
                              double tol, const char* what) {
  if (x.inside != y.inside &&
      std::max(std::abs(x.certificate), std::abs(y.certificate)) > 10.0 * tol)
    throw ConsistencyError(std::string(what) + ": routes disagree (" + x.route + " " +
                           std::to_string(x.certificate) + ", " + y.route + " " +
                           std::to_string(y.certificate) + ")");
}

}  // namespace detail

/// xi in V_beta = closure{Delta^beta a Omega : a >= 0}: a = Delta^{-beta} xi
/// rho^{-1/2} must be PSD.
inline MembershipVerdict v_beta_membership(const GnsContext& ctx, const ConeQuery& q,
                                           const GnsVector& xi) {
  detail::check_beta(q.beta);
  const ComplexMatrix a = ctx.operator_of(apply_delta_power(ctx, -q.beta, xi));
  return detail::psd_verdict(a, q.tol, "v_beta");
}

/// Natural cone P = V_{1/4}. Route (i) is v_beta_membership at 1/4, route
/// (ii) asks mat(xi) >= 0, since Delta^{1/4} a Omega = rho^{1/4} a rho^{1/4}.
/// The verdict and certificate are those of route (ii).
inline MembershipVerdict natural_cone_membership(const GnsContext& ctx, const GnsVector& xi,
                                                 double tol = 1e-10) {
  const MembershipVerdict first = v_beta_membership(ctx, {0.25, tol}, xi);
  MembershipVerdict second = detail::psd_verdict(xi.mat, tol, "natural(spectral)");
  detail::require_agreement(first, second, tol, "natural_cone_membership");
  second.alt_certificate = first.certificate;
  return second;
}

// ---------------------------------------------------------------------------
// Duality of V_beta and V_{1/2 - beta}

struct DualityReport {
  double beta = 0.0;
  std::size_t samples = 0;
  /// Smallest real part of (eta, xi) over xi in V_beta, eta in V_{1/2-beta}.
  double min_pairing = std::numeric_limits<double>::infinity();
  double max_imag_pairing = 0.0;
  std::size_t outside_tested = 0;
  std::size_t outside_separated = 0;
  /// Largest (least negative) separating pairing found for outside vectors.
  double max_separating_pairing = -std::numeric_limits<double>::infinity();
  bool passed = false;
};

/// eta in V_{1/2-beta} minimizing (eta, xi) over rank-one a: built from the
/// most negative eigenvector v of rho^{1/2} Herm(a) rho^{1/2}, a = Delta^{-beta}
/// xi rho^{-1/2}, so that (eta, xi) = <v| rho^{1/2} Herm(a) rho^{1/2} |v>.
inline GnsVector separating_vector(const GnsContext& ctx, double beta, const GnsVector& xi) {
  detail::check_beta(beta);
  const ComplexMatrix a = hermitian_part(ctx.operator_of(apply_delta_power(ctx, -beta, xi)));
  const ComplexMatrix s = hermitian_part(ctx.sqrt_rho() * a * ctx.sqrt_rho());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(s);
  const ComplexVector v = es.eigenvectors().col(0);
  return apply_delta_power(ctx, 0.5 - beta, ctx.from_operator(v * v.adjoint()));
}

inline DualityReport duality_check(const GnsContext& ctx, double beta, std::size_t samples,
                                   std::uint64_t seed, double tol = 1e-10) {
  detail::check_beta(beta);
  DualityReport rep;
  rep.beta = beta;
  rep.samples = samples;
  const Eigen::Index n = ctx.dim();
  SplitMix64 rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const GnsVector xi = apply_delta_power(ctx, beta, ctx.from_operator(random::psd(n, rng)));
    const GnsVector eta =
        apply_delta_power(ctx, 0.5 - beta, ctx.from_operator(random::psd(n, rng)));
    const Complex p = inner(eta, xi);
    rep.min_pairing = std::min(rep.min_pairing, p.real());
    rep.max_imag_pairing = std::max(rep.max_imag_pairing, std::abs(p.imag()));

    const GnsVector out =
        apply_delta_power(ctx, beta, ctx.from_operator(random::hermitian(n, rng)));
    if (v_beta_membership(ctx, {beta, tol}, out).inside) continue;
    ++rep.outside_tested;
    const double sep = inner(separating_vector(ctx, beta, out), out).real();
    if (sep < -tol) ++rep.outside_separated;
    rep.max_separating_pairing = std::max(rep.max_separating_pairing, sep);
  }
  rep.passed = rep.min_pairing >= -tol && rep.outside_separated == rep.outside_tested;
  return rep;
}

struct UMapsReport {
  double beta = 0.0;
  std::size_t samples = 0;
  /// Smallest certificate of U xi in V_{1/2-beta}, xi sampled in V_beta.
  double min_certificate = std::numeric_limits<double>::infinity();
  /// Smallest certificate of U Delta^{1/2} xi in V_0, xi sampled in V_0.
  double v0_min_certificate = std::numeric_limits<double>::infinity();
  /// max ||U Delta^{1/2} a Omega - a^t Omega||.
  double tau_residual = 0.0;
  bool passed = false;
};

inline UMapsReport u_maps_cones(const GnsContext& ctx, double beta, std::size_t samples,
                                std::uint64_t seed, double tol = 1e-10) {
  detail::check_beta(beta);
  UMapsReport rep;
  rep.beta = beta;
  rep.samples = samples;
  const Eigen::Index n = ctx.dim();
  SplitMix64 rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const ComplexMatrix a = random::psd(n, rng);
    const GnsVector xi = apply_delta_power(ctx, beta, ctx.from_operator(a));
    rep.min_certificate = std::min(
        rep.min_certificate,
        v_beta_membership(ctx, {0.5 - beta, tol}, apply_u(ctx, xi)).certificate);

    const ComplexMatrix b = random::psd(n, rng);
    const GnsVector b_om = ctx.from_operator(b);
    const GnsVector image = apply_u(ctx, apply_delta_power(ctx, 0.5, b_om));
    rep.v0_min_certificate =
        std::min(rep.v0_min_certificate, v_beta_membership(ctx, {0.0, tol}, image).certificate);
    rep.tau_residual = std::max(
        rep.tau_residual, distance(image, ctx.from_operator(transpose_operator(ctx, b))));
  }
  rep.passed = rep.min_certificate >= -tol && rep.v0_min_certificate >= -tol &&
               rep.tau_residual <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// States and cone vectors

/// omega_xi(a) = (xi, a xi) = Tr(a mat(xi) mat(xi)^dagger).
inline ComplexMatrix state_density(const GnsVector& xi) {
  return hermitian_part(xi.mat * xi.mat.adjoint());
}

/// The unique xi in P with omega_xi = omega_sigma: mat(xi) = sigma^{1/2}.
inline GnsVector state_to_cone_vector(const GnsContext& ctx, const DensityMatrix& sigma) {
  if (sigma.dim() != ctx.dim())
    throw ShapeError("state_to_cone_vector: density has dimension " +
                     std::to_string(sigma.dim()) + ", context has " +
                     std::to_string(ctx.dim()));
  return ctx.vector(mat_sqrt_psd(sigma.op()).matrix());
}

struct TransposeStateReport {
  /// max |density(U xi) - density(xi)^t| entrywise.
  double residual = 0.0;
  double certificate = 0.0;
};

/// U xi for xi in P, with the check that its state is the transposed state.
inline std::pair<GnsVector, TransposeStateReport> transpose_state_vector(
    const GnsContext& ctx, const GnsVector& xi, double tol = 1e-10) {
  const MembershipVerdict v = natural_cone_membership(ctx, xi, tol);
  if (!v.inside)
    throw ContractError("transpose_state_vector: vector is outside the natural cone (certificate " +
                        std::to_string(v.certificate) + ")");
  GnsVector out = apply_u(ctx, xi);
  TransposeStateReport rep;
  rep.certificate = v.certificate;
  rep.residual = (state_density(out) - transpose_operator(ctx, state_density(xi)))
                     .cwiseAbs()
                     .maxCoeff();
  return {std::move(out), rep};
}

// ---------------------------------------------------------------------------
// Composite systems

/// GNS data of rho_A (x) rho_B with H_pi = H_piA (x) H_piB. The joint
/// eigenbasis is X_A (x) X_B in product order, so joint E_ij coordinates
/// factor as products of the factor coordinates.
struct CompositeGnsContext {
  GnsContext ctx_a;
  GnsContext ctx_b;
  GnsContext joint;
  BipartiteShape shape;
};

inline CompositeGnsContext build_composite(const GnsContext& a, const GnsContext& b) {
  const auto na = static_cast<std::size_t>(a.dim());
  const auto nb = static_cast<std::size_t>(b.dim());
  check_dimension(na * nb, "build_composite");
  const DensityMatrix rho =
      DensityMatrix::from_matrix(hermitian_part(kron(a.rho().matrix(), b.rho().matrix())));
  EigenSystem eig{kron_values(a.eigenvalues(), b.eigenvalues()),
                  kron(a.eigenvectors(), b.eigenvectors())};
  return {a, b, GnsContext::from_eigensystem(rho, std::move(eig)), {na, nb}};
}

/// xi_A (x) xi_B as a joint vector.
inline GnsVector product_vector(const CompositeGnsContext& c, const GnsVector& xa,
                                const GnsVector& xb) {
  c.ctx_a.require_own(xa, "product_vector");
  c.ctx_b.require_own(xb, "product_vector");
  return c.joint.vector(kron(xa.mat, xb.mat));
}

/// (1 (x) U_B): flips the B indices of the joint E_ij coordinates.
inline GnsVector apply_u_b(const CompositeGnsContext& c, const GnsVector& xi) {
  return c.joint.from_eigen_coords(
      partial_transpose(c.joint.eigen_coords(xi), c.shape, Subsystem::B));
}

struct CompositeReport {
  std::size_t samples = 0;
  double jm_factorization = 0.0;
  double j_factorization = 0.0;
  double delta_factorization = 0.0;
  /// Joint operators against those of build_gns(rho_A (x) rho_B).
  double direct_agreement = 0.0;
  double u_b_involution = 0.0;
  bool passed(double tol = 1e-10) const {
    return std::max({jm_factorization, j_factorization, delta_factorization, direct_agreement,
                     u_b_involution}) <= tol;
  }
};

inline CompositeReport verify_composite(const CompositeGnsContext& c, std::size_t samples,
                                        std::uint64_t seed) {
  CompositeReport rep;
  rep.samples = samples;
  const GnsContext direct = build_gns(c.joint.rho());
  const Eigen::Index na = c.ctx_a.dim();
  const Eigen::Index nb = c.ctx_b.dim();
  const Eigen::Index n = c.joint.dim();
  SplitMix64 rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const GnsVector xa = c.ctx_a.vector(random::generic(na, na, rng));
    const GnsVector xb = c.ctx_b.vector(random::generic(nb, nb, rng));
    const GnsVector x = product_vector(c, xa, xb);
    const auto& A = c.ctx_a;
    const auto& B = c.ctx_b;
    rep.jm_factorization = std::max(
        rep.jm_factorization,
        distance(apply_conjugation(c.joint, c.joint.jm_op(), x),
                 product_vector(c, apply_conjugation(A, A.jm_op(), xa),
                                apply_conjugation(B, B.jm_op(), xb))));
    rep.j_factorization = std::max(
        rep.j_factorization,
        distance(apply_conjugation(c.joint, c.joint.j_op(), x),
                 product_vector(c, apply_conjugation(A, A.j_op(), xa),
                                apply_conjugation(B, B.j_op(), xb))));
    rep.delta_factorization = std::max(
        rep.delta_factorization,
        distance(apply_delta_power(c.joint, 1.0, x),
                 product_vector(c, apply_delta_power(A, 1.0, xa),
                                apply_delta_power(B, 1.0, xb))));

    // Delta and J_m do not depend on the choice of eigenbasis.
    const ComplexMatrix g = random::generic(n, n, rng);
    const GnsVector y = c.joint.vector(g);
    const GnsVector yd = direct.vector(g);
    for (double beta : {0.25, 0.5, 1.0})
      rep.direct_agreement = std::max(
          rep.direct_agreement,
          (apply_delta_power(c.joint, beta, y).mat - apply_delta_power(direct, beta, yd).mat)
              .norm());
    rep.direct_agreement = std::max(
        rep.direct_agreement, (apply_conjugation(c.joint, c.joint.jm_op(), y).mat -
                               apply_conjugation(direct, direct.jm_op(), yd).mat)
                                  .norm());
    rep.u_b_involution = std::max(rep.u_b_involution, distance(apply_u_b(c, apply_u_b(c, y)), y));
  }
  return rep;
}

/// xi in P_n intersected with P_n^tau = (1 (x) U_B) P_n. Route (i): the
/// v_beta(1/4) test on xi and on (1 (x) U_B) xi. Route (ii): with
/// a = rho^{-1/4} mat(xi) rho^{-1/4}, both a and a^Gamma (canonical basis)
/// are PSD. The verdict and certificate are those of route (ii).
inline MembershipVerdict pn_intersection_membership(const CompositeGnsContext& c,
                                                    const GnsVector& xi, double tol = 1e-10) {
  const GnsContext& j = c.joint;
  const MembershipVerdict p1 = v_beta_membership(j, {0.25, tol}, xi);
  const MembershipVerdict p2 = v_beta_membership(j, {0.25, tol}, apply_u_b(c, xi));
  MembershipVerdict first;
  first.route = "pn_and_transposed(v_beta)";
  first.certificate = std::min(p1.certificate, p2.certificate);
  first.hermiticity_defect = std::max(p1.hermiticity_defect, p2.hermiticity_defect);
  first.inside = first.certificate >= -tol;

  j.require_own(xi, "pn_intersection_membership");
  const ComplexMatrix q = j.rho_power(-0.25);
  const ComplexMatrix a = q * xi.mat * q;
  const MembershipVerdict s1 = detail::psd_verdict(a, tol, "a");
  const MembershipVerdict s2 =
      detail::psd_verdict(partial_transpose(a, c.shape, Subsystem::B), tol, "a_gamma");
  MembershipVerdict second;
  second.route = "a_and_a_gamma(spectral)";
  second.certificate = std::min(s1.certificate, s2.certificate);
  second.hermiticity_defect = std::max(s1.hermiticity_defect, s2.hermiticity_defect);
  second.inside = second.certificate >= -tol;
  second.boundary = std::abs(second.certificate) <= tol;
  detail::require_agreement(first, second, tol, "pn_intersection_membership");
  second.alt_certificate = first.certificate;
  return second;
}

/// Membership in P' = (1 (x) U_B) P, the natural cone of the algebra
/// pi_A(B(H_A)) (x) pi_B(B(H_B))'.
inline MembershipVerdict commutant_cone_membership(const CompositeGnsContext& c,
                                                   const GnsVector& xi, double tol = 1e-10) {
  MembershipVerdict v = natural_cone_membership(c.joint, apply_u_b(c, xi), tol);
  v.route = "commutant(spectral)";
  return v;
}

// ---------------------------------------------------------------------------
// The commutant cone identity, evaluated with superoperators

namespace detail {

/// Matrix of pi(a) on the row-major E_ij coordinates of ctx.
inline ComplexMatrix left_mult_coords(const GnsContext& ctx, const ComplexMatrix& a) {
  const ComplexMatrix& x = ctx.eigenvectors();
  return kron(ComplexMatrix(x.adjoint() * a * x), ComplexMatrix::Identity(ctx.dim(), ctx.dim()));
}

/// alpha(L) = U L U on coordinates.
inline ComplexMatrix alpha_coords(const GnsContext& ctx, const ComplexMatrix& l) {
  return ctx.u_op() * l * ctx.u_op();
}

/// Permutation taking tensor-order coordinates ((iA jA), (iB jB)) of
/// H_piA (x) H_piB to joint coordinates ((iA iB), (jA jB)).
inline ComplexMatrix tensor_to_joint(Eigen::Index na, Eigen::Index nb) {
  const Eigen::Index n = na * nb;
  ComplexMatrix p = ComplexMatrix::Zero(n * n, n * n);
  for (Eigen::Index ia = 0; ia < na; ++ia)
    for (Eigen::Index ja = 0; ja < na; ++ja)
      for (Eigen::Index ib = 0; ib < nb; ++ib)
        for (Eigen::Index jb = 0; jb < nb; ++jb) {
          const Eigen::Index t = (ia * na + ja) * nb * nb + ib * nb + jb;
          const Eigen::Index jn = (ia * nb + ib) * n + (ja * nb + jb);
          p(jn, t) = 1.0;
        }
  return p;
}

/// Y = sum_k pi_A(a_k) (x) alpha(pi_B(b_k)) on joint coordinates.
inline ComplexMatrix commutant_operator(const CompositeGnsContext& c,
                                       const std::vector<ComplexMatrix>& as,
                                       const std::vector<ComplexMatrix>& bs) {
  const Eigen::Index n = c.joint.dim();
  ComplexMatrix y = ComplexMatrix::Zero(n * n, n * n);
  for (std::size_t k = 0; k < as.size(); ++k)
    y += kron(left_mult_coords(c.ctx_a, as[k]),
              alpha_coords(c.ctx_b, left_mult_coords(c.ctx_b, bs[k])));
  const ComplexMatrix p = tensor_to_joint(c.ctx_a.dim(), c.ctx_b.dim());
  return p * y * p.transpose();
}

/// Y j_m(Y) Omega with j_m(Y) = J_m Y J_m = F conj(Y) F on joint coordinates.
inline GnsVector commutant_generator(const CompositeGnsContext& c, const ComplexMatrix& y) {
  const ComplexMatrix& f = c.joint.u_op();
  const ComplexVector om = c.joint.coords(c.joint.omega());
  return c.joint.from_coords(y * (f * y.conjugate() * f * om));
}

/// Splits x on H_A (x) H_B as sum over (i, j) of E_ij (x) x_block(i, j).
inline void split_blocks(const ComplexMatrix& x, const BipartiteShape& s,
                         std::vector<ComplexMatrix>& as, std::vector<ComplexMatrix>& bs) {
  const auto na = static_cast<Eigen::Index>(s.dim_a);
  const auto nb = static_cast<Eigen::Index>(s.dim_b);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < na; ++j) {
      as.push_back(matrix_unit(na, i, j));
      bs.push_back(x.block(i * nb, j * nb, nb, nb));
    }
}

}  // namespace detail

struct CommutantReport {
  std::size_t samples = 0;
  /// max ||(1 (x) U_B) X Omega X^dagger - Y j_m(Y) Omega||.
  double generator_residual = 0.0;
  /// Smallest pairing of sampled (1 (x) U_B) P elements with P' generators.
  double min_pairing = std::numeric_limits<double>::infinity();
  /// Smallest certificate of P' generators in (1 (x) U_B) P.
  double min_generator_certificate = std::numeric_limits<double>::infinity();
  /// Vectors outside (1 (x) U_B) P and how many an eigen-directed P'
  /// generator separated.
  std::size_t outside_tested = 0;
  std::size_t outside_separated = 0;
  bool passed = false;
};

inline CommutantReport commutant_cone_check(const CompositeGnsContext& c, std::size_t samples,
                                            std::uint64_t seed, double tol = 1e-10) {
  CommutantReport rep;
  rep.samples = samples;
  const GnsContext& j = c.joint;
  const Eigen::Index na = c.ctx_a.dim();
  const Eigen::Index nb = c.ctx_b.dim();
  const Eigen::Index n = j.dim();
  SplitMix64 rng(seed);
  std::vector<GnsVector> generators;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t terms = 1 + s % 3;
    std::vector<ComplexMatrix> as, bs;
    ComplexMatrix x = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; k < terms; ++k) {
      as.push_back(random::generic(na, na, rng));
      bs.push_back(random::generic(nb, nb, rng));
      x += kron(as.back(), bs.back());
    }
    const GnsVector lhs = apply_u_b(c, j.vector(x * j.sqrt_rho() * x.adjoint()));
    const GnsVector rhs = detail::commutant_generator(c, detail::commutant_operator(c, as, bs));
    rep.generator_residual = std::max(rep.generator_residual, distance(lhs, rhs));
    rep.min_generator_certificate =
        std::min(rep.min_generator_certificate,
                 natural_cone_membership(j, apply_u_b(c, rhs), tol).certificate);
    generators.push_back(rhs);
  }
  for (std::size_t s = 0; s < samples; ++s) {
    const GnsVector zeta = apply_u_b(c, j.vector(random::psd(n, rng)));
    for (const GnsVector& g : generators)
      rep.min_pairing = std::min(rep.min_pairing, inner(g, zeta).real());

    // A vector outside (1 (x) U_B) P and a P' generator that separates it:
    // with v the negative eigenvector of m = (1 (x) U_B) zeta and X = |v><w|,
    // (U_B X Omega X^dagger, zeta) = <w|Omega|w> <v|m|v> < 0.
    ComplexMatrix m = random::hermitian(n, rng);
    const GnsVector out = apply_u_b(c, j.vector(m));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
    if (es.eigenvalues()(0) >= -tol) continue;
    ++rep.outside_tested;
    const ComplexVector v = es.eigenvectors().col(0);
    const ComplexVector w = random::unit_vector(n, rng);
    std::vector<ComplexMatrix> as, bs;
    detail::split_blocks(v * w.adjoint(), c.shape, as, bs);
    const GnsVector g = detail::commutant_generator(c, detail::commutant_operator(c, as, bs));
    if (inner(g, out).real() < -tol) ++rep.outside_separated;
  }
  rep.passed = rep.generator_residual <= tol && rep.min_pairing >= -tol &&
               rep.min_generator_certificate >= -tol &&
               rep.outside_separated == rep.outside_tested;
  return rep;
}

// ---------------------------------------------------------------------------
// Distance to the separable cone P_A (x) P_B

struct SeparableDistanceResult {
  /// ||xi - best_approx||; an upper bound on the distance, not the distance.
  double upper_bound = 0.0;
  GnsVector best_approx;
  std::size_t iterations = 0;
  std::size_t atoms = 0;
  /// Best bound after each iteration; nonincreasing.
  std::vector<double> history;
};

namespace detail {

struct ProductAtom {
  ComplexVector u;
  ComplexVector v;
  double value = 0.0;
};

inline ComplexMatrix contract_b(const ComplexMatrix& r, const ComplexVector& v,
                                Eigen::Index na, Eigen::Index nb) {
  ComplexMatrix m(na, na);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < na; ++j)
      m(i, j) = v.dot(r.block(i * nb, j * nb, nb, nb) * v);
  return hermitian_part(m);
}

inline ComplexMatrix contract_a(const ComplexMatrix& r, const ComplexVector& u,
                                Eigen::Index na, Eigen::Index nb) {
  ComplexMatrix m = ComplexMatrix::Zero(nb, nb);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < na; ++j)
      m += std::conj(u(i)) * u(j) * r.block(i * nb, j * nb, nb, nb);
  return hermitian_part(m);
}

inline ComplexVector top_eigenvector(const ComplexMatrix& m, double& value) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
  value = es.eigenvalues()(m.rows() - 1);
  return es.eigenvectors().col(m.rows() - 1);
}

/// Local maximizer of <u (x) v| r |u (x) v> by alternating top eigenvectors.
inline ProductAtom refine_atom(const ComplexMatrix& r, ComplexVector v, Eigen::Index na,
                               Eigen::Index nb) {
  ProductAtom atom;
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    double val = 0.0;
    atom.u = top_eigenvector(contract_b(r, v, na, nb), val);
    v = top_eigenvector(contract_a(r, atom.u, na, nb), val);
    atom.value = val;
    if (val - prev < 1e-15 * std::max(1.0, std::abs(val))) break;
    prev = val;
  }
  atom.v = v;
  return atom;
}

inline ComplexMatrix atom_matrix(const ProductAtom& a) {
  return kron(ComplexMatrix(a.u * a.u.adjoint()), ComplexMatrix(a.v * a.v.adjoint()));
}

/// Lawson-Hanson NNLS in Gram form: min w^T Q w - 2 b^T w over w >= 0.
inline Eigen::VectorXd nnls_gram(const Eigen::MatrixXd& q, const Eigen::VectorXd& b) {
  const Eigen::Index k = b.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
  std::vector<bool> passive(static_cast<std::size_t>(k), false);
  const double tol = 1e-14 * std::max(1.0, q.diagonal().maxCoeff());
  auto solve_passive = [&](Eigen::VectorXd& s) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < k; ++i)
      if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
    const auto p = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd qp(p, p);
    Eigen::VectorXd bp(p);
    for (Eigen::Index r = 0; r < p; ++r) {
      bp(r) = b(idx[r]);
      for (Eigen::Index c = 0; c < p; ++c) qp(r, c) = q(idx[r], idx[c]);
    }
    qp.diagonal().array() += 1e-13 * std::max(1.0, qp.diagonal().maxCoeff());
    const Eigen::VectorXd sp = qp.ldlt().solve(bp);
    s.setZero(k);
    for (Eigen::Index r = 0; r < p; ++r) s(idx[r]) = sp(r);
  };
  for (int outer = 0; outer < 3 * k + 10; ++outer) {
    const Eigen::VectorXd g = b - q * w;
    Eigen::Index best = -1;
    double gmax = tol;
    for (Eigen::Index i = 0; i < k; ++i)
      if (!passive[static_cast<std::size_t>(i)] && g(i) > gmax) {
        gmax = g(i);
        best = i;
      }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    for (int inner_it = 0; inner_it < 3 * k + 10; ++inner_it) {
      Eigen::VectorXd s;
      solve_passive(s);
      bool feasible = true;
      for (Eigen::Index i = 0; i < k; ++i)
        if (passive[static_cast<std::size_t>(i)] && s(i) <= 0.0) feasible = false;
      if (feasible) {
        w = s;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index i = 0; i < k; ++i)
        if (passive[static_cast<std::size_t>(i)] && s(i) <= 0.0)
          alpha = std::min(alpha, w(i) / (w(i) - s(i)));
      w += alpha * (s - w);
      for (Eigen::Index i = 0; i < k; ++i)
        if (passive[static_cast<std::size_t>(i)] && w(i) <= 1e-15) {
          passive[static_cast<std::size_t>(i)] = false;
          w(i) = 0.0;
        }
    }
  }
  return w;
}

}  // namespace detail

/// Upper bound on dist(xi, P_A (x) P_B) by fully corrective conic
/// Frank-Wolfe over product atoms |u><u| (x) |v><v|, with NNLS reweighting
/// and block-coordinate refinement of the atoms. Never claims optimality.
inline SeparableDistanceResult separable_cone_distance(const CompositeGnsContext& c,
                                                       const GnsVector& xi,
                                                       std::size_t iters,
                                                       std::uint64_t seed) {
  c.joint.require_own(xi, "separable_cone_distance");
  const auto na = static_cast<Eigen::Index>(c.shape.dim_a);
  const auto nb = static_cast<Eigen::Index>(c.shape.dim_b);
  const Eigen::Index n = na * nb;
  const std::size_t cap = static_cast<std::size_t>(n * n);
  const ComplexMatrix target = hermitian_part(xi.mat);
  const double skew = (xi.mat - target).norm();
  SplitMix64 rng(seed);

  std::vector<detail::ProductAtom> atoms;
  Eigen::VectorXd weights;
  auto assemble = [&](const Eigen::VectorXd& w) {
    ComplexMatrix s = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; k < atoms.size(); ++k)
      if (w(static_cast<Eigen::Index>(k)) > 0.0)
        s += w(static_cast<Eigen::Index>(k)) * detail::atom_matrix(atoms[k]);
    return s;
  };
  auto reweight = [&] {
    const auto k = static_cast<Eigen::Index>(atoms.size());
    Eigen::MatrixXd q(k, k);
    Eigen::VectorXd b(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      const auto& ar = atoms[static_cast<std::size_t>(r)];
      b(r) = ar.v.dot(detail::contract_a(target, ar.u, na, nb) * ar.v).real();
      for (Eigen::Index col = 0; col < k; ++col) {
        const auto& ac = atoms[static_cast<std::size_t>(col)];
        q(r, col) = std::norm(ar.u.dot(ac.u)) * std::norm(ar.v.dot(ac.v));
      }
    }
    weights = detail::nnls_gram(q, b);
    // Drop atoms with zero weight.
    std::vector<detail::ProductAtom> kept;
    std::vector<double> kw;
    for (Eigen::Index r = 0; r < k; ++r)
      if (weights(r) > 0.0) {
        kept.push_back(atoms[static_cast<std::size_t>(r)]);
        kw.push_back(weights(r));
      }
    atoms = std::move(kept);
    weights = Eigen::Map<Eigen::VectorXd>(kw.data(), static_cast<Eigen::Index>(kw.size()));
  };

  SeparableDistanceResult res;
  ComplexMatrix best = ComplexMatrix::Zero(n, n);
  double best_dist = xi.mat.norm();
  weights.resize(0);
  for (std::size_t it = 0; it < iters; ++it) {
    const ComplexMatrix current = assemble(weights);
    const ComplexMatrix residual = target - current;

    // Linear minimization oracle: best product direction for the residual.
    detail::ProductAtom cand;
    cand.value = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < 10; ++r) {
      ComplexVector v0;
      if (r == 0) {
        v0 = ComplexVector::Zero(nb);
        v0(0) = 1.0;
      } else {
        v0 = random::unit_vector(nb, rng);
      }
      const detail::ProductAtom a = detail::refine_atom(residual, v0, na, nb);
      if (a.value > cand.value) cand = a;
    }
    const bool stationary = cand.value <= 1e-14;
    if (!stationary && atoms.size() < cap) {
      atoms.push_back(cand);
      weights.conservativeResize(weights.size() + 1);
      weights(weights.size() - 1) = 0.0;
    }
    if (!atoms.empty()) reweight();

    // Block-coordinate refinement: re-fit each atom against the others.
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const ComplexMatrix rest =
          target - assemble(weights) + weights(kk) * detail::atom_matrix(atoms[k]);
      const detail::ProductAtom a = detail::refine_atom(rest, atoms[k].v, na, nb);
      if (a.value > 0.0) {
        atoms[k] = a;
        weights(kk) = a.value;
      }
    }
    if (!atoms.empty()) reweight();

    const ComplexMatrix s = assemble(weights);
    const double dist = std::sqrt((target - s).squaredNorm() + skew * skew);
    if (dist < best_dist) {
      best_dist = dist;
      best = s;
    }
    res.history.push_back(best_dist);
    res.iterations = it + 1;
    if ((stationary && it > 0) || best_dist < 1e-15) break;
  }
  res.upper_bound = best_dist;
  res.best_approx = c.joint.vector(best);
  res.atoms = atoms.size();
  return res;
}

}  // namespace modular_ppt
