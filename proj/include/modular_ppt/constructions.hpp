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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "modular_ppt/cones.hpp"
#include "modular_ppt/gns.hpp"
#include "modular_ppt/linalg.hpp"
#include "modular_ppt/ppt_optim.hpp"
#include "modular_ppt/random.hpp"

namespace modular_ppt {

// ---------------------------------------------------------------------------
// Anticommutator condition on 2 x m

/// rho on C^2 (x) C^m, a unit vector f in C^2 and a Hermitian A on C^2 with
/// <f (x) y, {A (x) 1, rho} f (x) y> = 0 for all y.
struct AnticommutatorInstance {
  DensityMatrix rho;
  ComplexVector f;
  HermitianOperator a_op;
  /// max |<f (x) y, {A (x) 1, rho} f (x) y>| over unit y from a polarization
  /// family of the canonical basis.
  double residual = 0.0;
  /// A f = 0: the condition then holds for every rho and says nothing.
  bool vacuous = false;
};

namespace detail {

inline std::size_t second_dim(const DensityMatrix& rho) {
  if (rho.dim() % 2 != 0) throw ContractError("anticommutator condition needs shape (2, m)");
  return static_cast<std::size_t>(rho.dim() / 2);
}

inline ComplexVector orthogonal_complement(const ComplexVector& f) {
  ComplexVector g(2);
  g(0) = -std::conj(f(1));
  g(1) = std::conj(f(0));
  return g;
}

inline ComplexVector check_unit(const ComplexVector& f) {
  if (f.size() != 2) throw ShapeError("f must be a vector in C^2");
  const double nf = f.norm();
  if (!(nf > 0.0) || std::abs(nf - 1.0) > 1e-10)
    throw ContractError("f must be a unit vector");
  return f;
}

/// The m x m operator (<f| (x) 1) {A (x) 1, rho} (|f> (x) 1)
/// = sum_ij M_ji rho_ij with M = f g^dagger + g f^dagger, g = A f.
inline ComplexMatrix anticommutator_block(const ComplexMatrix& rho, const ComplexVector& f,
                                          const ComplexMatrix& a) {
  const Eigen::Index m = rho.rows() / 2;
  const ComplexVector g = a * f;
  const ComplexMatrix mm = f * g.adjoint() + g * f.adjoint();
  ComplexMatrix k = ComplexMatrix::Zero(m, m);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) k += mm(j, i) * rho.block(i * m, j * m, m, m);
  return k;
}

/// Real coordinates of a Hermitian m x m matrix (m^2 numbers).
inline Eigen::VectorXd hermitian_coords(const ComplexMatrix& k) {
  const Eigen::Index m = k.rows();
  Eigen::VectorXd v(m * m);
  Eigen::Index t = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    v(t++) = k(i, i).real();
    for (Eigen::Index j = i + 1; j < m; ++j) {
      v(t++) = std::sqrt(2.0) * k(i, j).real();
      v(t++) = std::sqrt(2.0) * k(i, j).imag();
    }
  }
  return v;
}

/// Hermitian basis of the operators A on C^2 with no |f_perp><f_perp| part.
inline std::vector<ComplexMatrix> nonvacuous_basis(const ComplexVector& f) {
  const ComplexVector g = orthogonal_complement(f);
  const Complex i(0.0, 1.0);
  return {f * f.adjoint(), f * g.adjoint() + g * f.adjoint(),
          i * (f * g.adjoint() - g * f.adjoint())};
}

}  // namespace detail

/// Residual of the condition, evaluated vector by vector on the full 2m
/// space for y in {e_k, (e_k + e_l)/sqrt 2, (e_k + i e_l)/sqrt 2}.
inline double anticommutator_residual(const DensityMatrix& rho, const ComplexVector& f,
                                      const ComplexMatrix& a) {
  const auto m = static_cast<Eigen::Index>(detail::second_dim(rho));
  const ComplexMatrix a1 = kron(a, ComplexMatrix::Identity(m, m));
  const ComplexMatrix ac = a1 * rho.matrix() + rho.matrix() * a1;
  std::vector<ComplexVector> ys;
  for (Eigen::Index k = 0; k < m; ++k) {
    ys.push_back(ComplexVector::Unit(m, k));
    for (Eigen::Index l = k + 1; l < m; ++l) {
      ys.push_back((ComplexVector::Unit(m, k) + ComplexVector::Unit(m, l)) / std::sqrt(2.0));
      ys.push_back((ComplexVector::Unit(m, k) + Complex(0.0, 1.0) * ComplexVector::Unit(m, l)) /
                   std::sqrt(2.0));
    }
  }
  double r = 0.0;
  for (const ComplexVector& y : ys) {
    const ComplexMatrix fy = kron(ComplexMatrix(f), ComplexMatrix(y));
    r = std::max(r, std::abs((fy.adjoint() * ac * fy)(0, 0)));
  }
  return r;
}

/// A = |f_perp><f_perp| satisfies the condition for every rho.
inline HermitianOperator vacuous_anticommutator_solution(const ComplexVector& f) {
  const ComplexVector g = detail::orthogonal_complement(detail::check_unit(f));
  return HermitianOperator::symmetrized(g * g.adjoint());
}

/// Nonzero Hermitian A with A f != 0 solving the condition, from the null
/// space of the real linear system in A restricted to the span of |f><f|,
/// |f><f_perp| + h.c., i|f><f_perp| + h.c. Solution iff the smallest
/// singular value is below threshold; A has unit Frobenius norm.
inline std::optional<HermitianOperator> find_anticommutator_solution(const DensityMatrix& rho,
                                                                     const ComplexVector& f,
                                                                     double threshold = 1e-9) {
  const auto m = static_cast<Eigen::Index>(detail::second_dim(rho));
  detail::check_unit(f);
  const auto basis = detail::nonvacuous_basis(f);
  Eigen::MatrixXd sys(m * m, 3);
  for (int k = 0; k < 3; ++k)
    sys.col(k) = detail::hermitian_coords(detail::anticommutator_block(rho.matrix(), f, basis[k]));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  // With fewer equations than unknowns the null space is automatic.
  const double smallest = sys.rows() < 3 ? 0.0 : sv(sv.size() - 1);
  if (smallest >= threshold) return std::nullopt;
  const Eigen::VectorXd c = svd.matrixV().col(2);
  ComplexMatrix a = ComplexMatrix::Zero(2, 2);
  for (int k = 0; k < 3; ++k) a += c(k) * basis[k];
  a /= a.norm();
  return HermitianOperator::symmetrized(a);
}

inline AnticommutatorInstance make_anticommutator_instance(const DensityMatrix& rho,
                                                           const ComplexVector& f,
                                                           const HermitianOperator& a) {
  detail::second_dim(rho);
  detail::check_unit(f);
  if (a.dim() != 2) throw ShapeError("A must act on C^2");
  if (a.matrix().norm() == 0.0) throw ContractError("A must be nonzero");
  AnticommutatorInstance inst{rho, f, a, anticommutator_residual(rho, f, a.matrix()), false};
  inst.vacuous = (a.matrix() * f).norm() <= 1e-12 * a.matrix().norm();
  return inst;
}

/// A random instance satisfying the condition with A f != 0. Writing
/// f g^dagger + g f^dagger = k+ |p><p| - k- |q><q| (g = A f), the condition
/// is k+ rho_pp = k- rho_qq, so rho = [[B, X], [X^dagger, kappa B]] in the
/// {p, q} frame with kappa = k+/k- and X = sqrt(kappa) B^{1/2} C B^{1/2},
/// ||C|| <= 1.
inline AnticommutatorInstance random_anticommutator_instance(std::size_t m, SplitMix64& rng) {
  const auto mm = static_cast<Eigen::Index>(m);
  const ComplexVector f = random::unit_vector(2, rng);
  const ComplexVector fp = detail::orthogonal_complement(f);
  const double a_ff = rng.normal();
  const Complex b = rng.complex_normal() + Complex(0.1, 0.0);
  ComplexMatrix a = a_ff * f * f.adjoint() + b * f * fp.adjoint() + std::conj(b) * fp * f.adjoint();
  a += rng.normal() * fp * fp.adjoint();
  a = hermitian_part(a / a.norm());
  const ComplexVector g = a * f;
  const ComplexMatrix mk = hermitian_part(f * g.adjoint() + g * f.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(mk);
  const double k_minus = -es.eigenvalues()(0);
  const double k_plus = es.eigenvalues()(1);
  const ComplexVector q = es.eigenvectors().col(0);
  const ComplexVector p = es.eigenvectors().col(1);
  const double kappa = k_plus / k_minus;

  const ComplexMatrix bm = random::psd(mm, rng);
  const ComplexMatrix bh = mat_sqrt_psd(HermitianOperator::symmetrized(bm)).matrix();
  ComplexMatrix c = random::gaussian(mm, mm, rng);
  c *= rng.uniform(0.05, 1.0) / c.jacobiSvd().singularValues()(0);
  const ComplexMatrix x = std::sqrt(kappa) * bh * c * bh;
  ComplexMatrix frame(2 * mm, 2 * mm);
  frame << bm, x, x.adjoint(), kappa * bm;
  ComplexMatrix w(2, 2);
  w.col(0) = p;
  w.col(1) = q;
  const ComplexMatrix wu = kron(w, ComplexMatrix::Identity(mm, mm));
  ComplexMatrix rho = hermitian_part(wu * frame * wu.adjoint());
  rho /= rho.trace().real();
  const DensityMatrix d = DensityMatrix::from_matrix(hermitian_part(rho));
  return make_anticommutator_instance(d, f, HermitianOperator::symmetrized(a));
}

struct AnticommutatorReport {
  double residual = 0.0;
  bool vacuous = false;
  /// Smallest eigenvalue of the partial transpose on the C^2 factor.
  double min_eig_gamma = 0.0;
  /// PPT predicted, but the partial transpose has an eigenvalue below -tol.
  bool falsified = false;
};

inline AnticommutatorReport verify_anticommutator_ppt(const AnticommutatorInstance& inst,
                                                      double tol = 1e-9) {
  if (inst.residual > tol)
    throw ContractError("anticommutator condition fails: residual " +
                        std::to_string(inst.residual));
  const BipartiteShape shape{2, detail::second_dim(inst.rho)};
  AnticommutatorReport rep;
  rep.residual = inst.residual;
  rep.vacuous = inst.vacuous;
  rep.min_eig_gamma =
      detail::min_eigenvalue(partial_transpose(inst.rho.matrix(), shape, Subsystem::A));
  rep.falsified = rep.min_eig_gamma < -tol;
  return rep;
}

// ---------------------------------------------------------------------------
// PPT states from the cone P_n intersected with its transpose

struct ConstructReport {
  bool low_confidence = false;
  /// Membership of xi = Delta^{1/4} a Omega in P_n and (1 (x) U_B) P_n.
  MembershipVerdict membership;
  /// The state of xi: D = mat(xi)^2 / Tr mat(xi)^2.
  double state_min_eig = 0.0;
  double state_min_gamma_eig = 0.0;
  bool state_ppt = false;
  /// Upper bound on the distance of xi / ||xi|| to P_A (x) P_B.
  double separable_upper_bound = 0.0;
  /// PPT but with a separable bound above the flag threshold.
  bool entangled_candidate = false;
};

inline std::pair<DensityMatrix, ConstructReport> construct_ppt_from_operator(
    const CompositeGnsContext& c, const ComplexMatrix& a, std::size_t sep_iters = 100,
    std::uint64_t seed = 0, double flag_threshold = 1e-3, double tol = 1e-9) {
  ConstructReport rep;
  const GnsVector xi = apply_delta_power(c.joint, 0.25, c.joint.from_operator(a));
  rep.membership = pn_intersection_membership(c, xi, tol);
  ComplexMatrix d = state_density(xi);
  d /= d.trace().real();
  const DensityMatrix state = DensityMatrix::from_matrix(hermitian_part(d));
  rep.state_min_eig = state.min_eigenvalue();
  rep.state_min_gamma_eig =
      detail::min_eigenvalue(partial_transpose(state.matrix(), c.shape, Subsystem::B));
  rep.state_ppt = rep.state_min_gamma_eig >= -tol && rep.state_min_eig >= -tol;
  GnsVector unit = xi;
  unit.mat /= norm(xi);
  rep.separable_upper_bound = separable_cone_distance(c, unit, sep_iters, seed).upper_bound;
  rep.entangled_candidate =
      rep.membership.inside && rep.separable_upper_bound > flag_threshold;
  return {state, rep};
}

/// Samples a PPT operator a by projection and builds xi = Delta^{1/4} a Omega.
inline std::pair<DensityMatrix, ConstructReport> construct_ppt_from_cone(
    const CompositeGnsContext& c, std::uint64_t seed, std::size_t sep_iters = 100,
    double flag_threshold = 1e-3) {
  check_dimension(c.shape.total(), "construct_ppt_from_cone");
  if (c.shape.total() > 81) throw DimensionError("construct_ppt_from_cone: joint dimension above 81");
  SplitMix64 rng(seed);
  const auto n = static_cast<Eigen::Index>(c.shape.total());
  ComplexMatrix h = random::hermitian(n, rng);
  h.diagonal().array() += (1.0 - h.trace().real()) / static_cast<double>(n);
  auto [projected, trace] = project_ppt(HermitianOperator::symmetrized(h), PptSetSpec{c.shape});
  const ComplexMatrix a = restore_ppt_feasibility(projected.matrix(), c.shape);
  auto out = construct_ppt_from_operator(c, a, sep_iters, derive_seed(seed, 1), flag_threshold);
  out.second.low_confidence = trace.low_confidence;
  return out;
}

// ---------------------------------------------------------------------------
// Square roots and squares of PPT states

struct Counterexample {
  std::string kind;
  ComplexMatrix density;
  double min_gamma_eig = 0.0;
};

struct ExperimentReport {
  std::size_t samples = 0;
  BipartiteShape dims;
  std::uint64_t seed = 0;
  /// Joint outcomes for (D^{1/2} PPT?, D^2 / Tr D^2 PPT?) over PPT D.
  std::map<std::string, std::size_t> counts;
  /// At most max_counterexamples PPT states D whose square root or square
  /// is not PPT.
  std::vector<Counterexample> counterexamples;
  /// density(U xi_D) = D^t.
  std::size_t positive_control_failures = 0;
  double positive_control_max_residual = 0.0;
  /// density((1 (x) U_B) xi_D) against the partial transpose of D taken in
  /// the eigenbasis of rho_B: recorded, not asserted.
  double partial_transpose_max_residual = 0.0;
  std::size_t partial_transpose_matches = 0;
};

inline constexpr std::size_t kMaxCounterexamples = 10;

/// Pools two runs on the same shape. Tallies add; counterexamples keep the
/// first kMaxCounterexamples of a followed by b.
inline ExperimentReport merge(const ExperimentReport& a, const ExperimentReport& b) {
  if (a.dims.dim_a != b.dims.dim_a || a.dims.dim_b != b.dims.dim_b)
    throw ShapeError("merge: experiment shapes differ");
  ExperimentReport r = a;
  r.samples += b.samples;
  for (const auto& [key, count] : b.counts) r.counts[key] += count;
  for (const auto& ce : b.counterexamples)
    if (r.counterexamples.size() < kMaxCounterexamples) r.counterexamples.push_back(ce);
  r.positive_control_failures += b.positive_control_failures;
  r.positive_control_max_residual =
      std::max(r.positive_control_max_residual, b.positive_control_max_residual);
  r.partial_transpose_max_residual =
      std::max(r.partial_transpose_max_residual, b.partial_transpose_max_residual);
  r.partial_transpose_matches += b.partial_transpose_matches;
  return r;
}

inline ExperimentReport sqrt_ppt_experiment(const BipartiteShape& shape, std::size_t samples,
                                            std::uint64_t seed, double tol = 1e-9) {
  if (samples < 1) throw ContractError("sqrt_ppt_experiment: samples must be >= 1");
  ExperimentReport rep;
  rep.samples = samples;
  rep.dims = shape;
  rep.seed = seed;
  for (const char* key : {"sqrt_ppt_square_ppt", "sqrt_ppt_square_npt", "sqrt_npt_square_ppt",
                          "sqrt_npt_square_npt"})
    rep.counts[key] = 0;
  SplitMix64 rng(seed);
  const auto na = static_cast<Eigen::Index>(shape.dim_a);
  const auto nb = static_cast<Eigen::Index>(shape.dim_b);
  const CompositeGnsContext ref = build_composite(
      build_gns(DensityMatrix::from_matrix(random::faithful_density(na, rng))),
      build_gns(DensityMatrix::from_matrix(random::faithful_density(nb, rng))));
  const GnsContext& ctx = ref.joint;
  // Transposition of B in the eigenbasis of rho_B: (1 (x) C_B) m^Gamma (1 (x) conj C_B).
  const ComplexMatrix& xb = ref.ctx_b.eigenvectors();
  const ComplexMatrix cb = kron(ComplexMatrix::Identity(na, na), ComplexMatrix(xb * xb.transpose()));

  for (std::size_t s = 0; s < samples; ++s) {
    const DensityMatrix d = sample_ppt_density(shape, rng);
    const ComplexMatrix root = mat_sqrt_psd(d.op()).matrix();
    ComplexMatrix square = d.matrix() * d.matrix();
    square /= square.trace().real();
    const ComplexMatrix root_n = root / root.trace().real();
    const double root_gamma = detail::min_eigenvalue(partial_transpose(root_n, shape, Subsystem::B));
    const double square_gamma =
        detail::min_eigenvalue(partial_transpose(square, shape, Subsystem::B));
    const bool root_ppt = root_gamma >= -tol;
    const bool square_ppt = square_gamma >= -tol;
    const std::string key = std::string(root_ppt ? "sqrt_ppt" : "sqrt_npt") +
                            (square_ppt ? "_square_ppt" : "_square_npt");
    ++rep.counts[key];
    if (!root_ppt && rep.counterexamples.size() < kMaxCounterexamples)
      rep.counterexamples.push_back({"ppt_with_npt_sqrt", d.matrix(), root_gamma});
    if (!square_ppt && rep.counterexamples.size() < kMaxCounterexamples)
      rep.counterexamples.push_back({"ppt_with_npt_square", d.matrix(), square_gamma});

    const GnsVector xi = state_to_cone_vector(ctx, d);
    const double pc = (state_density(apply_u(ctx, xi)) - transpose_operator(ctx, d.matrix()))
                          .cwiseAbs()
                          .maxCoeff();
    rep.positive_control_max_residual = std::max(rep.positive_control_max_residual, pc);
    if (pc > 1e-10) ++rep.positive_control_failures;

    const ComplexMatrix ptb = cb * partial_transpose(d.matrix(), shape, Subsystem::B) * cb.conjugate();
    const double pt = (state_density(apply_u_b(ref, xi)) - ptb).cwiseAbs().maxCoeff();
    rep.partial_transpose_max_residual = std::max(rep.partial_transpose_max_residual, pt);
    if (pt <= 1e-8) ++rep.partial_transpose_matches;
  }
  return rep;
}

}  // namespace modular_ppt
