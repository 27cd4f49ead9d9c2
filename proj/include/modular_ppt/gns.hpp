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

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "modular_ppt/linalg.hpp"
#include "modular_ppt/random.hpp"

namespace modular_ppt {

/// Element xi of the GNS space of (B(H), omega_rho). H_pi is B(H) with the
/// Hilbert-Schmidt product; xi = a rho^{1/2} is stored as that matrix.
struct GnsVector {
  ComplexMatrix mat;
  std::uint64_t context_id = 0;
};

/// (xi, eta) = Tr(mat(xi)^dagger mat(eta)).
inline Complex inner(const GnsVector& xi, const GnsVector& eta) {
  return (xi.mat.adjoint() * eta.mat).trace();
}

inline double norm(const GnsVector& xi) { return xi.mat.norm(); }

inline double distance(const GnsVector& xi, const GnsVector& eta) {
  return (xi.mat - eta.mat).norm();
}

enum class ConjugationKind {
  Modular,  // J_m
  Eigen,    // J: conjugation of the E_ij coordinates
  Basis,    // J_c on H, conjugation in the eigenbasis x_i
  Custom,
};

/// Antilinear operator xi -> linear_part * conj(coords(xi)). For J and J_m
/// the coordinates are the E_ij = |x_i><x_j| coordinates of H_pi (index
/// i*n + j); for J_c they are canonical coordinates on H.
struct AntilinearOp {
  ConjugationKind kind = ConjugationKind::Custom;
  ComplexMatrix linear_part;
  std::uint64_t context_id = 0;
  bool involution = false;
};

namespace detail {

inline std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t word) {
  for (int k = 0; k < 8; ++k) {
    h ^= (word >> (8 * k)) & 0xFFu;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t fingerprint(const RealVector& values, const ComplexMatrix& vectors) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  h = fnv_mix(h, static_cast<std::uint64_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i)
    h = fnv_mix(h, std::bit_cast<std::uint64_t>(values(i)));
  for (Eigen::Index i = 0; i < vectors.size(); ++i) {
    h = fnv_mix(h, std::bit_cast<std::uint64_t>(vectors.data()[i].real()));
    h = fnv_mix(h, std::bit_cast<std::uint64_t>(vectors.data()[i].imag()));
  }
  return h == 0 ? 1 : h;
}

/// Row-major transposition permutation on n^2 coordinates.
inline ComplexMatrix flip_permutation(Eigen::Index n) {
  ComplexMatrix p = ComplexMatrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) p(j * n + i, i * n + j) = 1.0;
  return p;
}

}  // namespace detail

/// GNS data of a faithful density rho: eigen-data, Omega = rho^{1/2}, and
/// the operators Delta, J_m, J, J_c, U. Immutable once built.
class GnsContext {
 public:
  /// Builds the context from a given orthonormal eigenbasis of rho.
  static GnsContext from_eigensystem(const DensityMatrix& rho, EigenSystem eig,
                                     const Tolerances& tol = {}) {
    const Eigen::Index n = rho.dim();
    if (eig.values.size() != n || eig.vectors.rows() != n || eig.vectors.cols() != n)
      throw ShapeError("eigensystem does not match density dimension");
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(eig.values(i) >= tol.faithful))
        throw FaithfulnessError(static_cast<std::size_t>(i), eig.values(i), tol.faithful);
    return GnsContext(rho, std::move(eig));
  }

  const DensityMatrix& rho() const { return rho_; }
  Eigen::Index dim() const { return rho_.dim(); }
  /// Descending for build_gns; product order for composite joint contexts.
  const RealVector& eigenvalues() const { return eig_.values; }
  const ComplexMatrix& eigenvectors() const { return eig_.vectors; }
  std::uint64_t id() const { return id_; }
  const GnsVector& omega() const { return omega_; }
  /// rho^p assembled from the stored eigen-data.
  ComplexMatrix rho_power(double p) const {
    const RealVector w = eig_.values.array().pow(p);
    return eig_.vectors * w.asDiagonal() * eig_.vectors.adjoint();
  }
  const ComplexMatrix& sqrt_rho() const { return sqrt_rho_; }
  const ComplexMatrix& inv_sqrt_rho() const { return inv_sqrt_rho_; }
  /// log(lambda_i) - log(lambda_j).
  const Eigen::MatrixXd& delta_log() const { return delta_log_; }
  /// lambda_min / lambda_max.
  double condition_ratio() const { return eig_.values.minCoeff() / eig_.values.maxCoeff(); }
  bool ill_conditioned() const { return condition_ratio() < 1e-6; }

  const ComplexMatrix& u_op() const { return u_op_; }
  const AntilinearOp& jm_op() const { return jm_; }
  const AntilinearOp& j_op() const { return j_; }
  const AntilinearOp& jc_op() const { return jc_; }

  GnsVector vector(ComplexMatrix m) const {
    if (m.rows() != dim() || m.cols() != dim())
      throw ShapeError("GNS vector must be " + std::to_string(dim()) + "x" +
                       std::to_string(dim()));
    return {std::move(m), id_};
  }
  /// a Omega = a rho^{1/2}.
  GnsVector from_operator(const ComplexMatrix& a) const {
    return vector(a * sqrt_rho_);
  }
  /// The a with xi = a Omega.
  ComplexMatrix operator_of(const GnsVector& xi) const {
    require_own(xi, "operator_of");
    return xi.mat * inv_sqrt_rho_;
  }

  /// c_ij = (E_ij, xi) = <x_i, mat(xi) x_j>.
  ComplexMatrix eigen_coords(const GnsVector& xi) const {
    require_own(xi, "eigen_coords");
    return eig_.vectors.adjoint() * xi.mat * eig_.vectors;
  }
  GnsVector from_eigen_coords(const ComplexMatrix& c) const {
    return vector(eig_.vectors * c * eig_.vectors.adjoint());
  }
  /// Eigen coordinates flattened row-major (index i*n + j).
  ComplexVector coords(const GnsVector& xi) const {
    const ComplexMatrix c = eigen_coords(xi);
    ComplexVector v(c.size());
    for (Eigen::Index i = 0; i < dim(); ++i)
      for (Eigen::Index j = 0; j < dim(); ++j) v(i * dim() + j) = c(i, j);
    return v;
  }
  GnsVector from_coords(const ComplexVector& v) const {
    if (v.size() != dim() * dim()) throw ShapeError("coordinate vector has wrong length");
    ComplexMatrix c(dim(), dim());
    for (Eigen::Index i = 0; i < dim(); ++i)
      for (Eigen::Index j = 0; j < dim(); ++j) c(i, j) = v(i * dim() + j);
    return from_eigen_coords(c);
  }

  void require_own(const GnsVector& xi, const char* what) const {
    if (xi.context_id != id_)
      throw ContractError(std::string(what) + ": vector belongs to a different GNS context");
    if (xi.mat.rows() != dim() || xi.mat.cols() != dim())
      throw ShapeError(std::string(what) + ": vector has wrong shape");
  }
  void require_own(const AntilinearOp& op, const char* what) const {
    if (op.context_id != id_)
      throw ContractError(std::string(what) + ": operator belongs to a different GNS context");
  }

 private:
  GnsContext(const DensityMatrix& rho, EigenSystem eig) : rho_(rho), eig_(std::move(eig)) {
    const Eigen::Index n = dim();
    id_ = detail::fingerprint(eig_.values, eig_.vectors);
    sqrt_rho_ = rho_power(0.5);
    inv_sqrt_rho_ = rho_power(-0.5);
    omega_ = {sqrt_rho_, id_};
    const RealVector logs = eig_.values.array().log();
    delta_log_ = logs.replicate(1, n) - logs.transpose().replicate(n, 1);
    u_op_ = detail::flip_permutation(n);
    j_ = {ConjugationKind::Eigen, ComplexMatrix::Identity(n * n, n * n), id_, true};
    jm_ = {ConjugationKind::Modular, u_op_, id_, true};
    jc_ = {ConjugationKind::Basis, eig_.vectors * eig_.vectors.transpose(), id_, true};
  }

  DensityMatrix rho_;
  EigenSystem eig_;
  std::uint64_t id_ = 0;
  ComplexMatrix sqrt_rho_;
  ComplexMatrix inv_sqrt_rho_;
  GnsVector omega_;
  Eigen::MatrixXd delta_log_;
  ComplexMatrix u_op_;
  AntilinearOp j_;
  AntilinearOp jm_;
  AntilinearOp jc_;
};

/// GNS triple of a faithful density, in the eigenbasis fixed by herm_eig.
inline GnsContext build_gns(const DensityMatrix& rho, const Tolerances& tol = {}) {
  return GnsContext::from_eigensystem(rho, herm_eig(rho.op()), tol);
}

// ---------------------------------------------------------------------------
// Operators on H_pi

/// pi(a) xi = a mat(xi).
inline GnsVector apply_operator(const GnsContext& ctx, const ComplexMatrix& a,
                                const GnsVector& xi) {
  ctx.require_own(xi, "apply_operator");
  return ctx.vector(a * xi.mat);
}

/// Delta^beta scales the E_ij coordinate by (lambda_i / lambda_j)^beta.
inline GnsVector apply_delta_power(const GnsContext& ctx, double beta, const GnsVector& xi) {
  ComplexMatrix c = ctx.eigen_coords(xi);
  const Eigen::MatrixXd& dl = ctx.delta_log();
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      const double e = beta * dl(i, j);
      if (std::abs(e) > 700.0)
        throw ConditionError("Delta^beta overflows: |beta log(lambda_i/lambda_j)| = " +
                             std::to_string(std::abs(e)));
      c(i, j) *= std::exp(e);
    }
  return ctx.from_eigen_coords(c);
}

/// U E_ij = E_ji.
inline GnsVector apply_u(const GnsContext& ctx, const GnsVector& xi) {
  return ctx.from_eigen_coords(ctx.eigen_coords(xi).transpose());
}

/// Applies J_m or J from their defining formulas; Custom operators use the
/// linear-part representation.
inline GnsVector apply_conjugation(const GnsContext& ctx, const AntilinearOp& op,
                                   const GnsVector& xi) {
  ctx.require_own(op, "apply_conjugation");
  ctx.require_own(xi, "apply_conjugation");
  switch (op.kind) {
    case ConjugationKind::Modular: {
      const ComplexMatrix a = ctx.operator_of(xi);
      return ctx.vector(ctx.sqrt_rho() * a.adjoint());
    }
    case ConjugationKind::Eigen:
      return ctx.from_eigen_coords(ctx.eigen_coords(xi).conjugate());
    case ConjugationKind::Custom:
      return ctx.from_coords(op.linear_part * ctx.coords(xi).conjugate());
    case ConjugationKind::Basis:
      break;
  }
  throw ContractError("apply_conjugation: J_c acts on H, not on the GNS space");
}

/// linear_part * conj(coords(xi)) for any operator on H_pi.
inline GnsVector apply_linear_form(const GnsContext& ctx, const AntilinearOp& op,
                                   const GnsVector& xi) {
  ctx.require_own(op, "apply_linear_form");
  if (op.linear_part.rows() != ctx.dim() * ctx.dim())
    throw ShapeError("apply_linear_form: operator does not act on the GNS space");
  return ctx.from_coords(op.linear_part * ctx.coords(xi).conjugate());
}

/// J_c f = sum_i conj(<x_i, f>) x_i.
inline ComplexVector apply_jc(const GnsContext& ctx, const ComplexVector& f) {
  if (f.size() != ctx.dim()) throw ShapeError("apply_jc: vector has wrong length");
  const ComplexMatrix& x = ctx.eigenvectors();
  return x * (x.adjoint() * f).conjugate();
}

/// a^t = J_c a^* J_c = C a^T conj(C) with C = X X^T the matrix of J_c.
inline ComplexMatrix transpose_operator(const GnsContext& ctx, const ComplexMatrix& a) {
  if (a.rows() != ctx.dim() || a.cols() != ctx.dim())
    throw ShapeError("transpose_operator: operator has wrong shape");
  const ComplexMatrix& c = ctx.jc_op().linear_part;
  return c * a.transpose() * c.conjugate();
}

/// a^t computed as the matrix transpose in eigenbasis coordinates.
inline ComplexMatrix transpose_operator_eigen(const GnsContext& ctx, const ComplexMatrix& a) {
  if (a.rows() != ctx.dim() || a.cols() != ctx.dim())
    throw ShapeError("transpose_operator: operator has wrong shape");
  const ComplexMatrix& x = ctx.eigenvectors();
  return x * (x.adjoint() * a * x).transpose() * x.adjoint();
}

/// tau(a Omega) = a^t Omega.
inline GnsVector apply_tau(const GnsContext& ctx, const GnsVector& xi) {
  return ctx.from_operator(transpose_operator(ctx, ctx.operator_of(xi)));
}

// ---------------------------------------------------------------------------
// Identity verification

struct ModularReport {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  /// Maximum residual per identity, keyed by name.
  std::map<std::string, double> residuals;
  /// ||[pi(a), pi(b)] xi|| maximized over the samples; must be large.
  double negative_control = 0.0;
  double condition_ratio = 1.0;
  bool condition_warning = false;

  double max_residual() const {
    double m = 0.0;
    for (const auto& [k, v] : residuals) m = std::max(m, v);
    return m;
  }
  bool passed(double tol = 1e-10) const { return max_residual() <= tol; }
};

/// Evaluates the identities relating J, J_m, U, Delta, tau and alpha on
/// random unit vectors and unit-norm operators.
inline ModularReport verify_modular_identities(const GnsContext& ctx, std::size_t samples,
                                               std::uint64_t seed) {
  if (samples < 1) throw ContractError("verify_modular_identities: samples must be >= 1");
  ModularReport rep;
  rep.samples = samples;
  rep.seed = seed;
  rep.condition_ratio = ctx.condition_ratio();
  rep.condition_warning = ctx.ill_conditioned();
  auto& r = rep.residuals;
  auto track = [&r](const char* key, double v) { r[key] = std::max(r[key], v); };
  for (const char* key :
       {"u_squared", "u_selfadjoint", "j_equals_u_jm", "j_jm_commute", "j_u_commute",
        "jm_u_commute", "j_involution", "jm_involution", "delta_half_j_commute",
        "u_delta_flip", "u_delta_power_flip", "alpha_commutant", "polar", "transposition",
        "linear_form", "omega_fixed", "state"})
    r[key] = 0.0;

  const Eigen::Index n = ctx.dim();
  const GnsVector& om = ctx.omega();
  track("omega_fixed", distance(apply_conjugation(ctx, ctx.j_op(), om), om));
  track("omega_fixed", distance(apply_conjugation(ctx, ctx.jm_op(), om), om));
  track("omega_fixed", distance(apply_u(ctx, om), om));
  track("omega_fixed", distance(apply_delta_power(ctx, 1.0, om), om));

  SplitMix64 rng(seed);
  const auto& J = ctx.j_op();
  const auto& Jm = ctx.jm_op();
  for (std::size_t s = 0; s < samples; ++s) {
    const GnsVector xi = ctx.vector(random::generic(n, n, rng));
    const GnsVector eta = ctx.vector(random::generic(n, n, rng));
    const ComplexMatrix a = random::generic(n, n, rng);
    const ComplexMatrix b = random::generic(n, n, rng);

    const GnsVector u_xi = apply_u(ctx, xi);
    const GnsVector j_xi = apply_conjugation(ctx, J, xi);
    const GnsVector jm_xi = apply_conjugation(ctx, Jm, xi);

    track("u_squared", distance(apply_u(ctx, u_xi), xi));
    track("u_selfadjoint", std::abs(inner(xi, apply_u(ctx, eta)) - inner(u_xi, eta)));
    track("j_equals_u_jm", distance(j_xi, apply_u(ctx, jm_xi)));
    track("j_jm_commute",
          distance(apply_conjugation(ctx, J, jm_xi), apply_conjugation(ctx, Jm, j_xi)));
    track("j_u_commute", distance(apply_conjugation(ctx, J, u_xi), apply_u(ctx, j_xi)));
    track("jm_u_commute", distance(apply_conjugation(ctx, Jm, u_xi), apply_u(ctx, jm_xi)));
    track("j_involution", distance(apply_conjugation(ctx, J, j_xi), xi));
    track("jm_involution", distance(apply_conjugation(ctx, Jm, jm_xi), xi));
    track("linear_form", distance(apply_linear_form(ctx, J, xi), j_xi));
    track("linear_form", distance(apply_linear_form(ctx, Jm, xi), jm_xi));
    track("delta_half_j_commute",
          distance(apply_delta_power(ctx, 0.5, j_xi),
                   apply_conjugation(ctx, J, apply_delta_power(ctx, 0.5, xi))));
    track("u_delta_flip", distance(apply_u(ctx, apply_delta_power(ctx, 1.0, xi)),
                                   apply_delta_power(ctx, -1.0, u_xi)));
    for (double beta : {0.25, 0.5})
      track("u_delta_power_flip", distance(apply_u(ctx, apply_delta_power(ctx, beta, xi)),
                                           apply_delta_power(ctx, -beta, u_xi)));

    // alpha(pi(a)) = U pi(a) U commutes with pi(b).
    auto alpha_a = [&](const GnsVector& v) {
      return apply_u(ctx, apply_operator(ctx, a, apply_u(ctx, v)));
    };
    track("alpha_commutant", distance(alpha_a(apply_operator(ctx, b, xi)),
                                      apply_operator(ctx, b, alpha_a(xi))));
    rep.negative_control = std::max(
        rep.negative_control,
        distance(apply_operator(ctx, a, apply_operator(ctx, b, xi)),
                 apply_operator(ctx, b, apply_operator(ctx, a, xi))));

    const GnsVector a_om = ctx.from_operator(a);
    track("polar", distance(apply_tau(ctx, a_om),
                            apply_u(ctx, apply_delta_power(ctx, 0.5, a_om))));
    const GnsVector jajx = apply_conjugation(
        ctx, J, apply_operator(ctx, a.adjoint(), j_xi));
    track("transposition",
          distance(apply_operator(ctx, transpose_operator(ctx, a), xi), jajx));
    track("transposition", (transpose_operator(ctx, a) - transpose_operator_eigen(ctx, a))
                               .cwiseAbs()
                               .maxCoeff());
    track("state", std::abs(inner(om, apply_operator(ctx, a, om)) -
                            (ctx.rho().matrix() * a).trace()));
  }
  return rep;
}

}  // namespace modular_ppt
