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
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "modular_ppt/errors.hpp"

namespace modular_ppt {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Contract tolerances shared by every module.
struct Tolerances {
  double herm = 1e-10;
  double psd = 1e-10;
  double trace = 1e-10;
  double faithful = 1e-12;
  double reconstruction = 1e-9;
};

inline constexpr std::size_t kDefaultMaxDimension = 4096;

/// Largest composite dimension accepted; MODULAR_PPT_MAX_DIM overrides it.
inline std::size_t max_dimension() {
  if (const char* env = std::getenv("MODULAR_PPT_MAX_DIM")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultMaxDimension;
}

inline void check_dimension(std::size_t dim, const char* what) {
  if (dim > max_dimension())
    throw DimensionError(std::string(what) + ": dimension " +
                         std::to_string(dim) + " exceeds maximum " +
                         std::to_string(max_dimension()));
}

/// Dimensions of H (dim_a) and K (dim_b). Basis vector e_i (x) f_j sits at
/// index i * dim_b + j.
struct BipartiteShape {
  std::size_t dim_a = 0;
  std::size_t dim_b = 0;

  std::size_t total() const { return dim_a * dim_b; }
  std::size_t index(std::size_t i, std::size_t j) const { return i * dim_b + j; }
  BipartiteShape swapped() const { return {dim_b, dim_a}; }
  friend bool operator==(const BipartiteShape&, const BipartiteShape&) = default;
};

enum class Subsystem { A, B };

inline std::string to_string(const BipartiteShape& s) {
  return std::to_string(s.dim_a) + "x" + std::to_string(s.dim_b);
}

inline bool all_finite(const ComplexMatrix& m) {
  return m.array().real().allFinite() && m.array().imag().allFinite();
}

/// max_ij |m_ij - conj(m_ji)|.
inline double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return (m + m.adjoint()) / 2.0;
}

/// E_ij in M_n.
inline ComplexMatrix matrix_unit(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  ComplexMatrix e = ComplexMatrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

/// Dense square complex matrix with the Hermiticity invariant.
class HermitianOperator {
 public:
  explicit HermitianOperator(ComplexMatrix m, double tol_herm = Tolerances{}.herm)
      : m_(std::move(m)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols())
      throw ShapeError("hermitian operator must be square and non-empty, got " +
                       std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
    if (!all_finite(m_)) throw ContractError("hermitian operator has non-finite entries");
    const double defect = hermiticity_defect(m_);
    if (defect > tol_herm)
      throw ContractError("operator is not Hermitian: defect " +
                          std::to_string(defect));
  }

  /// (m + m^dagger) / 2; never throws on Hermiticity.
  static HermitianOperator symmetrized(const ComplexMatrix& m) {
    return HermitianOperator(hermitian_part(m), std::numeric_limits<double>::infinity());
  }

  const ComplexMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  ComplexMatrix m_;
};

namespace detail {

inline RealVector eigenvalues_ascending(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(m),
                                                  Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double min_eigenvalue(const ComplexMatrix& m) {
  return eigenvalues_ascending(m)(0);
}

}  // namespace detail

/// Positive semidefinite, unit-trace Hermitian operator.
class DensityMatrix {
 public:
  explicit DensityMatrix(HermitianOperator h, const Tolerances& tol = {})
      : h_(std::move(h)) {
    min_eig_ = detail::min_eigenvalue(h_.matrix());
    if (min_eig_ < -tol.psd)
      throw ContractError("density matrix is not positive: min eigenvalue " +
                          std::to_string(min_eig_));
    const double tr = h_.matrix().trace().real();
    if (std::abs(tr - 1.0) > tol.trace)
      throw ContractError("density matrix trace residual " +
                          std::to_string(tr - 1.0));
    faithful_ = min_eig_ >= tol.faithful;
  }

  static DensityMatrix from_matrix(const ComplexMatrix& m, const Tolerances& tol = {}) {
    return DensityMatrix(HermitianOperator(m, tol.herm), tol);
  }

  const HermitianOperator& op() const { return h_; }
  const ComplexMatrix& matrix() const { return h_.matrix(); }
  Eigen::Index dim() const { return h_.dim(); }
  double min_eigenvalue() const { return min_eig_; }
  bool faithful() const { return faithful_; }

 private:
  HermitianOperator h_;
  double min_eig_ = 0.0;
  bool faithful_ = false;
};

// ---------------------------------------------------------------------------
// Tensor structure

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  check_dimension(static_cast<std::size_t>(a.rows() * b.rows()), "kron rows");
  check_dimension(static_cast<std::size_t>(a.cols() * b.cols()), "kron cols");
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline RealVector kron_values(const RealVector& a, const RealVector& b) {
  RealVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline void require_bipartite(const ComplexMatrix& m, const BipartiteShape& s,
                              const char* what) {
  const auto n = static_cast<Eigen::Index>(s.total());
  if (s.dim_a == 0 || s.dim_b == 0 || m.rows() != n || m.cols() != n)
    throw ShapeError(std::string(what) + ": expected " + std::to_string(n) + "x" +
                     std::to_string(n) + " for shape " + to_string(s) + ", got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

/// id (x) transpose (subsystem B) or transpose (x) id (subsystem A) in the
/// fixed product basis.
inline ComplexMatrix partial_transpose(const ComplexMatrix& m, const BipartiteShape& s,
                                       Subsystem sys) {
  require_bipartite(m, s, "partial_transpose");
  const auto na = static_cast<Eigen::Index>(s.dim_a);
  const auto nb = static_cast<Eigen::Index>(s.dim_b);
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < na; ++j) {
      if (sys == Subsystem::B)
        out.block(i * nb, j * nb, nb, nb) = m.block(i * nb, j * nb, nb, nb).transpose();
      else
        out.block(i * nb, j * nb, nb, nb) = m.block(j * nb, i * nb, nb, nb);
    }
  return out;
}

inline ComplexMatrix partial_trace(const ComplexMatrix& m, const BipartiteShape& s,
                                   Subsystem keep) {
  require_bipartite(m, s, "partial_trace");
  const auto na = static_cast<Eigen::Index>(s.dim_a);
  const auto nb = static_cast<Eigen::Index>(s.dim_b);
  if (keep == Subsystem::A) {
    ComplexMatrix out(na, na);
    for (Eigen::Index i = 0; i < na; ++i)
      for (Eigen::Index j = 0; j < na; ++j)
        out(i, j) = m.block(i * nb, j * nb, nb, nb).trace();
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(nb, nb);
  for (Eigen::Index i = 0; i < na; ++i) out += m.block(i * nb, i * nb, nb, nb);
  return out;
}

// ---------------------------------------------------------------------------
// Spectral routines

struct EigenSystem {
  RealVector values;     // descending
  ComplexMatrix vectors;  // orthonormal columns
};

namespace detail {

inline constexpr double kDegeneracyGap = 1e-9;
inline constexpr double kPhaseTie = 1e-12;

/// Rotates v so that its largest-magnitude entry (lowest index on ties) is
/// real and positive.
inline void fix_phase(Eigen::Ref<ComplexVector> v) {
  Eigen::Index best = 0;
  double best_abs = std::abs(v(0));
  for (Eigen::Index k = 1; k < v.size(); ++k) {
    const double a = std::abs(v(k));
    if (a > best_abs + kPhaseTie) {
      best = k;
      best_abs = a;
    }
  }
  if (best_abs == 0.0) return;
  v *= std::conj(v(best)) / best_abs;
  v(best) = best_abs;
}

/// Replaces the columns of `cluster` by the Gram-Schmidt orthonormalization
/// of the projections of e_0, e_1, ... onto their span.
inline void canonicalize_cluster(Eigen::Ref<ComplexMatrix> cluster) {
  const Eigen::Index n = cluster.rows();
  const Eigen::Index k = cluster.cols();
  const ComplexMatrix basis = cluster;
  // Any residual above 1/(2 sqrt n) is accepted; completion is guaranteed
  // because the projected unit vectors carry total weight k.
  const double accept = 0.5 / std::sqrt(static_cast<double>(n));
  Eigen::Index found = 0;
  for (Eigen::Index i = 0; i < n && found < k; ++i) {
    ComplexVector r = basis * basis.row(i).adjoint();
    for (Eigen::Index q = 0; q < found; ++q)
      r -= cluster.col(q) * cluster.col(q).dot(r);
    // second pass for numerical orthogonality
    for (Eigen::Index q = 0; q < found; ++q)
      r -= cluster.col(q) * cluster.col(q).dot(r);
    const double nr = r.norm();
    if (nr > accept) cluster.col(found++) = r / nr;
  }
}

}  // namespace detail

/// Eigendecomposition with descending eigenvalues and a deterministic basis:
/// degenerate clusters are spanned by Gram-Schmidt-orthonormalized canonical
/// vectors, and each vector's largest entry is real positive.
inline EigenSystem herm_eig(const HermitianOperator& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m.matrix());
  if (es.info() != Eigen::Success) throw ContractError("eigensolver failed");
  const Eigen::Index n = m.dim();
  EigenSystem out{es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse()};
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && out.values(end - 1) - out.values(end) < detail::kDegeneracyGap) ++end;
    if (end - start > 1) detail::canonicalize_cluster(out.vectors.middleCols(start, end - start));
    start = end;
  }
  for (Eigen::Index k = 0; k < n; ++k) detail::fix_phase(out.vectors.col(k));
  return out;
}

struct PsdVerdict {
  bool is_psd = false;
  double min_eig = 0.0;
};

inline PsdVerdict psd_check(const HermitianOperator& m, double tol = Tolerances{}.psd) {
  const double lo = detail::min_eigenvalue(m.matrix());
  return {lo >= -tol, lo};
}

/// Principal square root of a PSD operator; eigenvalues in [-tol, 0) are
/// clamped to zero.
inline HermitianOperator mat_sqrt_psd(const HermitianOperator& m,
                                      double tol = Tolerances{}.psd) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m.matrix());
  const RealVector& w = es.eigenvalues();
  if (w(0) < -tol)
    throw ContractError("matrix square root of a non-PSD operator: min eigenvalue " +
                        std::to_string(w(0)));
  const RealVector root = w.cwiseMax(0.0).cwiseSqrt();
  const ComplexMatrix& v = es.eigenvectors();
  return HermitianOperator::symmetrized(v * root.asDiagonal() * v.adjoint());
}

/// Positivity by recursive elimination of the last block row and column:
/// [r_ij] >= 0 iff r_nn >= 0 and [r_ij - r_in r_nn^{-1} r_nj] >= 0. A pivot
/// block with smallest eigenvalue below eps is shifted by eps * I first.
/// Block verdicts use tolerance 10 * eps.
inline bool schur_positivity(const HermitianOperator& m, std::size_t block_dim,
                             double eps = 1e-8) {
  const auto b = static_cast<Eigen::Index>(block_dim);
  if (b < 1 || m.dim() % b != 0)
    throw ShapeError("schur_positivity: dimension " + std::to_string(m.dim()) +
                     " is not a multiple of block size " + std::to_string(block_dim));
  const double tol = 10.0 * eps;
  ComplexMatrix cur = m.matrix();
  while (true) {
    const Eigen::Index n = cur.rows() / b;
    const Eigen::Index head = (n - 1) * b;
    ComplexMatrix pivot = cur.block(head, head, b, b);
    const double lo = detail::min_eigenvalue(pivot);
    if (lo < -tol) return false;
    if (n == 1) return true;
    if (lo < eps) pivot.diagonal().array() += eps;
    const ComplexMatrix col = cur.block(0, head, head, b);
    const ComplexMatrix solved = hermitian_part(pivot).ldlt().solve(col.adjoint());
    ComplexMatrix next = cur.topLeftCorner(head, head) - col * solved;
    cur = hermitian_part(next);
  }
}

}  // namespace modular_ppt
