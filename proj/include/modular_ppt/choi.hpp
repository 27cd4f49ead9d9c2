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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "modular_ppt/linalg.hpp"
#include "modular_ppt/ppt_optim.hpp"
#include "modular_ppt/random.hpp"

namespace modular_ppt {

/// Block form {B_ij = V_i^* H V_j = S_H(E_ij)} of the map S_H : M_n -> M_m
/// attached to an operator H on C^n (x) C^m, with V_x y = x (x) y.
class MapTable {
 public:
  MapTable(std::size_t dim_in, std::size_t dim_out, std::vector<ComplexMatrix> blocks)
      : n_(dim_in), m_(dim_out), blocks_(std::move(blocks)) {
    if (n_ < 1 || m_ < 1) throw ShapeError("map table dimensions must be positive");
    if (blocks_.size() != n_ * n_)
      throw ShapeError("map table needs " + std::to_string(n_ * n_) + " blocks, got " +
                       std::to_string(blocks_.size()));
    for (const auto& b : blocks_)
      if (b.rows() != static_cast<Eigen::Index>(m_) || b.cols() != static_cast<Eigen::Index>(m_))
        throw ShapeError("map table block has inconsistent dimensions");
  }

  std::size_t dim_in() const { return n_; }
  std::size_t dim_out() const { return m_; }
  const ComplexMatrix& block(std::size_t i, std::size_t j) const { return blocks_[i * n_ + j]; }
  const std::vector<ComplexMatrix>& blocks() const { return blocks_; }
  BipartiteShape shape() const { return {n_, m_}; }

  /// B_ji = B_ij^dagger for all i, j.
  bool hermiticity_preserving(double tol = Tolerances{}.herm) const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if ((block(j, i) - block(i, j).adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    return true;
  }

 private:
  std::size_t n_;
  std::size_t m_;
  std::vector<ComplexMatrix> blocks_;
};

/// B_ij[k][l] = h[(i m + k), (j m + l)].
inline MapTable map_from_choi(const ComplexMatrix& h, const BipartiteShape& shape) {
  require_bipartite(h, shape, "map_from_choi");
  const auto n = static_cast<Eigen::Index>(shape.dim_a);
  const auto m = static_cast<Eigen::Index>(shape.dim_b);
  std::vector<ComplexMatrix> blocks;
  blocks.reserve(shape.dim_a * shape.dim_a);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) blocks.emplace_back(h.block(i * m, j * m, m, m));
  return MapTable(shape.dim_a, shape.dim_b, std::move(blocks));
}

inline MapTable map_from_choi(const HermitianOperator& h, const BipartiteShape& shape) {
  return map_from_choi(h.matrix(), shape);
}

/// H = sum_ij E_ij (x) B_ij, for any table.
inline ComplexMatrix choi_matrix(const MapTable& t) {
  const auto n = static_cast<Eigen::Index>(t.dim_in());
  const auto m = static_cast<Eigen::Index>(t.dim_out());
  ComplexMatrix h(n * m, n * m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      h.block(i * m, j * m, m, m) =
          t.block(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return h;
}

/// The Choi operator of a Hermiticity-preserving map.
inline HermitianOperator choi_from_map(const MapTable& t) {
  return HermitianOperator(choi_matrix(t));
}

/// S(a) = sum_ij a_ij B_ij.
inline ComplexMatrix apply_map(const MapTable& t, const ComplexMatrix& a) {
  const auto n = static_cast<Eigen::Index>(t.dim_in());
  if (a.rows() != n || a.cols() != n)
    throw ShapeError("apply_map: input must be " + std::to_string(n) + "x" + std::to_string(n));
  const auto m = static_cast<Eigen::Index>(t.dim_out());
  ComplexMatrix out = ComplexMatrix::Zero(m, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out += a(i, j) * t.block(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return out;
}

inline MapTable identity_map(std::size_t n) {
  std::vector<ComplexMatrix> blocks;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      blocks.push_back(matrix_unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i),
                                   static_cast<Eigen::Index>(j)));
  return MapTable(n, n, std::move(blocks));
}

inline MapTable transposition_map(std::size_t n) {
  std::vector<ComplexMatrix> blocks;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      blocks.push_back(matrix_unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j),
                                   static_cast<Eigen::Index>(i)));
  return MapTable(n, n, std::move(blocks));
}

/// (id_k (x) S)(A) for A on C^k (x) C^n: block (i, j) becomes S(A_ij).
inline ComplexMatrix apply_id_tensor_map(const MapTable& t, const ComplexMatrix& a,
                                         std::size_t k) {
  const auto n = static_cast<Eigen::Index>(t.dim_in());
  const auto m = static_cast<Eigen::Index>(t.dim_out());
  const auto kk = static_cast<Eigen::Index>(k);
  if (a.rows() != kk * n || a.cols() != kk * n)
    throw ShapeError("apply_id_tensor_map: input has wrong dimension");
  ComplexMatrix out(kk * m, kk * m);
  for (Eigen::Index i = 0; i < kk; ++i)
    for (Eigen::Index j = 0; j < kk; ++j)
      out.block(i * m, j * m, m, m) = apply_map(t, a.block(i * n, j * n, n, n));
  return out;
}

// ---------------------------------------------------------------------------
// Decomposable maps

/// h = h1 + h2^{Gamma_A} with h1, h2 PSD: the Choi operator of a
/// decomposable map.
struct DecomposableWitness {
  HermitianOperator h1;
  HermitianOperator h2;
  HermitianOperator h;
  BipartiteShape shape;
};

inline DecomposableWitness make_decomposable(const ComplexMatrix& h1, const ComplexMatrix& h2,
                                             const BipartiteShape& shape,
                                             double tol = Tolerances{}.psd) {
  require_bipartite(h1, shape, "make_decomposable");
  require_bipartite(h2, shape, "make_decomposable");
  HermitianOperator o1(h1), o2(h2);
  if (!psd_check(o1, tol).is_psd || !psd_check(o2, tol).is_psd)
    throw ContractError("decomposable witness parts must be PSD");
  HermitianOperator h = HermitianOperator::symmetrized(
      h1 + partial_transpose(h2, shape, Subsystem::A));
  return {std::move(o1), std::move(o2), std::move(h), shape};
}

/// h1, h2 = G^dagger G for complex Gaussian G, each of unit trace.
inline DecomposableWitness random_decomposable(const BipartiteShape& shape, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(shape.total());
  SplitMix64 rng(seed);
  const ComplexMatrix h1 = random::psd(n, rng);
  const ComplexMatrix h2 = random::psd(n, rng);
  return make_decomposable(h1, h2, shape);
}

struct DualPairingReport {
  std::size_t samples = 0;
  double min_sampled = std::numeric_limits<double>::infinity();
  std::optional<double> optimizer_value;
  bool optimizer_low_confidence = false;
  double min_value = std::numeric_limits<double>::infinity();
  /// A pairing below -tol at an exactly feasible PPT state proves h is not
  /// in the dual of the PPT states, so S_h is not decomposable.
  bool certified_negative = false;
};

/// min Tr(D h) over sampled PPT densities D and, when requested, over the
/// minimizer of min_trace_over_ppt.
inline DualPairingReport dual_pairing_test(const HermitianOperator& h,
                                           const BipartiteShape& shape, std::size_t samples,
                                           std::uint64_t seed, bool optimizer,
                                           const MinimizeOptions& opt = {},
                                           double tol = 1e-8) {
  require_bipartite(h.matrix(), shape, "dual_pairing_test");
  DualPairingReport rep;
  rep.samples = samples;
  SplitMix64 rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const DensityMatrix d = sample_ppt_density(shape, rng);
    rep.min_sampled = std::min(rep.min_sampled, (d.matrix() * h.matrix()).trace().real());
  }
  rep.min_value = rep.min_sampled;
  if (optimizer) {
    const MinTraceResult r = min_trace_over_ppt(h, PptSetSpec{shape}, opt, derive_seed(seed, 1));
    rep.optimizer_value = r.value;
    rep.optimizer_low_confidence = r.trace.low_confidence;
    rep.min_value = std::min(rep.min_value, r.value);
  }
  rep.certified_negative = rep.min_value < -tol;
  return rep;
}

struct StormerReport {
  std::size_t k = 0;
  std::size_t samples = 0;
  double min_output_eig = std::numeric_limits<double>::infinity();
  /// Smallest eigenvalues of the sampled inputs A and A^Gamma.
  double min_input_eig = std::numeric_limits<double>::infinity();
  double min_input_gamma_eig = std::numeric_limits<double>::infinity();
};

/// Smallest eigenvalue of (id_k (x) S)(A) over sampled A on C^k (x) C^n with
/// A >= 0 and A^Gamma >= 0.
/// Block test on given PPT inputs A on C^k (x) C^{dim_in}.
inline StormerReport stormer_block_test(const MapTable& t, std::size_t k,
                                        const std::vector<DensityMatrix>& inputs) {
  if (k < 1) throw ContractError("stormer_block_test: k must be >= 1");
  StormerReport rep;
  rep.k = k;
  rep.samples = inputs.size();
  const BipartiteShape shape{k, t.dim_in()};
  for (const DensityMatrix& a : inputs) {
    require_bipartite(a.matrix(), shape, "stormer_block_test");
    rep.min_input_eig = std::min(rep.min_input_eig, a.min_eigenvalue());
    rep.min_input_gamma_eig = std::min(
        rep.min_input_gamma_eig,
        detail::min_eigenvalue(partial_transpose(a.matrix(), shape, Subsystem::A)));
    rep.min_output_eig = std::min(
        rep.min_output_eig, detail::min_eigenvalue(apply_id_tensor_map(t, a.matrix(), k)));
  }
  return rep;
}

/// PPT inputs for the block test, sampled by projection.
inline std::vector<DensityMatrix> sample_block_inputs(std::size_t k, std::size_t dim_in,
                                                     std::size_t samples, std::uint64_t seed) {
  if (k < 1) throw ContractError("stormer_block_test: k must be >= 1");
  SplitMix64 rng(seed);
  std::vector<DensityMatrix> inputs;
  inputs.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) inputs.push_back(sample_ppt_density({k, dim_in}, rng));
  return inputs;
}

inline StormerReport stormer_block_test(const MapTable& t, std::size_t k, std::size_t samples,
                                        std::uint64_t seed) {
  return stormer_block_test(t, k, sample_block_inputs(k, t.dim_in(), samples, seed));
}

// ---------------------------------------------------------------------------
// The functional psi of a PPT operator

struct PptFunctionalReport {
  std::size_t samples = 0;
  double psi_min_eig = 0.0;
  double psi_gamma_min_eig = 0.0;
  /// min psi(C) and min psi(C^{Gamma_A}) over sampled PSD C.
  double min_functional = std::numeric_limits<double>::infinity();
  double min_functional_transposed = std::numeric_limits<double>::infinity();
  /// max |Tr(Psi C) - kernel sum| over the samples.
  double kernel_residual = 0.0;
  bool passed(double tol = 1e-9) const {
    return min_functional >= -tol && min_functional_transposed >= -tol;
  }
};

/// psi(C) = sum_{i,j,p,r} <h_i (x) e_p, A h_j (x) e_r> <e_p (x) x_i, C e_r (x) x_j>
/// on B(H (x) K), dim H = n, dim K = m. With alpha the kernel matrix indexed
/// (i, p) and W the columns e_p (x) x_i, psi(C) = Tr(Psi C) for
/// Psi = W conj(alpha) W^dagger.
inline ComplexMatrix ppt_functional_kernel(const ComplexMatrix& a, std::size_t k, std::size_t n,
                                     const std::vector<ComplexVector>& xs,
                                     const std::vector<ComplexVector>& hs) {
  const auto kk = static_cast<Eigen::Index>(k);
  const auto nn = static_cast<Eigen::Index>(n);
  if (a.rows() != kk * nn || a.cols() != kk * nn)
    throw ShapeError("ppt_functional: A must act on C^k (x) C^n");
  if (xs.size() != k || hs.size() != k)
    throw ShapeError("ppt_functional: need k vectors x_i and k vectors h_i");
  const Eigen::Index m = xs.front().size();
  for (std::size_t i = 0; i < k; ++i)
    if (xs[i].size() != m || hs[i].size() != kk)
      throw ShapeError("ppt_functional: vector length mismatch");
  ComplexMatrix hcols(kk * nn, kk * nn);
  ComplexMatrix w(nn * m, kk * nn);
  for (Eigen::Index i = 0; i < kk; ++i)
    for (Eigen::Index p = 0; p < nn; ++p) {
      ComplexVector e = ComplexVector::Zero(nn);
      e(p) = 1.0;
      hcols.col(i * nn + p) = kron(ComplexMatrix(hs[static_cast<std::size_t>(i)]), ComplexMatrix(e));
      w.col(i * nn + p) = kron(ComplexMatrix(e), ComplexMatrix(xs[static_cast<std::size_t>(i)]));
    }
  const ComplexMatrix alpha = hcols.adjoint() * a * hcols;
  return hermitian_part(w * alpha.conjugate() * w.adjoint());
}

/// The kernel sum evaluated term by term.
inline Complex ppt_functional_direct(const ComplexMatrix& a, std::size_t k, std::size_t n,
                               const std::vector<ComplexVector>& xs,
                               const std::vector<ComplexVector>& hs, const ComplexMatrix& c) {
  const auto kk = static_cast<Eigen::Index>(k);
  const auto nn = static_cast<Eigen::Index>(n);
  Complex sum = 0.0;
  auto basis = [nn](Eigen::Index p) {
    ComplexVector e = ComplexVector::Zero(nn);
    e(p) = 1.0;
    return e;
  };
  for (Eigen::Index i = 0; i < kk; ++i)
    for (Eigen::Index j = 0; j < kk; ++j)
      for (Eigen::Index p = 0; p < nn; ++p)
        for (Eigen::Index r = 0; r < nn; ++r) {
          const auto& hi = hs[static_cast<std::size_t>(i)];
          const auto& hj = hs[static_cast<std::size_t>(j)];
          const auto& xi = xs[static_cast<std::size_t>(i)];
          const auto& xj = xs[static_cast<std::size_t>(j)];
          const ComplexMatrix l = kron(ComplexMatrix(hi), ComplexMatrix(basis(p)));
          const ComplexMatrix rr = kron(ComplexMatrix(hj), ComplexMatrix(basis(r)));
          const ComplexMatrix cl = kron(ComplexMatrix(basis(p)), ComplexMatrix(xi));
          const ComplexMatrix cr = kron(ComplexMatrix(basis(r)), ComplexMatrix(xj));
          sum += (l.adjoint() * a * rr)(0, 0) * (cl.adjoint() * c * cr)(0, 0);
        }
  return sum;
}

/// Builds Psi and checks psi and psi o (tau_H (x) id) on sampled PSD C.
inline std::pair<HermitianOperator, PptFunctionalReport> ppt_functional(
    const HermitianOperator& a, std::size_t k, std::size_t n,
    const std::vector<ComplexVector>& xs, const std::vector<ComplexVector>& hs,
    std::size_t samples = 100, std::uint64_t seed = 0, double tol = 1e-9) {
  const BipartiteShape split{k, n};
  require_bipartite(a.matrix(), split, "ppt_functional");
  const double lo = detail::min_eigenvalue(a.matrix());
  const double lo_gamma =
      detail::min_eigenvalue(partial_transpose(a.matrix(), split, Subsystem::A));
  if (lo < -tol || lo_gamma < -tol)
    throw ContractError("ppt_functional: A and its partial transpose must be PSD (min eigs " +
                        std::to_string(lo) + ", " + std::to_string(lo_gamma) + ")");
  const ComplexMatrix psi = ppt_functional_kernel(a.matrix(), k, n, xs, hs);
  const BipartiteShape hk{n, static_cast<std::size_t>(xs.front().size())};
  PptFunctionalReport rep;
  rep.samples = samples;
  rep.psi_min_eig = detail::min_eigenvalue(psi);
  rep.psi_gamma_min_eig = detail::min_eigenvalue(partial_transpose(psi, hk, Subsystem::A));
  SplitMix64 rng(seed);
  const Eigen::Index dim = psi.rows();
  for (std::size_t s = 0; s < samples; ++s) {
    const ComplexMatrix c =
        s % 2 ? random::psd(dim, rng) : random::pure_state(dim, rng);
    const Complex val = (psi * c).trace();
    const ComplexMatrix ct = partial_transpose(c, hk, Subsystem::A);
    const Complex val_t = (psi * ct).trace();
    rep.kernel_residual = std::max(
        {rep.kernel_residual, std::abs(val - ppt_functional_direct(a.matrix(), k, n, xs, hs, c)),
         std::abs(val_t - ppt_functional_direct(a.matrix(), k, n, xs, hs, ct))});
    rep.min_functional = std::min(rep.min_functional, val.real());
    rep.min_functional_transposed = std::min(rep.min_functional_transposed, val_t.real());
  }
  return {HermitianOperator::symmetrized(psi), rep};
}

// ---------------------------------------------------------------------------
// Inclusions among map classes and state classes

struct HierarchyReport {
  BipartiteShape shape;
  std::uint64_t seed = 0;
  /// (a) Choi operator of the transposition: min eigenvalue -1.
  double transposition_choi_min_eig = 0.0;
  bool transposition_not_cp = false;
  /// (b) Random CP maps under the block test.
  std::size_t cp_maps = 0;
  double cp_stormer_min_eig = std::numeric_limits<double>::infinity();
  bool cp_decomposable = false;
  /// (c) Random separable densities are PPT.
  std::size_t separable_samples = 0;
  double separable_min_gamma_eig = std::numeric_limits<double>::infinity();
  bool separable_ppt = false;
  /// (d) The singlet is not PPT.
  double singlet_min_gamma_eig = 0.0;
  bool singlet_npt = false;
  bool passed() const {
    return transposition_not_cp && cp_decomposable && separable_ppt && singlet_npt;
  }
};

inline HierarchyReport hierarchy_report(const BipartiteShape& shape, std::uint64_t seed,
                                        double tol = 1e-8) {
  if (shape.dim_a < 2 || shape.dim_b < 2)
    throw ContractError("hierarchy_report: both factors need dimension >= 2");
  HierarchyReport rep;
  rep.shape = shape;
  rep.seed = seed;
  const auto na = static_cast<Eigen::Index>(shape.dim_a);
  const auto nb = static_cast<Eigen::Index>(shape.dim_b);
  SplitMix64 rng(seed);

  rep.transposition_choi_min_eig =
      detail::min_eigenvalue(choi_matrix(transposition_map(shape.dim_a)));
  rep.transposition_not_cp = rep.transposition_choi_min_eig < -tol;

  rep.cp_maps = 5;
  for (std::size_t s = 0; s < rep.cp_maps; ++s) {
    const MapTable t = map_from_choi(random::psd(na * nb, rng), shape);
    const StormerReport st = stormer_block_test(t, 2, 20, rng.next());
    rep.cp_stormer_min_eig = std::min(rep.cp_stormer_min_eig, st.min_output_eig);
  }
  rep.cp_decomposable = rep.cp_stormer_min_eig >= -tol;

  rep.separable_samples = 200;
  for (std::size_t s = 0; s < rep.separable_samples; ++s) {
    ComplexMatrix d = ComplexMatrix::Zero(na * nb, na * nb);
    double total = 0.0;
    for (int t = 0; t < 10; ++t) {
      const double w = rng.uniform();
      total += w;
      d += w * kron(random::psd(na, rng), random::psd(nb, rng));
    }
    d /= total;
    rep.separable_min_gamma_eig =
        std::min(rep.separable_min_gamma_eig,
                 detail::min_eigenvalue(partial_transpose(d, shape, Subsystem::B)));
  }
  rep.separable_ppt = rep.separable_min_gamma_eig >= -tol;

  ComplexVector singlet = ComplexVector::Zero(na * nb);
  singlet(shape.index(0, 1)) = 1.0 / std::sqrt(2.0);
  singlet(shape.index(1, 0)) = -1.0 / std::sqrt(2.0);
  rep.singlet_min_gamma_eig = detail::min_eigenvalue(
      partial_transpose(singlet * singlet.adjoint(), shape, Subsystem::B));
  rep.singlet_npt = rep.singlet_min_gamma_eig < -tol;
  return rep;
}

}  // namespace modular_ppt
