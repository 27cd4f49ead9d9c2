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
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "modular_ppt/linalg.hpp"
#include "modular_ppt/random.hpp"

namespace modular_ppt {

/// The spectrahedron {D : D >= 0, D^Gamma >= 0, Tr D = trace_target}.
struct PptSetSpec {
  BipartiteShape shape;
  double trace_target = 1.0;
  double tol_feas = 1e-8;
  std::size_t max_iters = 5000;
  /// Stop once feasible and the distance to the input moved less than
  /// stall_tol over the last stall_window sweeps.
  double stall_tol = 1e-10;
  std::size_t stall_window = 50;
  /// Stop once feasible and a whole sweep moved the iterate less than this.
  double step_tol = 1e-12;
};

struct SolveTrace {
  std::size_t iterates = 0;
  std::vector<double> objective_history;
  double feasibility_residual = std::numeric_limits<double>::infinity();
  std::string step_rule;
  bool converged = false;
  bool low_confidence = false;
  double restart_spread = 0.0;
};

namespace detail {

/// Also stores the smallest clamped eigenvalue in *min_clamped when given.
inline ComplexMatrix project_psd_matrix(const ComplexMatrix& m, double* min_clamped = nullptr) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(m));
  const RealVector w = es.eigenvalues().cwiseMax(0.0);
  if (min_clamped) *min_clamped = w.minCoeff();
  const ComplexMatrix& v = es.eigenvectors();
  return hermitian_part(v * w.asDiagonal() * v.adjoint());
}

inline void shift_trace(ComplexMatrix& m, double target) {
  const double n = static_cast<double>(m.rows());
  m.diagonal().array() += (target - m.trace().real()) / n;
}

}  // namespace detail

/// Frobenius-nearest PSD matrix: negative eigenvalues clamped to zero.
inline HermitianOperator project_psd(const HermitianOperator& m) {
  return HermitianOperator::symmetrized(detail::project_psd_matrix(m.matrix()));
}

/// max(-lambda_min(D), -lambda_min(D^Gamma), |Tr D - target|), floored at 0.
inline double ppt_feasibility_residual(const ComplexMatrix& d, const BipartiteShape& shape,
                                       double target = 1.0) {
  const double a = -detail::min_eigenvalue(d);
  const double b = -detail::min_eigenvalue(partial_transpose(d, shape, Subsystem::B));
  const double c = std::abs(d.trace().real() - target);
  return std::max({0.0, a, b, c});
}

inline bool is_ppt(const ComplexMatrix& d, const BipartiteShape& shape,
                   double tol = Tolerances{}.psd) {
  return detail::min_eigenvalue(d) >= -tol &&
         detail::min_eigenvalue(partial_transpose(d, shape, Subsystem::B)) >= -tol;
}

/// Dykstra's alternating projections onto PSD, Gamma(PSD) and the trace
/// hyperplane. Converges to the Frobenius projection onto their
/// intersection; a run that ends infeasible is reported, not thrown.
inline std::pair<HermitianOperator, SolveTrace> project_ppt(const HermitianOperator& m,
                                                            const PptSetSpec& spec) {
  require_bipartite(m.matrix(), spec.shape, "project_ppt");
  const ComplexMatrix& start = m.matrix();
  const Eigen::Index n = start.rows();
  const double dn = static_cast<double>(n);
  ComplexMatrix x = start;
  ComplexMatrix p_psd = ComplexMatrix::Zero(n, n);
  ComplexMatrix p_gamma = ComplexMatrix::Zero(n, n);
  // The correction for the trace hyperplane is always a multiple of 1.
  double p_trace = 0.0;

  SolveTrace trace;
  trace.step_rule = "dykstra";
  for (std::size_t sweep = 1; sweep <= spec.max_iters; ++sweep) {
    const ComplexMatrix prev = x;

    ComplexMatrix y = detail::project_psd_matrix(x + p_psd);
    p_psd += x - y;
    x = y;

    double gamma_floor = 0.0;
    y = partial_transpose(
        detail::project_psd_matrix(partial_transpose(x + p_gamma, spec.shape, Subsystem::B),
                                   &gamma_floor),
        spec.shape, Subsystem::B);
    p_gamma += x - y;
    x = y;

    // x + p_trace shifted onto the hyperplane; the new correction is -shift.
    const double shift = (spec.trace_target - x.trace().real()) / dn - p_trace;
    x.diagonal().array() += p_trace + shift;
    const double moved = p_trace + shift;
    p_trace = -shift;

    trace.iterates = sweep;
    trace.objective_history.push_back((x - start).norm());
    // x^Gamma is the clamped matrix above plus moved * 1.
    trace.feasibility_residual =
        std::max({0.0, -detail::min_eigenvalue(x), -(gamma_floor + moved),
                  std::abs(x.trace().real() - spec.trace_target)});
    if (trace.feasibility_residual > spec.tol_feas) continue;
    const double step = (x - prev).norm();
    const auto& h = trace.objective_history;
    const bool stalled = h.size() > spec.stall_window &&
                         std::abs(h.back() - h[h.size() - 1 - spec.stall_window]) <
                             spec.stall_tol;
    if (step <= spec.step_tol * std::max(1.0, x.norm()) || stalled) {
      trace.converged = true;
      break;
    }
  }
  if (!trace.converged) trace.low_confidence = true;
  return {HermitianOperator::symmetrized(x), std::move(trace)};
}

/// Mixes d with target * I / N just enough that D >= 0 and D^Gamma >= 0
/// hold exactly (up to eigensolver roundoff) and the trace equals target.
inline ComplexMatrix restore_ppt_feasibility(ComplexMatrix d, const BipartiteShape& shape,
                                             double target = 1.0) {
  detail::shift_trace(d, target);
  const double n = static_cast<double>(d.rows());
  const double r = std::max({0.0, -detail::min_eigenvalue(d),
                             -detail::min_eigenvalue(partial_transpose(d, shape, Subsystem::B))});
  if (r > 0.0) {
    const double delta = r / (r + target / n);
    d *= (1.0 - delta);
    d.diagonal().array() += delta * target / n;
  }
  return hermitian_part(d);
}

/// Random PPT density: project a random unit-trace Hermitian matrix onto the
/// PPT set, then restore exact feasibility.
inline DensityMatrix sample_ppt_density(const BipartiteShape& shape, SplitMix64& rng,
                                        const PptSetSpec* spec_override = nullptr) {
  const auto n = static_cast<Eigen::Index>(shape.total());
  ComplexMatrix h = random::hermitian(n, rng);
  h.diagonal().array() -= h.trace().real() / static_cast<double>(n);
  h *= rng.uniform(0.1, 1.5);
  h.diagonal().array() += 1.0 / static_cast<double>(n);
  PptSetSpec spec = spec_override ? *spec_override : PptSetSpec{shape};
  spec.shape = shape;
  spec.trace_target = 1.0;
  auto [projected, trace] = project_ppt(HermitianOperator::symmetrized(h), spec);
  return DensityMatrix::from_matrix(restore_ppt_feasibility(projected.matrix(), shape));
}

// ---------------------------------------------------------------------------
// Linear minimization over the PPT states

struct MinimizeOptions {
  std::size_t max_outer = 600;
  std::size_t restarts = 5;
  double stall_tol = 1e-10;
  std::size_t stall_window = 50;
  /// Restart spread above this raises the low-confidence flag.
  double spread_tol = 1e-3;
  /// Inner projections at step eta stop once a sweep, or the last
  /// stall_window sweeps, moved less than inner_rel_tol * eta * ||h||_F.
  double inner_rel_tol = 1e-4;
};

struct MinTraceResult {
  double value = 0.0;
  DensityMatrix minimizer;
  SolveTrace trace;
  std::vector<double> restart_values;
};

namespace detail {

struct RestartOutcome {
  double value;
  ComplexMatrix point;
  std::vector<double> history;
  std::size_t iterations;
};

inline RestartOutcome subgradient_run(const ComplexMatrix& h, const PptSetSpec& spec,
                                      const MinimizeOptions& opt, ComplexMatrix start) {
  const double h_norm = h.norm();
  const double eta0 = h_norm > 0.0 ? 1.0 / h_norm : 1.0;
  auto objective = [&](const ComplexMatrix& d) { return (d * h).trace().real(); };

  ComplexMatrix d = std::move(start);
  ComplexMatrix avg = d;
  RestartOutcome out{objective(d), d, {}, 0};
  out.history.push_back(out.value);
  for (std::size_t t = 0; t < opt.max_outer; ++t) {
    const double eta = eta0 / std::sqrt(static_cast<double>(t + 1));
    PptSetSpec inner = spec;
    inner.stall_tol = std::max(spec.stall_tol, opt.inner_rel_tol * eta * h_norm);
    inner.step_tol = std::max(spec.step_tol, opt.inner_rel_tol * eta * h_norm);
    auto projected = project_ppt(HermitianOperator::symmetrized(d - eta * h), inner);
    d = projected.first.matrix();
    avg += (d - avg) / static_cast<double>(t + 2);
    for (const ComplexMatrix* cand : {&d, &avg}) {
      const double v = objective(*cand);
      if (v < out.value) {
        out.value = v;
        out.point = *cand;
      }
    }
    out.history.push_back(out.value);
    out.iterations = t + 1;
    const auto& hist = out.history;
    if (hist.size() > opt.stall_window &&
        hist[hist.size() - 1 - opt.stall_window] - hist.back() < opt.stall_tol)
      break;
  }
  // Report the objective of an exactly feasible point, so the value is an
  // upper bound on the true minimum.
  out.point = restore_ppt_feasibility(out.point, spec.shape, spec.trace_target);
  out.value = objective(out.point);
  return out;
}

}  // namespace detail

/// min over PPT densities D of Tr(D h), by projected subgradient with steps
/// (1/||h||_F) / sqrt(t+1), iterate averaging and independent restarts (the
/// first from I/N, the rest from random PPT states).
inline MinTraceResult min_trace_over_ppt(const HermitianOperator& h, const PptSetSpec& spec,
                                         const MinimizeOptions& opt = {},
                                         std::uint64_t seed = 0) {
  require_bipartite(h.matrix(), spec.shape, "min_trace_over_ppt");
  const auto n = static_cast<Eigen::Index>(spec.shape.total());
  const std::size_t restarts = std::max<std::size_t>(1, opt.restarts);

  std::vector<std::future<detail::RestartOutcome>> jobs;
  for (std::size_t r = 0; r < restarts; ++r) {
    jobs.push_back(std::async(std::launch::async, [&, r] {
      ComplexMatrix start;
      if (r == 0) {
        start = ComplexMatrix::Identity(n, n) * (spec.trace_target / static_cast<double>(n));
      } else {
        SplitMix64 rng(derive_seed(seed, r));
        start = sample_ppt_density(spec.shape, rng).matrix() * spec.trace_target;
      }
      return detail::subgradient_run(h.matrix(), spec, opt, std::move(start));
    }));
  }
  std::vector<detail::RestartOutcome> runs;
  for (auto& j : jobs) runs.push_back(j.get());

  std::size_t best = 0;
  std::vector<double> values;
  SolveTrace trace;
  trace.step_rule = "projected-subgradient(eta0/sqrt(t+1), averaged)";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    values.push_back(runs[r].value);
    trace.iterates += runs[r].iterations;
    if (runs[r].value < runs[best].value) best = r;
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  trace.restart_spread = *hi - *lo;
  trace.low_confidence = trace.restart_spread > opt.spread_tol;
  trace.objective_history = runs[best].history;
  trace.feasibility_residual =
      ppt_feasibility_residual(runs[best].point, spec.shape, spec.trace_target);
  trace.converged = !trace.low_confidence;

  const ComplexMatrix minimizer = runs[best].point / spec.trace_target;
  return {runs[best].value, DensityMatrix::from_matrix(minimizer), std::move(trace),
          std::move(values)};
}

/// Decomposable witness W = (|v><v|)^Gamma from the most negative eigenvector
/// v of D^Gamma: Tr(W D) = <v|D^Gamma|v> < 0 and Tr(W s) >= 0 for all PPT s.
/// Empty when D is PPT within tol. ||W||_F = 1.
inline std::optional<HermitianOperator> npt_witness(const DensityMatrix& d,
                                                    const BipartiteShape& shape,
                                                    double tol = Tolerances{}.psd) {
  const ComplexMatrix pt = partial_transpose(d.matrix(), shape, Subsystem::B);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(pt));
  if (es.eigenvalues()(0) >= -tol) return std::nullopt;
  const ComplexVector v = es.eigenvectors().col(0);
  return HermitianOperator::symmetrized(
      partial_transpose(v * v.adjoint(), shape, Subsystem::B));
}

}  // namespace modular_ppt
