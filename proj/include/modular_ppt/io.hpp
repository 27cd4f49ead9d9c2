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

// Matrix files, JSON reports and the command runner behind the CLI.
//
// MatrixFile (schema "1"):
//   {"schema_version": "1", "rows": R, "cols": C,
//    "re": [[...] x C] x R, "im": [[...] x C] x R,
//    "shape": {"dim_a": A, "dim_b": B},          optional
//    "kind": "hermitian" | "density" | "generic"}  optional
//
// Report:
//   {"command": ..., "config": {...}, "results": {...}, "passed": bool,
//    "timing": {"wall_seconds": ...}}
// Everything but "timing" is a pure function of the RunConfig.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modular_ppt/choi.hpp"
#include "modular_ppt/cones.hpp"
#include "modular_ppt/constructions.hpp"
#include "modular_ppt/errors.hpp"
#include "modular_ppt/gns.hpp"
#include "modular_ppt/linalg.hpp"
#include "modular_ppt/ppt_optim.hpp"
#include "modular_ppt/random.hpp"

namespace modular_ppt::io {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

enum class MatrixKind { Hermitian, Density, Generic };

inline const char* to_string(MatrixKind k) {
  switch (k) {
    case MatrixKind::Hermitian: return "hermitian";
    case MatrixKind::Density: return "density";
    case MatrixKind::Generic: return "generic";
  }
  return "generic";
}

inline MatrixKind parse_kind(const std::string& s) {
  if (s == "hermitian") return MatrixKind::Hermitian;
  if (s == "density") return MatrixKind::Density;
  if (s == "generic") return MatrixKind::Generic;
  throw InputError("kind", "unknown kind \"" + s + "\"");
}

struct MatrixFile {
  ComplexMatrix matrix;
  std::optional<BipartiteShape> shape;
  std::optional<MatrixKind> kind;
};

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

inline const json& require(const json& j, const char* field) {
  if (!j.is_object()) throw InputError("<root>", "expected a JSON object");
  const auto it = j.find(field);
  if (it == j.end()) throw InputError(field, "missing");
  return *it;
}

inline std::size_t require_count(const json& j, const char* field) {
  const json& v = require(j, field);
  if (!v.is_number_integer() || v.get<std::int64_t>() <= 0)
    throw InputError(field, "expected a positive integer");
  return v.get<std::size_t>();
}

inline Eigen::MatrixXd real_array(const json& j, const char* field, std::size_t rows,
                                  std::size_t cols) {
  const json& a = require(j, field);
  if (!a.is_array() || a.size() != rows)
    throw InputError(field, "expected an array of " + std::to_string(rows) + " rows");
  Eigen::MatrixXd out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string where = std::string(field) + "[" + std::to_string(r) + "]";
    if (!a[r].is_array() || a[r].size() != cols)
      throw InputError(where, "expected an array of " + std::to_string(cols) + " numbers");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!a[r][c].is_number())
        throw InputError(where + "[" + std::to_string(c) + "]", "expected a number");
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a[r][c].get<double>();
    }
  }
  return out;
}

inline void validate_kind(const ComplexMatrix& m, MatrixKind kind, const Tolerances& tol) {
  if (kind == MatrixKind::Generic) return;
  if (m.rows() != m.cols()) throw InputError("kind", "a " + std::string(to_string(kind)) + " matrix must be square");
  const double defect = hermiticity_defect(m);
  if (defect > tol.herm)
    throw InputError("kind", "hermiticity residual " + fmt(defect) + " exceeds " + fmt(tol.herm));
  if (kind != MatrixKind::Density) return;
  const double tr = m.trace().real() - 1.0;
  if (std::abs(tr) > tol.trace)
    throw InputError("kind", "trace residual " + fmt(tr) + " exceeds " + fmt(tol.trace));
  const double lo = modular_ppt::detail::min_eigenvalue(m);
  if (lo < -tol.psd)
    throw InputError("kind", "min eigenvalue " + fmt(lo) + " below " + fmt(-tol.psd));
}

}  // namespace detail

inline json matrix_to_json(const MatrixFile& f) {
  const ComplexMatrix& m = f.matrix;
  json re = json::array(), im = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json rr = json::array(), ri = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!std::isfinite(m(r, c).real()) || !std::isfinite(m(r, c).imag()))
        throw ContractError("matrix_to_json: non-finite entry");
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  json j = {{"schema_version", kSchemaVersion}, {"rows", static_cast<std::size_t>(m.rows())},
            {"cols", static_cast<std::size_t>(m.cols())},
            {"re", std::move(re)}, {"im", std::move(im)}};
  if (f.shape) j["shape"] = {{"dim_a", f.shape->dim_a}, {"dim_b", f.shape->dim_b}};
  if (f.kind) j["kind"] = to_string(*f.kind);
  return j;
}

inline MatrixFile matrix_from_json(const json& j, const Tolerances& tol = {}) {
  const json& v = detail::require(j, "schema_version");
  if (!v.is_string() || v.get<std::string>() != kSchemaVersion)
    throw InputError("schema_version", "expected \"" + std::string(kSchemaVersion) + "\"");
  const std::size_t rows = detail::require_count(j, "rows");
  const std::size_t cols = detail::require_count(j, "cols");
  check_dimension(std::max(rows, cols), "matrix file");
  MatrixFile f;
  f.matrix.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  f.matrix.real() = detail::real_array(j, "re", rows, cols);
  f.matrix.imag() = detail::real_array(j, "im", rows, cols);
  if (j.contains("shape")) {
    const json& s = j["shape"];
    if (!s.is_object()) throw InputError("shape", "expected an object");
    f.shape = BipartiteShape{detail::require_count(s, "dim_a"), detail::require_count(s, "dim_b")};
    if (f.shape->total() != rows || rows != cols)
      throw InputError("shape", "dim_a * dim_b = " + std::to_string(f.shape->total()) +
                                    " does not match a " + std::to_string(rows) + "x" +
                                    std::to_string(cols) + " matrix");
  }
  if (j.contains("kind")) {
    if (!j["kind"].is_string()) throw InputError("kind", "expected a string");
    f.kind = parse_kind(j["kind"].get<std::string>());
    detail::validate_kind(f.matrix, *f.kind, tol);
  }
  return f;
}

/// Writes to a temporary sibling and renames it over path.
inline void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("out", "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw InputError("out", "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InputError("out", "cannot rename onto " + path);
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("in", "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("in", std::string("JSON parse error: ") + e.what());
  }
}

inline MatrixFile load_matrix(const std::string& path, const Tolerances& tol = {}) {
  return matrix_from_json(read_json_file(path), tol);
}

inline void save_matrix(const MatrixFile& f, const std::string& path) {
  write_atomic(path, matrix_to_json(f).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Reports

struct Report {
  std::string command;
  json config = json::object();
  json results = json::object();
  bool passed = false;
  json timing = json::object();

  /// The deterministic part.
  json body() const {
    return {{"command", command}, {"config", config}, {"results", results}, {"passed", passed}};
  }
  json to_json() const {
    json j = body();
    j["timing"] = timing;
    return j;
  }
};

inline void save_report(const Report& r, const std::string& path) {
  write_atomic(path, r.to_json().dump(2) + "\n");
}

inline json diagnostic(const std::string& command, const Error& e) {
  json err = {{"kind", e.kind()}, {"message", e.what()}};
  if (const auto* ie = dynamic_cast<const InputError*>(&e)) err["field"] = ie->field();
  return {{"command", command}, {"error", err}, {"passed", false}};
}

// ---------------------------------------------------------------------------
// Commands

inline json experiment_json(const ExperimentReport& r) {
  json ces = json::array();
  for (const auto& ce : r.counterexamples)
    ces.push_back({{"kind", ce.kind},
                   {"min_gamma_eig", ce.min_gamma_eig},
                   {"density", matrix_to_json({ce.density, r.dims, MatrixKind::Density})}});
  return {{"samples", r.samples},
          {"dims", {{"dim_a", r.dims.dim_a}, {"dim_b", r.dims.dim_b}}},
          {"seed", r.seed},
          {"counts", r.counts},
          {"counterexamples", ces},
          {"positive_control_failures", r.positive_control_failures},
          {"positive_control_max_residual", r.positive_control_max_residual},
          {"partial_transpose_max_residual", r.partial_transpose_max_residual},
          {"partial_transpose_matches", r.partial_transpose_matches}};
}

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {"gns-verify", "cone-check", "choi",
                                             "ppt-check",  "minimize",   "construct",
                                             "anticomm",   "experiment", "hierarchy"};
  return c;
}

struct RunConfig {
  std::string command;
  std::uint64_t seed = 0;
  /// Keys: residual (identity checks), psd (PSD and PPT verdicts), feas
  /// (optimizer feasibility).
  std::map<std::string, double> tol;
  std::optional<BipartiteShape> dims;
  std::size_t samples = 100;
  /// Iteration budget; 0 selects the command default.
  std::size_t iters = 0;
  std::string in_path;
  std::string out_path;

  std::size_t iters_or(std::size_t fallback) const { return iters > 0 ? iters : fallback; }

  double tolerance(const std::string& key) const {
    static const std::map<std::string, double> defaults = {
        {"residual", 1e-10}, {"psd", 1e-9}, {"feas", 1e-8}};
    const auto it = tol.find(key);
    return it != tol.end() ? it->second : defaults.at(key);
  }
};

/// Parses "N" or "NxM".
inline BipartiteShape parse_dims(const std::string& s) {
  auto count = [&s](const std::string& part) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
      throw InputError("dims", "expected N or NxM, got \"" + s + "\"");
    const unsigned long long v = std::stoull(part);
    if (v == 0) throw InputError("dims", "dimensions must be positive");
    return static_cast<std::size_t>(v);
  };
  const auto x = s.find('x');
  if (x == std::string::npos) return {count(s), 1};
  return {count(s.substr(0, x)), count(s.substr(x + 1))};
}

/// Parses KEY=VAL into cfg.tol.
inline void parse_tolerance(RunConfig& cfg, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw InputError("tol", "expected KEY=VAL, got \"" + kv + "\"");
  const std::string key = kv.substr(0, eq);
  if (key != "residual" && key != "psd" && key != "feas")
    throw InputError("tol", "unknown key \"" + key + "\" (residual, psd, feas)");
  const std::string val = kv.substr(eq + 1);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(val, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != val.size() || val.empty() || !(v > 0.0) || !std::isfinite(v))
    throw InputError("tol", "value for " + key + " must be a positive number");
  cfg.tol[key] = v;
}

inline json config_to_json(const RunConfig& cfg) {
  json j = {{"seed", cfg.seed}, {"samples", cfg.samples}, {"iters", cfg.iters},
            {"in", cfg.in_path}, {"tol", json::object()}};
  for (const char* k : {"residual", "psd", "feas"}) j["tol"][k] = cfg.tolerance(k);
  if (cfg.dims) j["dims"] = {{"dim_a", cfg.dims->dim_a}, {"dim_b", cfg.dims->dim_b}};
  return j;
}

namespace detail {

inline json verdict_json(const MembershipVerdict& v) {
  json j = {{"inside", v.inside}, {"certificate", v.certificate}, {"route", v.route},
            {"hermiticity_defect", v.hermiticity_defect}, {"boundary", v.boundary}};
  j["alt_certificate"] = std::isnan(v.alt_certificate) ? json(nullptr) : json(v.alt_certificate);
  return j;
}

inline json shape_json(const BipartiteShape& s) { return {{"dim_a", s.dim_a}, {"dim_b", s.dim_b}}; }

inline MatrixFile load_input(const RunConfig& cfg) {
  if (cfg.in_path.empty()) throw InputError("in", "command " + cfg.command + " needs --in");
  return load_matrix(cfg.in_path);
}

/// --dims, else the file's shape, else fallback.
inline BipartiteShape resolve_shape(const RunConfig& cfg, const MatrixFile* f,
                                    std::optional<BipartiteShape> fallback = std::nullopt) {
  std::optional<BipartiteShape> s = cfg.dims;
  if (!s && f) s = f->shape;
  if (!s) s = fallback;
  if (!s) throw InputError("dims", "command " + cfg.command + " needs --dims NxM");
  check_dimension(s->total(), "dims");
  if (f && (static_cast<std::size_t>(f->matrix.rows()) != s->total() ||
            f->matrix.rows() != f->matrix.cols()))
    throw InputError("dims", std::to_string(s->dim_a) + "x" + std::to_string(s->dim_b) +
                                 " does not match the " + std::to_string(f->matrix.rows()) + "x" +
                                 std::to_string(f->matrix.cols()) + " input");
  return *s;
}

inline DensityMatrix as_density(const ComplexMatrix& m) {
  try {
    return DensityMatrix::from_matrix(m);
  } catch (const ContractError& e) {
    throw InputError("in", std::string("not a density matrix: ") + e.what());
  }
}

inline HermitianOperator as_hermitian(const ComplexMatrix& m) {
  try {
    return HermitianOperator(m);
  } catch (const ContractError& e) {
    throw InputError("in", std::string("not Hermitian: ") + e.what());
  }
}

inline CompositeGnsContext reference_context(const BipartiteShape& s, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const auto na = static_cast<Eigen::Index>(s.dim_a);
  const auto nb = static_cast<Eigen::Index>(s.dim_b);
  const GnsContext a = build_gns(DensityMatrix::from_matrix(random::faithful_density(na, rng)));
  const GnsContext b = build_gns(DensityMatrix::from_matrix(random::faithful_density(nb, rng)));
  return build_composite(a, b);
}

inline void gns_verify(const RunConfig& cfg, Report& rep) {
  const double tol = cfg.tolerance("residual");
  std::optional<GnsContext> ctx;
  if (!cfg.in_path.empty()) {
    const MatrixFile f = load_input(cfg);
    ctx = build_gns(as_density(f.matrix));
  } else {
    const BipartiteShape s = resolve_shape(cfg, nullptr, BipartiteShape{3, 1});
    SplitMix64 rng(cfg.seed);
    ctx = build_gns(DensityMatrix::from_matrix(
        random::faithful_density(static_cast<Eigen::Index>(s.total()), rng)));
  }
  const ModularReport m = verify_modular_identities(*ctx, cfg.samples, cfg.seed);
  json failures = json::array();
  for (const auto& [k, v] : m.residuals)
    if (v > tol) failures.push_back(k);
  rep.results = {{"dim", ctx->dim()},
                 {"residuals", m.residuals},
                 {"max_residual", m.max_residual()},
                 {"negative_control", m.negative_control},
                 {"condition_ratio", m.condition_ratio},
                 {"condition_warning", m.condition_warning},
                 {"failures", failures}};
  rep.passed = failures.empty();
}

inline void cone_check(const RunConfig& cfg, Report& rep) {
  const double tol = cfg.tolerance("residual");
  if (!cfg.in_path.empty()) {
    const MatrixFile f = load_input(cfg);
    const BipartiteShape s = resolve_shape(cfg, &f);
    const CompositeGnsContext c = reference_context(s, cfg.seed);
    const GnsVector xi = c.joint.vector(f.matrix);
    const double nrm = norm(xi);
    GnsVector unit = xi;
    if (nrm > 0.0) unit.mat /= nrm;
    rep.results = {
        {"v_0", verdict_json(v_beta_membership(c.joint, {0.0, tol}, xi))},
        {"natural_cone", verdict_json(natural_cone_membership(c.joint, xi, tol))},
        {"v_half", verdict_json(v_beta_membership(c.joint, {0.5, tol}, xi))},
        {"pn_intersection", verdict_json(pn_intersection_membership(c, xi, tol))},
        {"separable_upper_bound",
         nrm > 0.0 ? separable_cone_distance(c, unit, cfg.iters_or(100), cfg.seed).upper_bound : 0.0}};
    rep.passed = true;
    return;
  }
  const BipartiteShape s = resolve_shape(cfg, nullptr, BipartiteShape{2, 2});
  const CompositeGnsContext c = reference_context(s, cfg.seed);
  json dual = json::array(), umaps = json::array(), failures = json::array();
  for (int k = 0; k <= 4; ++k) {
    const double beta = 0.125 * k;
    const DualityReport d = duality_check(c.joint, beta, cfg.samples, cfg.seed, tol);
    dual.push_back({{"beta", beta}, {"min_pairing", d.min_pairing},
                    {"outside_tested", d.outside_tested}, {"outside_separated", d.outside_separated},
                    {"passed", d.passed}});
    if (!d.passed) failures.push_back("duality_beta_" + std::to_string(k) + "/8");
    const UMapsReport u = u_maps_cones(c.joint, beta, cfg.samples, cfg.seed, tol);
    umaps.push_back({{"beta", beta}, {"min_certificate", u.min_certificate},
                     {"tau_residual", u.tau_residual}, {"passed", u.passed}});
    if (!u.passed) failures.push_back("u_maps_beta_" + std::to_string(k) + "/8");
  }
  const CompositeReport comp = verify_composite(c, cfg.samples, cfg.seed);
  if (!comp.passed(tol)) failures.push_back("composite");
  const CommutantReport cm = commutant_cone_check(c, cfg.samples, cfg.seed, tol);
  if (!cm.passed) failures.push_back("commutant");
  rep.results = {{"shape", shape_json(s)},
                 {"duality", dual},
                 {"u_maps", umaps},
                 {"composite",
                  {{"jm_factorization", comp.jm_factorization},
                   {"j_factorization", comp.j_factorization},
                   {"delta_factorization", comp.delta_factorization},
                   {"direct_agreement", comp.direct_agreement},
                   {"u_b_involution", comp.u_b_involution}}},
                 {"commutant",
                  {{"generator_residual", cm.generator_residual},
                   {"min_pairing", cm.min_pairing},
                   {"min_generator_certificate", cm.min_generator_certificate},
                   {"outside_tested", cm.outside_tested},
                   {"outside_separated", cm.outside_separated}}},
                 {"failures", failures}};
  rep.passed = failures.empty();
}

inline void choi(const RunConfig& cfg, Report& rep) {
  const MatrixFile f = load_input(cfg);
  const BipartiteShape s = resolve_shape(cfg, &f);
  const MapTable t = map_from_choi(f.matrix, s);
  const bool round_trip = choi_matrix(t) == f.matrix;
  json results = {{"shape", shape_json(s)},
                  {"round_trip", round_trip},
                  {"hermiticity_preserving", t.hermiticity_preserving()}};
  if (t.hermiticity_preserving()) {
    const HermitianOperator h = HermitianOperator::symmetrized(f.matrix);
    const double lo = modular_ppt::detail::min_eigenvalue(h.matrix());
    results["choi_min_eig"] = lo;
    results["completely_positive"] = lo >= -cfg.tolerance("psd");
    const DualPairingReport d = dual_pairing_test(h, s, cfg.samples, cfg.seed, true, {},
                                                  cfg.tolerance("feas"));
    results["dual_pairing"] = {{"min_sampled", d.min_sampled},
                               {"optimizer_value", d.optimizer_value ? json(*d.optimizer_value)
                                                                     : json(nullptr)},
                               {"optimizer_low_confidence", d.optimizer_low_confidence},
                               {"min_value", d.min_value},
                               {"not_decomposable", d.certified_negative}};
  }
  rep.results = results;
  rep.passed = round_trip;
}

inline void ppt_check(const RunConfig& cfg, Report& rep) {
  const MatrixFile f = load_input(cfg);
  const BipartiteShape s = resolve_shape(cfg, &f);
  const DensityMatrix d = as_density(f.matrix);
  const double tol = cfg.tolerance("psd");
  const double gamma = modular_ppt::detail::min_eigenvalue(partial_transpose(d.matrix(), s, Subsystem::B));
  rep.results = {{"shape", shape_json(s)},
                 {"ppt", gamma >= -tol},
                 {"min_eig", d.min_eigenvalue()},
                 {"min_eig_gamma", gamma}};
  if (const auto w = npt_witness(d, s, tol))
    rep.results["witness"] = {{"value", (w->matrix() * d.matrix()).trace().real()},
                              {"operator", matrix_to_json({w->matrix(), s, MatrixKind::Hermitian})}};
  rep.passed = true;
}

inline void minimize(const RunConfig& cfg, Report& rep) {
  const MatrixFile f = load_input(cfg);
  const BipartiteShape s = resolve_shape(cfg, &f);
  const HermitianOperator h = as_hermitian(f.matrix);
  PptSetSpec spec{s};
  spec.tol_feas = cfg.tolerance("feas");
  MinimizeOptions opt;
  opt.max_outer = cfg.iters_or(opt.max_outer);
  const MinTraceResult r = min_trace_over_ppt(h, spec, opt, cfg.seed);
  rep.results = {{"shape", shape_json(s)},
                 {"value", r.value},
                 {"restart_values", r.restart_values},
                 {"restart_spread", r.trace.restart_spread},
                 {"low_confidence", r.trace.low_confidence},
                 {"feasibility_residual", r.trace.feasibility_residual},
                 {"outer_iterations", r.trace.iterates},
                 {"minimizer", matrix_to_json({r.minimizer.matrix(), s, MatrixKind::Density})}};
  rep.passed = r.trace.feasibility_residual <= spec.tol_feas;
}

inline void construct(const RunConfig& cfg, Report& rep) {
  const BipartiteShape s = resolve_shape(cfg, nullptr, BipartiteShape{2, 2});
  const CompositeGnsContext c = reference_context(s, cfg.seed);
  std::size_t inside = 0, state_ppt = 0, candidates = 0, low_confidence = 0;
  double min_cert = std::numeric_limits<double>::infinity(), max_bound = 0.0;
  json flagged = json::array();
  for (std::size_t k = 0; k < cfg.samples; ++k) {
    const std::uint64_t seed = derive_seed(cfg.seed, k);
    const auto [d, r] = construct_ppt_from_cone(c, seed, cfg.iters_or(100));
    inside += r.membership.inside;
    state_ppt += r.state_ppt;
    candidates += r.entangled_candidate;
    low_confidence += r.low_confidence;
    min_cert = std::min(min_cert, r.membership.certificate);
    max_bound = std::max(max_bound, r.separable_upper_bound);
    if (r.entangled_candidate && flagged.size() < kMaxCounterexamples)
      flagged.push_back({{"seed", seed}, {"separable_upper_bound", r.separable_upper_bound}});
  }
  rep.results = {{"shape", shape_json(s)},
                 {"samples", cfg.samples},
                 {"membership_inside", inside},
                 {"min_membership_certificate", min_cert},
                 {"state_ppt", state_ppt},
                 {"state_npt", cfg.samples - state_ppt},
                 {"entangled_candidates", candidates},
                 {"max_separable_upper_bound", max_bound},
                 {"low_confidence", low_confidence},
                 {"flagged", flagged}};
  rep.passed = inside == cfg.samples;
}

inline void anticomm(const RunConfig& cfg, Report& rep) {
  const BipartiteShape s = resolve_shape(cfg, nullptr, BipartiteShape{2, 2});
  if (s.dim_a != 2) throw InputError("dims", "anticomm needs dims 2xM");
  SplitMix64 rng(cfg.seed);
  const double tol = cfg.tolerance("psd");
  std::size_t falsified = 0;
  double min_gamma = std::numeric_limits<double>::infinity(), max_residual = 0.0;
  json counterexamples = json::array();
  for (std::size_t k = 0; k < cfg.samples; ++k) {
    const AnticommutatorInstance inst = random_anticommutator_instance(s.dim_b, rng);
    const AnticommutatorReport r = verify_anticommutator_ppt(inst, tol);
    max_residual = std::max(max_residual, r.residual);
    min_gamma = std::min(min_gamma, r.min_eig_gamma);
    if (r.falsified) {
      ++falsified;
      if (counterexamples.size() < kMaxCounterexamples)
        counterexamples.push_back(
            {{"rho", matrix_to_json({inst.rho.matrix(), s, MatrixKind::Density})},
             {"f", {{"re", {inst.f(0).real(), inst.f(1).real()}},
                    {"im", {inst.f(0).imag(), inst.f(1).imag()}}}},
             {"a", matrix_to_json({inst.a_op.matrix(), std::nullopt, MatrixKind::Hermitian})},
             {"min_eig_gamma", r.min_eig_gamma}});
    }
  }
  rep.results = {{"shape", shape_json(s)},
                 {"instances", cfg.samples},
                 {"max_residual", max_residual},
                 {"min_eig_gamma", min_gamma},
                 {"falsifications", falsified},
                 {"counterexamples", counterexamples}};
  rep.passed = falsified == 0;
}

inline void experiment(const RunConfig& cfg, Report& rep) {
  const BipartiteShape s = resolve_shape(cfg, nullptr, BipartiteShape{2, 2});
  const ExperimentReport r = sqrt_ppt_experiment(s, cfg.samples, cfg.seed, cfg.tolerance("psd"));
  rep.results = experiment_json(r);
  rep.passed = r.positive_control_failures == 0;
}

inline void hierarchy(const RunConfig& cfg, Report& rep) {
  const BipartiteShape s = resolve_shape(cfg, nullptr, BipartiteShape{2, 2});
  const HierarchyReport h = hierarchy_report(s, cfg.seed, cfg.tolerance("feas"));
  rep.results = {{"shape", shape_json(s)},
                 {"transposition_choi_min_eig", h.transposition_choi_min_eig},
                 {"transposition_not_cp", h.transposition_not_cp},
                 {"cp_maps", h.cp_maps},
                 {"cp_stormer_min_eig", h.cp_stormer_min_eig},
                 {"cp_decomposable", h.cp_decomposable},
                 {"separable_samples", h.separable_samples},
                 {"separable_min_gamma_eig", h.separable_min_gamma_eig},
                 {"separable_ppt", h.separable_ppt},
                 {"singlet_min_gamma_eig", h.singlet_min_gamma_eig},
                 {"singlet_npt", h.singlet_npt}};
  rep.passed = h.passed();
}

}  // namespace detail

struct RunResult {
  int exit_code = 2;
  /// The report, or a diagnostic object on exit code 2.
  json document;
  std::optional<Report> report;
};

/// Runs one command. Writes the document to cfg.out_path when set.
/// Exit codes: 0 passed, 1 a check failed, 2 bad input or contract error.
inline RunResult run_command(const RunConfig& cfg) {
  RunResult out;
  try {
    if (cfg.samples < 1) throw InputError("samples", "must be >= 1");
    Report rep;
    rep.command = cfg.command;
    rep.config = config_to_json(cfg);
    const auto start = std::chrono::steady_clock::now();
    if (cfg.command == "gns-verify") detail::gns_verify(cfg, rep);
    else if (cfg.command == "cone-check") detail::cone_check(cfg, rep);
    else if (cfg.command == "choi") detail::choi(cfg, rep);
    else if (cfg.command == "ppt-check") detail::ppt_check(cfg, rep);
    else if (cfg.command == "minimize") detail::minimize(cfg, rep);
    else if (cfg.command == "construct") detail::construct(cfg, rep);
    else if (cfg.command == "anticomm") detail::anticomm(cfg, rep);
    else if (cfg.command == "experiment") detail::experiment(cfg, rep);
    else if (cfg.command == "hierarchy") detail::hierarchy(cfg, rep);
    else throw InputError("command", "unknown command \"" + cfg.command + "\"");
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    rep.timing = {{"wall_seconds", dt.count()}};
    out.exit_code = rep.passed ? 0 : 1;
    out.document = rep.to_json();
    out.report = std::move(rep);
  } catch (const Error& e) {
    out.exit_code = 2;
    out.document = diagnostic(cfg.command, e);
  } catch (const std::exception& e) {
    out.exit_code = 2;
    out.document = diagnostic(cfg.command, ContractError(e.what()));
  }
  if (!cfg.out_path.empty()) {
    try {
      write_atomic(cfg.out_path, out.document.dump(2) + "\n");
    } catch (const Error& e) {
      out.exit_code = 2;
      out.document = diagnostic(cfg.command, e);
      out.report.reset();
    }
  }
  return out;
}

}  // namespace modular_ppt::io
