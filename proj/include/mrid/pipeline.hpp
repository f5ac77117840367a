#ifndef MRID_PIPELINE_HPP
#define MRID_PIPELINE_HPP

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mrid/io.hpp"

namespace mrid {

// ---------------------------------------------------------------------------
// Configuration

enum class ConventionChoice { Auto, General, Example };

inline std::string_view to_string(ConventionChoice c) {
  switch (c) {
    case ConventionChoice::General:
      return "general";
    case ConventionChoice::Example:
      return "example";
    default:
      return "auto";
  }
}

inline ConventionChoice convention_choice_from_string(const std::string& s) {
  if (s == "auto") return ConventionChoice::Auto;
  if (s == "general") return ConventionChoice::General;
  if (s == "example") return ConventionChoice::Example;
  throw Error(ErrorKind::SchemaError, "unknown convention '" + s + "' (auto|general|example)");
}

struct InputSpec {
  enum class Kind { UniformRandom, File };
  Kind kind = Kind::UniformRandom;
  double amplitude = 1.0;
  std::uint64_t seed = 1;
  std::string path;  // signals CSV whose u columns drive the plant
};

struct Tolerances {
  double markov = 1e-6;
  double structure = 1e-6;
  double tf = 1e-6;
};

struct ExperimentConfig {
  StateSpace plant;
  std::vector<int> rates;
  std::vector<int> offsets;
  InputSpec input;
  int N = 3000;
  IdConfig id;  // id.order = 0 selects M n
  Tolerances tol;
  ConventionChoice convention = ConventionChoice::Auto;
  double noise = 0.0;  // half-width of uniform noise added to observed outputs
  std::string out_dir;
};

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.N <= 0) throw Error(ErrorKind::SchemaError, "config.N must be positive, got " + std::to_string(cfg.N));
  if (static_cast<int>(cfg.rates.size()) != cfg.plant.l()) {
    throw Error(ErrorKind::SchemaError, "config.rates has " + std::to_string(cfg.rates.size()) +
                                            " entries but the plant has " + std::to_string(cfg.plant.l()) +
                                            " outputs");
  }
  if (!(cfg.tol.markov > 0) || !(cfg.tol.structure > 0) || !(cfg.tol.tf > 0)) {
    throw Error(ErrorKind::SchemaError, "config.tolerances must all be positive");
  }
  if (!(cfg.noise >= 0) || !std::isfinite(cfg.noise)) {
    throw Error(ErrorKind::SchemaError, "config.noise must be a finite non-negative number");
  }
  if (cfg.input.kind == InputSpec::Kind::UniformRandom && !(cfg.input.amplitude > 0)) {
    throw Error(ErrorKind::SchemaError, "config.input.amplitude must be positive");
  }
  if (cfg.input.kind == InputSpec::Kind::File && cfg.input.path.empty()) {
    throw Error(ErrorKind::SchemaError, "config.input: missing field 'path'");
  }
  for (int r : cfg.rates) {
    if (r < 1) throw Error(ErrorKind::SchemaError, "config.rates entries must be >= 1");
  }
}

inline Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["plant"] = Json{{"A", matrix_to_json(cfg.plant.A)},
                    {"B", matrix_to_json(cfg.plant.B)},
                    {"C", matrix_to_json(cfg.plant.C)},
                    {"D", matrix_to_json(cfg.plant.D)}};
  j["rates"] = cfg.rates;
  if (!cfg.offsets.empty()) j["offsets"] = cfg.offsets;
  if (cfg.input.kind == InputSpec::Kind::File) {
    j["input"] = Json{{"kind", "file"}, {"path", cfg.input.path}};
  } else {
    j["input"] = Json{{"kind", "uniform"}, {"amplitude", cfg.input.amplitude}, {"seed", cfg.input.seed}};
  }
  j["N"] = cfg.N;
  j["identification"] =
      Json{{"block_rows", cfg.id.block_rows}, {"order", cfg.id.order}, {"sv_gap_tol", cfg.id.sv_gap_tol}};
  j["tolerances"] = Json{{"markov", cfg.tol.markov}, {"structure", cfg.tol.structure}, {"tf", cfg.tol.tf}};
  j["convention"] = std::string(to_string(cfg.convention));
  j["noise"] = cfg.noise;
  if (!cfg.out_dir.empty()) j["output"] = Json{{"dir", cfg.out_dir}};
  return j;
}

inline ExperimentConfig config_from_json(const Json& j) {
  const std::string ctx = "config";
  if (!j.is_object()) throw Error(ErrorKind::SchemaError, "config: expected an object");
  ExperimentConfig cfg;
  const Json& plant = io::require(j, "plant", ctx);
  const auto mat = [&](const char* key) {
    return matrix_from_json(io::require(plant, key, "config.plant"), std::string("config.plant.") + key);
  };
  try {
    cfg.plant = make_state_space(mat("A"), mat("B"), mat("C"), mat("D"));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SchemaError) throw;
    throw Error(ErrorKind::SchemaError, std::string("config.plant: ") + e.what());
  }
  cfg.rates = io::field<std::vector<int>>(j, "rates", ctx);
  cfg.offsets = io::field_or<std::vector<int>>(j, "offsets", {}, ctx);
  if (!cfg.offsets.empty() && cfg.offsets.size() != cfg.rates.size()) {
    throw Error(ErrorKind::SchemaError, "config.offsets must have one entry per rate");
  }
  if (j.contains("input")) {
    const Json& in = j["input"];
    const auto kind = io::field_or<std::string>(in, "kind", "uniform", "config.input");
    if (kind == "uniform") {
      cfg.input.kind = InputSpec::Kind::UniformRandom;
      cfg.input.amplitude = io::field_or<double>(in, "amplitude", 1.0, "config.input");
      cfg.input.seed = io::field_or<std::uint64_t>(in, "seed", 1, "config.input");
    } else if (kind == "file") {
      cfg.input.kind = InputSpec::Kind::File;
      cfg.input.path = io::field<std::string>(in, "path", "config.input");
    } else {
      throw Error(ErrorKind::SchemaError, "config.input.kind must be 'uniform' or 'file'");
    }
  }
  cfg.N = io::field_or<int>(j, "N", cfg.N, ctx);
  if (j.contains("identification")) {
    const Json& id = j["identification"];
    cfg.id.block_rows = io::field_or<int>(id, "block_rows", 0, "config.identification");
    cfg.id.order = io::field_or<int>(id, "order", 0, "config.identification");
    cfg.id.sv_gap_tol = io::field_or<double>(id, "sv_gap_tol", cfg.id.sv_gap_tol, "config.identification");
  }
  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    cfg.tol.markov = io::field_or<double>(t, "markov", cfg.tol.markov, "config.tolerances");
    cfg.tol.structure = io::field_or<double>(t, "structure", cfg.tol.structure, "config.tolerances");
    cfg.tol.tf = io::field_or<double>(t, "tf", cfg.tol.tf, "config.tolerances");
  }
  cfg.convention = convention_choice_from_string(io::field_or<std::string>(j, "convention", "auto", ctx));
  cfg.noise = io::field_or<double>(j, "noise", 0.0, ctx);
  if (j.contains("output")) cfg.out_dir = io::field_or<std::string>(j["output"], "dir", "", "config.output");
  validate_config(cfg);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  return config_from_json(io::parse_json(io::read_text(path), path));
}

inline void save_config(const std::string& path, const ExperimentConfig& cfg) {
  io::write_text(path, config_to_json(cfg).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Data generation

inline Matrix uniform_input(int m, int N, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  Matrix u(m, N);
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < m; ++i) u(i, k) = dist(rng);
  }
  return u;
}

/// Adds uniform noise in [-amplitude, amplitude] to observed output samples only.
inline void add_output_noise(SignalLog& log, double amplitude, std::uint64_t seed) {
  if (amplitude <= 0.0) return;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  for (Eigen::Index k = 0; k < log.y.cols(); ++k) {
    for (Eigen::Index i = 0; i < log.y.rows(); ++i) {
      if (log.observed(i, k)) log.y(i, k) += dist(rng);
    }
  }
}

/// Plant input per the config: seeded uniform noise or the u columns of a signals file.
inline Matrix experiment_input(const ExperimentConfig& cfg) {
  if (cfg.input.kind == InputSpec::Kind::File) {
    const SignalLog file = load_signals(cfg.input.path);
    if (file.u.rows() != cfg.plant.m()) {
      throw Error(ErrorKind::SchemaError, cfg.input.path + ": has " + std::to_string(file.u.rows()) +
                                              " input columns, plant expects " + std::to_string(cfg.plant.m()));
    }
    if (file.N() < cfg.N) {
      throw Error(ErrorKind::InsufficientData, cfg.input.path + ": " + std::to_string(file.N()) +
                                                   " samples, config asks for " + std::to_string(cfg.N));
    }
    return file.u.leftCols(cfg.N);
  }
  return uniform_input(cfg.plant.m(), cfg.N, cfg.input.amplitude, cfg.input.seed);
}

inline SignalLog simulate_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const MultirateSpec spec = build_masks(cfg.rates, cfg.offsets);
  SignalLog log = simulate_multirate(cfg.plant, spec, experiment_input(cfg));
  add_output_noise(log, cfg.noise, cfg.input.seed);
  return log;
}

// ---------------------------------------------------------------------------
// Report

struct RankDiagnostics {
  // true cyclic reformulation of the configured plant
  int psi_c = 0;
  int psi_o = 0;
  int X_check = 0;
  int Y_check = 0;
  // identified model
  int id_psi_c = 0;
  int id_psi_o = 0;
  int id_X_check = 0;
  int T = 0;
  int X_star = 0;
};

struct ConventionAttempt {
  SelectorConvention convention = SelectorConvention::General;
  int T_rank = 0;
  double theorem1_worst = 0.0;
  bool accepted = false;
};

struct RunReport {
  std::uint64_t seed = 0;
  int N = 0;
  std::vector<int> rates;
  std::vector<int> offsets;
  CycleDims dims;
  double noise = 0.0;
  Tolerances tol;

  std::vector<int> assumption_phases;
  RankDiagnostics ranks;

  int block_rows = 0;
  double order_gap = 0.0;
  bool order_exposed = true;
  int input_hankel_rank = 0;
  std::vector<double> singular_values;

  int markov_depth = 0;
  bool markov_structure_passed = false;
  double markov_structure_worst = 0.0;
  int markov_structure_worst_i = 0;
  int markov_structure_worst_j = 0;
  bool markov_match_passed = false;
  double markov_match_worst = 0.0;
  int markov_match_worst_index = 0;

  std::vector<ConventionAttempt> attempts;
  std::optional<SelectorConvention> convention;
  bool convention_fallback = false;

  Theorem1Report theorem1;
  std::vector<Matrix> A_m;
  std::vector<Matrix> B_m;
  std::vector<Matrix> C_m;
  std::vector<Matrix> D_m;
  Matrix T;
  ComponentSpread spread;

  std::vector<double> tf_distances;
  std::vector<int> tf_phases;
  bool tf_passed = false;

  double time_simulate_s = 0.0;
  double time_identify_s = 0.0;
  double time_transform_s = 0.0;
  double time_total_s = 0.0;

  bool passed = false;
};

namespace detail {

inline Json structure_to_json(const StructureReport& r) {
  return Json{{"kind", r.kind == StructureKind::Cyclic ? "cyclic" : "block_diagonal"},
              {"max_offpattern", r.max_offpattern},
              {"passed", r.passed},
              {"tol", r.tol}};
}

inline StructureReport structure_from_json(const Json& j, const std::string& ctx) {
  StructureReport r;
  const auto kind = io::field<std::string>(j, "kind", ctx);
  r.kind = kind == "cyclic" ? StructureKind::Cyclic : StructureKind::BlockDiagonal;
  r.max_offpattern = io::field<double>(j, "max_offpattern", ctx);
  r.passed = io::field<bool>(j, "passed", ctx);
  r.tol = io::field<double>(j, "tol", ctx);
  return r;
}

}  // namespace detail

inline Json report_to_json(const RunReport& r) {
  Json j;
  j["format"] = "mrid-report";
  j["passed"] = r.passed;
  j["seed"] = r.seed;
  j["N"] = r.N;
  j["rates"] = r.rates;
  j["offsets"] = r.offsets;
  j["dims"] = Json{{"n", r.dims.n}, {"m", r.dims.m}, {"l", r.dims.l}, {"M", r.dims.M}};
  j["noise"] = r.noise;
  j["tolerances"] = Json{{"markov", r.tol.markov}, {"structure", r.tol.structure}, {"tf", r.tol.tf}};
  j["assumption_phases"] = r.assumption_phases;
  const auto& k = r.ranks;
  j["ranks"] = Json{{"psi_c", k.psi_c},       {"psi_o", k.psi_o},       {"X_check", k.X_check},
                    {"Y_check", k.Y_check},   {"id_psi_c", k.id_psi_c}, {"id_psi_o", k.id_psi_o},
                    {"id_X_check", k.id_X_check}, {"T", k.T},           {"X_star", k.X_star}};
  j["identification"] = Json{{"block_rows", r.block_rows},
                             {"order_gap", r.order_gap},
                             {"order_exposed", r.order_exposed},
                             {"input_hankel_rank", r.input_hankel_rank},
                             {"singular_values", r.singular_values}};
  j["markov"] = Json{{"depth", r.markov_depth},
                     {"structure_passed", r.markov_structure_passed},
                     {"structure_worst", r.markov_structure_worst},
                     {"structure_worst_i", r.markov_structure_worst_i},
                     {"structure_worst_j", r.markov_structure_worst_j},
                     {"match_passed", r.markov_match_passed},
                     {"match_worst", r.markov_match_worst},
                     {"match_worst_index", r.markov_match_worst_index}};
  Json attempts = Json::array();
  for (const auto& a : r.attempts) {
    attempts.push_back(Json{{"convention", std::string(to_string(a.convention))},
                            {"T_rank", a.T_rank},
                            {"theorem1_worst", a.theorem1_worst},
                            {"accepted", a.accepted}});
  }
  j["transform"] = Json{{"attempts", attempts},
                        {"convention", r.convention ? Json(std::string(to_string(*r.convention))) : Json(nullptr)},
                        {"fallback", r.convention_fallback}};
  Json th{{"A_cyclic", detail::structure_to_json(r.theorem1.A_cyclic)},
          {"B_cyclic", detail::structure_to_json(r.theorem1.B_cyclic)},
          {"C_block_diagonal", detail::structure_to_json(r.theorem1.C_block_diagonal)},
          {"D_block_diagonal", detail::structure_to_json(r.theorem1.D_block_diagonal)}};
  if (r.theorem1.X_star_block_diagonal) {
    th["X_star_block_diagonal"] = detail::structure_to_json(*r.theorem1.X_star_block_diagonal);
  }
  if (r.theorem1.X_star_rank) th["X_star_rank"] = *r.theorem1.X_star_rank;
  if (r.theorem1.Z_cyclic) th["Z_cyclic"] = detail::structure_to_json(*r.theorem1.Z_cyclic);
  j["theorem1"] = th;
  Json comps{{"A_m", matrices_to_json(r.A_m)},
             {"B_m", matrices_to_json(r.B_m)},
             {"C_m", matrices_to_json(r.C_m)},
             {"D_m", matrices_to_json(r.D_m)}};
  if (r.T.size() > 0) comps["T"] = matrix_to_json(r.T);
  comps["spread"] = Json{{"A", r.spread.A}, {"B", r.spread.B}};
  j["components"] = comps;
  j["transfer"] = Json{{"passed", r.tf_passed}, {"distances", r.tf_distances}, {"phases", r.tf_phases}};
  j["timings_s"] = Json{{"simulate", r.time_simulate_s},
                        {"identify", r.time_identify_s},
                        {"transform", r.time_transform_s},
                        {"total", r.time_total_s}};
  return j;
}

inline RunReport report_from_json(const Json& j) {
  const std::string ctx = "report";
  if (io::field<std::string>(j, "format", ctx) != "mrid-report") {
    throw Error(ErrorKind::SchemaError, "report: format must be 'mrid-report'");
  }
  RunReport r;
  r.passed = io::field<bool>(j, "passed", ctx);
  r.seed = io::field<std::uint64_t>(j, "seed", ctx);
  r.N = io::field<int>(j, "N", ctx);
  r.rates = io::field<std::vector<int>>(j, "rates", ctx);
  r.offsets = io::field<std::vector<int>>(j, "offsets", ctx);
  const Json& d = io::require(j, "dims", ctx);
  r.dims = CycleDims{io::field<int>(d, "n", "report.dims"), io::field<int>(d, "m", "report.dims"),
                     io::field<int>(d, "l", "report.dims"), io::field<int>(d, "M", "report.dims")};
  r.noise = io::field<double>(j, "noise", ctx);
  const Json& t = io::require(j, "tolerances", ctx);
  r.tol = Tolerances{io::field<double>(t, "markov", "report.tolerances"),
                     io::field<double>(t, "structure", "report.tolerances"),
                     io::field<double>(t, "tf", "report.tolerances")};
  r.assumption_phases = io::field<std::vector<int>>(j, "assumption_phases", ctx);
  const Json& k = io::require(j, "ranks", ctx);
  const std::string kc = "report.ranks";
  r.ranks = RankDiagnostics{io::field<int>(k, "psi_c", kc),    io::field<int>(k, "psi_o", kc),
                            io::field<int>(k, "X_check", kc),  io::field<int>(k, "Y_check", kc),
                            io::field<int>(k, "id_psi_c", kc), io::field<int>(k, "id_psi_o", kc),
                            io::field<int>(k, "id_X_check", kc), io::field<int>(k, "T", kc),
                            io::field<int>(k, "X_star", kc)};
  const Json& id = io::require(j, "identification", ctx);
  const std::string ic = "report.identification";
  r.block_rows = io::field<int>(id, "block_rows", ic);
  r.order_gap = io::field<double>(id, "order_gap", ic);
  r.order_exposed = io::field<bool>(id, "order_exposed", ic);
  r.input_hankel_rank = io::field<int>(id, "input_hankel_rank", ic);
  r.singular_values = io::field<std::vector<double>>(id, "singular_values", ic);
  const Json& mk = io::require(j, "markov", ctx);
  const std::string mc = "report.markov";
  r.markov_depth = io::field<int>(mk, "depth", mc);
  r.markov_structure_passed = io::field<bool>(mk, "structure_passed", mc);
  r.markov_structure_worst = io::field<double>(mk, "structure_worst", mc);
  r.markov_structure_worst_i = io::field<int>(mk, "structure_worst_i", mc);
  r.markov_structure_worst_j = io::field<int>(mk, "structure_worst_j", mc);
  r.markov_match_passed = io::field<bool>(mk, "match_passed", mc);
  r.markov_match_worst = io::field<double>(mk, "match_worst", mc);
  r.markov_match_worst_index = io::field<int>(mk, "match_worst_index", mc);
  const Json& tr = io::require(j, "transform", ctx);
  for (const auto& a : io::require(tr, "attempts", "report.transform")) {
    const std::string ac = "report.transform.attempts";
    r.attempts.push_back(ConventionAttempt{
        convention_from_string(io::field<std::string>(a, "convention", ac), ac),
        io::field<int>(a, "T_rank", ac), io::field<double>(a, "theorem1_worst", ac),
        io::field<bool>(a, "accepted", ac)});
  }
  const Json& conv = io::require(tr, "convention", "report.transform");
  if (!conv.is_null()) r.convention = convention_from_string(io::get_as<std::string>(conv, "report.transform.convention"), "report.transform.convention");
  r.convention_fallback = io::field<bool>(tr, "fallback", "report.transform");
  const Json& th = io::require(j, "theorem1", ctx);
  const std::string tc = "report.theorem1";
  r.theorem1.A_cyclic = detail::structure_from_json(io::require(th, "A_cyclic", tc), tc + ".A_cyclic");
  r.theorem1.B_cyclic = detail::structure_from_json(io::require(th, "B_cyclic", tc), tc + ".B_cyclic");
  r.theorem1.C_block_diagonal =
      detail::structure_from_json(io::require(th, "C_block_diagonal", tc), tc + ".C_block_diagonal");
  r.theorem1.D_block_diagonal =
      detail::structure_from_json(io::require(th, "D_block_diagonal", tc), tc + ".D_block_diagonal");
  if (th.contains("X_star_block_diagonal")) {
    r.theorem1.X_star_block_diagonal = detail::structure_from_json(th["X_star_block_diagonal"], tc + ".X_star");
  }
  if (th.contains("X_star_rank")) r.theorem1.X_star_rank = io::field<int>(th, "X_star_rank", tc);
  if (th.contains("Z_cyclic")) r.theorem1.Z_cyclic = detail::structure_from_json(th["Z_cyclic"], tc + ".Z_cyclic");
  const Json& cp = io::require(j, "components", ctx);
  const std::string cc = "report.components";
  r.A_m = matrices_from_json(io::require(cp, "A_m", cc), cc + ".A_m");
  r.B_m = matrices_from_json(io::require(cp, "B_m", cc), cc + ".B_m");
  r.C_m = matrices_from_json(io::require(cp, "C_m", cc), cc + ".C_m");
  r.D_m = matrices_from_json(io::require(cp, "D_m", cc), cc + ".D_m");
  if (cp.contains("T")) r.T = matrix_from_json(cp["T"], cc + ".T");
  const Json& sp = io::require(cp, "spread", cc);
  r.spread = ComponentSpread{io::field<double>(sp, "A", cc + ".spread"), io::field<double>(sp, "B", cc + ".spread")};
  const Json& tf = io::require(j, "transfer", ctx);
  r.tf_passed = io::field<bool>(tf, "passed", "report.transfer");
  r.tf_distances = io::field<std::vector<double>>(tf, "distances", "report.transfer");
  r.tf_phases = io::field<std::vector<int>>(tf, "phases", "report.transfer");
  const Json& tm = io::require(j, "timings_s", ctx);
  r.time_simulate_s = io::field<double>(tm, "simulate", "report.timings_s");
  r.time_identify_s = io::field<double>(tm, "identify", "report.timings_s");
  r.time_transform_s = io::field<double>(tm, "transform", "report.timings_s");
  r.time_total_s = io::field<double>(tm, "total", "report.timings_s");
  return r;
}

inline void save_report(const std::string& path, const RunReport& r) {
  io::write_text(path, report_to_json(r).dump(2) + "\n");
}

inline RunReport load_report(const std::string& path) {
  return report_from_json(io::parse_json(io::read_text(path), path));
}

// ---------------------------------------------------------------------------
// Orchestration

struct RunResult {
  std::optional<CyclicModel> model;  // empty when no convention produced a cyclic model
  IdentifiedModel identified;
  RunReport report;
  SignalLog data;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline std::vector<SelectorConvention> conventions_for(ConventionChoice c) {
  switch (c) {
    case ConventionChoice::General:
      return {SelectorConvention::General};
    case ConventionChoice::Example:
      return {SelectorConvention::Example};
    default:
      return {SelectorConvention::General, SelectorConvention::Example};
  }
}

inline MultirateSpec checked_spec(const ExperimentConfig& cfg, RunReport& rep) {
  validate_config(cfg);
  const MultirateSpec spec = build_masks(cfg.rates, cfg.offsets);
  rep.rates = spec.rates;
  rep.offsets = spec.offsets;
  rep.dims = CycleDims{cfg.plant.n(), cfg.plant.m(), cfg.plant.l(), spec.M};
  rep.tol = cfg.tol;
  rep.noise = cfg.noise;
  rep.seed = cfg.input.seed;
  rep.assumption_phases = check_observability_assumption(cfg.plant, spec);
  if (rep.assumption_phases.empty()) {
    throw Error(ErrorKind::AssumptionFailed,
                "no phase j makes (V_j C, A^M) observable; the plant cannot be identified with these rates");
  }
  return spec;
}

/// Steps 3-4 plus every diagnostic, for an already identified model. When `fixed_T`
/// is given it is used as the transform instead of building one.
inline std::optional<CyclicModel> analyze_identified(const IdentifiedModel& idm, const ExperimentConfig& cfg,
                                                     const MultirateSpec& spec, RunReport& rep,
                                                     const Matrix* fixed_T = nullptr,
                                                     SelectorConvention fixed_convention = SelectorConvention::Example) {
  const CycleDims d = dims_of(idm);
  const int Mn = d.M * d.n;
  const SelectorF F = default_selector_F(d.n, d.l);
  const SelectorG G = default_selector_G(d.n, d.m);
  const CycledSystem truth = cyclic_reformulate(cfg.plant, spec);

  auto [pc, po] = cycled_ranks(truth);
  rep.ranks.psi_c = pc;
  rep.ranks.psi_o = po;
  rep.ranks.X_check = rank_with_tol(build_X_check(truth, F, d.M));
  auto [ipc, ipo] = cycled_ranks(idm);
  rep.ranks.id_psi_c = ipc;
  rep.ranks.id_psi_o = ipo;
  rep.ranks.id_X_check = rank_with_tol(build_X_check(idm, F, d.M));

  rep.block_rows = idm.block_rows;
  rep.order_gap = idm.order_gap;
  rep.order_exposed = idm.order_exposed;
  rep.input_hankel_rank = idm.input_hankel_rank;
  rep.singular_values.assign(idm.singular_values.data(), idm.singular_values.data() + idm.singular_values.size());

  rep.markov_depth = default_markov_depth(d.M, d.n);
  const auto H_id = markov(idm, rep.markov_depth + 1);
  const auto ms = verify_markov_structure(H_id, d.l, d.m, d.M, cfg.tol.markov, rep.markov_depth);
  rep.markov_structure_passed = ms.passed;
  rep.markov_structure_worst = ms.worst;
  rep.markov_structure_worst_i = ms.worst_i;
  rep.markov_structure_worst_j = ms.worst_j;
  const auto mm = markov_match(markov(truth, rep.markov_depth + 1), H_id, rep.markov_depth, cfg.tol.markov);
  rep.markov_match_passed = mm.passed;
  rep.markov_match_worst = mm.worst_error;
  rep.markov_match_worst_index = mm.worst_index;

  const auto t0 = Clock::now();
  std::optional<TransformMatrix> chosen;
  std::optional<CycledModel> transformed;
  const auto conventions =
      fixed_T ? std::vector<SelectorConvention>{fixed_convention} : conventions_for(cfg.convention);
  for (const auto conv : conventions) {
    ConventionAttempt attempt;
    attempt.convention = conv;
    TransformMatrix tmx;
    if (fixed_T) {
      tmx = TransformMatrix{*fixed_T, rank_with_tol(*fixed_T), conv};
    } else {
      tmx = build_transform(idm, G, conv);
    }
    attempt.T_rank = tmx.rank;
    if (tmx.rank == Mn) {
      CycledModel tm = apply_transform(idm, tmx.T);
      const Theorem1Report th = verify_theorem1(tm, d, cfg.tol.structure);
      attempt.theorem1_worst = th.worst();
      rep.theorem1 = th;
      if (th.passed()) {
        attempt.accepted = true;
        chosen = tmx;
        transformed = std::move(tm);
      }
    }
    rep.attempts.push_back(attempt);
    if (chosen) break;
  }
  rep.ranks.Y_check = rank_with_tol(
      build_Y_check(truth, G, d.M, chosen ? chosen->convention : conventions.front()));

  std::optional<CyclicModel> cm;
  if (chosen) {
    rep.convention = chosen->convention;
    rep.convention_fallback = rep.attempts.size() > 1;
    rep.ranks.T = chosen->rank;
    const AppendixInputs appendix{&idm, &chosen->T, &F, &G};
    cm = extract_components(*transformed, d, cfg.tol.structure, chosen->T, appendix);
    rep.theorem1 = cm->theorem1;
    rep.ranks.X_star = cm->theorem1.X_star_rank.value_or(0);
    rep.A_m = cm->A_m;
    rep.B_m = cm->B_m;
    rep.C_m = cm->C_m;
    rep.D_m = cm->D_m;
    rep.T = cm->T;
    rep.spread = component_spread(*cm);
    const auto tc = model_transfer_check(*cm, cfg.plant, cfg.tol.tf, &spec);
    rep.tf_distances = tc.distances;
    rep.tf_phases = tc.phases;
    rep.tf_passed = tc.passed;
  } else if (!rep.attempts.empty()) {
    rep.ranks.T = rep.attempts.back().T_rank;
  }
  rep.time_transform_s = seconds_since(t0);
  rep.passed = cm.has_value() && rep.markov_structure_passed && rep.markov_match_passed && rep.tf_passed;
  return cm;
}

}  // namespace detail

/// Steps 1-4 on a given signal log. Never throws for a failed structure check; the
/// result then has no model and report.passed is false.
inline RunResult identify_signals(const ExperimentConfig& cfg, SignalLog data) {
  const auto t0 = detail::Clock::now();
  RunResult out;
  const MultirateSpec spec = detail::checked_spec(cfg, out.report);
  if (data.u.rows() != cfg.plant.m() || data.y.rows() != cfg.plant.l()) {
    throw Error(ErrorKind::DimensionMismatch, "signals have " + std::to_string(data.u.rows()) + " inputs and " +
                                                  std::to_string(data.y.rows()) + " outputs, plant has " +
                                                  std::to_string(cfg.plant.m()) + " and " +
                                                  std::to_string(cfg.plant.l()));
  }
  out.report.N = data.N();

  const auto t_id = detail::Clock::now();
  const CycledSignal uc = cycle_signal(data.u, spec.M);
  const CycledSignal yc = cycle_signal(data.y, spec.M);
  IdConfig id = cfg.id;
  if (id.order == 0) id.order = spec.M * cfg.plant.n();
  out.identified = subspace_identify(uc, yc, id);
  out.report.time_identify_s = detail::seconds_since(t_id);

  out.model = detail::analyze_identified(out.identified, cfg, spec, out.report);
  out.data = std::move(data);
  out.report.time_total_s = detail::seconds_since(t0);
  return out;
}

/// Simulates per the config, then identify_signals.
inline RunResult run_experiment(const ExperimentConfig& cfg) {
  RunReport probe;
  detail::checked_spec(cfg, probe);
  const auto t0 = detail::Clock::now();
  SignalLog data = simulate_experiment(cfg);
  const double t_sim = detail::seconds_since(t0);
  RunResult out = identify_signals(cfg, std::move(data));
  out.report.time_simulate_s = t_sim;
  out.report.time_total_s += t_sim;
  return out;
}

/// Algorithm driver: like run_experiment but throws StructureViolation when no
/// transform yields a cyclic model.
inline RunResult run_identification(const ExperimentConfig& cfg) {
  RunResult out = run_experiment(cfg);
  if (!out.model) {
    std::string detail;
    for (const auto& a : out.report.attempts) {
      detail += " " + std::string(to_string(a.convention)) + ": rank T " + std::to_string(a.T_rank) +
                ", worst off-pattern " + std::to_string(a.theorem1_worst) + ";";
    }
    throw Error(ErrorKind::StructureViolation, "no transform convention produced a cyclic model;" + detail);
  }
  return out;
}

/// Re-checks a stored model against the configured plant.
inline RunResult verify_model(const ModelFile& file, const ExperimentConfig& cfg) {
  const auto t0 = detail::Clock::now();
  RunResult out;
  const MultirateSpec spec = detail::checked_spec(cfg, out.report);
  if (file.rates != spec.rates || file.offsets != spec.offsets) {
    throw Error(ErrorKind::SchemaError, "model rates/offsets differ from the config");
  }
  if (file.model.n != cfg.plant.n() || file.model.m != cfg.plant.m() || file.model.l != cfg.plant.l()) {
    throw Error(ErrorKind::SchemaError, "model dimensions differ from the configured plant");
  }
  out.identified = file.model;
  out.report.N = file.N;
  out.report.seed = file.seed;
  const Matrix* T = file.T ? &*file.T : nullptr;
  out.model = detail::analyze_identified(file.model, cfg, spec, out.report, T, file.convention);
  out.report.time_total_s = detail::seconds_since(t0);
  return out;
}

inline ModelFile to_model_file(const RunResult& r) {
  ModelFile f;
  f.model = r.identified;
  f.rates = r.report.rates;
  f.offsets = r.report.offsets;
  if (r.model) f.T = r.model->T;
  f.convention = r.report.convention.value_or(SelectorConvention::Example);
  f.seed = r.report.seed;
  f.N = r.report.N;
  return f;
}

}  // namespace mrid

#endif  // MRID_PIPELINE_HPP
