#ifndef MRID_DEMO_HPP
#define MRID_DEMO_HPP

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mrid/benchmark.hpp"
#include "mrid/pipeline.hpp"

namespace mrid {

struct DemoOptions {
  int N = 3000;
  std::uint64_t seed = 20240;
  double noise = 0.0;
  ConventionChoice convention = ConventionChoice::Auto;
  double tol_structure = 1e-6;
  double tol_tf = 1e-6;
  std::string out_dir;  // empty: nothing written
};

inline ExperimentConfig benchmark_config(const std::vector<int>& rates, const DemoOptions& opt = {}) {
  ExperimentConfig cfg;
  cfg.plant = benchmark::plant();
  cfg.rates = rates;
  cfg.N = opt.N;
  cfg.input.seed = opt.seed;
  cfg.noise = opt.noise;
  cfg.convention = opt.convention;
  cfg.tol.structure = opt.tol_structure;
  cfg.tol.tf = opt.tol_tf;
  return cfg;
}

namespace detail {

struct DemoLedger {
  std::vector<std::pair<std::string, bool>> checks;

  void add(std::ostream& os, const std::string& name, bool ok, const std::string& detail) {
    checks.emplace_back(name, ok);
    os << "  [" << (ok ? "ok  " : "FAIL") << "] " << name << ": " << detail << "\n";
  }
  bool all() const {
    for (const auto& c : checks) {
      if (!c.second) return false;
    }
    return !checks.empty();
  }
};

inline std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

/// Display view: magnitudes below 1e-9 print as 0.
inline std::string matrix_block(const Matrix& raw, const std::string& indent) {
  const Matrix m = raw.unaryExpr([](double v) { return std::abs(v) < 1e-9 ? 0.0 : v; });
  std::ostringstream os;
  const Eigen::IOFormat fmt(6, 0, "  ", "\n" + indent, "", "", indent, "");
  os << m.format(fmt);
  return os.str();
}

inline void write_outputs(const DemoOptions& opt, const std::string& stem, const RunResult& r) {
  if (opt.out_dir.empty()) return;
  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path dir(opt.out_dir);
  save_report((dir / (stem + "_report.json")).string(), r.report);
  save_signals((dir / (stem + "_signals.csv")).string(), r.data);
  save_model((dir / (stem + "_model.json")).string(), to_model_file(r));
}

inline double max_shifted_markov_error(const std::vector<Matrix>& H, const std::vector<Matrix>& expected, int m, int M) {
  double worst = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const int power = static_cast<int>(i) + 1;
    const Matrix shifted = H[i + 1] * shift_power(m, M, power);
    worst = std::max(worst, max_abs(shifted - expected[i]));
  }
  return worst;
}

}  // namespace detail

/// Runs both built-in studies, prints a summary and returns 0 iff every check passed, 4 otherwise.
/// Identification errors (for instance too few samples) propagate as Error.
inline int demo_paper(std::ostream& os, const DemoOptions& opt = {}) {
  detail::DemoLedger ledger;
  const StateSpace plant = benchmark::plant();

  // Study A: rates (1, 3)
  {
    const ExperimentConfig cfg = benchmark_config(benchmark::rates_fast_slow(), opt);
    const MultirateSpec spec = build_masks(cfg.rates);
    os << "Study A: rates (1, 3), M = " << spec.M << ", N = " << cfg.N << ", seed " << cfg.input.seed
       << ", noise " << cfg.noise << "\n";
    const CycledSystem cs = cyclic_reformulate(plant, spec);
    const auto expected = benchmark::shifted_markov_fast_slow();
    const double true_err = detail::max_shifted_markov_error(markov(cs, 5), expected, cs.m, cs.M);
    ledger.add(os, "true H(i) S^i, i = 1..4", true_err <= 1e-12, "max error " + detail::sci(true_err));

    const RunResult r = run_experiment(cfg);
    detail::write_outputs(opt, "fast_slow", r);
    const double id_err = detail::max_shifted_markov_error(markov(r.identified, 5), expected, cs.m, cs.M);
    ledger.add(os, "identified H(i) S^i, i = 1..4", id_err <= 1e-3, "max error " + detail::sci(id_err));
    ledger.add(os, "identified Markov structure (depth " + std::to_string(r.report.markov_depth) + ")",
               r.report.markov_structure_passed, "worst off-pattern " + detail::sci(r.report.markov_structure_worst));
    os << "  H(1) S:\n" << detail::matrix_block(markov(r.identified, 2)[1] * shift_power(1, 3, 1), "    ") << "\n";
  }

  // Study B: rates (2, 3)
  {
    const ExperimentConfig cfg = benchmark_config(benchmark::rates_two_three(), opt);
    const MultirateSpec spec = build_masks(cfg.rates);
    const int Mn = spec.M * plant.n();
    os << "Study B: rates (2, 3), M = " << spec.M << ", N = " << cfg.N << ", seed " << cfg.input.seed
       << ", noise " << cfg.noise << "\n";
    const RunResult r = run_experiment(cfg);
    detail::write_outputs(opt, "two_three", r);
    const RunReport& rep = r.report;
    const auto& k = rep.ranks;
    os << "  ranks: psi_c " << k.psi_c << ", psi_o " << k.psi_o << ", X_check " << k.X_check << ", Y_check "
       << k.Y_check << ", T " << k.T << ", X* " << k.X_star << " (Mn = " << Mn << ")\n";
    os << "  identification: block rows " << rep.block_rows << ", order gap " << detail::sci(rep.order_gap)
       << ", " << std::fixed << std::setprecision(2) << rep.time_total_s << " s" << std::defaultfloat << "\n";
    if (!rep.order_exposed) {
      os << "  warning: OrderNotExposed, singular value ratio " << detail::sci(rep.order_gap) << " > "
         << cfg.id.sv_gap_tol << "\n";
    }
    ledger.add(os, "rank psi_c = psi_o = " + std::to_string(Mn), k.psi_c == Mn && k.psi_o == Mn,
               std::to_string(k.psi_c) + ", " + std::to_string(k.psi_o));
    ledger.add(os, "rank T = " + std::to_string(Mn), k.T == Mn, std::to_string(k.T));
    ledger.add(os, "identified Markov structure (depth " + std::to_string(rep.markov_depth) + ")",
               rep.markov_structure_passed, "worst off-pattern " + detail::sci(rep.markov_structure_worst));
    ledger.add(os, "Markov match to the plant", rep.markov_match_passed, "worst " + detail::sci(rep.markov_match_worst));
    for (const auto& a : rep.attempts) {
      os << "  transform " << to_string(a.convention) << ": rank " << a.T_rank << ", worst off-pattern "
         << detail::sci(a.theorem1_worst) << (a.accepted ? " (accepted)" : "") << "\n";
    }
    if (!r.model) {
      ledger.add(os, "cyclic structure after transform", false, "no convention produced a cyclic model");
    } else {
      const CyclicModel& cm = *r.model;
      const auto& th = rep.theorem1;
      ledger.add(os, "A_m, B_m cyclic; C_m, D_m block diagonal", th.passed(),
                 "worst off-pattern " + detail::sci(th.worst()));
      ledger.add(os, "A_m0..A_m" + std::to_string(spec.M - 1) + " equal", rep.spread.A <= opt.tol_structure,
                 "spread " + detail::sci(rep.spread.A));
      const double c1 = max_abs(cm.C_m[1]);
      const double c5 = max_abs(cm.C_m[5]);
      ledger.add(os, "C_m1 = C_m5 = 0", std::max(c1, c5) <= opt.tol_structure,
                 detail::sci(c1) + ", " + detail::sci(c5));
      os << "  A_m0:\n" << detail::matrix_block(cm.A_m[0], "    ") << "\n";
      const auto tfs = transfer_functions(phase_system(cm, 0));
      const auto ref = benchmark::expected_transfer_functions();
      for (std::size_t i = 0; i < ref.size(); ++i) {
        const double dist = tf_distance(tfs[i][0], ref[i]);
        os << "  TF" << i + 1 << " identified: " << to_string(tfs[i][0], 1e-8) << "\n";
        os << "  TF" << i + 1 << " expected:   " << to_string(ref[i]) << "\n";
        ledger.add(os, "TF" + std::to_string(i + 1) + " coefficients", dist <= opt.tol_tf,
                   "distance " + detail::sci(dist));
      }
    }
  }

  const bool ok = ledger.all();
  os << (ok ? "all checks passed" : "some checks FAILED") << "\n";
  return ok ? 0 : 4;
}

}  // namespace mrid

#endif  // MRID_DEMO_HPP
