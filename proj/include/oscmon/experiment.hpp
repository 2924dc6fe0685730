#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "oscmon/analytics.hpp"
#include "oscmon/config.hpp"
#include "oscmon/trajectory_engine.hpp"

namespace oscmon {

/// Trajectory for a resolved scenario; no file I/O.
std::vector<OutputRow> run_scenario_rows(const ScenarioConfig& cfg);

struct RunSummary {
    std::string out_path;
    std::size_t rows = 0;
    double final_a11 = 0.0;
    double final_a22 = 0.0;
    double final_n_eff = 0.0;
    double analytic_a11 = 0.0;
    double analytic_a11_reduced = 0.0;
    double rel_dev_final_vs_analytic = 0.0;
};

/// Executes the scenario stages, writes the CSV, returns the summary.
/// The steady-state comparison is computed with the analytics module.
RunSummary run_scenario(const ScenarioConfig& cfg);

struct EnsembleResult {
    std::vector<std::vector<OutputRow>> trajectories;
    std::vector<double> sample_times;
    std::vector<double> var_mean_x;
    std::vector<double> mean_a11;
};

/// N independent trajectories with per-member substreams derived from the
/// master seed; statistics are independent of execution order.  Per-member
/// CSVs are written only when out_dir is non-empty.
EnsembleResult run_ensemble(const ScenarioConfig& cfg, int n,
                            std::uint64_t master_seed,
                            const std::string& stats_out = "",
                            const std::string& out_dir = "");

struct SweepPoint {
    double gamma = 0.0, kappa_sq = 0.0, eta = 0.0, nbar = 0.0;
    double a11_exact = 0.0, a11_reduced = 0.0, a11_sim = 0.0;
    double dev_reduced_rel = 0.0, dev_sim_rel = 0.0;
};

struct SweepGrid {
    std::vector<double> gamma, kappa_sq, eta, nbar;
};

SweepGrid parse_sweep_grid(const std::string& path);

/// Steady-state table over the cartesian grid: both closed forms plus the
/// long-run integration, with relative deviations from the exact form.
std::vector<SweepPoint> run_sweep(const ScenarioConfig& base, const SweepGrid& grid,
                                  const std::string& out_csv = "");

// ---- cross-validation checks shared by `verify` and the acceptance suite ----

struct TripleAgreement {
    double exact = 0.0, reduced = 0.0, simulated = 0.0;
    double max_rel_spread = 0.0;
    bool pass = false;  // all three within 1%
};
TripleAgreement check_triple_agreement(const SimParams& params);

struct EnginePairCheck {
    double discrepancy = 0.0;       // at tau
    double discrepancy_half = 0.0;  // at tau/2
    double ratio = 0.0;
    bool pass = false;  // discrepancy < 1e-3 and ratio in [1.7, 2.3]
};
EnginePairCheck check_engines(const SimParams& params, double duration, double tau);

struct VarianceOracleCheck {
    OracleReport main;
    OracleReport negative_control;
    bool pass = false;  // main passes, mis-normalized control fails
};
VarianceOracleCheck check_total_variance(const SimParams& params, int n,
                                         double duration, double sample_every);

/// Runs the three checks above at the reference parameter set, streaming
/// PASS/FAIL lines; returns 0 when everything passes.  When report_csv is
/// non-empty the variance-oracle points are written there.
int run_verify(std::ostream& log, int ensemble_n = 1000,
               const std::string& report_csv = "");

}  // namespace oscmon
