#include "oscmon/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "oscmon/csv.hpp"

namespace oscmon {

namespace {

FeedForwardPlan plan_for(const ScenarioConfig& cfg) {
    if (cfg.probe_plan == "off") return FeedForwardPlan::off();
    if (cfg.probe_plan == "full") return FeedForwardPlan::full_from_start();
    return FeedForwardPlan::ramp(cfg.t_half_power, cfg.params.omega);
}

RunOptions options_for(const ScenarioConfig& cfg) {
    RunOptions opt;
    opt.duration = cfg.duration;
    opt.detect_from = cfg.t_detect_on;
    opt.stride = cfg.stride;
    opt.exact_rotation = cfg.exact_rotation;
    opt.feedback_modulates_kappa = cfg.feedback_modulates_kappa;
    return opt;
}

std::vector<OutputRow> run_with_seed(const ScenarioConfig& cfg, NoiseStream noise,
                                     InnovationNorm norm = InnovationNorm::HalfDt) {
    cfg.validate();
    RunOptions opt = options_for(cfg);
    opt.norm = norm;

    const PowerSchedule schedule = feed_forward_schedule(plan_for(cfg));
    const TrajectoryState initial{0.0, {0.0, 0.0},
                                  CovarianceBlockA::thermal(cfg.params.nbar)};

    if (cfg.feedback_enabled()) {
        FeedbackConfig fb;
        fb.gain = cfg.feedback_gain;
        fb.eps_max = cfg.feedback_eps_max;
        fb.delay = cfg.feedback_delay;
        fb.enabled_from = cfg.t_feedback_on;
        fb.compensate_delay = cfg.feedback_compensate_delay;
        FeedbackController controller(fb, cfg.params, cfg.params.dt);
        return run(initial, cfg.params, schedule, &controller, opt, noise);
    }
    return run(initial, cfg.params, schedule, nullptr, opt, noise);
}

}  // namespace

std::vector<OutputRow> run_scenario_rows(const ScenarioConfig& cfg) {
    return run_with_seed(cfg, NoiseStream(cfg.seed));
}

RunSummary run_scenario(const ScenarioConfig& cfg) {
    const auto rows = run_scenario_rows(cfg);
    write_csv(cfg.out_path(), rows);

    RunSummary s;
    s.out_path = cfg.out_path();
    s.rows = rows.size();
    const OutputRow& last = rows.back();
    s.final_a11 = last.a11;
    s.final_a22 = last.a22;
    s.final_n_eff = last.n_eff;
    if (cfg.detection_enabled() && cfg.params.eta > 0.0 &&
        cfg.params.kappa_sq() > 0.0) {
        s.analytic_a11 = steady_state_a11(cfg.params.gamma, cfg.params.kappa_sq(),
                                          cfg.params.eta, cfg.params.nbar);
        s.analytic_a11_reduced = steady_state_a11_reduced(
            cfg.params.gamma, cfg.params.kappa_sq(), cfg.params.eta,
            cfg.params.nbar);
        s.rel_dev_final_vs_analytic =
            std::abs(s.final_a11 - s.analytic_a11) / s.analytic_a11;
    }
    return s;
}

EnsembleResult run_ensemble(const ScenarioConfig& cfg, int n,
                            std::uint64_t master_seed,
                            const std::string& stats_out,
                            const std::string& out_dir) {
    if (n < 1) throw std::invalid_argument("run_ensemble: n must be >= 1");
    const NoiseStream master(master_seed);

    EnsembleResult result;
    result.trajectories.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        result.trajectories.push_back(
            run_with_seed(cfg, master.child(static_cast<std::uint64_t>(i))));
        if (!out_dir.empty()) {
            std::filesystem::create_directories(out_dir);
            write_csv(out_dir + "/traj_" + std::to_string(i) + ".csv",
                      result.trajectories.back());
        }
    }

    const auto& first = result.trajectories.front();
    const std::size_t n_times = first.size();
    result.sample_times.resize(n_times);
    result.var_mean_x.resize(n_times);
    result.mean_a11.resize(n_times);
    for (std::size_t ti = 0; ti < n_times; ++ti) {
        result.sample_times[ti] = first[ti].t_s;
        double mean = 0.0;
        for (const auto& traj : result.trajectories) mean += traj[ti].mean_x;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (const auto& traj : result.trajectories) {
            const double d = traj[ti].mean_x - mean;
            ss += d * d;
        }
        result.var_mean_x[ti] = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
        result.mean_a11[ti] = first[ti].a11;
    }

    if (!stats_out.empty()) {
        std::ofstream out(stats_out, std::ios::binary);
        if (!out) throw std::runtime_error("run_ensemble: cannot open " + stats_out);
        out << "t_s,var_mean_x,mean_a11\n";
        for (std::size_t ti = 0; ti < n_times; ++ti)
            out << format_g17(result.sample_times[ti]) << ','
                << format_g17(result.var_mean_x[ti]) << ','
                << format_g17(result.mean_a11[ti]) << '\n';
    }
    return result;
}

SweepGrid parse_sweep_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("sweep: cannot open grid file " + path);
    SweepGrid grid;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string key, eq;
        if (!(ss >> key)) continue;
        if (!(ss >> eq) || eq != "=")
            throw std::invalid_argument("sweep: " + path + ":" +
                                        std::to_string(lineno) +
                                        ": expected 'key = v1 v2 ...'");
        std::vector<double>* target = nullptr;
        if (key == "gamma") target = &grid.gamma;
        else if (key == "kappa_sq") target = &grid.kappa_sq;
        else if (key == "eta") target = &grid.eta;
        else if (key == "nbar") target = &grid.nbar;
        else
            throw std::invalid_argument("sweep: unknown grid key '" + key +
                                        "' (gamma, kappa_sq, eta, nbar)");
        double v;
        while (ss >> v) target->push_back(v);
        if (target->empty())
            throw std::invalid_argument("sweep: no values for '" + key + "'");
    }
    return grid;
}

std::vector<SweepPoint> run_sweep(const ScenarioConfig& base, const SweepGrid& grid,
                                  const std::string& out_csv) {
    SweepGrid g = grid;
    if (g.gamma.empty()) g.gamma = {base.params.gamma};
    if (g.kappa_sq.empty()) g.kappa_sq = {base.params.kappa_sq()};
    if (g.eta.empty()) g.eta = {base.params.eta};
    if (g.nbar.empty()) g.nbar = {base.params.nbar};

    std::vector<SweepPoint> table;
    for (double gamma : g.gamma)
        for (double kappa_sq : g.kappa_sq)
            for (double eta : g.eta)
                for (double nbar : g.nbar) {
                    SimParams p = base.params;
                    p.gamma = gamma;
                    p.kappa_sq_override = kappa_sq;
                    p.eta = eta;
                    p.nbar = nbar;

                    SweepPoint pt;
                    pt.gamma = gamma;
                    pt.kappa_sq = kappa_sq;
                    pt.eta = eta;
                    pt.nbar = nbar;
                    pt.a11_exact = steady_state_a11(gamma, kappa_sq, eta, nbar);
                    pt.a11_reduced =
                        steady_state_a11_reduced(gamma, kappa_sq, eta, nbar);
                    pt.a11_sim = simulated_steady_state_a11(p);
                    pt.dev_reduced_rel =
                        std::abs(pt.a11_reduced - pt.a11_exact) / pt.a11_exact;
                    pt.dev_sim_rel =
                        std::abs(pt.a11_sim - pt.a11_exact) / pt.a11_exact;
                    table.push_back(pt);
                }

    if (!out_csv.empty()) {
        std::ofstream out(out_csv, std::ios::binary);
        if (!out) throw std::runtime_error("sweep: cannot open " + out_csv);
        out << "gamma,kappa_sq,eta,nbar,a11_exact,a11_reduced,a11_sim,"
               "dev_reduced_rel,dev_sim_rel\n";
        for (const auto& pt : table)
            out << format_g17(pt.gamma) << ',' << format_g17(pt.kappa_sq) << ','
                << format_g17(pt.eta) << ',' << format_g17(pt.nbar) << ','
                << format_g17(pt.a11_exact) << ',' << format_g17(pt.a11_reduced)
                << ',' << format_g17(pt.a11_sim) << ','
                << format_g17(pt.dev_reduced_rel) << ','
                << format_g17(pt.dev_sim_rel) << '\n';
    }
    return table;
}

TripleAgreement check_triple_agreement(const SimParams& params) {
    TripleAgreement t;
    t.exact = steady_state_a11(params.gamma, params.kappa_sq(), params.eta,
                               params.nbar);
    t.reduced = steady_state_a11_reduced(params.gamma, params.kappa_sq(),
                                         params.eta, params.nbar);
    t.simulated = simulated_steady_state_a11(params);
    const double lo = std::min({t.exact, t.reduced, t.simulated});
    const double hi = std::max({t.exact, t.reduced, t.simulated});
    t.max_rel_spread = (hi - lo) / t.exact;
    t.pass = t.max_rel_spread < 0.01;
    return t;
}

EnginePairCheck check_engines(const SimParams& params, double duration, double tau) {
    EnginePairCheck c;
    c.discrepancy = engines_agree(params, duration, tau, true);
    c.discrepancy_half = engines_agree(params, duration, 0.5 * tau, true);
    c.ratio = c.discrepancy / c.discrepancy_half;
    c.pass = c.discrepancy < 1e-3 && c.ratio >= 1.7 && c.ratio <= 2.3;
    return c;
}

VarianceOracleCheck check_total_variance(const SimParams& params, int n,
                                         double duration, double sample_every) {
    SimParams p = params;
    RunOptions opt;
    opt.duration = duration;
    opt.detect_from = 0.0;
    opt.stride = std::max<int>(1, static_cast<int>(std::llround(sample_every / p.dt)));

    const PowerSchedule schedule =
        feed_forward_schedule(FeedForwardPlan::full_from_start());
    const TrajectoryState initial{0.0, {0.0, 0.0},
                                  CovarianceBlockA::thermal(p.nbar)};
    const NoiseStream master(20260501);

    const auto run_ensemble_with = [&](InnovationNorm norm) {
        std::vector<std::vector<OutputRow>> ens;
        ens.reserve(static_cast<std::size_t>(n));
        RunOptions o = opt;
        o.norm = norm;
        for (int i = 0; i < n; ++i) {
            NoiseStream noise = master.child(static_cast<std::uint64_t>(i));
            ens.push_back(run(initial, p, schedule, nullptr, o, noise));
        }
        return ens;
    };

    // eta = 0 reference: unconditioned covariance, same probe power
    SimParams pref = p;
    pref.eta = 0.0;
    NoiseStream unused(0);
    RunOptions oref = opt;
    oref.stochastic_means = false;
    const auto reference = run(initial, pref, schedule, nullptr, oref, unused);

    VarianceOracleCheck out;
    out.main = total_variance_oracle(run_ensemble_with(InnovationNorm::HalfDt),
                                     reference);
    out.negative_control = total_variance_oracle(
        run_ensemble_with(InnovationNorm::FullDt), reference);
    out.pass = out.main.pass && !out.negative_control.pass;
    return out;
}

int run_verify(std::ostream& log, int ensemble_n, const std::string& report_csv) {
    const SimParams params = scenario_defaults("figure2").params;
    int failures = 0;
    const auto report = [&](bool pass, const std::string& line) {
        log << (pass ? "[PASS] " : "[FAIL] ") << line << '\n';
        if (!pass) ++failures;
    };

    const TripleAgreement t = check_triple_agreement(params);
    {
        std::ostringstream ss;
        ss << "steady-state triple agreement: exact=" << t.exact
           << " reduced=" << t.reduced << " integrated=" << t.simulated
           << " spread=" << t.max_rel_spread << " (limit 0.01)";
        report(t.pass, ss.str());
    }

    const EnginePairCheck e = check_engines(params, 10e-6, 1e-9);
    {
        std::ostringstream ss;
        ss << "discrete/continuous agreement: d(1ns)=" << e.discrepancy
           << " d(0.5ns)=" << e.discrepancy_half << " ratio=" << e.ratio
           << " (limits <1e-3, ratio in [1.7,2.3])";
        report(e.pass, ss.str());
    }

    const VarianceOracleCheck v =
        check_total_variance(params, ensemble_n, 20e-6, 0.5e-6);
    {
        std::ostringstream ss;
        ss << "law-of-total-variance: worst |dev|/SE=" << v.main.worst_dev_over_se
           << " (limit 5), mis-normalized control "
           << (v.negative_control.pass ? "unexpectedly passed" : "fails as required");
        report(v.pass, ss.str());
    }

    if (!report_csv.empty()) {
        std::ofstream out(report_csv, std::ios::binary);
        if (!out) throw std::runtime_error("verify: cannot open " + report_csv);
        out << "t_s,var_mean_x,ensemble_a11,reference_a11,deviation,se\n";
        for (const auto& pt : v.main.points)
            out << format_g17(pt.t) << ',' << format_g17(pt.var_mean_x) << ','
                << format_g17(pt.ensemble_a11) << ','
                << format_g17(pt.reference_a11) << ',' << format_g17(pt.deviation)
                << ',' << format_g17(pt.se) << '\n';
        log << "variance-oracle points written to " << report_csv << '\n';
    }

    return failures == 0 ? 0 : 1;
}

}  // namespace oscmon
