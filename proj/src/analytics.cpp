#include "oscmon/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oscmon {

double steady_state_a11(double gamma, double kappa_sq, double eta, double nbar) {
    if (eta <= 0.0)
        throw std::invalid_argument(
            "steady_state_a11: eta must be > 0 (no detection, no "
            "measurement-limited steady state)");
    if (kappa_sq <= 0.0)
        throw std::invalid_argument("steady_state_a11: kappa_sq must be > 0");
    const double ek2 = eta * kappa_sq;
    const double disc =
        gamma * gamma + ek2 * (kappa_sq + 2.0 * gamma * (2.0 * nbar + 1.0));
    return (-gamma + std::sqrt(disc)) / ek2;  // positive root
}

double steady_state_a11_reduced(double gamma, double kappa_sq, double eta,
                                double nbar) {
    if (eta <= 0.0)
        throw std::invalid_argument("steady_state_a11_reduced: eta must be > 0");
    if (kappa_sq <= 0.0)
        throw std::invalid_argument(
            "steady_state_a11_reduced: kappa_sq must be > 0");
    return std::sqrt(1.0 + (2.0 * gamma / kappa_sq) * (2.0 * nbar + 1.0)) /
           std::sqrt(eta);
}

double effective_quanta(const CovarianceBlockA& a) {
    return 0.25 * (a.a11 + a.a22) - 0.5;
}

double quanta_to_temperature(double n_eff, double omega) {
    if (n_eff < 0.0)
        throw std::invalid_argument("quanta_to_temperature: n_eff must be >= 0");
    if (n_eff == 0.0) return 0.0;
    return kHbar * omega / (kBoltzmann * std::log1p(1.0 / n_eff));
}

double temperature_to_nbar(double temperature, double omega) {
    if (temperature <= 0.0) return 0.0;
    return 1.0 / std::expm1(kHbar * omega / (kBoltzmann * temperature));
}

SteadyStateReport steady_state_report(const SimParams& params) {
    SteadyStateReport r;
    r.a11_exact =
        steady_state_a11(params.gamma, params.kappa_sq(), params.eta, params.nbar);
    r.a11_reduced = steady_state_a11_reduced(params.gamma, params.kappa_sq(),
                                             params.eta, params.nbar);
    r.n_eff = effective_quanta(
        {r.a11_exact, 0.0, 0.0, r.a11_exact});
    r.t_eff_kelvin = quanta_to_temperature(r.n_eff, params.omega);
    return r;
}

double simulated_steady_state_a11(const SimParams& params, double duration,
                                  double dt) {
    const double a_guess =
        steady_state_a11(params.gamma, params.kappa_sq(), params.eta, params.nbar);
    const double rate = params.eta * params.kappa_sq() * a_guess + params.gamma;
    const double start = params.thermal_diag();
    if (duration <= 0.0) {
        // far-field approach plus enough e-foldings for ~1e-4 residual
        duration = (std::log(std::max(start / a_guess, 1.0)) + std::log(1e4)) / rate;
        duration = std::max(duration, 50.0 / params.omega);
    }
    if (dt <= 0.0) {
        dt = std::min(0.09 / params.omega,
                      0.1 / (params.eta * params.kappa_sq() * start +
                             params.gamma * start + params.kappa_sq() + 1.0));
    }

    SimParams p = params;
    p.dt = dt;
    NoiseStream unused(0);
    RunOptions opt;
    opt.duration = duration;
    opt.detect_from = 0.0;
    opt.stride = std::max<int>(1, static_cast<int>(std::llround(duration / dt) / 4000));
    opt.stochastic_means = false;
    const auto rows = run({0.0, {0.0, 0.0}, CovarianceBlockA::thermal(p.nbar)}, p,
                          feed_forward_schedule(FeedForwardPlan::full_from_start()),
                          nullptr, opt, unused);

    const std::size_t tail = std::max<std::size_t>(rows.size() / 10, 1);
    double sum = 0.0;
    for (std::size_t i = rows.size() - tail; i < rows.size(); ++i)
        sum += rows[i].a11;
    return sum / static_cast<double>(tail);
}

OracleReport total_variance_oracle(
    const std::vector<std::vector<OutputRow>>& ensemble,
    const std::vector<OutputRow>& reference) {
    const std::size_t n = ensemble.size();
    if (n < 100)
        throw std::invalid_argument(
            "total_variance_oracle: ensemble size must be >= 100");
    const std::size_t n_times = reference.size();
    for (const auto& traj : ensemble)
        if (traj.size() != n_times)
            throw std::invalid_argument(
                "total_variance_oracle: trajectories and reference must share "
                "the sampling grid");

    OracleReport report;
    report.pass = true;
    report.points.reserve(n_times);
    const double dn = static_cast<double>(n);

    std::vector<double> xs(n);
    for (std::size_t ti = 0; ti < n_times; ++ti) {
        for (std::size_t i = 0; i < n; ++i) xs[i] = ensemble[i][ti].mean_x;

        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= dn;
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        const double var = ss / (dn - 1.0);

        // jackknife over leave-one-out variances
        double jsum = 0.0, jsum2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = xs[i] - mean;
            // sum of squared deviations about the leave-one-out mean
            const double ss_i = ss - d * d * dn / (dn - 1.0);
            const double var_i = ss_i / (dn - 2.0);
            jsum += var_i;
            jsum2 += var_i * var_i;
        }
        const double jmean = jsum / dn;
        const double se_var =
            std::sqrt(std::max((dn - 1.0) / dn * (jsum2 - dn * jmean * jmean), 0.0));

        OracleReport::Point pt;
        pt.t = reference[ti].t_s;
        pt.var_mean_x = var;
        pt.ensemble_a11 = ensemble[0][ti].a11;
        pt.reference_a11 = reference[ti].a11;
        pt.deviation = 2.0 * var + pt.ensemble_a11 - pt.reference_a11;
        pt.se = 2.0 * se_var;

        const double slack = 1e-9 * (1.0 + std::abs(pt.reference_a11));
        if (std::abs(pt.deviation) > 5.0 * pt.se + slack) report.pass = false;
        report.worst_dev_over_se = std::max(
            report.worst_dev_over_se, std::abs(pt.deviation) / (pt.se + slack));
        report.points.push_back(pt);
    }
    return report;
}

double engines_agree(const SimParams& params, double duration, double tau,
                     bool exact_rotation) {
    SimParams p = params;
    p.dt = tau;
    p.validate();

    // continuous-limit side, covariance only
    NoiseStream unused(0);
    RunOptions opt;
    opt.duration = duration;
    opt.detect_from = 0.0;
    opt.stride = 1;
    opt.exact_rotation = exact_rotation;
    opt.stochastic_means = false;
    const auto rows = run({0.0, {0.0, 0.0}, CovarianceBlockA::thermal(p.nbar)}, p,
                          feed_forward_schedule(FeedForwardPlan::full_from_start()),
                          nullptr, opt, unused);

    // discrete segment side at the same step
    const MapKind kind =
        exact_rotation ? MapKind::ExactRotation : MapKind::FirstOrder;
    const ProbeSegment seg = ProbeSegment::from_params(p, tau, 1.0, p.eta);
    MechState state{{0.0, 0.0}, CovarianceBlockA::thermal(p.nbar)};

    double worst = 0.0;
    const long long n_steps = std::llround(duration / tau);
    for (long long i = 0; i <= n_steps; ++i) {
        const OutputRow& row = rows[static_cast<std::size_t>(i)];
        const CovarianceBlockA& a = state.cov;
        const double scale = row.a11;
        worst = std::max({worst, std::abs(a.a11 - row.a11) / scale,
                          std::abs(a.a12 - row.a12) / scale,
                          std::abs(a.a22 - row.a22) / scale});
        if (i < n_steps) state = discrete_step(state, seg, p, kind, 0.0);
    }
    return worst;
}

}  // namespace oscmon
