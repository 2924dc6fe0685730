#include "oscmon/trajectory_engine.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "oscmon/analytics.hpp"

namespace oscmon {

PowerSchedule feed_forward_schedule(const FeedForwardPlan& plan) {
    return {plan};
}

namespace {

// Eq-of-motion terms excluding the free rotation; the rotation is applied
// exactly afterwards when exact_rotation is on.
CovDeriv nonrotation_terms(const CovarianceBlockA& a, double kappa2, double eta,
                           double gamma, double thermal) {
    const double ek2 = eta * kappa2;
    return {-ek2 * a.a11 * a.a11 - gamma * (a.a11 - thermal),
            -ek2 * a.a11 * a.a12 - gamma * a.a12,
            -ek2 * a.a11 * a.a21 - gamma * a.a21,
            kappa2 - ek2 * a.a12 * a.a21 - gamma * (a.a22 - thermal)};
}

// purity_budget is the accumulated first-order-scheme purity leak
// (sum of eta kappa^4 a11^2 dt^2); near-pure states sit on the det = 1
// boundary and no explicit scheme can hold it tighter than this.
void check_state(const CovarianceBlockA& a, const MechMoments& m, double t,
                 double purity_budget) {
    if (a.finite() && m.finite() && a.a11 > 0.0 && a.a22 > 0.0 &&
        a.det() >= 1.0 - kEpsTol - purity_budget)
        return;
    throw std::runtime_error(
        "trajectory run: covariance invariant broken at t=" + std::to_string(t) +
        " s (a11=" + std::to_string(a.a11) + ", det=" + std::to_string(a.det()) +
        ")");
}

}  // namespace

CovDeriv covariance_derivative(const CovarianceBlockA& a, const SimParams& params,
                               double p) {
    if (p < 0.0)
        throw std::invalid_argument("covariance_derivative: p must be >= 0");
    const double k2 = p * params.kappa_sq();
    CovDeriv d = nonrotation_terms(a, k2, params.eta, params.gamma,
                                   params.thermal_diag());
    const double w = params.omega;
    d.d11 += w * (a.a21 + a.a12);
    d.d12 += -w * (a.a11 - a.a22);
    d.d21 += -w * (a.a11 - a.a22);
    d.d22 += -w * (a.a21 + a.a12);
    return d;
}

double drift_rate(const SimParams& params, double p) {
    if (p < 0.0) throw std::invalid_argument("drift_rate: p must be >= 0");
    return 2.0 * params.k * params.phi * p;
}

Vec2 mean_derivative(const MechMoments& m, const SimParams& params, double p) {
    const double hg = 0.5 * params.gamma;
    return {params.omega * m.mean_p - hg * m.mean_x,
            -params.omega * m.mean_x - hg * m.mean_p + drift_rate(params, p)};
}

MechMoments stochastic_mean_update(const MechMoments& m, const CovarianceBlockA& a,
                                   const SimParams& params, double p, double dW) {
    const double kappa_t = std::sqrt(p * params.kappa_sq());
    const double f = std::sqrt(params.eta) * kappa_t * dW;
    return {m.mean_x + a.a11 * f, m.mean_p + a.a21 * f};
}

std::vector<OutputRow> run(const TrajectoryState& initial, const SimParams& params,
                           const PowerSchedule& schedule,
                           FeedbackController* controller, const RunOptions& opt,
                           NoiseStream& noise) {
    params.validate();
    if (opt.duration <= 0.0)
        throw std::invalid_argument("run: duration must be > 0");
    if (opt.stride < 1) throw std::invalid_argument("run: stride must be >= 1");

    const double dt = params.dt;
    const long long n_steps = std::llround(opt.duration / dt);
    const double thermal = params.thermal_diag();
    const double eps_max = controller ? controller->config().eps_max : 0.0;

    // one-step propagators for the deterministic mean flow:
    // m' = M m + G b with M = e^{-gamma dt/2} R(w dt) and b = (0, drift)
    const Mat2 rot = Mat2::rotation(params.omega * dt);
    const double mean_decay = std::exp(-0.5 * params.gamma * dt);
    const Mat2 mprop = rot * mean_decay;
    const Mat2 omega_gen{-0.5 * params.gamma, params.omega, -params.omega,
                         -0.5 * params.gamma};
    const Mat2 gprop = omega_gen.inverse() * (mprop - Mat2::identity());

    MechMoments m = initial.moments;
    CovarianceBlockA a = initial.cov;
    a.symmetrize();
    double purity_budget = 0.0;
    check_state(a, m, initial.t, purity_budget);

    DelayBuffer buffer(controller ? controller->delay_steps() + 8 : 2);
    buffer.push(initial.t, m);

    std::vector<OutputRow> rows;
    rows.reserve(static_cast<std::size_t>(n_steps / opt.stride) + 2);
    const auto emit = [&](double t, double p_total) {
        rows.push_back({t, m.mean_x, m.mean_p, a.a11, a.a12, a.a22, p_total,
                        effective_quanta(a)});
    };

    double p_total_last = schedule.base(initial.t);
    for (long long i = 0; i < n_steps; ++i) {
        const double t = initial.t + static_cast<double>(i) * dt;
        // the buffer is keyed by the same expression the next step computes,
        // so a zero-delay lookup lands exactly on the newest sample
        const double t_next = initial.t + static_cast<double>(i + 1) * dt;

        const double p_base = schedule.base(t);
        const double eps = controller ? controller->modulation(t, buffer) : 0.0;
        const double p_total = p_base + eps;
        const double p_kappa = opt.feedback_modulates_kappa ? p_total : p_base;
        if (p_total < 0.0 || p_total > 1.0 + eps_max + 1e-12)
            throw std::runtime_error("run: power fraction out of range at t=" +
                                     std::to_string(t));
        p_total_last = p_total;

        if (i % opt.stride == 0) emit(t, p_total);

        const double kappa2 = p_kappa * params.kappa_sq();
        const double eta_t = t >= opt.detect_from ? params.eta : 0.0;
        purity_budget += eta_t * kappa2 * kappa2 * a.a11 * a.a11 * dt * dt;

        // innovation kick, using the pre-update covariance row (a11, a21)
        if (opt.stochastic_means && eta_t > 0.0 && kappa2 > 0.0) {
            const double scale =
                opt.norm == InnovationNorm::HalfDt ? std::sqrt(0.5 * dt)
                                                   : std::sqrt(dt);
            const double dW = noise.gauss() * scale;
            const double f = std::sqrt(eta_t) * std::sqrt(kappa2) * dW;
            m.mean_x += a.a11 * f;
            m.mean_p += a.a21 * f;
        }

        if (opt.exact_rotation) {
            // measurement/heating/bath terms first, exact rotation last
            const CovDeriv d =
                nonrotation_terms(a, kappa2, eta_t, params.gamma, thermal);
            CovarianceBlockA an{a.a11 + dt * d.d11, a.a12 + dt * d.d12,
                                a.a21 + dt * d.d21, a.a22 + dt * d.d22};
            const Mat2 am{an.a11, an.a12, an.a21, an.a22};
            const Mat2 rotated = rot * am * rot.transposed();
            a = {rotated.m00, rotated.m01, rotated.m10, rotated.m11};
            a.symmetrize();

            const Vec2 b{0.0, drift_rate(params, p_total)};
            const Vec2 mv = mprop * Vec2{m.mean_x, m.mean_p} + gprop * b;
            m = {mv.x, mv.y};
        } else {
            SimParams local = params;
            local.eta = eta_t;
            const double p_eff = p_kappa;
            const CovDeriv d = covariance_derivative(a, local, p_eff);
            a = {a.a11 + dt * d.d11, a.a12 + dt * d.d12, a.a21 + dt * d.d21,
                 a.a22 + dt * d.d22};
            a.symmetrize();

            const Vec2 dm = mean_derivative(m, params, p_total);
            m = {m.mean_x + dt * dm.x, m.mean_p + dt * dm.y};
        }

        check_state(a, m, t_next, purity_budget);
        buffer.push(t_next, m);
    }

    emit(initial.t + static_cast<double>(n_steps) * dt, p_total_last);
    return rows;
}

}  // namespace oscmon
