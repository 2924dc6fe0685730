#include "oscmon/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oscmon {

FeedForwardPlan FeedForwardPlan::ramp(double t_half_on, double omega) {
    if (omega <= 0.0)
        throw std::invalid_argument("FeedForwardPlan: omega must be > 0");
    return {t_half_on, std::numbers::pi / omega};
}

FeedForwardPlan FeedForwardPlan::full_from_start() {
    return {-std::numeric_limits<double>::infinity(), 0.0};
}

FeedForwardPlan FeedForwardPlan::off() {
    return {std::numeric_limits<double>::infinity(), 0.0};
}

Estimate estimate_oscillation(const MechMoments& moments, double x_rest) {
    const double dx = moments.mean_x - x_rest;
    const double dp = moments.mean_p;
    const double amplitude = std::hypot(dx, dp);
    if (amplitude == 0.0) return {0.0, 0.0};
    return {amplitude, std::atan2(dp, dx)};
}

DelayBuffer::DelayBuffer(std::size_t capacity) : ring_(std::max<std::size_t>(capacity, 2)) {}

void DelayBuffer::push(double t, const MechMoments& m) {
    ring_[head_] = {t, m.mean_x, m.mean_p};
    head_ = (head_ + 1) % ring_.size();
    count_ = std::min(count_ + 1, ring_.size());
}

const DelayBuffer::Sample& DelayBuffer::sample(std::size_t logical) const {
    // logical 0 = oldest retained sample
    const std::size_t oldest = (head_ + ring_.size() - count_) % ring_.size();
    return ring_[(oldest + logical) % ring_.size()];
}

bool DelayBuffer::covers(double t) const {
    return count_ > 0 && t >= sample(0).t && t <= sample(count_ - 1).t;
}

MechMoments DelayBuffer::at(double t) const {
    if (!covers(t))
        throw std::out_of_range("DelayBuffer: requested time predates buffer");
    // binary search for the bracketing pair; samples are pushed in time order
    std::size_t lo = 0, hi = count_ - 1;
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (sample(mid).t <= t)
            lo = mid;
        else
            hi = mid;
    }
    const Sample& a = sample(lo);
    const Sample& b = sample(hi);
    if (t <= a.t || a.t == b.t) return {a.x, a.p};
    if (t >= b.t) return {b.x, b.p};
    const double f = (t - a.t) / (b.t - a.t);
    return {a.x + f * (b.x - a.x), a.p + f * (b.p - a.p)};
}

MechMoments delayed_lookup(const DelayBuffer& buffer, double t, double delay) {
    if (delay < 0.0) throw std::invalid_argument("delayed_lookup: delay < 0");
    return buffer.at(t - delay);
}

double feedback_power(const Estimate& estimate, const FeedbackConfig& cfg,
                      double t, double omega) {
    const double amp = std::clamp(cfg.gain * estimate.amplitude, 0.0, cfg.eps_max);
    // The free oscillation satisfies (X-x_rest)(t') = A cos(psi - w (t'-t)),
    // P(t') = A sin(psi - w (t'-t)) with psi the phase estimated at time t.
    // A force modulation opposing P needs sin(w t' + phase_c) = -sin(psi) at
    // t'=t and the matching rotation afterwards:
    const double phase_c = -(omega * t + estimate.phase);
    return amp * std::sin(omega * t + phase_c);
}

FeedbackController::FeedbackController(const FeedbackConfig& cfg,
                                       const SimParams& params, double dt)
    : cfg_(cfg),
      omega_(params.omega),
      dt_(dt),
      x_rest_(params.x_rest()),
      force_full_(2.0 * params.k * params.phi) {
    if (cfg_.delay < 0.0)
        throw std::invalid_argument("FeedbackController: delay must be >= 0");
    if (cfg_.eps_max < 0.0)
        throw std::invalid_argument("FeedbackController: eps_max must be >= 0");
    delay_steps_ = static_cast<std::size_t>(std::llround(cfg_.delay / dt));
    rot_delay_ = Mat2::rotation(omega_ * cfg_.delay);
    rot_step_ = Mat2::rotation(omega_ * dt);
    rot_expire_ = delay_steps_ > 0
                      ? Mat2::rotation(omega_ * static_cast<double>(delay_steps_ - 1) * dt)
                      : Mat2::identity();
    issued_.assign(std::max<std::size_t>(delay_steps_, 1), 0.0);
}

double FeedbackController::modulation(double t, const DelayBuffer& history) {
    double eps = 0.0;
    if (t >= cfg_.enabled_from) {
        const MechMoments delayed = delayed_lookup(history, t, cfg_.delay);
        Vec2 w{delayed.mean_x - x_rest_, delayed.mean_p};
        w = rot_delay_ * w;
        if (cfg_.compensate_delay) w += correction_;

        Estimate est = estimate_oscillation({x_rest_ + w.x, w.y}, x_rest_);
        if (cfg_.invert_phase) est.phase += std::numbers::pi;
        eps = feedback_power(est, cfg_, t, omega_);
    }

    if (delay_steps_ > 0) {
        // Slide the window of own kicks: the oldest one is now part of the
        // delayed measurement, the one issued this step joins the window.
        const double expired = issued_[issued_pos_];
        const Vec2 b_old{0.0, force_full_ * expired * dt_};
        const Vec2 b_new{0.0, force_full_ * eps * dt_};
        correction_ = rot_step_ * (correction_ - rot_expire_ * b_old) + b_new;
        issued_[issued_pos_] = eps;
        issued_pos_ = (issued_pos_ + 1) % delay_steps_;
    }
    return eps;
}

}  // namespace oscmon
