#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "oscmon/gaussian_core.hpp"
#include "oscmon/linalg.hpp"
#include "oscmon/params.hpp"

namespace oscmon {

/// Probe power staging: off until t_half_on, half power for duration_half
/// (one half oscillation period, so the classical swing arrives at its new
/// rest position with zero momentum), full power thereafter.
struct FeedForwardPlan {
    double t_half_on = std::numeric_limits<double>::infinity();
    double duration_half = 0.0;  // = pi/omega for the configured omega

    static FeedForwardPlan ramp(double t_half_on, double omega);
    static FeedForwardPlan full_from_start();
    static FeedForwardPlan off();

    double power_at(double t) const {
        if (t < t_half_on) return 0.0;
        if (t < t_half_on + duration_half) return 0.5;
        return 1.0;
    }
};

struct Estimate {
    double amplitude = 0.0;
    double phase = 0.0;
};

/// Amplitude and phase of the oscillation around the rest position, read
/// directly off the filter means.  Phase at zero amplitude is defined as 0.
Estimate estimate_oscillation(const MechMoments& moments, double x_rest);

struct FeedbackConfig {
    double gain = 0.002;     ///< modulation per x0 of estimated amplitude
    double eps_max = 0.1;    ///< relative power modulation cap
    double delay = 1e-6;     ///< loop delay, s
    double enabled_from = std::numeric_limits<double>::infinity();
    /// Propagate the delayed estimate through the controller's own issued
    /// modulation history in addition to the free rotation.  Without this the
    /// loop is a plain delayed proportional law, which at the default gain is
    /// unstable for delays near a full period (see tests).
    bool compensate_delay = true;
    /// Diagnostic: shift the drive phase by pi, turning the damping
    /// quadrature into the heating one.  A correct loop must cool with this
    /// off and heat with it on.
    bool invert_phase = false;
};

/// Ring of (t, mean_x, mean_p) samples with linear interpolation at t-delay.
/// Queries older than the buffer depth throw std::out_of_range.
class DelayBuffer {
public:
    explicit DelayBuffer(std::size_t capacity);

    void push(double t, const MechMoments& m);
    MechMoments at(double t) const;
    bool covers(double t) const;
    std::size_t size() const { return count_; }

private:
    struct Sample {
        double t, x, p;
    };
    const Sample& sample(std::size_t logical) const;

    std::vector<Sample> ring_;
    std::size_t head_ = 0;   // next write slot
    std::size_t count_ = 0;
};

MechMoments delayed_lookup(const DelayBuffer& buffer, double t, double delay);

/// Power modulation clip(gain*amplitude, 0, eps_max) * sin(omega t + phase_c),
/// with phase_c chosen so the resulting force opposes the oscillation velocity
/// (damping quadrature).  `estimate` must describe the oscillation at time t.
double feedback_power(const Estimate& estimate, const FeedbackConfig& cfg,
                      double t, double omega);

/// Sequential feedback state machine owned by a single trajectory run.
/// Reads the filter history only through the delay buffer; when
/// compensate_delay is on it additionally remembers the modulations it issued
/// over the last delay window and adds their (deterministic, linear) effect to
/// the delayed estimate before computing the next modulation.
class FeedbackController {
public:
    FeedbackController(const FeedbackConfig& cfg, const SimParams& params,
                       double dt);

    /// Modulation for the step starting at t.  Must be called once per engine
    /// step while enabled; returns a value in [-eps_max, eps_max].
    double modulation(double t, const DelayBuffer& history);

    const FeedbackConfig& config() const { return cfg_; }
    std::size_t delay_steps() const { return delay_steps_; }

private:
    FeedbackConfig cfg_;
    double omega_;
    double dt_;
    double x_rest_;
    double force_full_;  // probe force on P at full power, 2*k*phi

    Mat2 rot_delay_;     // R(omega * delay)
    Mat2 rot_step_;      // R(omega * dt)
    Mat2 rot_expire_;    // R(omega * (delay_steps-1) * dt)
    std::size_t delay_steps_ = 0;

    Vec2 correction_{};          // sum of own kicks inside the delay window
    std::vector<double> issued_; // eps ring over the delay window
    std::size_t issued_pos_ = 0;
};

}  // namespace oscmon
