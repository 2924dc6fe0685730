#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "oscmon/control.hpp"
#include "oscmon/params.hpp"

namespace oscmon {

/// A fully resolved run description: scenario defaults overlaid with config
/// file entries and command-line flags, in that order.
struct ScenarioConfig {
    std::string name = "figure2";
    SimParams params;

    std::string probe_plan = "ramp";  ///< ramp | full | off
    double t_half_power = 1e-6;
    double t_detect_on = std::numeric_limits<double>::infinity();
    double t_feedback_on = std::numeric_limits<double>::infinity();

    double feedback_gain = 0.002;
    double feedback_eps_max = 0.1;
    double feedback_delay = 1e-6;
    bool feedback_compensate_delay = true;
    bool feedback_modulates_kappa = false;

    bool exact_rotation = true;
    std::uint64_t seed = 42;
    double duration = 60e-6;
    int stride = 10;
    std::string out;  ///< empty = "<name>.csv"

    bool detection_enabled() const { return std::isfinite(t_detect_on); }
    bool feedback_enabled() const { return std::isfinite(t_feedback_on); }
    std::string out_path() const { return out.empty() ? name + ".csv" : out; }

    /// Stage timings strictly increasing, duration covering the last stage,
    /// params in range.  Throws std::invalid_argument.
    void validate() const;
};

/// Shipped scenario defaults: "figure2" (five-stage sequence: thermal start,
/// half power at 1 us, full power at 1.5 us, detection at 2.5 us, feedback at
/// 10 us with 1 us loop delay), "no-detection", "no-feedback", "steady-state".
ScenarioConfig scenario_defaults(const std::string& name);
std::vector<std::string> scenario_names();

/// Applies one `key = value` entry.  Unknown keys throw with a nearest-match
/// hint; malformed or out-of-range values throw with the offending key.
void apply_config_entry(ScenarioConfig& cfg, const std::string& key,
                        const std::string& value);

/// Line-based `key = value` file, '#' comments, UTF-8.  A `scenario` entry
/// must come first if present (it resets the defaults).
ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text,
                                 const std::string& origin = "<inline>");

std::vector<std::string> config_keys();

}  // namespace oscmon
