#include "oscmon/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace oscmon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SimParams reference_params() {
    SimParams p;
    p.omega = 2.0 * std::numbers::pi * 1e6;
    p.gamma = 2.0 * std::numbers::pi * 10.0;
    p.nbar = 9360.0;
    p.eta = 1.0;
    p.k = 0.65e-6;
    p.phi = 2.918e15;  // 1 mW at 580 nm
    p.mass = 1.1e-11;
    p.dt = 1e-9;
    // quoted measurement strength; 2 k^2 phi would give twice this value
    p.kappa_sq_override = 2.0 * std::numbers::pi * 197.0;
    return p;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: malformed number for '" + key +
                                    "': \"" + value + "\"");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: malformed integer for '" + key +
                                    "': \"" + value + "\"");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config: expected true/false for '" + key +
                                "', got \"" + value + "\"");
}

// stage keys accept "none" to disable the stage
double parse_stage_time(const std::string& key, const std::string& value) {
    if (value == "none" || value == "off") return kInf;
    return parse_double(key, value);
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t prev = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t cur = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                               prev + (a[i - 1] == b[j - 1] ? 0 : 1)});
            prev = cur;
        }
    }
    return row[b.size()];
}

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("config: " + what);
}

}  // namespace

std::vector<std::string> config_keys() {
    return {"scenario",        "seed",
            "dt",              "duration",
            "stride",          "out",
            "omega",           "gamma",
            "nbar",            "eta",
            "k",               "phi",
            "mass",            "kappa_sq_override",
            "probe_plan",      "t_half_power",
            "t_detect_on",     "t_feedback_on",
            "feedback_gain",   "feedback_eps_max",
            "feedback_delay",  "feedback_compensate_delay",
            "feedback_modulates_kappa", "exact_rotation"};
}

std::vector<std::string> scenario_names() {
    return {"figure2", "no-detection", "no-feedback", "steady-state"};
}

ScenarioConfig scenario_defaults(const std::string& name) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.params = reference_params();

    if (name == "figure2") {
        cfg.probe_plan = "ramp";
        cfg.t_half_power = 1e-6;
        cfg.t_detect_on = 2.5e-6;
        cfg.t_feedback_on = 10e-6;
        cfg.duration = 60e-6;
    } else if (name == "no-detection") {
        cfg.probe_plan = "ramp";
        cfg.params.eta = 0.0;
        cfg.t_half_power = 1e-6;
        cfg.t_detect_on = kInf;
        cfg.t_feedback_on = kInf;
        cfg.duration = 60e-6;
    } else if (name == "no-feedback") {
        cfg.probe_plan = "ramp";
        cfg.t_half_power = 1e-6;
        cfg.t_detect_on = 2.5e-6;
        cfg.t_feedback_on = kInf;
        cfg.duration = 60e-6;
    } else if (name == "steady-state") {
        cfg.probe_plan = "full";
        cfg.t_detect_on = 0.0;
        cfg.t_feedback_on = kInf;
        cfg.duration = 200e-6;
    } else {
        throw std::invalid_argument("config: unknown scenario '" + name +
                                    "' (expected figure2, no-detection, "
                                    "no-feedback or steady-state)");
    }
    return cfg;
}

void apply_config_entry(ScenarioConfig& cfg, const std::string& key,
                        const std::string& value) {
    if (key == "scenario") {
        const ScenarioConfig base = scenario_defaults(value);
        cfg = base;
    } else if (key == "seed") {
        cfg.seed = parse_u64(key, value);
    } else if (key == "dt") {
        cfg.params.dt = parse_double(key, value);
    } else if (key == "duration") {
        cfg.duration = parse_double(key, value);
    } else if (key == "stride") {
        cfg.stride = static_cast<int>(parse_u64(key, value));
    } else if (key == "out") {
        cfg.out = value;
    } else if (key == "omega") {
        cfg.params.omega = parse_double(key, value);
    } else if (key == "gamma") {
        cfg.params.gamma = parse_double(key, value);
    } else if (key == "nbar") {
        cfg.params.nbar = parse_double(key, value);
    } else if (key == "eta") {
        cfg.params.eta = parse_double(key, value);
    } else if (key == "k") {
        cfg.params.k = parse_double(key, value);
    } else if (key == "phi") {
        cfg.params.phi = parse_double(key, value);
    } else if (key == "mass") {
        cfg.params.mass = parse_double(key, value);
    } else if (key == "kappa_sq_override") {
        if (value == "none")
            cfg.params.kappa_sq_override.reset();
        else
            cfg.params.kappa_sq_override = parse_double(key, value);
    } else if (key == "probe_plan") {
        require(value == "ramp" || value == "full" || value == "off",
                "probe_plan must be ramp, full or off");
        cfg.probe_plan = value;
    } else if (key == "t_half_power") {
        cfg.t_half_power = parse_double(key, value);
    } else if (key == "t_detect_on") {
        cfg.t_detect_on = parse_stage_time(key, value);
    } else if (key == "t_feedback_on") {
        cfg.t_feedback_on = parse_stage_time(key, value);
    } else if (key == "feedback_gain") {
        cfg.feedback_gain = parse_double(key, value);
    } else if (key == "feedback_eps_max") {
        cfg.feedback_eps_max = parse_double(key, value);
    } else if (key == "feedback_delay") {
        cfg.feedback_delay = parse_double(key, value);
    } else if (key == "feedback_compensate_delay") {
        cfg.feedback_compensate_delay = parse_bool(key, value);
    } else if (key == "feedback_modulates_kappa") {
        cfg.feedback_modulates_kappa = parse_bool(key, value);
    } else if (key == "exact_rotation") {
        cfg.exact_rotation = parse_bool(key, value);
    } else {
        std::string best;
        std::size_t best_d = std::string::npos;
        for (const auto& known : config_keys()) {
            const std::size_t d = edit_distance(key, known);
            if (d < best_d) {
                best_d = d;
                best = known;
            }
        }
        throw std::invalid_argument("config: unknown key '" + key +
                                    "' (did you mean '" + best + "'?)");
    }
}

ScenarioConfig parse_config_text(const std::string& text,
                                 const std::string& origin) {
    ScenarioConfig cfg = scenario_defaults("figure2");
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: " + origin + ":" +
                                        std::to_string(lineno) +
                                        ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        require(!key.empty(), origin + ": empty key");
        apply_config_entry(cfg, key, value);
    }
    return cfg;
}

ScenarioConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

void ScenarioConfig::validate() const {
    params.validate();
    require(duration > 0.0, "duration must be > 0");
    require(stride >= 1, "stride must be >= 1");
    require(feedback_gain >= 0.0, "feedback_gain must be >= 0");
    require(feedback_eps_max >= 0.0 && feedback_eps_max <= 0.1,
            "feedback_eps_max must lie in [0, 0.1]");
    require(feedback_delay >= 0.0, "feedback_delay must be >= 0");

    double last_stage = 0.0;
    if (probe_plan == "ramp") {
        require(std::isfinite(t_half_power) && t_half_power >= 0.0,
                "t_half_power must be finite and >= 0");
        last_stage = t_half_power + std::numbers::pi / params.omega;
    }
    if (detection_enabled()) {
        require(t_detect_on >= 0.0, "t_detect_on must be >= 0");
        if (probe_plan == "ramp")
            require(t_detect_on > t_half_power,
                    "stage timings must be strictly increasing "
                    "(t_detect_on <= t_half_power)");
        last_stage = std::max(last_stage, t_detect_on);
    }
    if (feedback_enabled()) {
        require(detection_enabled(),
                "feedback requires detection (t_detect_on)");
        require(t_feedback_on > t_detect_on,
                "stage timings must be strictly increasing "
                "(t_feedback_on <= t_detect_on)");
        require(t_feedback_on >= feedback_delay,
                "t_feedback_on must not predate the delay buffer");
        last_stage = std::max(last_stage, t_feedback_on);
    }
    require(duration >= last_stage, "duration must cover the last stage time");
}

}  // namespace oscmon
