#include "oscmon/params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace oscmon {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("SimParams: " + what);
}

}  // namespace

void SimParams::validate() const {
    require(std::isfinite(omega) && omega > 0.0, "omega must be > 0");
    require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be >= 0");
    require(std::isfinite(nbar) && nbar >= 0.0, "nbar must be >= 0");
    require(std::isfinite(eta) && eta >= 0.0 && eta <= 1.0,
            "eta must lie in [0,1]");
    require(std::isfinite(k), "k must be finite");
    require(std::isfinite(phi) && phi >= 0.0, "phi must be >= 0");
    require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
    require(omega * dt <= 0.1, "omega*dt must not exceed 0.1");
    if (kappa_sq_override)
        require(std::isfinite(*kappa_sq_override) && *kappa_sq_override >= 0.0,
                "kappa_sq override must be >= 0");
}

}  // namespace oscmon
