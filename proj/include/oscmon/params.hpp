#pragma once

#include <optional>

namespace oscmon {

/// Physical constants (2019 SI exact values).
inline constexpr double kHbar = 1.054571817e-34;       // J s
inline constexpr double kBoltzmann = 1.380649e-23;     // J/K

/// All physical rates and couplings of the monitored oscillator.
///
/// Quadratures are dimensionless (position in units of x0 = sqrt(hbar/m w),
/// momentum in units of p0 = sqrt(hbar m w)); covariances use the convention
/// G_ij = 2 Re<dq_i dq_j>, so a coherent/vacuum state has unit diagonal and a
/// thermal state has 2*nbar+1.
struct SimParams {
    double omega = 0.0;    ///< mechanical angular frequency, rad/s
    double gamma = 0.0;    ///< bath coupling rate, 1/s
    double nbar = 0.0;     ///< bath occupation, dimensionless
    double eta = 1.0;      ///< detector efficiency in [0,1]
    double k = 0.0;        ///< phase shift per x0 of displacement, rad
    double phi = 0.0;      ///< probe photon flux at full power, 1/s
    double mass = 0.0;     ///< effective mass, kg (informational only)
    double dt = 1e-9;      ///< integrator step, s

    /// Measurement strength override.  When unset, kappa_sq() = 2 k^2 phi.
    std::optional<double> kappa_sq_override;

    double kappa_sq() const {
        return kappa_sq_override ? *kappa_sq_override : 2.0 * k * k * phi;
    }

    double thermal_diag() const { return 2.0 * nbar + 1.0; }

    /// Displaced rest position under the full-power probe force, in x0 units.
    double x_rest() const { return 2.0 * k * phi / omega; }

    /// Throws std::invalid_argument when a field is out of range
    /// (gamma >= 0, omega > 0, eta in [0,1], dt > 0, omega*dt <= 0.1, ...).
    void validate() const;
};

/// Tolerance for positivity/symmetry checks; relative, far above double noise
/// for the dynamic ranges involved (diagonal entries up to ~2e4).
inline constexpr double kEpsTol = 1e-9;

}  // namespace oscmon
