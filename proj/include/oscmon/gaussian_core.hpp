#pragma once

#include "oscmon/linalg.hpp"
#include "oscmon/noise.hpp"
#include "oscmon/params.hpp"

namespace oscmon {

/// Conditional mean position/momentum of the oscillator, dimensionless.
struct MechMoments {
    double mean_x = 0.0;
    double mean_p = 0.0;

    bool finite() const;
};

/// 2x2 mechanical covariance block, convention G_ij = 2 Re<dq_i dq_j>.
/// Vacuum is the identity; a thermal state has diagonal 2*nbar+1.
struct CovarianceBlockA {
    double a11 = 1.0;
    double a12 = 0.0;
    double a21 = 0.0;
    double a22 = 1.0;

    static CovarianceBlockA vacuum() { return {}; }
    static CovarianceBlockA thermal(double nbar) {
        const double d = 2.0 * nbar + 1.0;
        return {d, 0.0, 0.0, d};
    }

    double det() const { return a11 * a22 - a12 * a21; }

    /// a12, a21 obey identical flow from symmetric data; averaging them after
    /// every update keeps the Riccati flow on the symmetric manifold.
    void symmetrize() {
        const double s = 0.5 * (a12 + a21);
        a12 = s;
        a21 = s;
    }

    bool finite() const;

    /// a11 > 0, a22 > 0, a12 == a21 within tolerance, det >= 1 - kEpsTol.
    bool physical() const;
};

/// 4x4 covariance of (X_m, P_m, X_ph, P_ph) with A/B/C block structure.
struct JointCovariance {
    Mat4 g;

    CovarianceBlockA block_a() const {
        return {g(0, 0), g(0, 1), g(1, 0), g(1, 1)};
    }
    Mat2 block_b() const { return {g(2, 2), g(2, 3), g(3, 2), g(3, 3)}; }
    Mat2 block_c() const { return {g(0, 2), g(0, 3), g(1, 2), g(1, 3)}; }

    void symmetrize();
    double max_asymmetry() const;
};

/// One probe-beam segment of duration tau.  kappa_tau = sqrt(power*kappa_sq*tau)
/// by construction; the coherent segment amplitude sqrt(power*phi*tau) is
/// implicit and never stored.
struct ProbeSegment {
    double tau = 0.0;
    double kappa_tau = 0.0;
    double eta = 0.0;
    double power = 1.0;

    static ProbeSegment from_params(const SimParams& p, double tau,
                                    double power, double eta);
};

/// Which rotation sits in the mechanical block of the segment map.
/// FirstOrder is the literal shear [[1, wt],[-wt, 1]]; ExactRotation replaces
/// it by [[cos, sin],[-sin, cos]], which removes the (w*tau)^2 per-step trace
/// inflation (the dominant discretization error at w*tau ~ 1e-2).
enum class MapKind { FirstOrder, ExactRotation };

/// Segment map on (X_m, P_m, X_ph, P_ph):
///   [[1, wt, 0, 0], [-wt, 1, kt, 0], [0, 0, 1, 0], [kt, 0, 0, 1]].
Mat4 build_linear_map(double omega, double kappa_tau, double tau,
                      MapKind kind = MapKind::FirstOrder);

/// Fresh probe segment attached to the mechanical state: B = I, C = 0.
/// Throws std::invalid_argument when A violates positivity.
JointCovariance attach_probe(const CovarianceBlockA& a);

/// G -> S G S^T, re-symmetrized.
JointCovariance evolve_joint(const JointCovariance& gamma, const Mat4& s);

struct Conditioned {
    CovarianceBlockA cov;
    Vec2 mean_shift;
};

/// Homodyne detection of P_ph with efficiency eta and centered outcome chi:
///   A -> A - eta C diag(0,1) C^T,   mean shift = sqrt(eta) C (0, chi)^T.
/// Throws std::runtime_error when the update drives A unphysical
/// (numerical pathology; cannot occur for valid quantum inputs).
Conditioned condition_on_homodyne(const JointCovariance& gamma, double eta,
                                  double chi);

/// Measured quadrature value kappa_tau*<X_m> + chi, chi ~ N(0, 1/2).
/// The 1/2 variance is what makes the discrete conditioning consistent with
/// the law of total variance (see analytics::total_variance_oracle).
double sample_homodyne_outcome(double mean_x, double kappa_tau, double chi);
double sample_homodyne_outcome(double mean_x, double kappa_tau,
                               NoiseStream& noise);

struct MechState {
    MechMoments moments;
    CovarianceBlockA cov;
};

/// One full measurement cycle: attach probe, evolve under the segment map,
/// condition on the homodyne outcome, thermal relaxation over tau, then the
/// deterministic probe-force kick on mean_p.  Sub-step order is fixed for
/// bit-reproducibility; all orderings agree to O(tau).
MechState discrete_step(const MechState& state, const ProbeSegment& seg,
                        const SimParams& params, MapKind kind, double chi);
MechState discrete_step(const MechState& state, const ProbeSegment& seg,
                        const SimParams& params, MapKind kind,
                        NoiseStream& noise);

}  // namespace oscmon
