#include "oscmon/gaussian_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace oscmon {

bool MechMoments::finite() const {
    return std::isfinite(mean_x) && std::isfinite(mean_p);
}

bool CovarianceBlockA::finite() const {
    return std::isfinite(a11) && std::isfinite(a12) && std::isfinite(a21) &&
           std::isfinite(a22);
}

bool CovarianceBlockA::physical() const {
    if (!finite() || a11 <= 0.0 || a22 <= 0.0) return false;
    const double scale = std::max({1.0, std::abs(a11), std::abs(a22)});
    if (std::abs(a12 - a21) > kEpsTol * scale) return false;
    return det() >= 1.0 - kEpsTol;
}

void JointCovariance::symmetrize() {
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const double s = 0.5 * (g(i, j) + g(j, i));
            g(i, j) = s;
            g(j, i) = s;
        }
}

double JointCovariance::max_asymmetry() const {
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            worst = std::max(worst, std::abs(g(i, j) - g(j, i)));
    return worst;
}

ProbeSegment ProbeSegment::from_params(const SimParams& p, double tau,
                                       double power, double eta) {
    if (tau <= 0.0) throw std::invalid_argument("ProbeSegment: tau must be > 0");
    if (power < 0.0) throw std::invalid_argument("ProbeSegment: power must be >= 0");
    if (eta < 0.0 || eta > 1.0)
        throw std::invalid_argument("ProbeSegment: eta must lie in [0,1]");
    return {tau, std::sqrt(power * p.kappa_sq() * tau), eta, power};
}

Mat4 build_linear_map(double omega, double kappa_tau, double tau, MapKind kind) {
    if (tau <= 0.0) throw std::invalid_argument("build_linear_map: tau must be > 0");
    if (omega < 0.0 || kappa_tau < 0.0)
        throw std::invalid_argument("build_linear_map: omega, kappa_tau must be >= 0");

    Mat4 s = Mat4::identity();
    if (kind == MapKind::FirstOrder) {
        const double wt = omega * tau;
        s(0, 1) = wt;
        s(1, 0) = -wt;
    } else {
        const Mat2 r = Mat2::rotation(omega * tau);
        s(0, 0) = r.m00;
        s(0, 1) = r.m01;
        s(1, 0) = r.m10;
        s(1, 1) = r.m11;
    }
    s(1, 2) = kappa_tau;  // P_m picks up kappa_tau * X_ph
    s(3, 0) = kappa_tau;  // P_ph picks up kappa_tau * X_m
    return s;
}

JointCovariance attach_probe(const CovarianceBlockA& a) {
    if (!a.physical())
        throw std::invalid_argument(
            "attach_probe: mechanical covariance violates positivity");
    CovarianceBlockA in = a;
    in.symmetrize();

    JointCovariance gamma;
    gamma.g = Mat4::identity();
    gamma.g(0, 0) = in.a11;
    gamma.g(0, 1) = in.a12;
    gamma.g(1, 0) = in.a21;
    gamma.g(1, 1) = in.a22;
    return gamma;
}

JointCovariance evolve_joint(const JointCovariance& gamma, const Mat4& s) {
    JointCovariance out;
    out.g = s * gamma.g * s.transposed();
    out.symmetrize();
    return out;
}

Conditioned condition_on_homodyne(const JointCovariance& gamma, double eta,
                                  double chi) {
    if (eta < 0.0 || eta > 1.0)
        throw std::invalid_argument("condition_on_homodyne: eta must lie in [0,1]");

    const CovarianceBlockA a = gamma.block_a();
    const Mat2 c = gamma.block_c();

    // Only the P_ph column of C enters: v = C (0,1)^T.
    const Vec2 v{c.m01, c.m11};

    Conditioned out;
    out.cov = {a.a11 - eta * v.x * v.x, a.a12 - eta * v.x * v.y,
               a.a21 - eta * v.y * v.x, a.a22 - eta * v.y * v.y};
    out.cov.symmetrize();
    out.mean_shift = v * (std::sqrt(eta) * chi);

    if (!out.cov.physical())
        throw std::runtime_error(
            "condition_on_homodyne: conditioned covariance lost positivity "
            "(det=" + std::to_string(out.cov.det()) + ")");
    return out;
}

double sample_homodyne_outcome(double mean_x, double kappa_tau, double chi) {
    return kappa_tau * mean_x + chi;
}

double sample_homodyne_outcome(double mean_x, double kappa_tau,
                               NoiseStream& noise) {
    return sample_homodyne_outcome(mean_x, kappa_tau,
                                   noise.gauss() * std::sqrt(0.5));
}

MechState discrete_step(const MechState& state, const ProbeSegment& seg,
                        const SimParams& params, MapKind kind, double chi) {
    // 1. fresh probe segment, joint map, conditioning
    const Mat4 s = build_linear_map(params.omega, seg.kappa_tau, seg.tau, kind);
    const JointCovariance joint = evolve_joint(attach_probe(state.cov), s);
    const Conditioned cond = condition_on_homodyne(joint, seg.eta, chi);

    // means follow the mechanical block of the map, then the conditional shift
    const Mat2 r{s(0, 0), s(0, 1), s(1, 0), s(1, 1)};
    Vec2 m = r * Vec2{state.moments.mean_x, state.moments.mean_p};
    m += cond.mean_shift;

    // 2. thermal relaxation over tau: covariances toward 2*nbar+1 at rate
    //    gamma, off-diagonals and means damped at gamma resp. gamma/2
    CovarianceBlockA a = cond.cov;
    const double decay = std::exp(-params.gamma * seg.tau);
    const double th = params.thermal_diag();
    a.a11 = th + (a.a11 - th) * decay;
    a.a22 = th + (a.a22 - th) * decay;
    a.a12 *= decay;
    a.a21 *= decay;
    m = m * std::exp(-0.5 * params.gamma * seg.tau);

    // 3. deterministic probe-force kick on the momentum mean
    m.y += 2.0 * params.k * params.phi * seg.power * seg.tau;

    MechState out{{m.x, m.y}, a};
    if (!out.moments.finite() || !out.cov.physical())
        throw std::runtime_error("discrete_step: state became unphysical");
    return out;
}

MechState discrete_step(const MechState& state, const ProbeSegment& seg,
                        const SimParams& params, MapKind kind,
                        NoiseStream& noise) {
    const double chi =
        (seg.eta > 0.0 && seg.kappa_tau > 0.0) ? noise.gauss() * std::sqrt(0.5)
                                               : 0.0;
    return discrete_step(state, seg, params, kind, chi);
}

}  // namespace oscmon
