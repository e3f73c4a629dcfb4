#pragma once

#include "coopmanip/dynamics.hpp"
#include "coopmanip/rigid_motion.hpp"
#include "coopmanip/types.hpp"

namespace coopmanip {

/// PD feedback gains. Both matrices must be symmetric positive definite and
/// the induced closed-loop matrix Hurwitz; checked() verifies all three.
struct Gains {
    Mat6 gp = Mat6::Identity();
    Mat6 gd = Mat6::Identity();

    static Gains checked(const Mat6& gp, const Mat6& gd);

    // G = [Gp Gd], the overall gain matrix; its spectral norm enters the
    // perturbation growth constants.
    Mat6x12 stacked() const;
    double norm() const;
};

// F = [0, I; -Gp, -Gd]. Throws NotHurwitz if any eigenvalue has real part
// >= -1e-9.
Mat12 closed_loop_matrix(const Gains& gains);

struct Reference {
    Vec6 x = Vec6::Zero();
    Vec6 xdot = Vec6::Zero();
    Vec6 xddot = Vec6::Zero();
};

struct TrackingError {
    Vec6 e = Vec6::Zero();
    Vec6 edot = Vec6::Zero();

    Vec12 z() const { return (Vec12() << e, edot).finished(); }
};

struct ControlCommand {
    Vec6 u1 = Vec6::Zero();
    Vec6 u2 = Vec6::Zero();
    Vec6 u_bar = Vec6::Zero();

    Vec12 stacked() const { return (Vec12() << u1, u2).finished(); }
};

/// Inverse-dynamics law evaluated at the estimated parameters:
/// u_bar = Mhat (xddot_d - Gd edot - Gp e) + hhat, u1 = Qhat^-1 u_bar,
/// u2 = That u1. The distribution matrix Q has eigenvalues >= 1 for every
/// parameter estimate, so the law never hits a parameter singularity.
ControlCommand control_law(const Vec6& x, const Vec6& xdot,
                           const Reference& ref,
                           const KinematicParams& theta_hat,
                           const Gains& gains, const InterconnectedModel& model,
                           const FrameRates& rates);

// Perturbation entering the closed-loop error equation zdot = F z + g.
// Tilde quantities are formed by direct subtraction of the true- and
// estimated-parameter evaluations; the top six entries are exactly zero.
Vec12 perturbation_term(const Vec6& x, const Vec6& xdot, const Reference& ref,
                        const KinematicParams& theta_true,
                        const KinematicParams& theta_hat, const Gains& gains,
                        const InterconnectedModel& model,
                        const FrameRates& rates);

}  // namespace coopmanip
