#pragma once

#include <functional>
#include <utility>

#include "coopmanip/rigid_motion.hpp"
#include "coopmanip/types.hpp"

namespace coopmanip {

/// Task-space model of one manipulator: configuration-dependent mass matrix
/// and bias vector (Coriolis, centrifugal, gravity). Both are evaluated at
/// the reduced-system coordinates (object pose and its rate).
struct TaskSpaceArm {
    std::function<Mat6(const Vec6&)> mass_matrix;
    std::function<Vec6(const Vec6&, const Vec6&)> bias;

    // Declared envelope constants: c_m I <= M <= c_M I and
    // ||h|| <= c_g + c_h ||xdot||^2, validated by sampling in tests.
    double c_m = 0.0;
    double c_M = 0.0;
    double c_g = 0.0;
    double c_h = 0.0;

    // Bounded-mass, bounded-bias synthetic arm:
    //   M(x) = m_base I + m_mod * sin(k . x) S   (S fixed SPD)
    //   h(x, xdot) = g_amp * periodic(x) + quad_coeff * ||xdot|| B xdot
    static TaskSpaceArm synthetic(double m_base, double m_mod, double g_amp,
                                  double quad_coeff, unsigned variant);
};

struct ObjectModel {
    Mat6 mass_matrix = Mat6::Identity();
    std::function<Vec6(const Vec6&, const Vec6&)> bias;

    static ObjectModel synthetic(double mass, double inertia, double g_amp);
};

/// Object plus two arms with the constant object-to-arm-1 velocity
/// transform Lambda.
struct InterconnectedModel {
    TaskSpaceArm arm1;
    TaskSpaceArm arm2;
    ObjectModel object;
    Mat6 lambda = Mat6::Identity();
};

/// Minimal-representation rate maps of the two end-effectors at the current
/// configuration, L_i = diag(I, L_o(euler_i)), plus their time derivatives.
/// These are measured kinematic quantities (forward kinematics of each arm),
/// independent of the estimated parameters.
struct FrameRates {
    Mat6 l1 = Mat6::Identity();
    Mat6 l1dot = Mat6::Zero();
    Mat6 l2 = Mat6::Identity();
    Mat6 l2dot = Mat6::Zero();
};

// Builds the rate maps from the object state, using the true chain geometry
// to place end-effector 2. Throws RepresentationSingularity near gimbal lock.
FrameRates frame_rates(const Vec6& x, const Vec6& xdot,
                       const KinematicParams& theta_geom, const Mat6& lambda);

/// Joint-space snapshot for the joint-to-task mapping. The Jacobian must be
/// square (n = 6) and well conditioned.
struct JointSpaceSnapshot {
    Mat6 m_prime;
    Vec6 h_prime;
    Mat6 jacobian;
    Mat6 jacobian_dot;
    Vec6 qdot;
};

// M = J^-T M' J^-1 and h = J^-T h' - M Jdot qdot. Throws
// NearSingularJacobian when cond(J) > 1e8.
std::pair<Mat6, Vec6> task_space_from_joint(const JointSpaceSnapshot& s);

// N(theta) = [I, T(theta)^T], full row rank for every theta.
Mat6x12 grasp_map(const KinematicParams& theta);

// Q(rho) = [2I, [rho x]; -[rho x], 2I - [rho x]^2] = I + T^T T.
// Symmetric with every eigenvalue >= 1, hence always invertible.
Mat6 q_matrix(const Vec3& rho);

// N+ = [Q^-1; T Q^-1], the minimum-norm generalized inverse: N N+ = I.
Mat12x6 n_pseudoinverse(const KinematicParams& theta);

// Exact time derivative of the generalized-rate map L2 T L1^-1:
//   D = Ldot2 T L1^-1 - L2 T L1^-1 Ldot1 L1^-1,
// so xddot2 = L2 T L1^-1 xddot1 + D xdot1. Throws SingularL if L1 is
// singular.
Mat6 d_matrix(const Mat6& l1, const Mat6& l1dot, const Mat6& l2,
              const Mat6& l2dot, const Mat6& t);

// Reduced-order dynamics of the interconnected system:
//   Mbar = M_o + (M_1 + T^T M_2 L_2 T L_1^-1) Lambda
//   hbar = h_o + h_1 + T^T (h_2 + M_2 D Lambda xdot)
// Mbar is not symmetric in general.
std::pair<Mat6, Vec6> combined_dynamics(const InterconnectedModel& model,
                                        const Vec6& x, const Vec6& xdot,
                                        const FrameRates& rates,
                                        const KinematicParams& theta);

}  // namespace coopmanip
