#include "coopmanip/dynamics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace coopmanip {

namespace {

constexpr double kMaxJacobianCondition = 1e8;

// splitmix64; used only to derive fixed synthetic-plant coefficients, so the
// plant is identical across platforms and runs.
struct FixedSeq {
    std::uint64_t s;
    double next() {
        s += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        return static_cast<double>(z >> 11) / 9007199254740992.0;  // [0, 1)
    }
    Vec6 unit6() {
        Vec6 v;
        for (int i = 0; i < 6; ++i) v[i] = next() - 0.5;
        return v.normalized();
    }
};

Mat6 orthogonal6(FixedSeq& seq) {
    Mat6 m;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) m(i, j) = seq.next() - 0.5;
    return Eigen::HouseholderQR<Mat6>(m).householderQ();
}

}  // namespace

TaskSpaceArm TaskSpaceArm::synthetic(double m_base, double m_mod, double g_amp,
                                     double quad_coeff, unsigned variant) {
    if (!(m_base > m_mod) || m_mod < 0.0) {
        throw InvalidConfig("synthetic arm: need m_base > m_mod >= 0");
    }
    FixedSeq seq{0x5eed0000ULL + variant};
    const Vec6 u = seq.unit6();
    const Mat6 s_mod = 0.5 * Mat6::Identity() + 0.5 * u * u.transpose();
    const Vec6 k_dir = seq.unit6();
    Vec6 phases;
    for (int i = 0; i < 6; ++i) phases[i] = 2.0 * M_PI * seq.next();
    const Mat6 b = orthogonal6(seq);

    TaskSpaceArm arm;
    arm.mass_matrix = [m_base, m_mod, s_mod, k_dir](const Vec6& x) -> Mat6 {
        return m_base * Mat6::Identity() + m_mod * std::sin(k_dir.dot(x)) * s_mod;
    };
    arm.bias = [g_amp, quad_coeff, phases, b](const Vec6& x,
                                              const Vec6& xdot) -> Vec6 {
        Vec6 g;
        for (int i = 0; i < 6; ++i) g[i] = g_amp * std::sin(x[i] + phases[i]);
        return g + quad_coeff * xdot.norm() * (b * xdot);
    };
    // lambda_max(s_mod) = 1 and ||b|| = 1, so the envelopes are tight.
    arm.c_m = m_base - m_mod;
    arm.c_M = m_base + m_mod;
    arm.c_g = g_amp * std::sqrt(6.0);
    arm.c_h = quad_coeff;
    return arm;
}

ObjectModel ObjectModel::synthetic(double mass, double inertia, double g_amp) {
    ObjectModel obj;
    obj.mass_matrix = Mat6::Zero();
    obj.mass_matrix.topLeftCorner<3, 3>() = mass * Mat3::Identity();
    obj.mass_matrix.bottomRightCorner<3, 3>() = inertia * Mat3::Identity();
    FixedSeq seq{0x0b1ec7ULL};
    Vec6 phases;
    for (int i = 0; i < 6; ++i) phases[i] = 2.0 * M_PI * seq.next();
    obj.bias = [g_amp, phases](const Vec6& x, const Vec6& xdot) -> Vec6 {
        Vec6 g;
        for (int i = 0; i < 6; ++i) g[i] = g_amp * std::cos(x[i] + phases[i]);
        return g + 0.05 * xdot.norm() * xdot;
    };
    return obj;
}

FrameRates frame_rates(const Vec6& x, const Vec6& xdot,
                       const KinematicParams& theta_geom, const Mat6& lambda) {
    const Vec6 x1 = lambda * x;
    const Vec6 x1dot = lambda * xdot;
    const Vec3 euler1 = x1.tail<3>();
    const Vec3 rate1 = x1dot.tail<3>();

    FrameRates fr;
    const auto [lo1, lo1dot] = orientation_rates(euler1, rate1);
    fr.l1.bottomRightCorner<3, 3>() = lo1;
    fr.l1dot.bottomRightCorner<3, 3>() = lo1dot;

    const Mat3 a = rotation_from_quaternion(theta_geom.eta);
    const Vec3 w1 = euler_rate_to_omega(euler1) * rate1;
    const Vec3 w2 = a * w1;
    const Mat3 r2 = rotation_from_euler(euler1) * a.transpose();
    const Vec3 euler2 = euler_from_rotation(r2);
    const Vec3 rate2 = orientation_rates(euler2, Vec3::Zero()).first * w2;
    const auto [lo2, lo2dot] = orientation_rates(euler2, rate2);
    fr.l2.bottomRightCorner<3, 3>() = lo2;
    fr.l2dot.bottomRightCorner<3, 3>() = lo2dot;
    return fr;
}

std::pair<Mat6, Vec6> task_space_from_joint(const JointSpaceSnapshot& s) {
    Eigen::JacobiSVD<Mat6> svd(s.jacobian,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (!(smin > 0.0) || smax / smin > kMaxJacobianCondition) {
        throw NearSingularJacobian("task_space_from_joint: jacobian condition "
                                   "number exceeds 1e8");
    }
    const Mat6 jinv = svd.solve(Mat6::Identity());
    Mat6 m = jinv.transpose() * s.m_prime * jinv;
    m = 0.5 * (m + m.transpose()).eval();
    const Vec6 h = jinv.transpose() * s.h_prime - m * s.jacobian_dot * s.qdot;
    return {m, h};
}

Mat6x12 grasp_map(const KinematicParams& theta) {
    Mat6x12 n;
    n.leftCols<6>() = Mat6::Identity();
    n.rightCols<6>() = velocity_transform(theta).transpose();
    return n;
}

Mat6 q_matrix(const Vec3& rho) {
    const Mat3 rx = skew(rho);
    Mat6 q;
    q.topLeftCorner<3, 3>() = 2.0 * Mat3::Identity();
    q.topRightCorner<3, 3>() = rx;
    q.bottomLeftCorner<3, 3>() = -rx;
    q.bottomRightCorner<3, 3>() = 2.0 * Mat3::Identity() - rx * rx;
    return q;
}

Mat12x6 n_pseudoinverse(const KinematicParams& theta) {
    const Mat6 qinv =
        Eigen::PartialPivLU<Mat6>(q_matrix(theta.rho)).solve(Mat6::Identity());
    Mat12x6 np;
    np.topRows<6>() = qinv;
    np.bottomRows<6>() = velocity_transform(theta) * qinv;
    return np;
}

Mat6 d_matrix(const Mat6& l1, const Mat6& l1dot, const Mat6& l2,
              const Mat6& l2dot, const Mat6& t) {
    Eigen::FullPivLU<Mat6> lu(l1);
    if (!lu.isInvertible()) {
        throw SingularL("d_matrix: L1 is singular");
    }
    const Mat6 l1inv = lu.inverse();
    return l2dot * t * l1inv - l2 * t * l1inv * l1dot * l1inv;
}

std::pair<Mat6, Vec6> combined_dynamics(const InterconnectedModel& model,
                                        const Vec6& x, const Vec6& xdot,
                                        const FrameRates& rates,
                                        const KinematicParams& theta) {
    const Mat6 t = velocity_transform(theta);
    const Mat6 d = d_matrix(rates.l1, rates.l1dot, rates.l2, rates.l2dot, t);
    Eigen::FullPivLU<Mat6> lu(rates.l1);
    if (!lu.isInvertible()) throw SingularL("combined_dynamics: L1 singular");
    const Mat6 l1inv = lu.inverse();

    const Mat6 m1 = model.arm1.mass_matrix(x);
    const Mat6 m2 = model.arm2.mass_matrix(x);
    const Vec6 h1 = model.arm1.bias(x, xdot);
    const Vec6 h2 = model.arm2.bias(x, xdot);
    const Vec6 ho = model.object.bias(x, xdot);

    const Mat6 mbar =
        model.object.mass_matrix +
        (m1 + t.transpose() * m2 * rates.l2 * t * l1inv) * model.lambda;
    const Vec6 hbar =
        ho + h1 + t.transpose() * (h2 + m2 * d * model.lambda * xdot);
    return {mbar, hbar};
}

}  // namespace coopmanip
