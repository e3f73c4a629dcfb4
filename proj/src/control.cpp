#include "coopmanip/control.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace coopmanip {

namespace {

void require_symmetric(const Mat6& m, const char* name) {
    if ((m - m.transpose()).cwiseAbs().maxCoeff() >
        1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
        throw InvalidConfig(std::string(name) + " must be symmetric");
    }
}

void require_positive(const Mat6& m, const char* name) {
    Eigen::SelfAdjointEigenSolver<Mat6> es(m);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw InvalidConfig(std::string(name) + " must be positive definite");
    }
}

}  // namespace

Gains Gains::checked(const Mat6& gp, const Mat6& gd) {
    require_symmetric(gp, "Gp");
    require_symmetric(gd, "Gd");
    Gains g{gp, gd};
    closed_loop_matrix(g);  // throws NotHurwitz on a bad pair
    require_positive(gp, "Gp");
    require_positive(gd, "Gd");
    return g;
}

Mat6x12 Gains::stacked() const {
    Mat6x12 g;
    g.leftCols<6>() = gp;
    g.rightCols<6>() = gd;
    return g;
}

double Gains::norm() const {
    return stacked().jacobiSvd().singularValues().maxCoeff();
}

Mat12 closed_loop_matrix(const Gains& gains) {
    Mat12 f = Mat12::Zero();
    f.topRightCorner<6, 6>() = Mat6::Identity();
    f.bottomLeftCorner<6, 6>() = -gains.gp;
    f.bottomRightCorner<6, 6>() = -gains.gd;
    const Eigen::EigenSolver<Mat12> es(f);
    if (es.eigenvalues().real().maxCoeff() >= -1e-9) {
        throw NotHurwitz("closed-loop matrix has an eigenvalue with real part "
                         ">= -1e-9");
    }
    return f;
}

ControlCommand control_law(const Vec6& x, const Vec6& xdot,
                           const Reference& ref,
                           const KinematicParams& theta_hat,
                           const Gains& gains, const InterconnectedModel& model,
                           const FrameRates& rates) {
    const Vec6 e = x - ref.x;
    const Vec6 edot = xdot - ref.xdot;
    const auto [m_hat, h_hat] =
        combined_dynamics(model, x, xdot, rates, theta_hat);

    ControlCommand cmd;
    cmd.u_bar = m_hat * (ref.xddot - gains.gd * edot - gains.gp * e) + h_hat;
    cmd.u1 =
        Eigen::PartialPivLU<Mat6>(q_matrix(theta_hat.rho)).solve(cmd.u_bar);
    cmd.u2 = velocity_transform(theta_hat) * cmd.u1;
    return cmd;
}

Vec12 perturbation_term(const Vec6& x, const Vec6& xdot, const Reference& ref,
                        const KinematicParams& theta_true,
                        const KinematicParams& theta_hat, const Gains& gains,
                        const InterconnectedModel& model,
                        const FrameRates& rates) {
    const TrackingError err{x - ref.x, xdot - ref.xdot};
    const auto [m_bar, h_bar] =
        combined_dynamics(model, x, xdot, rates, theta_true);
    const auto [m_hat, h_hat] =
        combined_dynamics(model, x, xdot, rates, theta_hat);
    const Mat6 n_tilde =
        grasp_map(theta_true) * n_pseudoinverse(theta_hat) - Mat6::Identity();
    const Mat6 m_tilde = m_bar - m_hat;
    const Vec6 h_tilde = h_bar - h_hat;

    const Vec6 accel_cmd = ref.xddot - gains.stacked() * err.z();
    const Vec6 bottom = Eigen::PartialPivLU<Mat6>(m_bar).solve(
        (n_tilde * m_hat - m_tilde) * accel_cmd - h_tilde + n_tilde * h_hat);

    Vec12 g = Vec12::Zero();
    g.tail<6>() = bottom;
    return g;
}

}  // namespace coopmanip
