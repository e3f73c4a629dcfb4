#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "coopmanip/control.hpp"
#include "coopmanip/dynamics.hpp"

using namespace coopmanip;

namespace {

std::mt19937_64 rng(31);

double unif(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 random_vec3(double scale = 1.0) {
    return scale * Vec3(unif(-1, 1), unif(-1, 1), unif(-1, 1));
}

Vec6 random_vec6(double scale = 1.0) {
    Vec6 v;
    for (int i = 0; i < 6; ++i) v[i] = scale * unif(-1, 1);
    return v;
}

UnitQuaternion random_quaternion() {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec4 q(n(rng), n(rng), n(rng), n(rng));
    q.normalize();
    return UnitQuaternion(q.head<3>(), q[3]);
}

Mat6 random_spd(double base) {
    Mat6 a;
    for (int k = 0; k < 36; ++k) a(k / 6, k % 6) = unif(-1, 1);
    return a.transpose() * a + base * Mat6::Identity();
}

InterconnectedModel test_model() {
    InterconnectedModel m;
    m.arm1 = TaskSpaceArm::synthetic(2.0, 0.3, 0.5, 0.2, 1);
    m.arm2 = TaskSpaceArm::synthetic(2.2, 0.25, 0.4, 0.15, 2);
    m.object = ObjectModel::synthetic(1.0, 0.5, 0.3);
    return m;
}

InterconnectedModel zero_bias_model() {
    InterconnectedModel m = test_model();
    m.arm1.bias = [](const Vec6&, const Vec6&) { return Vec6::Zero(); };
    m.arm2.bias = [](const Vec6&, const Vec6&) { return Vec6::Zero(); };
    m.object.bias = [](const Vec6&, const Vec6&) { return Vec6::Zero(); };
    return m;
}

struct Setup {
    Vec6 x, xdot;
    FrameRates rates;
    Reference ref;
};

Setup random_setup(const KinematicParams& theta_true) {
    Setup s;
    s.x = random_vec6(0.4);
    s.x.tail<3>() *= 0.7;
    s.xdot = random_vec6(0.6);
    s.rates = frame_rates(s.x, s.xdot, theta_true, Mat6::Identity());
    s.ref.x = s.x - random_vec6(0.05);
    s.ref.xdot = s.xdot - random_vec6(0.05);
    s.ref.xddot = random_vec6(0.5);
    return s;
}

}  // namespace

TEST_CASE("closed loop matrix: critically damped case and rejections") {
    const Gains crit = Gains::checked(Mat6::Identity(), 2.0 * Mat6::Identity());
    const Mat12 f = closed_loop_matrix(crit);
    const Eigen::EigenSolver<Mat12> es(f);
    for (int i = 0; i < 12; ++i) {
        CHECK(es.eigenvalues()[i].real() == doctest::Approx(-1.0).epsilon(1e-6));
        CHECK(std::abs(es.eigenvalues()[i].imag()) < 1e-6);
    }

    // Zero damping leaves purely imaginary eigenvalues.
    Gains undamped;
    undamped.gp = 4.0 * Mat6::Identity();
    undamped.gd = Mat6::Zero();
    CHECK_THROWS_AS(closed_loop_matrix(undamped), NotHurwitz);
    CHECK_THROWS_AS(Gains::checked(4.0 * Mat6::Identity(), Mat6::Zero()),
                    NotHurwitz);
    Mat6 nonsym = Mat6::Identity();
    nonsym(0, 1) = 0.5;
    CHECK_THROWS_AS(Gains::checked(nonsym, Mat6::Identity()), InvalidConfig);

    for (int i = 0; i < 25; ++i) {
        const Gains g = Gains::checked(random_spd(0.5), random_spd(0.5));
        const Mat12 fr = closed_loop_matrix(g);
        const Eigen::EigenSolver<Mat12> esr(fr);
        CHECK(esr.eigenvalues().real().maxCoeff() < 0.0);
    }
}

TEST_CASE("gain matrix stacking and norm") {
    const Gains g = Gains::checked(25.0 * Mat6::Identity(),
                                   10.0 * Mat6::Identity());
    CHECK(g.stacked().leftCols<6>().isApprox(g.gp, 0.0));
    CHECK(g.stacked().rightCols<6>().isApprox(g.gd, 0.0));
    CHECK(g.norm() == doctest::Approx(std::sqrt(25.0 * 25.0 + 100.0)));
}

TEST_CASE("control law: zero command when nothing to correct") {
    const InterconnectedModel m = zero_bias_model();
    const Gains g = Gains::checked(25.0 * Mat6::Identity(),
                                   10.0 * Mat6::Identity());
    const KinematicParams theta{Vec3(0.1, 0.2, -0.1), random_quaternion()};
    Setup s = random_setup(theta);
    // At rest: the frame-rate term in the combined bias vanishes too.
    s.xdot.setZero();
    s.rates = frame_rates(s.x, s.xdot, theta, Mat6::Identity());
    s.ref.x = s.x;
    s.ref.xdot = s.xdot;
    s.ref.xddot = Vec6::Zero();
    const ControlCommand cmd =
        control_law(s.x, s.xdot, s.ref, theta, g, m, s.rates);
    CHECK(cmd.u_bar.norm() < 1e-12);
    CHECK(cmd.u1.norm() < 1e-12);
    CHECK(cmd.u2.norm() < 1e-12);
}

TEST_CASE("control command invariants: distribution and constraint") {
    const InterconnectedModel m = test_model();
    const Gains g = Gains::checked(25.0 * Mat6::Identity(),
                                   10.0 * Mat6::Identity());
    for (int i = 0; i < 50; ++i) {
        const KinematicParams theta{random_vec3(0.4), random_quaternion()};
        const KinematicParams theta_hat{theta.rho + random_vec3(0.1),
                                        random_quaternion()};
        const Setup s = random_setup(theta);
        const ControlCommand cmd =
            control_law(s.x, s.xdot, s.ref, theta_hat, g, m, s.rates);

        // u2 = T(theta_hat) u1 exactly as constructed.
        CHECK((cmd.u2 - velocity_transform(theta_hat) * cmd.u1).norm() <
              1e-12 * std::max(1.0, cmd.u1.norm()));
        // The stacked pair is the minimum-norm distribution of u_bar.
        const Vec12 np_u = n_pseudoinverse(theta_hat) * cmd.u_bar;
        CHECK((cmd.stacked() - np_u).norm() <
              1e-10 * std::max(1.0, np_u.norm()));
        // And it reproduces u_bar through the grasp map at theta_hat.
        CHECK((grasp_map(theta_hat) * cmd.stacked() - cmd.u_bar).norm() <
              1e-10 * std::max(1.0, cmd.u_bar.norm()));
    }
}

TEST_CASE("control law survives extreme parameter estimates") {
    const InterconnectedModel m = test_model();
    const Gains g = Gains::checked(25.0 * Mat6::Identity(),
                                   10.0 * Mat6::Identity());
    const KinematicParams theta{Vec3(0.1, -0.2, 0.3), random_quaternion()};
    const Setup s = random_setup(theta);

    for (double scale : {1e2, 1e4, 1e6}) {
        const KinematicParams theta_hat{scale * random_vec3().normalized(),
                                        random_quaternion()};
        const ControlCommand cmd =
            control_law(s.x, s.xdot, s.ref, theta_hat, g, m, s.rates);
        CHECK(cmd.u1.allFinite());
        CHECK(cmd.u2.allFinite());
        CHECK(cmd.u_bar.allFinite());
    }
}

TEST_CASE("perturbation term vanishes at the true parameters") {
    const InterconnectedModel m = test_model();
    const Gains g = Gains::checked(25.0 * Mat6::Identity(),
                                   10.0 * Mat6::Identity());
    for (int i = 0; i < 20; ++i) {
        const KinematicParams theta{random_vec3(0.4), random_quaternion()};
        const Setup s = random_setup(theta);
        const Vec12 gvec = perturbation_term(s.x, s.xdot, s.ref, theta, theta,
                                             g, m, s.rates);
        CHECK(gvec.norm() < 1e-12);
    }
}

TEST_CASE("closed-loop consistency: zdot equals F z + g pointwise") {
    // Evaluate the plant acceleration under the control law directly and
    // compare the error-state derivative with the closed-loop form.
    const InterconnectedModel m = test_model();
    const Gains gains = Gains::checked(25.0 * Mat6::Identity(),
                                       10.0 * Mat6::Identity());
    const Mat12 f = closed_loop_matrix(gains);

    for (int i = 0; i < 30; ++i) {
        const KinematicParams theta{random_vec3(0.3), random_quaternion()};
        KinematicParams theta_hat;
        theta_hat.rho = theta.rho + random_vec3(0.05);
        const Vec3 dq = random_vec3(0.05);
        theta_hat.eta =
            UnitQuaternion::from_axis_angle(dq.normalized(),
                                            2.0 * std::asin(dq.norm())) *
            theta.eta;
        const Setup s = random_setup(theta);

        const ControlCommand cmd =
            control_law(s.x, s.xdot, s.ref, theta_hat, gains, m, s.rates);
        const auto [mbar, hbar] =
            combined_dynamics(m, s.x, s.xdot, s.rates, theta);
        const Vec6 u_eff = grasp_map(theta) * cmd.stacked();
        const Vec6 xddot = Eigen::PartialPivLU<Mat6>(mbar).solve(u_eff - hbar);

        const Vec12 zdot =
            (Vec12() << s.xdot - s.ref.xdot, xddot - s.ref.xddot).finished();
        const Vec12 z =
            (Vec12() << s.x - s.ref.x, s.xdot - s.ref.xdot).finished();
        const Vec12 g = perturbation_term(s.x, s.xdot, s.ref, theta, theta_hat,
                                          gains, m, s.rates);
        CHECK(g.head<6>().isZero(0.0));
        CHECK((zdot - (f * z + g)).norm() < 1e-8);
    }
}
