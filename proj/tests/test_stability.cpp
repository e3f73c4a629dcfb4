#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "coopmanip/stability.hpp"

using namespace coopmanip;

namespace {

std::mt19937_64 rng(53);

double unif(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
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

KinematicParams nominal_theta() {
    return KinematicParams{
        Vec3(0.1, -0.2, 0.3),
        UnitQuaternion::from_axis_angle(Vec3(1, 0.5, -0.25).normalized(),
                                        M_PI / 6.0)};
}

// Kronecker-structured oracle: assemble the n^2 x n^2 linear system for
// F^T P + P F = -I and solve it densely.
Eigen::MatrixXd lyapunov_oracle(const Eigen::MatrixXd& f) {
    const int n = static_cast<int>(f.rows());
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n * n, n * n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int row = j * n + i;
            for (int k = 0; k < n; ++k) {
                big(row, j * n + k) += f(k, i);  // (F^T P)(i, j)
                big(row, k * n + i) += f(k, j);  // (P F)(i, j)
            }
            rhs[row] = (i == j) ? -1.0 : 0.0;
        }
    }
    const Eigen::VectorXd sol = big.partialPivLu().solve(rhs);
    Eigen::MatrixXd p(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) p(i, j) = sol[j * n + i];
    return p;
}

}  // namespace

TEST_CASE("solve_lyapunov: scalar analogue") {
    Eigen::MatrixXd f(1, 1);
    f << -1.0;
    const Eigen::MatrixXd p = solve_lyapunov(f);
    CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("solve_lyapunov: block companion form against the oracle") {
    const Gains g = Gains::checked(Mat6::Identity(), 2.0 * Mat6::Identity());
    const Mat12 f = closed_loop_matrix(g);
    const Eigen::MatrixXd p = solve_lyapunov(f);

    const Eigen::MatrixXd residual =
        p * f + f.transpose() * p + Eigen::MatrixXd::Identity(12, 12);
    CHECK(residual.norm() < 1e-9);

    const Eigen::MatrixXd p_oracle = lyapunov_oracle(f);
    CHECK((p - p_oracle).cwiseAbs().maxCoeff() < 1e-9);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("solve_lyapunov rejects non-Hurwitz input") {
    Eigen::MatrixXd f = -Eigen::MatrixXd::Identity(4, 4);
    f(2, 2) = 0.1;
    CHECK_THROWS_AS(solve_lyapunov(f), NotHurwitz);
}

TEST_CASE("solve_lyapunov: random stable gain pairs") {
    for (int i = 0; i < 20; ++i) {
        const Gains g = Gains::checked(random_spd(0.5), random_spd(0.5));
        const Mat12 f = closed_loop_matrix(g);
        const Eigen::MatrixXd p = solve_lyapunov(f);
        const Eigen::MatrixXd residual =
            p * f + f.transpose() * p + Eigen::MatrixXd::Identity(12, 12);
        CHECK(residual.norm() < 1e-9);
        CHECK((p - lyapunov_oracle(f)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("estimate_constants: constant-mass model pins c_m and c_M") {
    InterconnectedModel m = test_model();
    m.arm1.mass_matrix = [](const Vec6&) { return 2.0 * Mat6::Identity(); };
    m.arm2.mass_matrix = [](const Vec6&) { return 2.0 * Mat6::Identity(); };
    const BoundConstants c =
        estimate_constants(m, nominal_theta(), 0.5, 1.5, 8.0, 1000);
    CHECK(c.c_m == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(c.c_M == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(c.c_lambda == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.c_v == 1.5);
    CHECK(c.c_a == 8.0);
}

TEST_CASE("estimate_constants: sampled envelopes behave") {
    const BoundConstants c =
        estimate_constants(test_model(), nominal_theta(), 0.5, 1.5, 8.0, 2000);
    // The displacement block of T has unit-norm sensitivity, so the Lipschitz
    // quotient can never fall below one; attitude sensitivity pushes it up.
    CHECK(c.eps_t >= 0.999);
    CHECK(c.eps_t < 10.0);
    CHECK(c.eps_d >= 0.0);
    CHECK(c.c_n <= 1.0 + 1e-9);  // ||N+|| = 1/sqrt(lambda_min(Q)) <= 1
    CHECK(c.c_n > 0.5);
    CHECK(c.c_t >= 1.0);
    CHECK(c.c_m > 0.0);
    CHECK(c.cbar_m > 0.0);
    CHECK(c.c_g <= test_model().arm1.c_g + test_model().arm2.c_g + 1e-9);
    CHECK_THROWS_AS(estimate_constants(test_model(), nominal_theta(), -1.0,
                                       1.5, 8.0, 2000),
                    InvalidConfig);
    CHECK_THROWS_AS(estimate_constants(test_model(), nominal_theta(), 0.5, 1.5,
                                       8.0, 10),
                    InvalidConfig);
}

TEST_CASE("kappa_bounds: zero sensitivity, hand value, monotonicity") {
    BoundConstants c;
    c.c_m = 2.0;
    c.c_M = 3.0;
    c.c_g = 1.0;
    c.c_h = 1.0;
    c.c_v = 1.0;
    c.c_a = 2.0;
    c.cbar_g = 0.5;
    c.cbar_h = 3.0;
    c.c_n = 2.0;
    c.c_t = 1.5;
    c.c_d = 0.7;
    c.c_lambda = 1.0;
    c.c_l = 1.2;
    c.eps_t = 0.0;
    c.eps_d = 0.0;

    const Kappas zero = kappa_bounds(c, 25.0);
    CHECK(zero.k0 == 0.0);
    CHECK(zero.k1 == 0.0);
    CHECK(zero.k2 == 0.0);

    // kappa2 = (c_h + c_n cbar_h) eps_t / c_m with the quoted numbers.
    c.eps_t = 0.5;
    const Kappas k = kappa_bounds(c, 25.0);
    CHECK(k.k2 == doctest::Approx((1.0 + 2.0 * 3.0) * 0.5 / 2.0));
    CHECK(k.k2 == doctest::Approx(1.75));

    // kappa0 strictly increases with the acceleration bound.
    BoundConstants c_hi = c;
    c_hi.c_a = c.c_a + 1.0;
    CHECK(kappa_bounds(c_hi, 25.0).k0 > k.k0);
}

TEST_CASE("stability_report: admissibility logic") {
    const Gains g = Gains::checked(25.0 * Mat6::Identity(),
                                   10.0 * Mat6::Identity());
    Kappas k{5.0, 40.0, 2.0};

    // Tiny initial error: sigma positive and the bound comfortable.
    const StabilityReport ok = stability_report(g, k, 1e-6);
    CHECK(ok.sigma_positive);
    CHECK(ok.initial_error_admissible);
    CHECK(ok.gamma >= 1.0);
    CHECK(ok.r_z == doctest::Approx(k.k0 / k.k2));
    CHECK((ok.p_matrix * closed_loop_matrix(g) +
           closed_loop_matrix(g).transpose() * ok.p_matrix +
           Mat12::Identity())
              .norm() < 1e-9);

    // Large initial error: sigma crosses zero and both flags drop.
    const double r_big = 1.0 / (2.0 * ok.lambda_max * k.k1) * 1.5;
    const StabilityReport bad = stability_report(g, k, r_big);
    CHECK_FALSE(bad.sigma_positive);
    CHECK_FALSE(bad.initial_error_admissible);

    // The admissible bound is always at least as strict as the sigma
    // condition, for any positive constants and gamma >= 1.
    for (int i = 0; i < 200; ++i) {
        const double lmax = unif(0.1, 10.0);
        const double gamma = unif(1.0, 50.0);
        const Kappas kr{unif(0.01, 10.0), unif(0.01, 10.0), unif(0.01, 10.0)};
        const double strict = r_theta_admissible(lmax, gamma, kr);
        const double loose = 1.0 / (2.0 * lmax * kr.k1);
        CHECK(strict <= loose);
    }

    // Doubling lambda_max halves the admissible bound at fixed kappas/gamma.
    const double b1 = r_theta_admissible(1.0, 5.0, k);
    const double b2 = r_theta_admissible(2.0, 5.0, k);
    CHECK(b2 == doctest::Approx(b1 / 2.0).epsilon(1e-14));
}

TEST_CASE("stability_report: infeasible r_z falls back to the supplied value") {
    const Gains g = Gains::checked(25.0 * Mat6::Identity(),
                                   10.0 * Mat6::Identity());
    const Kappas k{0.0, 1.0, 0.0};  // kappa2 = 0: r_z undefined
    const StabilityReport rep = stability_report(g, k, 1e-4, 1.0, 0.7);
    CHECK(rep.infeasible_r_z);
    CHECK(rep.r_z == 0.7);
}

TEST_CASE("ultimate bound envelope: limits and guards") {
    const Gains g = Gains::checked(25.0 * Mat6::Identity(),
                                   10.0 * Mat6::Identity());
    const Kappas k{1.0, 2.0, 0.5};
    const StabilityReport rep = stability_report(g, k, 1e-4);
    REQUIRE(rep.sigma > 0.0);

    const int n = 20001;
    std::vector<double> times(n), zero(n, 0.0), constant(n, 0.3), decay(n);
    for (int i = 0; i < n; ++i) {
        times[i] = 1e-3 * i;
        decay[i] = 0.3 * std::exp(-2.0 * times[i]);
    }

    // Zero parameter error: a pure exponential.
    const auto env0 = ultimate_bound_envelope(0.5, rep, times, zero);
    for (int i = 0; i < n; i += 500) {
        CHECK(env0[i] == doctest::Approx(std::sqrt(rep.gamma) * 0.5 *
                                         std::exp(-rep.sigma * times[i]))
                             .epsilon(1e-10));
    }

    // Constant parameter error: the convolution integrates in closed form to
    // (b c / (lambda_min sigma)) (1 - e^{-sigma t}), approaching that limit.
    const auto envc = ultimate_bound_envelope(0.0, rep, times, constant);
    const double limit = rep.b * 0.3 / (rep.lambda_min * rep.sigma);
    const double exact = limit * (1.0 - std::exp(-rep.sigma * times.back()));
    CHECK(envc.back() == doctest::Approx(exact).epsilon(1e-6));
    CHECK(envc.back() < limit);
    CHECK(envc.back() > 0.95 * limit);

    // Decaying parameter error: the envelope dies out.
    const auto envd = ultimate_bound_envelope(0.0, rep, times, decay);
    CHECK(envd.back() < 0.05 * envd[n / 10]);

    StabilityReport bad = rep;
    bad.sigma = -0.1;
    CHECK_THROWS_AS(ultimate_bound_envelope(0.5, bad, times, zero),
                    NonPositiveSigma);
}
