#include "coopmanip/stability.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>

namespace coopmanip {

namespace {

// splitmix64-backed uniform sampler, deterministic across platforms.
struct Sampler {
    std::uint64_t s;
    double next() {
        s += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        return static_cast<double>(z >> 11) / 9007199254740992.0;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }
    Vec3 ball3(double radius) {
        // rejection sampling inside the unit ball
        for (;;) {
            Vec3 v(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
            if (v.squaredNorm() <= 1.0) return radius * v;
        }
    }
};

double spectral_norm(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    return m.jacobiSvd().singularValues().maxCoeff();
}

// Perturbs theta by a 6-vector drawn in the metric ball: the first three
// components displace rho, the last three are the vector part of the error
// quaternion, so param_distance(theta, perturbed) equals the draw's norm.
KinematicParams perturb(const KinematicParams& theta, const Vec3& drho,
                        const Vec3& dq) {
    KinematicParams out;
    out.rho = theta.rho + drho;
    const double n = dq.norm();
    if (n < 1e-300) {
        out.eta = theta.eta;
    } else {
        const double angle = 2.0 * std::asin(std::min(1.0, n));
        out.eta = UnitQuaternion::from_axis_angle(dq / n, angle) * theta.eta;
    }
    return out;
}

}  // namespace

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& f) {
    if (f.rows() != f.cols()) {
        throw InvalidConfig("solve_lyapunov: matrix must be square");
    }
    const Eigen::Index n = f.rows();
    Eigen::ComplexSchur<Eigen::MatrixXd> schur(f);
    if (schur.info() != Eigen::Success) {
        throw Error("solve_lyapunov: Schur decomposition failed");
    }
    const Eigen::MatrixXcd t = schur.matrixT();
    const Eigen::MatrixXcd u = schur.matrixU();
    if (t.diagonal().real().maxCoeff() >= -1e-9) {
        throw NotHurwitz("solve_lyapunov: matrix is not Hurwitz");
    }

    // P F + F^T P = -I  ->  T^H Y + Y T = C with Y = U^H P U, C = -U^H U.
    const Eigen::MatrixXcd c = -(u.adjoint() * u);
    const Eigen::MatrixXcd th = t.adjoint();
    Eigen::MatrixXcd y(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::VectorXcd rhs = c.col(k);
        for (Eigen::Index j = 0; j < k; ++j) rhs -= t(j, k) * y.col(j);
        Eigen::MatrixXcd lhs = th;
        lhs.diagonal().array() += t(k, k);
        y.col(k) = lhs.triangularView<Eigen::Lower>().solve(rhs);
    }
    Eigen::MatrixXd p = (u * y * u.adjoint()).real();
    return 0.5 * (p + p.transpose());
}

BoundConstants estimate_constants(const InterconnectedModel& model,
                                  const KinematicParams& theta_nominal,
                                  double radius, double c_v, double c_a,
                                  int samples, const SamplingRegion& region) {
    if (!(radius > 0.0)) {
        throw InvalidConfig("estimate_constants: radius must be positive");
    }
    if (samples < 1000) {
        throw InvalidConfig("estimate_constants: need at least 1000 samples");
    }

    Sampler rng{region.seed};
    const double vmax = region.velocity_scale * std::max(c_v, 1e-6);

    BoundConstants c;
    c.c_v = c_v;
    c.c_a = c_a;
    c.c_lambda = spectral_norm(model.lambda);
    c.c_m = std::numeric_limits<double>::infinity();
    c.cbar_m = std::numeric_limits<double>::infinity();

    double max_bias_rest = 0.0, max_bias_rest_bar = 0.0;
    double max_quad = 0.0, max_quad_bar = 0.0;
    std::vector<std::pair<double, double>> arm_bias;   // (||xdot||^2, ||h||)
    std::vector<std::pair<double, double>> comb_bias;  // same for hbar

    int accepted = 0;
    int attempts = 0;
    while (accepted < samples) {
        if (++attempts > 20 * samples) {
            throw InvalidConfig("estimate_constants: region rejects too many "
                                "samples (gimbal clipping)");
        }
        Vec6 x, xdot;
        for (int i = 0; i < 3; ++i) {
            x[i] = rng.uniform(-region.position_range, region.position_range);
            x[3 + i] = rng.uniform(-region.euler_range, region.euler_range);
        }
        for (int i = 0; i < 6; ++i) xdot[i] = rng.uniform(-1, 1);
        xdot *= rng.uniform(0.0, vmax) / std::max(xdot.norm(), 1e-12);

        const KinematicParams th =
            perturb(theta_nominal, rng.ball3(radius), rng.ball3(radius / 2));
        const KinematicParams th2 =
            perturb(theta_nominal, rng.ball3(radius), rng.ball3(radius / 2));

        FrameRates rates;
        try {
            rates = frame_rates(x, xdot, th, model.lambda);
        } catch (const RepresentationSingularity&) {
            continue;
        }
        ++accepted;

        for (const TaskSpaceArm* arm : {&model.arm1, &model.arm2}) {
            Eigen::SelfAdjointEigenSolver<Mat6> es(arm->mass_matrix(x));
            c.c_m = std::min(c.c_m, es.eigenvalues().minCoeff());
            c.c_M = std::max(c.c_M, es.eigenvalues().maxCoeff());
            max_bias_rest =
                std::max(max_bias_rest, arm->bias(x, Vec6::Zero()).norm());
            arm_bias.emplace_back(xdot.squaredNorm(), arm->bias(x, xdot).norm());
        }

        const Mat6 t = velocity_transform(th);
        const Mat6 t2 = velocity_transform(th2);
        c.c_t = std::max(c.c_t, spectral_norm(t));
        c.c_n = std::max(c.c_n, spectral_norm(n_pseudoinverse(th)));
        const Mat6 d = d_matrix(rates.l1, rates.l1dot, rates.l2, rates.l2dot, t);
        const Mat6 d2 =
            d_matrix(rates.l1, rates.l1dot, rates.l2, rates.l2dot, t2);
        c.c_d = std::max(c.c_d, spectral_norm(d));

        const double dist = param_distance(th, th2);
        if (dist > 1e-9) {
            c.eps_t = std::max(c.eps_t, spectral_norm(t - t2) / dist);
            c.eps_d = std::max(c.eps_d, spectral_norm(d - d2) / dist);
        }

        const auto [mbar, hbar] = combined_dynamics(model, x, xdot, rates, th);
        const Mat6 msym = 0.5 * (mbar + mbar.transpose());
        Eigen::SelfAdjointEigenSolver<Mat6> esm(msym);
        c.cbar_m = std::min(c.cbar_m, esm.eigenvalues().minCoeff());
        c.cbar_M = std::max(c.cbar_M, spectral_norm(mbar));
        comb_bias.emplace_back(xdot.squaredNorm(), hbar.norm());
        const auto [mbar0, hbar0] =
            combined_dynamics(model, x, Vec6::Zero(), rates, th);
        max_bias_rest_bar = std::max(max_bias_rest_bar, hbar0.norm());

        const double s2max =
            rates.l2.jacobiSvd().singularValues().maxCoeff();
        const double s1min =
            rates.l1.jacobiSvd().singularValues().minCoeff();
        c.c_l = std::max(c.c_l, s2max / s1min);
    }

    // Envelope fits ||h|| <= c_g + c_h ||xdot||^2 with c_g the rest-state
    // maximum and c_h the largest excess quotient seen.
    c.c_g = max_bias_rest;
    c.cbar_g = max_bias_rest_bar;
    for (const auto& [v2, h] : arm_bias) {
        if (v2 > 1e-9) max_quad = std::max(max_quad, (h - c.c_g) / v2);
    }
    for (const auto& [v2, h] : comb_bias) {
        if (v2 > 1e-9) max_quad_bar = std::max(max_quad_bar, (h - c.cbar_g) / v2);
    }
    c.c_h = std::max(max_quad, 1e-12);
    c.cbar_h = std::max(max_quad_bar, 1e-12);
    return c;
}

Kappas kappa_bounds(const BoundConstants& c, double gain_norm) {
    const double shared = c.c_n + 2.0 * c.c_l * c.c_lambda * c.c_t;
    Kappas k;
    k.k0 = (c.eps_t * c.c_M * c.c_a * shared + c.eps_t * c.c_g +
            c.eps_t * c.c_h * c.c_v +
            (c.eps_t + c.eps_d) * c.c_M * c.c_d * c.c_lambda * c.c_v +
            c.eps_t * c.c_n * c.cbar_g) /
           c.c_m;
    k.k1 = (c.eps_t * c.c_M * shared * gain_norm +
            (c.eps_t + c.eps_d) * c.c_M * c.c_d * c.c_lambda +
            c.eps_t * c.c_n * c.cbar_h * c.c_v) /
           c.c_m;
    k.k2 = (c.c_h + c.c_n * c.cbar_h) * c.eps_t / c.c_m;
    return k;
}

double r_theta_admissible(double lambda_max, double gamma, const Kappas& k) {
    return 1.0 / (2.0 * lambda_max * (k.k1 + gamma * (k.k0 + k.k2)));
}

StabilityReport stability_report(const Gains& gains, const Kappas& kappas,
                                 double r_theta_initial, double alpha,
                                 double r_z_fallback) {
    if (!(r_theta_initial >= 0.0) || !(alpha > 0.0)) {
        throw InvalidConfig("stability_report: bad r_theta or alpha");
    }
    const Mat12 f = closed_loop_matrix(gains);
    StabilityReport rep;
    rep.p_matrix = solve_lyapunov(f);
    Eigen::SelfAdjointEigenSolver<Mat12> es(rep.p_matrix);
    rep.lambda_min = es.eigenvalues().minCoeff();
    rep.lambda_max = es.eigenvalues().maxCoeff();
    rep.gamma = rep.lambda_max / rep.lambda_min;
    rep.kappas = kappas;
    rep.alpha = alpha;
    rep.r_theta_input = r_theta_initial;

    if (kappas.k2 > 0.0) {
        rep.r_z = kappas.k0 / kappas.k2;
    } else {
        rep.r_z = r_z_fallback;
        rep.infeasible_r_z = true;
    }
    const double r_theta = alpha * r_theta_initial;
    rep.sigma = 1.0 / (2.0 * rep.lambda_max) - kappas.k1 * r_theta;
    rep.b = rep.lambda_max * (kappas.k2 * rep.r_z * rep.r_z + kappas.k0);
    rep.r_theta_bound = r_theta_admissible(rep.lambda_max, rep.gamma, kappas);
    rep.sigma_positive = rep.sigma > 0.0;
    rep.initial_error_admissible = r_theta <= rep.r_theta_bound;
    return rep;
}

std::vector<double> ultimate_bound_envelope(
    double z0_norm, const StabilityReport& report,
    const std::vector<double>& times, const std::vector<double>& theta_norms) {
    if (!(report.sigma > 0.0)) {
        throw NonPositiveSigma("ultimate_bound_envelope: sigma must be positive");
    }
    if (times.size() != theta_norms.size() || times.empty()) {
        throw InvalidConfig("ultimate_bound_envelope: inconsistent trace");
    }
    const double sigma = report.sigma;
    const double scale = report.b / report.lambda_min;
    std::vector<double> env(times.size());
    double integral = 0.0;
    env[0] = std::sqrt(report.gamma) * z0_norm * std::exp(-sigma * times[0]);
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double dt = times[k] - times[k - 1];
        if (!(dt > 0.0)) {
            throw InvalidConfig("ultimate_bound_envelope: times must increase");
        }
        const double decay = std::exp(-sigma * dt);
        integral = decay * integral +
                   0.5 * dt * (decay * theta_norms[k - 1] + theta_norms[k]);
        env[k] = std::sqrt(report.gamma) * z0_norm *
                     std::exp(-sigma * times[k]) +
                 scale * integral;
    }
    return env;
}

}  // namespace coopmanip
