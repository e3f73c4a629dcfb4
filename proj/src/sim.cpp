#include "coopmanip/sim.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace coopmanip {

namespace {

struct Scalar3 {
    double value;
    double dot;
    double ddot;
};

// s(t) = (1 - cos(2 pi f t)) / 2: unit-amplitude bump that starts and ends
// each cycle at rest.
Scalar3 raised_cosine(double f, double t) {
    const double w = 2.0 * M_PI * f;
    return {0.5 * (1.0 - std::cos(w * t)), 0.5 * w * std::sin(w * t),
            0.5 * w * w * std::cos(w * t)};
}

// c(t) = s(t) cos(nu t + phase) and its derivatives.
Scalar3 modulated_cos(const Scalar3& s, double nu, double phase, double t) {
    const double c = std::cos(nu * t + phase), sn = std::sin(nu * t + phase);
    return {s.value * c, s.dot * c - s.value * nu * sn,
            s.ddot * c - 2.0 * s.dot * nu * sn - s.value * nu * nu * c};
}

Scalar3 modulated_sin(const Scalar3& s, double nu, double phase, double t) {
    const double c = std::cos(nu * t + phase), sn = std::sin(nu * t + phase);
    return {s.value * sn, s.dot * sn + s.value * nu * c,
            s.ddot * sn + 2.0 * s.dot * nu * c - s.value * nu * nu * sn};
}

Scalar3 quintic_blend(double duration, double t) {
    const double tau = std::clamp(t / duration, 0.0, 1.0);
    const double tau2 = tau * tau;
    return {tau * tau2 * (10.0 - 15.0 * tau + 6.0 * tau2),
            30.0 * tau2 * (1.0 - tau) * (1.0 - tau) / duration,
            (60.0 * tau - 180.0 * tau2 + 120.0 * tau * tau2) /
                (duration * duration)};
}

void set_channel(Reference& ref, int i, double base, double amp,
                 const Scalar3& s) {
    ref.x[i] = base + amp * s.value;
    ref.xdot[i] = amp * s.dot;
    ref.xddot[i] = amp * s.ddot;
}

}  // namespace

Reference generate_reference(const TrajectorySpec& spec, double t) {
    Reference ref;
    ref.x = spec.start;
    switch (spec.kind) {
        case TrajectoryKind::RotatingAxisSine: {
            const Scalar3 s = raised_cosine(spec.base_frequency, t);
            for (int i = 0; i < 3; ++i)
                set_channel(ref, i, spec.start[i], spec.amplitude[i], s);
            const double nu = spec.axis_precession_rate;
            set_channel(ref, 3, spec.start[3], spec.amplitude[3],
                        modulated_cos(s, nu, 0.0, t));
            set_channel(ref, 4, spec.start[4], spec.amplitude[4],
                        modulated_sin(s, nu, 0.0, t));
            set_channel(ref, 5, spec.start[5], spec.amplitude[5],
                        modulated_sin(s, nu, M_PI / 3.0, t));
            break;
        }
        case TrajectoryKind::FixedAxisSine: {
            const Scalar3 s = raised_cosine(spec.base_frequency, t);
            for (int i = 0; i < 3; ++i)
                set_channel(ref, i, spec.start[i], spec.amplitude[i], s);
            set_channel(ref, 3, spec.start[3], spec.amplitude[3], s);
            break;
        }
        case TrajectoryKind::RestToRest: {
            const Scalar3 s = quintic_blend(spec.duration, t);
            for (int i = 0; i < 6; ++i)
                set_channel(ref, i, spec.start[i], spec.amplitude[i], s);
            break;
        }
    }
    return ref;
}

void validate_trajectory(const TrajectorySpec& spec) {
    if (!(spec.duration >= 0.0)) {
        throw InvalidConfig("trajectory: duration must be non-negative");
    }
    if (!(spec.base_frequency > 0.0) &&
        spec.kind != TrajectoryKind::RestToRest) {
        throw InvalidConfig("trajectory: base_frequency must be positive");
    }
    if (spec.kind == TrajectoryKind::FixedAxisSine &&
        (spec.amplitude[4] != 0.0 || spec.amplitude[5] != 0.0)) {
        throw InvalidConfig("fixed-axis trajectory rotates about the first "
                            "euler axis only; amplitude[4] and amplitude[5] "
                            "must be zero");
    }
    const int n = 4000;
    const double horizon = std::max(spec.duration, 1e-6);
    for (int k = 0; k <= n; ++k) {
        const double t = horizon * k / n;
        const Reference ref = generate_reference(spec, t);
        if (ref.xdot.norm() > spec.c_v) {
            throw InvalidConfig("trajectory violates the declared velocity "
                                "bound c_v");
        }
        if (ref.xddot.norm() > spec.c_a) {
            throw InvalidConfig("trajectory violates the declared acceleration "
                                "bound c_a");
        }
        if (std::abs(ref.x[4]) > M_PI / 2.0 - 5e-3) {
            throw InvalidConfig("trajectory approaches the representation "
                                "singularity (middle euler angle)");
        }
    }
}

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw InvalidConfig("dt must be positive");
    if (trajectory.duration / dt > 1e7) {
        throw InvalidConfig("duration/dt exceeds 1e7 steps");
    }
    if (noise.v_std.minCoeff() < 0.0 || noise.w_std.minCoeff() < 0.0) {
        throw InvalidConfig("noise standard deviations must be non-negative");
    }
    validate_trajectory(trajectory);
}

double GaussianStream::uniform() {
    s_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return (static_cast<double>(z >> 11) + 0.5) / 9007199254740992.0;
}

double GaussianStream::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::pair<Twist, Twist> synthesize_twists(const Vec6& x, const Vec6& xdot,
                                          const KinematicParams& theta_true,
                                          const Mat6& lambda,
                                          const NoiseSpec& noise,
                                          GaussianStream* stream) {
    const Vec6 x1 = lambda * x;
    const Vec6 x1dot = lambda * xdot;
    Twist t1;
    t1.linear = x1dot.head<3>();
    t1.angular = euler_rate_to_omega(x1.tail<3>()) * x1dot.tail<3>();
    Twist t2 = transform_twist(theta_true, t1);

    if (stream != nullptr && noise.enabled()) {
        for (Twist* tw : {&t1, &t2}) {
            for (int i = 0; i < 3; ++i) {
                tw->linear[i] += noise.v_std[i] * stream->normal();
            }
            for (int i = 0; i < 3; ++i) {
                tw->angular[i] += noise.w_std[i] * stream->normal();
            }
        }
    }
    return {t1, t2};
}

SimState sim_init(const SimConfig& config) {
    const double h = config.estimators.sample_interval > 0.0
                         ? config.estimators.sample_interval
                         : config.dt;
    SimState st;
    st.attitude = attitude_init(config.theta_guess.eta,
                                config.estimators.mu_attitude, h);
    st.displacement = displacement_init(
        config.theta_guess.rho,
        config.estimators.p0_scale * Mat3::Identity(),
        config.estimators.mu_displacement, h);
    st.pe_window =
        PeWindow(config.estimators.pe_window, config.estimators.pe_threshold);
    st.theta_hat = config.theta_guess;
    st.p_lyap = solve_lyapunov(closed_loop_matrix(config.gains));
    st.noise = GaussianStream(config.noise.seed);
    if (config.start_on_reference) {
        const Reference ref = generate_reference(config.trajectory, 0.0);
        st.x = ref.x;
        st.xdot = ref.xdot;
    } else {
        st.x = config.x0;
        st.xdot = config.xdot0;
    }
    return st;
}

namespace {

Vec12 plant_rhs(const SimConfig& config, const KinematicParams& theta_hat,
                double t, const Vec6& x, const Vec6& xdot) {
    const Reference ref = generate_reference(config.trajectory, t);
    const FrameRates rates =
        frame_rates(x, xdot, config.theta_true, config.model.lambda);
    const ControlCommand cmd = control_law(x, xdot, ref, theta_hat,
                                           config.gains, config.model, rates);
    const auto [mbar, hbar] =
        combined_dynamics(config.model, x, xdot, rates, config.theta_true);
    const Vec6 u_eff = grasp_map(config.theta_true) * cmd.stacked();
    const Vec6 xddot = Eigen::PartialPivLU<Mat6>(mbar).solve(u_eff - hbar);
    return (Vec12() << xdot, xddot).finished();
}

// Measurement + estimator update + logging fields for the current time.
SimRecord observe(SimState& st, const SimConfig& config) {
    const auto [t1, t2] =
        synthesize_twists(st.x, st.xdot, config.theta_true,
                          config.model.lambda, config.noise, &st.noise);
    st.attitude = attitude_update(st.attitude, t1.angular, t2.angular);
    st.displacement = displacement_update(st.displacement, st.attitude.eta_hat,
                                          t1.linear, t2.linear, t2.angular);
    if (config.adaptation_enabled) {
        st.theta_hat =
            KinematicParams{st.displacement.rho_hat, st.attitude.eta_hat};
    } else {
        st.theta_hat = config.theta_guess;
    }
    st.pe_window.push(t2.angular);
    const auto [pi, pe_lambda] = pe_check(st.pe_window);

    const Reference ref = generate_reference(config.trajectory, st.t);
    const FrameRates rates =
        frame_rates(st.x, st.xdot, config.theta_true, config.model.lambda);
    const ControlCommand cmd = control_law(
        st.x, st.xdot, ref, st.theta_hat, config.gains, config.model, rates);
    const Vec12 g =
        perturbation_term(st.x, st.xdot, ref, config.theta_true, st.theta_hat,
                          config.gains, config.model, rates);

    SimRecord rec;
    rec.t = st.t;
    rec.x = st.x;
    rec.x_d = ref.x;
    rec.e = st.x - ref.x;
    rec.edot = st.xdot - ref.xdot;
    rec.eta_hat = st.attitude.eta_hat.as_vec4();
    rec.rho_hat = st.displacement.rho_hat;
    rec.theta_err = param_distance(config.theta_true, st.theta_hat);
    rec.u1_norm = cmd.u1.norm();
    rec.u2_norm = cmd.u2.norm();
    rec.pe_lambda_min = pe_lambda;
    const Vec12 z = (Vec12() << rec.e, rec.edot).finished();
    rec.v_lyap = std::sqrt(z.dot(st.p_lyap * z));
    rec.g_norm = g.norm();
    rec.pe_ok = pe_lambda > config.estimators.pe_threshold;
    rec.degenerate = st.attitude.degenerate_spectrum;
    return rec;
}

void integrate_step(SimState& st, const SimConfig& config) {
    const double dt = config.dt;
    const KinematicParams theta_hat = st.theta_hat;  // held over the step
    const Vec12 y0 = (Vec12() << st.x, st.xdot).finished();

    const auto rhs = [&](double t, const Vec12& y) {
        return plant_rhs(config, theta_hat, t, y.head<6>(), y.tail<6>());
    };
    const Vec12 k1 = rhs(st.t, y0);
    const Vec12 k2 = rhs(st.t + dt / 2.0, y0 + (dt / 2.0) * k1);
    const Vec12 k3 = rhs(st.t + dt / 2.0, y0 + (dt / 2.0) * k2);
    const Vec12 k4 = rhs(st.t + dt, y0 + dt * k3);
    const Vec12 y1 = y0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    st.x = y1.head<6>();
    st.xdot = y1.tail<6>();
    st.step_count += 1;
    st.t = st.step_count * dt;
}

}  // namespace

SimRecord step(SimState& state, const SimConfig& config) {
    SimRecord rec = observe(state, config);
    integrate_step(state, config);
    return rec;
}

SimLog run(const SimConfig& config) {
    config.validate();
    SimState st = sim_init(config);
    const long nsteps =
        std::lround(config.trajectory.duration / config.dt);
    SimLog log;
    log.records.reserve(static_cast<std::size_t>(nsteps) + 1);
    try {
        for (long k = 0; k < nsteps; ++k) {
            log.records.push_back(step(st, config));
        }
        log.records.push_back(observe(st, config));
    } catch (const SingularL& e) {
        log.halted = true;
        log.halt_reason = e.what();
    } catch (const RepresentationSingularity& e) {
        log.halted = true;
        log.halt_reason = e.what();
    }
    return log;
}

SimConfig default_scenario() {
    SimConfig cfg;
    cfg.model.arm1 = TaskSpaceArm::synthetic(2.0, 0.3, 0.5, 0.2, 1);
    cfg.model.arm2 = TaskSpaceArm::synthetic(2.2, 0.25, 0.4, 0.15, 2);
    cfg.model.object = ObjectModel::synthetic(1.0, 0.5, 0.3);
    cfg.model.lambda = Mat6::Identity();

    cfg.theta_true.rho = Vec3(0.1, -0.2, 0.3);
    cfg.theta_true.eta = UnitQuaternion::from_axis_angle(
        Vec3(1.0, 0.5, -0.25).normalized(), M_PI / 6.0);
    // Default guess: small offset from the true parameters, inside the
    // admissible initial-error bound of the stability report.
    cfg.theta_guess.rho = cfg.theta_true.rho + Vec3(2e-7, -1e-7, 1e-7);
    cfg.theta_guess.eta =
        UnitQuaternion::from_axis_angle(Vec3(0.0, 0.0, 1.0), 4e-7) *
        cfg.theta_true.eta;

    cfg.gains = Gains::checked(25.0 * Mat6::Identity(), 10.0 * Mat6::Identity());

    cfg.trajectory.kind = TrajectoryKind::RotatingAxisSine;
    cfg.trajectory.amplitude =
        (Vec6() << 0.15, 0.15, 0.15, 0.35, 0.35, 0.25).finished();
    cfg.trajectory.base_frequency = 0.25;
    cfg.trajectory.axis_precession_rate = 1.5;
    cfg.trajectory.duration = 20.0;
    cfg.trajectory.c_v = 1.5;
    cfg.trajectory.c_a = 8.0;
    return cfg;
}

}  // namespace coopmanip
