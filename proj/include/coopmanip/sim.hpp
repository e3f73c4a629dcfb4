#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "coopmanip/control.hpp"
#include "coopmanip/dynamics.hpp"
#include "coopmanip/estimation.hpp"
#include "coopmanip/stability.hpp"
#include "coopmanip/types.hpp"

namespace coopmanip {

enum class TrajectoryKind { RotatingAxisSine, FixedAxisSine, RestToRest };

/// Reference trajectory in minimal coordinates. The rotating-axis kind makes
/// the angular-velocity direction precess so every window longer than one
/// precession period contains two non-collinear directions; the fixed-axis
/// kind rolls about a single body axis and is deliberately non-exciting.
struct TrajectorySpec {
    TrajectoryKind kind = TrajectoryKind::RotatingAxisSine;
    Vec6 amplitude = Vec6::Zero();
    double base_frequency = 0.25;       // Hz
    double axis_precession_rate = 1.0;  // rad/s
    double duration = 20.0;             // s
    Vec6 start = Vec6::Zero();
    double c_v = 1.0;  // declared velocity bound
    double c_a = 5.0;  // declared acceleration bound
};

// Dense-samples the trajectory and throws InvalidConfig if the declared
// velocity/acceleration bounds or the gimbal margin are violated.
void validate_trajectory(const TrajectorySpec& spec);

Reference generate_reference(const TrajectorySpec& spec, double t);

struct NoiseSpec {
    Vec3 v_std = Vec3::Zero();  // m/s, per channel
    Vec3 w_std = Vec3::Zero();  // rad/s, per channel
    std::uint64_t seed = 0;

    bool enabled() const {
        return v_std.maxCoeff() > 0.0 || w_std.maxCoeff() > 0.0;
    }
};

// Deterministic Gaussian stream (splitmix64 + Box-Muller), identical across
// platforms for a given seed.
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : s_(seed) {}
    double normal();

  private:
    double uniform();
    std::uint64_t s_;
};

struct EstimatorSettings {
    double mu_attitude = 0.8;
    double mu_displacement = 0.8;
    double p0_scale = 100.0;     // P0 = p0_scale * I
    double sample_interval = 0;  // 0 -> simulation dt
    std::size_t pe_window = 500;
    double pe_threshold = 0.1;
};

struct SimConfig {
    InterconnectedModel model;
    KinematicParams theta_true;
    KinematicParams theta_guess;
    Gains gains;
    EstimatorSettings estimators;
    TrajectorySpec trajectory;
    NoiseSpec noise;
    double dt = 1e-3;
    bool adaptation_enabled = true;
    bool start_on_reference = true;
    Vec6 x0 = Vec6::Zero();
    Vec6 xdot0 = Vec6::Zero();

    void validate() const;
};

struct SimRecord {
    double t = 0.0;
    Vec6 x = Vec6::Zero();
    Vec6 x_d = Vec6::Zero();
    Vec6 e = Vec6::Zero();
    Vec6 edot = Vec6::Zero();
    Vec4 eta_hat = Vec4::Zero();
    Vec3 rho_hat = Vec3::Zero();
    double theta_err = 0.0;
    double u1_norm = 0.0;
    double u2_norm = 0.0;
    double pe_lambda_min = 0.0;
    double v_lyap = 0.0;
    double g_norm = 0.0;
    bool pe_ok = false;
    bool degenerate = false;
};

struct SimLog {
    std::vector<SimRecord> records;
    bool halted = false;
    std::string halt_reason;
};

struct SimState {
    double t = 0.0;
    long step_count = 0;
    Vec6 x = Vec6::Zero();
    Vec6 xdot = Vec6::Zero();
    AttitudeEstimatorState attitude;
    DisplacementEstimatorState displacement;
    PeWindow pe_window{1, 1.0};
    KinematicParams theta_hat;
    Mat12 p_lyap = Mat12::Zero();
    GaussianStream noise{0};
};

// End-effector twists consistent with the object motion and the true chain
// geometry; optional additive measurement noise from the stream.
std::pair<Twist, Twist> synthesize_twists(const Vec6& x, const Vec6& xdot,
                                          const KinematicParams& theta_true,
                                          const Mat6& lambda,
                                          const NoiseSpec& noise,
                                          GaussianStream* stream);

SimState sim_init(const SimConfig& config);

// One loop iteration: measure, update the estimators and the excitation
// window, evaluate the control at the current estimate, integrate one fixed
// step, and return the record for the step's start time. The control input
// is evaluated continuously inside the integration stages; the estimate is
// held over the step.
SimRecord step(SimState& state, const SimConfig& config);

// Full closed-loop run; deterministic for a given config.
SimLog run(const SimConfig& config);

// Default scenario shared by the CLI and the test suites: synthetic plant,
// rotating-axis reference, estimators at their defaults.
SimConfig default_scenario();

}  // namespace coopmanip
