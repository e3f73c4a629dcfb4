#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "coopmanip/control.hpp"
#include "coopmanip/dynamics.hpp"
#include "coopmanip/types.hpp"

namespace coopmanip {

// Solves P F + F^T P = -I for symmetric positive definite P via complex
// Schur reduction and back-substitution. Throws NotHurwitz if any eigenvalue
// of f has real part >= -1e-9.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& f);

/// Envelope constants of the plant and transforms over a declared operating
/// region and parameter ball, estimated by dense sampling. These feed the
/// closed-form growth constants of the perturbation bound.
struct BoundConstants {
    double c_m = 0.0;       // arm mass lower bound
    double c_M = 0.0;       // arm mass upper bound
    double c_g = 0.0;       // arm bias constant term
    double c_h = 0.0;       // arm bias quadratic coefficient
    double c_v = 0.0;       // reference velocity bound
    double c_a = 0.0;       // reference acceleration bound
    double cbar_m = 0.0;    // combined mass lower bound
    double cbar_M = 0.0;    // combined mass upper bound
    double cbar_g = 0.0;    // combined bias constant term
    double cbar_h = 0.0;    // combined bias quadratic coefficient
    double c_n = 0.0;       // max ||N+||
    double c_t = 0.0;       // max ||T||
    double c_d = 0.0;       // max ||D||
    double c_lambda = 0.0;  // ||Lambda||
    double c_l = 0.0;       // max sigma(L2) / min sigma(L1)
    double eps_t = 0.0;     // Lipschitz constant of T in theta
    double eps_d = 0.0;     // Lipschitz constant of D in theta
};

/// Operating region the constants are sampled over; recorded with reports.
struct SamplingRegion {
    double position_range = 1.0;  // |position components| <= range
    double euler_range = 0.6;     // |euler components| <= range (rad)
    double velocity_scale = 2.0;  // sampled ||xdot|| <= scale * c_v
    std::uint64_t seed = 0x5eedULL;
};

BoundConstants estimate_constants(const InterconnectedModel& model,
                                  const KinematicParams& theta_nominal,
                                  double radius, double c_v, double c_a,
                                  int samples,
                                  const SamplingRegion& region = {});

struct Kappas {
    double k0 = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
};

// Closed-form growth constants of ||g|| <= (k0 + k1||z|| + k2||z||^2)
// ||theta_err||, assembled from the sampled envelope constants.
Kappas kappa_bounds(const BoundConstants& c, double gain_norm);

// Largest admissible sup-norm of the parameter error that keeps the
// decay rate positive throughout the analysis region.
double r_theta_admissible(double lambda_max, double gamma, const Kappas& k);

struct StabilityReport {
    Mat12 p_matrix = Mat12::Zero();
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double gamma = 0.0;  // condition number of P
    Kappas kappas;
    double sigma = 0.0;  // 1/(2 lambda_max) - k1 * r_theta
    double b = 0.0;      // lambda_max (k2 r_z^2 + k0)
    double r_z = 0.0;    // region radius, k0/k2 when feasible
    double r_theta_bound = 0.0;
    double r_theta_input = 0.0;
    double alpha = 1.0;
    bool sigma_positive = false;
    bool initial_error_admissible = false;
    bool infeasible_r_z = false;  // k2 = 0; r_z fell back to the supplied value
};

StabilityReport stability_report(const Gains& gains, const Kappas& kappas,
                                 double r_theta_initial, double alpha = 1.0,
                                 double r_z_fallback = 1.0);

// Comparison-lemma envelope
//   t -> sqrt(gamma) ||z(0)|| e^{-sigma t}
//        + (b / lambda_min) * int_0^t e^{-sigma (t - tau)} ||theta_err(tau)|| dtau
// evaluated by trapezoidal quadrature on the sampled trace. Throws
// NonPositiveSigma if the report's sigma is not positive.
std::vector<double> ultimate_bound_envelope(
    double z0_norm, const StabilityReport& report,
    const std::vector<double>& times, const std::vector<double>& theta_norms);

}  // namespace coopmanip
