#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <utility>
#include <vector>

#include "coopmanip/rigid_motion.hpp"
#include "coopmanip/types.hpp"

namespace coopmanip {

/// Recursive attitude estimator: accumulates the 4x4 data matrix
/// Gamma_k = varrho * Gamma_{k-1} + Omega(w1_k, w2_k) and reads the attitude
/// off its dominant eigenvector. The data-only part of Gamma (initial prior
/// excluded) drives the non-identifiability flag: when its top two
/// eigenvalues coincide the angular-velocity history has not left a single
/// direction and the attitude is not yet observable.
struct AttitudeEstimatorState {
    Mat4 gamma = Mat4::Zero();       // full matrix, prior included
    Mat4 gamma_data = Mat4::Zero();  // contributions of the data alone
    Vec4 eta0 = Vec4::Zero();
    double prior_weight = 1.0;  // varrho^k, multiplies eta0 * eta0^T
    UnitQuaternion eta_hat;
    double lambda_max = 1.0;
    double varrho = 1.0;
    long step_index = 0;
    bool degenerate_spectrum = false;
    double spectral_gap = 0.0;  // top-two eigenvalue gap of gamma_data
};

// varrho = exp(-mu * h). Requires h > 0 and 0 <= mu < 1.
AttitudeEstimatorState attitude_init(const UnitQuaternion& eta0, double mu,
                                     double h);

AttitudeEstimatorState attitude_update(const AttitudeEstimatorState& state,
                                       const Vec3& w1, const Vec3& w2);

// Largest eigenvalue and a unit eigenvector of a symmetric 4x4 matrix,
// computed by cyclic Jacobi sweeps run to full convergence. The eigenvector
// sign is fixed by making its largest-magnitude component positive. Throws
// NotSymmetric if m is not symmetric.
std::pair<double, Vec4> max_eigenpair(const Mat4& m);

/// Recursive least-squares displacement estimator (3-parameter
/// specialization with regressor [w2 x]). Ill-conditioned gain inversions
/// skip the sample and leave the state unchanged.
struct DisplacementEstimatorState {
    Vec3 rho_hat = Vec3::Zero();
    Mat3 p_matrix = Mat3::Identity();
    double varrho = 1.0;
    long step_index = 0;
    long skipped_updates = 0;
};

// Requires p0 symmetric positive definite.
DisplacementEstimatorState displacement_init(const Vec3& rho0, const Mat3& p0,
                                             double mu, double h);

DisplacementEstimatorState displacement_update(
    const DisplacementEstimatorState& state, const UnitQuaternion& eta_hat,
    const Vec3& v1, const Vec3& v2, const Vec3& w2);

/// Generic forgetting RLS for y = W a + e with gain
/// K = P W^T (varrho I + W P W^T)^-1.
struct RlsState {
    Eigen::VectorXd a_hat;
    Eigen::MatrixXd p_matrix;
    long skipped_updates = 0;
};

RlsState rls_init(const Eigen::VectorXd& a0, const Eigen::MatrixXd& p0);

RlsState rls_update(const RlsState& state, const Eigen::MatrixXd& w,
                    const Eigen::VectorXd& y, double varrho);

/// Sliding window of angular-velocity samples for the persistent-excitation
/// test Pi = sum over the window of -[w x]^2 > 0.
class PeWindow {
  public:
    PeWindow(std::size_t capacity, double threshold);

    void push(const Vec3& w);
    std::size_t size() const { return buffer_.size(); }
    std::size_t capacity() const { return capacity_; }
    double threshold() const { return threshold_; }
    const std::vector<Vec3>& samples() const { return buffer_; }

  private:
    std::vector<Vec3> buffer_;
    std::size_t capacity_;
    std::size_t next_ = 0;
    double threshold_;
};

// Excitation matrix over the window and its minimum eigenvalue. PE holds
// iff the eigenvalue exceeds the window threshold.
std::pair<Mat3, double> pe_check(const PeWindow& window);

}  // namespace coopmanip
