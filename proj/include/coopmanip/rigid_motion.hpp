#pragma once

#include <utility>

#include "coopmanip/types.hpp"

namespace coopmanip {

/// Unit quaternion [v; s] representing a rotation. The scalar part is kept
/// non-negative to resolve the double cover deterministically; on an exactly
/// zero scalar part the first nonzero vector component is made positive.
class UnitQuaternion {
  public:
    // Identity rotation.
    UnitQuaternion() : v_(Vec3::Zero()), s_(1.0) {}

    // Normalizes and sign-fixes. Throws InvalidConfig on a near-zero norm.
    UnitQuaternion(const Vec3& v, double s);

    static UnitQuaternion identity() { return UnitQuaternion(); }
    static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);

    const Vec3& vec() const { return v_; }
    double scalar() const { return s_; }
    Vec4 as_vec4() const { return (Vec4() << v_, s_).finished(); }

    UnitQuaternion conjugate() const;

    // Hamilton product; composition of rotations: A(a*b) = A(a)*A(b).
    UnitQuaternion operator*(const UnitQuaternion& rhs) const;

    // Rotation angle of the relative rotation between two quaternions,
    // reported through the vector part of the error quaternion. Used as the
    // attitude component of the parameter-error metric.
    static Vec3 error_vec(const UnitQuaternion& a, const UnitQuaternion& b);

  private:
    Vec3 v_;
    double s_;
};

/// Stacked linear (m/s) and angular (rad/s) velocity of an end-effector,
/// expressed in its own tool frame.
struct Twist {
    Vec3 linear = Vec3::Zero();
    Vec3 angular = Vec3::Zero();

    Vec6 stacked() const { return (Vec6() << linear, angular).finished(); }
    static Twist from_stacked(const Vec6& s) {
        return Twist{s.head<3>(), s.tail<3>()};
    }
};

/// The unknown kinematic parameters of the closed chain: displacement rho
/// (expressed in the second tool frame) and relative attitude eta.
struct KinematicParams {
    Vec3 rho = Vec3::Zero();
    UnitQuaternion eta;

    // Parameters of the inverse relative transform; transforming a twist by
    // theta and then by inverse(theta) is the identity.
    KinematicParams inverse() const;
};

// Parameter-error metric: || [rho - rho'; vec(eta (*) conj(eta'))] ||.
double param_distance(const KinematicParams& a, const KinematicParams& b);

Mat3 skew(const Vec3& w);

// A(eta) = (2*s^2 - 1) I + 2 s [v x] + 2 v v^T. Orthonormal, det +1.
Mat3 rotation_from_quaternion(const UnitQuaternion& eta);

// Quaternion from a rotation matrix (Shepperd-style branch selection),
// sign-fixed like every other constructed quaternion.
UnitQuaternion quaternion_from_rotation(const Mat3& a);

// Symmetric 4x4 data matrix of one angular-velocity pair. Satisfies
// eta^T Omega(w1, w2) eta = w2^T A(eta) w1 for every unit quaternion.
Mat4 omega_matrix(const Vec3& w1, const Vec3& w2);

// Velocity transformation T(theta) with blocks [A^T, A^T [rho x]; 0, A^T]
// acting on stacked twists [v; w]. Direction convention: with
// t2 = transform_twist(theta, t1), T(theta) maps t2 back onto t1, i.e.
// t1.stacked() = T(theta) * t2.stacked(). Equivalently the forward map is
// T(theta.inverse()).
Mat6 velocity_transform(const KinematicParams& theta);

// Closed-chain twist relation: w2 = A(eta) w1, v2 = A(eta) v1 - rho x w2.
Twist transform_twist(const KinematicParams& theta, const Twist& t1);

/// Analytic L_o and Ldot_o for the intrinsic X-Y-Z Euler convention
/// R = Rx(a) Ry(b) Rz(c), with euler_rate = L_o * w_body. The full 6x6
/// generalized-rate map is diag(I, L_o). Throws RepresentationSingularity
/// when |b| is within 1e-3 rad of pi/2.
std::pair<Mat3, Mat3> orientation_rates(const Vec3& euler,
                                        const Vec3& euler_rate);

// Inverse of L_o (maps euler rates to body angular velocity); same
// singularity guard as orientation_rates.
Mat3 euler_rate_to_omega(const Vec3& euler);

Mat3 rotation_from_euler(const Vec3& euler);
Vec3 euler_from_rotation(const Mat3& r);

}  // namespace coopmanip
