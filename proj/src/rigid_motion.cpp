#include "coopmanip/rigid_motion.hpp"

#include <Eigen/Geometry>
#include <cmath>

namespace coopmanip {

namespace {

// Deterministic double-cover resolution: non-negative scalar part; on an
// exactly zero scalar part, first nonzero vector component positive.
void sign_fix(Vec3& v, double& s) {
    if (s < 0.0) {
        v = -v;
        s = -s;
        return;
    }
    if (s == 0.0) {
        for (int i = 0; i < 3; ++i) {
            if (v[i] != 0.0) {
                if (v[i] < 0.0) v = -v;
                return;
            }
        }
    }
}

}  // namespace

UnitQuaternion::UnitQuaternion(const Vec3& v, double s) : v_(v), s_(s) {
    const double n = std::sqrt(v_.squaredNorm() + s_ * s_);
    if (!(n > 1e-12) || !std::isfinite(n)) {
        throw InvalidConfig("quaternion norm too small to normalize");
    }
    v_ /= n;
    s_ /= n;
    sign_fix(v_, s_);
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (!(n > 0.0)) {
        if (angle == 0.0) return identity();
        throw InvalidConfig("zero axis with nonzero angle");
    }
    return UnitQuaternion(std::sin(angle / 2.0) * axis / n, std::cos(angle / 2.0));
}

UnitQuaternion UnitQuaternion::conjugate() const {
    return UnitQuaternion(-v_, s_);
}

UnitQuaternion UnitQuaternion::operator*(const UnitQuaternion& rhs) const {
    const Vec3 v = s_ * rhs.v_ + rhs.s_ * v_ + v_.cross(rhs.v_);
    const double s = s_ * rhs.s_ - v_.dot(rhs.v_);
    return UnitQuaternion(v, s);
}

Vec3 UnitQuaternion::error_vec(const UnitQuaternion& a, const UnitQuaternion& b) {
    return (a * b.conjugate()).vec();
}

KinematicParams KinematicParams::inverse() const {
    const Mat3 a = rotation_from_quaternion(eta);
    return KinematicParams{-a.transpose() * rho, eta.conjugate()};
}

double param_distance(const KinematicParams& a, const KinematicParams& b) {
    const Vec3 dr = a.rho - b.rho;
    const Vec3 de = UnitQuaternion::error_vec(a.eta, b.eta);
    return std::sqrt(dr.squaredNorm() + de.squaredNorm());
}

Mat3 skew(const Vec3& w) {
    Mat3 m;
    m << 0.0, -w.z(), w.y(),
         w.z(), 0.0, -w.x(),
        -w.y(), w.x(), 0.0;
    return m;
}

Mat3 rotation_from_quaternion(const UnitQuaternion& eta) {
    const Vec3& v = eta.vec();
    const double s = eta.scalar();
    return (2.0 * s * s - 1.0) * Mat3::Identity() + 2.0 * s * skew(v) +
           2.0 * v * v.transpose();
}

UnitQuaternion quaternion_from_rotation(const Mat3& a) {
    const double tr = a.trace();
    Vec4 q;  // [x, y, z, w]
    if (tr > 0.0) {
        double t = std::sqrt(1.0 + tr);
        q[3] = 0.5 * t;
        t = 0.5 / t;
        q[0] = (a(2, 1) - a(1, 2)) * t;
        q[1] = (a(0, 2) - a(2, 0)) * t;
        q[2] = (a(1, 0) - a(0, 1)) * t;
    } else {
        int i = 0;
        if (a(1, 1) > a(0, 0)) i = 1;
        if (a(2, 2) > a(i, i)) i = 2;
        const int j = (i + 1) % 3;
        const int k = (j + 1) % 3;
        double t = std::sqrt(1.0 + a(i, i) - a(j, j) - a(k, k));
        q[i] = 0.5 * t;
        t = 0.5 / t;
        q[3] = (a(k, j) - a(j, k)) * t;
        q[j] = (a(j, i) + a(i, j)) * t;
        q[k] = (a(k, i) + a(i, k)) * t;
    }
    return UnitQuaternion(q.head<3>(), q[3]);
}

Mat4 omega_matrix(const Vec3& w1, const Vec3& w2) {
    // The off-diagonal corner is w1 x w2: that is the orientation for which
    // eta^T Omega eta = w2^T A(eta) w1 holds identically.
    Mat4 m;
    m.topLeftCorner<3, 3>() = w2 * w1.transpose() + w1 * w2.transpose() -
                              w1.dot(w2) * Mat3::Identity();
    const Vec3 c = w1.cross(w2);
    m.topRightCorner<3, 1>() = c;
    m.bottomLeftCorner<1, 3>() = c.transpose();
    m(3, 3) = w1.dot(w2);
    return m;
}

Mat6 velocity_transform(const KinematicParams& theta) {
    const Mat3 at = rotation_from_quaternion(theta.eta).transpose();
    Mat6 t = Mat6::Zero();
    t.topLeftCorner<3, 3>() = at;
    t.topRightCorner<3, 3>() = at * skew(theta.rho);
    t.bottomRightCorner<3, 3>() = at;
    return t;
}

Twist transform_twist(const KinematicParams& theta, const Twist& t1) {
    const Mat3 a = rotation_from_quaternion(theta.eta);
    Twist t2;
    t2.angular = a * t1.angular;
    t2.linear = a * t1.linear - theta.rho.cross(t2.angular);
    return t2;
}

namespace {

constexpr double kGimbalMargin = 1e-3;

void check_middle_angle(double beta) {
    if (std::abs(std::abs(beta) - M_PI / 2.0) < kGimbalMargin) {
        throw RepresentationSingularity(
            "euler middle angle within 1e-3 rad of +-pi/2");
    }
}

}  // namespace

std::pair<Mat3, Mat3> orientation_rates(const Vec3& euler,
                                        const Vec3& euler_rate) {
    const double b = euler[1];
    const double c = euler[2];
    check_middle_angle(b);
    const double cb = std::cos(b), sb = std::sin(b);
    const double cc = std::cos(c), sc = std::sin(c);
    const double tb = sb / cb;

    Mat3 lo;
    lo << cc / cb, -sc / cb, 0.0,
          sc, cc, 0.0,
          -cc * tb, sc * tb, 1.0;

    // Ldot_o = dL/db * bdot + dL/dc * cdot (L_o depends on b and c only).
    const double bdot = euler_rate[1];
    const double cdot = euler_rate[2];
    Mat3 dldb;
    dldb << cc * sb / (cb * cb), -sc * sb / (cb * cb), 0.0,
            0.0, 0.0, 0.0,
            -cc / (cb * cb), sc / (cb * cb), 0.0;
    Mat3 dldc;
    dldc << -sc / cb, -cc / cb, 0.0,
            cc, -sc, 0.0,
            sc * tb, cc * tb, 0.0;
    return {lo, dldb * bdot + dldc * cdot};
}

Mat3 euler_rate_to_omega(const Vec3& euler) {
    const double b = euler[1];
    const double c = euler[2];
    check_middle_angle(b);
    const double cb = std::cos(b), sb = std::sin(b);
    const double cc = std::cos(c), sc = std::sin(c);
    Mat3 e;
    e << cb * cc, sc, 0.0,
         -cb * sc, cc, 0.0,
         sb, 0.0, 1.0;
    return e;
}

Mat3 rotation_from_euler(const Vec3& euler) {
    const double ca = std::cos(euler[0]), sa = std::sin(euler[0]);
    const double cb = std::cos(euler[1]), sb = std::sin(euler[1]);
    const double cc = std::cos(euler[2]), sc = std::sin(euler[2]);
    Mat3 r;
    r << cb * cc, -cb * sc, sb,
         ca * sc + sa * sb * cc, ca * cc - sa * sb * sc, -sa * cb,
         sa * sc - ca * sb * cc, sa * cc + ca * sb * sc, ca * cb;
    return r;
}

Vec3 euler_from_rotation(const Mat3& r) {
    Vec3 e;
    e[1] = std::asin(std::clamp(r(0, 2), -1.0, 1.0));
    e[0] = std::atan2(-r(1, 2), r(2, 2));
    e[2] = std::atan2(-r(0, 1), r(0, 0));
    return e;
}

}  // namespace coopmanip
