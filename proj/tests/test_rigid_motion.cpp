#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "coopmanip/rigid_motion.hpp"

using namespace coopmanip;

namespace {

std::mt19937_64 rng(42);

double unif(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 random_vec3(double scale = 1.0) {
    return scale * Vec3(unif(-1, 1), unif(-1, 1), unif(-1, 1));
}

UnitQuaternion random_quaternion() {
    // uniform on the 3-sphere via normalized gaussians
    std::normal_distribution<double> n(0.0, 1.0);
    Vec4 q(n(rng), n(rng), n(rng), n(rng));
    q.normalize();
    return UnitQuaternion(q.head<3>(), q[3]);
}

KinematicParams random_params(double rho_scale = 1.0) {
    return KinematicParams{random_vec3(rho_scale), random_quaternion()};
}

// Independent rotation oracle: Rodrigues formula from axis-angle.
Mat3 rodrigues(const Vec3& axis_unit, double angle) {
    const Mat3 k = skew(axis_unit);
    return Mat3::Identity() + std::sin(angle) * k +
           (1.0 - std::cos(angle)) * k * k;
}

}  // namespace

TEST_CASE("unit quaternion construction and sign convention") {
    const UnitQuaternion q(Vec3(0, 0, 2), -2.0);  // normalizes, flips sign
    CHECK(q.scalar() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(q.vec().z() == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-12));
    CHECK(q.as_vec4().norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(UnitQuaternion(Vec3::Zero(), 0.0), InvalidConfig);
}

TEST_CASE("rotation from quaternion: identity and double cover") {
    CHECK(rotation_from_quaternion(UnitQuaternion::identity())
              .isApprox(Mat3::Identity(), 1e-14));
    for (int i = 0; i < 50; ++i) {
        const UnitQuaternion q = random_quaternion();
        const UnitQuaternion neg(-q.vec(), -q.scalar());  // sign-fixed back
        CHECK(rotation_from_quaternion(q).isApprox(rotation_from_quaternion(neg),
                                                   1e-13));
    }
}

TEST_CASE("rotation from quaternion: quarter turn about z maps e_x to e_y") {
    const UnitQuaternion q(Vec3(0, 0, std::sin(M_PI / 4)), std::cos(M_PI / 4));
    const Mat3 a = rotation_from_quaternion(q);
    CHECK((a * Vec3::UnitX() - Vec3::UnitY()).norm() < 1e-12);
    // Termwise against the independent axis-angle construction.
    CHECK(a.isApprox(rodrigues(Vec3::UnitZ(), M_PI / 2), 1e-12));
}

TEST_CASE("rotation matrices are orthonormal with determinant one") {
    for (int i = 0; i < 200; ++i) {
        const Mat3 a = rotation_from_quaternion(random_quaternion());
        CHECK((a.transpose() * a - Mat3::Identity()).norm() < 1e-10);
        CHECK(a.determinant() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("quaternion round trip through the rotation matrix") {
    for (int i = 0; i < 200; ++i) {
        const UnitQuaternion q = random_quaternion();
        const UnitQuaternion back =
            quaternion_from_rotation(rotation_from_quaternion(q));
        CHECK((back.as_vec4() - q.as_vec4()).norm() < 1e-9);
    }
}

TEST_CASE("skew matrix implements the cross product") {
    CHECK(skew(Vec3::Zero()).isZero(0.0));
    CHECK((skew(Vec3::UnitZ()) * Vec3::UnitX() - Vec3::UnitY()).norm() == 0.0);
    for (int i = 0; i < 100; ++i) {
        const Vec3 w = random_vec3(3.0), u = random_vec3(3.0);
        CHECK((skew(w) * u - w.cross(u)).norm() < 1e-14);
        CHECK((skew(w).transpose() + skew(w)).norm() == 0.0);
    }
}

TEST_CASE("omega matrix: zero pair, symmetry, quadratic-form identity") {
    CHECK(omega_matrix(Vec3::Zero(), Vec3::Zero()).isZero(0.0));

    // w1 = w2 = e_x with the identity attitude gives exactly one.
    const Mat4 m = omega_matrix(Vec3::UnitX(), Vec3::UnitX());
    const Vec4 id = UnitQuaternion::identity().as_vec4();
    CHECK(id.dot(m * id) == doctest::Approx(1.0).epsilon(1e-14));

    for (int i = 0; i < 200; ++i) {
        const Vec3 w1 = random_vec3(2.0), w2 = random_vec3(2.0);
        const Mat4 omega = omega_matrix(w1, w2);
        CHECK((omega - omega.transpose()).cwiseAbs().maxCoeff() < 1e-14);
        const UnitQuaternion eta = random_quaternion();
        const Vec4 e = eta.as_vec4();
        const double lhs = e.dot(omega * e);
        const double rhs = w2.dot(rotation_from_quaternion(eta) * w1);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("velocity transform blocks and determinant") {
    const KinematicParams ident;
    CHECK(velocity_transform(ident).isApprox(Mat6::Identity(), 1e-14));

    for (int i = 0; i < 100; ++i) {
        const KinematicParams theta = random_params(2.0);
        const Mat6 t = velocity_transform(theta);
        const Mat3 at = rotation_from_quaternion(theta.eta).transpose();
        CHECK(t.topRightCorner<3, 3>().isApprox(at * skew(theta.rho), 1e-12));
        CHECK(t.bottomLeftCorner<3, 3>().isZero(0.0));
        CHECK(t.determinant() == doctest::Approx(1.0).epsilon(1e-10));
    }

    // rho = 0 leaves a block-diagonal transform with A^T twice.
    const KinematicParams rot_only{Vec3::Zero(), random_quaternion()};
    const Mat6 t = velocity_transform(rot_only);
    const Mat3 at = rotation_from_quaternion(rot_only.eta).transpose();
    CHECK(t.topLeftCorner<3, 3>().isApprox(at, 1e-14));
    CHECK(t.bottomRightCorner<3, 3>().isApprox(at, 1e-14));
    CHECK(t.topRightCorner<3, 3>().isZero(1e-14));
}

TEST_CASE("transform twist: identity, pure translation, matrix consistency") {
    const Twist t1{Vec3(0.3, -0.2, 0.5), Vec3(0.1, 0.4, -0.6)};
    const Twist same = transform_twist(KinematicParams{}, t1);
    CHECK((same.linear - t1.linear).norm() < 1e-15);
    CHECK((same.angular - t1.angular).norm() < 1e-15);

    // Pure translation: the displacement term vanishes.
    const KinematicParams theta = random_params();
    const Twist trans{Vec3(1, 2, 3), Vec3::Zero()};
    const Twist out = transform_twist(theta, trans);
    CHECK(out.angular.norm() == 0.0);
    CHECK((out.linear - rotation_from_quaternion(theta.eta) * trans.linear)
              .norm() < 1e-14);

    // T(theta) maps the transformed twist back onto the original, and the
    // inverse parameters give the forward map.
    for (int i = 0; i < 100; ++i) {
        const KinematicParams th = random_params(2.0);
        const Twist a{random_vec3(), random_vec3()};
        const Twist b = transform_twist(th, a);
        CHECK((velocity_transform(th) * b.stacked() - a.stacked()).norm() <
              1e-10);
        CHECK((velocity_transform(th.inverse()) * a.stacked() - b.stacked())
                  .norm() < 1e-10);
    }
}

TEST_CASE("transform twist composed with inverse parameters is identity") {
    for (int i = 0; i < 100; ++i) {
        const KinematicParams theta = random_params(2.0);
        const Twist t1{random_vec3(2.0), random_vec3(2.0)};
        const Twist t2 = transform_twist(theta, t1);
        const Twist back = transform_twist(theta.inverse(), t2);
        CHECK((back.linear - t1.linear).norm() < 1e-10);
        CHECK((back.angular - t1.angular).norm() < 1e-10);
    }
}

TEST_CASE("orientation rates: identity at zero, inverse, gimbal guard") {
    const auto [lo0, lo0dot] = orientation_rates(Vec3::Zero(), Vec3::Zero());
    CHECK(lo0.isApprox(Mat3::Identity(), 1e-14));
    CHECK(lo0dot.isZero(0.0));

    for (int i = 0; i < 100; ++i) {
        const Vec3 euler(unif(-1.2, 1.2), unif(-1.2, 1.2), unif(-1.2, 1.2));
        const auto [lo, lodot] = orientation_rates(euler, random_vec3());
        const Mat3 e = euler_rate_to_omega(euler);
        CHECK((lo * e - Mat3::Identity()).norm() < 1e-10);
    }

    CHECK_THROWS_AS(orientation_rates(Vec3(0, M_PI / 2 - 1e-4, 0), Vec3::Zero()),
                    RepresentationSingularity);
}

TEST_CASE("orientation rates: analytic derivative matches finite differences") {
    // Smooth euler trajectory; central difference of L_o at step 1e-5.
    const auto euler_traj = [](double t) {
        return Vec3(0.4 * std::sin(t), 0.3 * std::cos(1.3 * t),
                    0.5 * std::sin(0.7 * t + 0.2));
    };
    const auto rate_traj = [](double t) {
        return Vec3(0.4 * std::cos(t), -0.39 * std::sin(1.3 * t),
                    0.35 * std::cos(0.7 * t + 0.2));
    };
    const double h = 1e-5;
    for (double t : {0.1, 0.7, 1.9, 3.3}) {
        const auto [lo, lodot] = orientation_rates(euler_traj(t), rate_traj(t));
        const Mat3 lo_plus =
            orientation_rates(euler_traj(t + h), rate_traj(t + h)).first;
        const Mat3 lo_minus =
            orientation_rates(euler_traj(t - h), rate_traj(t - h)).first;
        const Mat3 fd = (lo_plus - lo_minus) / (2.0 * h);
        CHECK((lodot - fd).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("euler round trip through the rotation matrix") {
    for (int i = 0; i < 200; ++i) {
        const Vec3 euler(unif(-1.4, 1.4), unif(-1.4, 1.4), unif(-1.4, 1.4));
        const Vec3 back = euler_from_rotation(rotation_from_euler(euler));
        CHECK((back - euler).norm() < 1e-10);
    }
}

TEST_CASE("euler rate map matches the quaternion kinematics") {
    // omega from euler rates must agree with R^T Rdot extracted numerically.
    const double h = 1e-6;
    for (int i = 0; i < 20; ++i) {
        const Vec3 euler(unif(-1, 1), unif(-1, 1), unif(-1, 1));
        const Vec3 rate = random_vec3();
        const Mat3 r = rotation_from_euler(euler);
        const Mat3 rdot =
            (rotation_from_euler(euler + h * rate) -
             rotation_from_euler(euler - h * rate)) /
            (2.0 * h);
        const Mat3 omega_skew = r.transpose() * rdot;
        const Vec3 omega_fd(omega_skew(2, 1), omega_skew(0, 2), omega_skew(1, 0));
        const Vec3 omega = euler_rate_to_omega(euler) * rate;
        CHECK((omega - omega_fd).norm() < 1e-7);
    }
}

TEST_CASE("parameter distance is a sign-resolved error metric") {
    const KinematicParams a = random_params();
    CHECK(param_distance(a, a) == doctest::Approx(0.0).epsilon(1e-15));
    KinematicParams b = a;
    b.rho += Vec3(3e-4, -4e-4, 0);
    CHECK(param_distance(a, b) == doctest::Approx(5e-4).epsilon(1e-9));
    KinematicParams c = a;
    c.eta = UnitQuaternion::from_axis_angle(Vec3::UnitZ(), 1e-3) * a.eta;
    CHECK(param_distance(a, c) ==
          doctest::Approx(std::sin(5e-4)).epsilon(1e-6));
}
