#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace coopmanip {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat6x12 = Eigen::Matrix<double, 6, 12>;
using Mat12x6 = Eigen::Matrix<double, 12, 6>;

// Error taxonomy shared by all modules. Everything derives from Error so
// the CLI can map failures to exit codes in one place.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidConfig : Error {
    using Error::Error;
};

// Minimal-representation middle angle too close to +-pi/2.
struct RepresentationSingularity : Error {
    using Error::Error;
};

struct NearSingularJacobian : Error {
    using Error::Error;
};

// L1 not invertible in the D-matrix computation (gimbal condition).
struct SingularL : Error {
    using Error::Error;
};

struct NotSymmetric : Error {
    using Error::Error;
};

struct NotHurwitz : Error {
    using Error::Error;
};

struct NonPositiveSigma : Error {
    using Error::Error;
};

}  // namespace coopmanip
