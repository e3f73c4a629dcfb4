#include "coopmanip/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

namespace coopmanip {

namespace {

constexpr double kDegenerateGap = 1e-9;
constexpr double kMaxGainCondition = 1e12;

// Cyclic Jacobi on a symmetric 4x4; returns eigenvalues (unordered) in d and
// the accumulated rotations in v (columns are eigenvectors).
void jacobi4(Mat4 a, Vec4& d, Mat4& v) {
    v.setIdentity();
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-15 * scale) break;
        for (int p = 0; p < 4; ++p) {
            for (int q = p + 1; q < 4; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t =
                    (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                 : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // a <- J^T a J with the rotation acting in the (p, q) plane.
                for (int k = 0; k < 4; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < 4; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < 4; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
            }
        }
    }
    d = a.diagonal();
}

// Top two eigenvalues, descending.
std::pair<double, double> top_two(const Vec4& d) {
    Vec4 sorted = d;
    std::sort(sorted.data(), sorted.data() + 4, std::greater<double>());
    return {sorted[0], sorted[1]};
}

std::pair<double, Vec4> max_eigenpair_unchecked(const Mat4& m) {
    Vec4 d;
    Mat4 v;
    jacobi4(m, d, v);
    int imax = 0;
    d.maxCoeff(&imax);
    Vec4 vec = v.col(imax);
    int icomp = 0;
    vec.cwiseAbs().maxCoeff(&icomp);
    if (vec[icomp] < 0.0) vec = -vec;
    return {d[imax], vec};
}

}  // namespace

std::pair<double, Vec4> max_eigenpair(const Mat4& m) {
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
        throw NotSymmetric("max_eigenpair: matrix is not symmetric");
    }
    return max_eigenpair_unchecked(0.5 * (m + m.transpose()));
}

AttitudeEstimatorState attitude_init(const UnitQuaternion& eta0, double mu,
                                     double h) {
    if (!(h > 0.0)) throw InvalidConfig("attitude_init: h must be positive");
    if (!(mu >= 0.0) || !(mu < 1.0)) {
        throw InvalidConfig("attitude_init: mu must lie in [0, 1)");
    }
    AttitudeEstimatorState st;
    st.eta0 = eta0.as_vec4();
    st.gamma_data.setZero();
    st.prior_weight = 1.0;
    st.gamma = st.eta0 * st.eta0.transpose();
    st.eta_hat = eta0;
    st.lambda_max = 1.0;
    st.varrho = std::exp(-mu * h);
    return st;
}

AttitudeEstimatorState attitude_update(const AttitudeEstimatorState& state,
                                       const Vec3& w1, const Vec3& w2) {
    AttitudeEstimatorState st = state;
    st.gamma_data = st.varrho * st.gamma_data + omega_matrix(w1, w2);
    st.gamma_data = 0.5 * (st.gamma_data + st.gamma_data.transpose()).eval();
    st.prior_weight *= st.varrho;
    st.gamma = st.gamma_data + st.prior_weight * (st.eta0 * st.eta0.transpose());
    st.gamma = 0.5 * (st.gamma + st.gamma.transpose()).eval();

    auto [lambda, vec] = max_eigenpair_unchecked(st.gamma);
    if (vec[3] < 0.0) vec = -vec;  // quaternion sign convention
    st.eta_hat = UnitQuaternion(vec.head<3>(), vec[3]);
    st.lambda_max = lambda;
    st.step_index += 1;

    Vec4 d;
    Mat4 evecs;
    jacobi4(st.gamma_data, d, evecs);
    const auto [l1, l2] = top_two(d);
    st.spectral_gap = l1 - l2;
    st.degenerate_spectrum =
        st.spectral_gap <= kDegenerateGap * std::max(1.0, std::abs(l1));
    return st;
}

DisplacementEstimatorState displacement_init(const Vec3& rho0, const Mat3& p0,
                                             double mu, double h) {
    if (!(h > 0.0)) throw InvalidConfig("displacement_init: h must be positive");
    if (!(mu >= 0.0) || !(mu < 1.0)) {
        throw InvalidConfig("displacement_init: mu must lie in [0, 1)");
    }
    if ((p0 - p0.transpose()).cwiseAbs().maxCoeff() >
        1e-10 * std::max(1.0, p0.cwiseAbs().maxCoeff())) {
        throw InvalidConfig("displacement_init: p0 must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(p0);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw InvalidConfig("displacement_init: p0 must be positive definite");
    }
    DisplacementEstimatorState st;
    st.rho_hat = rho0;
    st.p_matrix = p0;
    st.varrho = std::exp(-mu * h);
    return st;
}

DisplacementEstimatorState displacement_update(
    const DisplacementEstimatorState& state, const UnitQuaternion& eta_hat,
    const Vec3& v1, const Vec3& v2, const Vec3& w2) {
    DisplacementEstimatorState st = state;
    st.step_index += 1;

    const Mat3 w = skew(w2);
    const Mat3 denom = st.varrho * Mat3::Identity() - w * st.p_matrix * w;
    Eigen::SelfAdjointEigenSolver<Mat3> es(denom);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax / lmin > kMaxGainCondition) {
        st.skipped_updates += 1;
        return st;
    }

    const Mat3 gain = -st.p_matrix * w * denom.inverse();
    const Vec3 innovation =
        v2 - rotation_from_quaternion(eta_hat) * v1 - w2.cross(st.rho_hat);
    st.rho_hat += gain * innovation;
    st.p_matrix = (Mat3::Identity() - gain * w) * st.p_matrix / st.varrho;
    st.p_matrix = 0.5 * (st.p_matrix + st.p_matrix.transpose()).eval();
    return st;
}

RlsState rls_init(const Eigen::VectorXd& a0, const Eigen::MatrixXd& p0) {
    if (p0.rows() != p0.cols() || p0.rows() != a0.size()) {
        throw InvalidConfig("rls_init: inconsistent dimensions");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p0);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw InvalidConfig("rls_init: p0 must be positive definite");
    }
    return RlsState{a0, p0, 0};
}

RlsState rls_update(const RlsState& state, const Eigen::MatrixXd& w,
                    const Eigen::VectorXd& y, double varrho) {
    if (w.cols() != state.a_hat.size() || w.rows() != y.size()) {
        throw InvalidConfig("rls_update: inconsistent dimensions");
    }
    RlsState st = state;
    const Eigen::MatrixXd inner =
        varrho * Eigen::MatrixXd::Identity(w.rows(), w.rows()) +
        w * st.p_matrix * w.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax / lmin > kMaxGainCondition) {
        st.skipped_updates += 1;
        return st;
    }
    const Eigen::MatrixXd gain = st.p_matrix * w.transpose() * inner.inverse();
    st.a_hat += gain * (y - w * st.a_hat);
    st.p_matrix =
        (Eigen::MatrixXd::Identity(w.cols(), w.cols()) - gain * w) *
        st.p_matrix / varrho;
    st.p_matrix = 0.5 * (st.p_matrix + st.p_matrix.transpose()).eval();
    return st;
}

PeWindow::PeWindow(std::size_t capacity, double threshold)
    : capacity_(capacity), threshold_(threshold) {
    if (capacity == 0) throw InvalidConfig("PeWindow: capacity must be positive");
    if (!(threshold > 0.0)) {
        throw InvalidConfig("PeWindow: threshold must be positive");
    }
    buffer_.reserve(capacity);
}

void PeWindow::push(const Vec3& w) {
    if (buffer_.size() < capacity_) {
        buffer_.push_back(w);
    } else {
        buffer_[next_] = w;
    }
    next_ = (next_ + 1) % capacity_;
}

std::pair<Mat3, double> pe_check(const PeWindow& window) {
    Mat3 pi = Mat3::Zero();
    for (const Vec3& w : window.samples()) {
        const Mat3 s = skew(w);
        pi -= s * s;
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(pi);
    return {pi, es.eigenvalues().minCoeff()};
}

}  // namespace coopmanip
