// propagator.hpp: mean and covariance evolution, stationary covariance, RK4 oracle

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lindblad3/core.hpp"
#include "lindblad3/errors.hpp"
#include "lindblad3/expm.hpp"

namespace lindblad3 {

// Means and CENTRAL second moments. The symmetrized second moments
// (1/2)<AB + BA> are cov + mean * mean^T.
struct GaussianState {
    Vec6 mean = Vec6::Zero();
    Mat6 cov = Mat6::Zero();

    Mat6 full_moments() const { return cov + mean * mean.transpose(); }
};

inline void check_state(const GaussianState& s) {
    if (!s.mean.allFinite() || !s.cov.allFinite()) throw InvariantError("state has non-finite entries");
    const double scale = std::max(1.0, s.cov.cwiseAbs().maxCoeff());
    if ((s.cov - s.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvariantError("covariance must be symmetric");
}

struct Propagator {
    Mat6 M = Mat6::Identity();
    double t = 0.0;
};

inline Mat6 symmetrize(const Mat6& m) { return 0.5 * (m + m.transpose()); }

inline double max_abs(const Mat6& m) { return m.cwiseAbs().maxCoeff(); }

// M(t) = exp(tY).
inline Propagator matrix_exponential(const Mat6& Y, double t) {
    if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("matrix_exponential: t must be finite and >= 0");
    return {expm<6>(t * Y), t};
}

// Closed-form M(t) when alpha = beta = 0 and lambda is diagonal: each axis
// rotates in its (q_k, p_k) plane and decays with exp(-lambda_kk t).
inline Propagator closed_form_propagator(const OscillatorSystem& sys, const Vec3& lambda_diag, double t) {
    Propagator P;
    P.t = t;
    P.M.setZero();
    for (std::size_t k = 0; k < kAxes; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double mw = sys.mass()[i] * sys.omega()[i];
        const double env = std::exp(-lambda_diag[i] * t);
        const double c = std::cos(sys.omega()[i] * t);
        const double s = std::sin(sys.omega()[i] * t);
        P.M(q_index(k), q_index(k)) = env * c;
        P.M(p_index(k), p_index(k)) = env * c;
        P.M(q_index(k), p_index(k)) = env * s / mw;
        P.M(p_index(k), q_index(k)) = -mw * env * s;
    }
    return P;
}

inline Vec6 evolve_mean(const GaussianState& state, const DriftMatrix& drift, double t) {
    return matrix_exponential(drift.Y, t).M * state.mean;
}

// ---------------------------------------------------------------- stationary covariance

// Solves Y S + S Y^T + 2 D = 0 through the Kronecker-sum form
// (I (x) Y + Y (x) I) vec(S) = -2 vec(D).
inline Mat6 stationary_covariance(const DriftMatrix& drift, const DiffusionMatrix& diff) {
    if (!drift.stable) throw UnstableDrift(drift.eigenvalues);
    using Mat36 = Eigen::Matrix<double, 36, 36>;
    using Vec36 = Eigen::Matrix<double, 36, 1>;
    Mat36 K = Mat36::Zero();
    for (Eigen::Index i = 0; i < 6; ++i) {
        K.block<6, 6>(6 * i, 6 * i) += drift.Y;
        for (Eigen::Index j = 0; j < 6; ++j) K.block<6, 6>(6 * i, 6 * j).diagonal().array() += drift.Y(i, j);
    }
    Vec36 rhs;
    for (Eigen::Index c = 0; c < 6; ++c)
        for (Eigen::Index r = 0; r < 6; ++r) rhs[6 * c + r] = -2.0 * diff.D(r, c);

    const Eigen::PartialPivLU<Mat36> lu(K);
    if (!(lu.rcond() > 1e-14)) throw SingularSystem("Lyapunov system is numerically singular");
    const Vec36 x = lu.solve(rhs);
    Mat6 S;
    for (Eigen::Index c = 0; c < 6; ++c)
        for (Eigen::Index r = 0; r < 6; ++r) S(r, c) = x[6 * c + r];
    return symmetrize(S);
}

inline double lyapunov_residual(const Mat6& Y, const Mat6& S, const Mat6& D) {
    return max_abs(Y * S + S * Y.transpose() + 2.0 * D);
}

namespace detail {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> x, w;

    explicit GaussLegendre(int n) : x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n)) {
        const double pi = std::acos(-1.0);
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
                }
                dp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            const auto lo = static_cast<std::size_t>(i);
            const auto hi = static_cast<std::size_t>(n - 1 - i);
            x[lo] = -z;
            x[hi] = z;
            w[lo] = w[hi] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

// 2 * integral over [0, horizon] of M D M^T with `panels` equal Gauss panels.
inline Mat6 quadrature_pass(const Mat6& Y, const Mat6& D, double horizon, std::int64_t panels,
                            const GaussLegendre& gl) {
    const double h = horizon / static_cast<double>(panels);
    std::vector<Mat6> node_exp;
    node_exp.reserve(gl.x.size());
    for (double xi : gl.x) node_exp.push_back(expm<6>(0.5 * h * (1.0 + xi) * Y));
    const Mat6 step = expm<6>(h * Y);

    Mat6 acc = Mat6::Zero();
    Mat6 start = Mat6::Identity();
    for (std::int64_t i = 0; i < panels; ++i) {
        Mat6 panel = Mat6::Zero();
        for (std::size_t j = 0; j < node_exp.size(); ++j) {
            const Mat6 M = node_exp[j] * start;
            panel.noalias() += gl.w[j] * (M * D * M.transpose());
        }
        acc += 0.5 * h * panel;
        start = step * start;
    }
    return 2.0 * acc;
}

} // namespace detail

// sigma(inf) = 2 int_0^horizon M(t) D M(t)^T dt, refining the panel count
// until two successive passes agree to `tol` (max-abs).
inline Mat6 stationary_covariance_integral(const DriftMatrix& drift, const DiffusionMatrix& diff, double horizon,
                                           double tol) {
    if (!drift.stable) throw UnstableDrift(drift.eigenvalues);
    const double decay = -drift.max_real_part();
    if (!(horizon >= 10.0 / decay * (1.0 - 1e-12)))
        throw std::invalid_argument("stationary_covariance_integral: horizon must be >= 10/|max Re z| = " +
                                    std::to_string(10.0 / decay));
    if (!(tol > 0.0)) throw std::invalid_argument("stationary_covariance_integral: tol must be positive");

    const detail::GaussLegendre gl(10);
    // Start with roughly one panel per unit of ||Y|| * horizon.
    const double norm = drift.Y.cwiseAbs().rowwise().sum().maxCoeff();
    auto panels = static_cast<std::int64_t>(std::clamp(std::ceil(norm * horizon / 4.0), 4.0, 1.0e5));
    constexpr std::int64_t kMaxPanels = std::int64_t{1} << 22;

    Mat6 prev = detail::quadrature_pass(drift.Y, diff.D, horizon, panels, gl);
    while (panels < kMaxPanels) {
        panels *= 2;
        Mat6 next = detail::quadrature_pass(drift.Y, diff.D, horizon, panels, gl);
        if (max_abs(next - prev) < tol) return symmetrize(next);
        prev = std::move(next);
    }
    throw NonConvergent("stationary_covariance_integral: no convergence to tol " + std::to_string(tol));
}

// ---------------------------------------------------------------- covariance evolution

// sigma(t) = M (sigma(0) - sigma_inf) M^T + sigma_inf, given M = M(t).
inline Mat6 relax_covariance(const Mat6& cov0, const Mat6& M, const Mat6& sigma_inf) {
    return symmetrize(M * (cov0 - sigma_inf) * M.transpose() + sigma_inf);
}

inline Mat6 evolve_covariance(const GaussianState& state, const DriftMatrix& drift, const DiffusionMatrix& diff,
                              double t) {
    if (!drift.stable) throw UnstableDrift(drift.eigenvalues);
    const Mat6 sigma_inf = stationary_covariance(drift, diff);
    return relax_covariance(state.cov, matrix_exponential(drift.Y, t).M, sigma_inf);
}

// Covariance at time t for any drift, stable or not:
// sigma(t) = M sigma(0) M^T + 2 int_0^t M D M^T, with the integral read off
// the block exponential exp(t [[Y, 2D], [0, -Y^T]]) (Van Loan).
inline Mat6 propagate_covariance(const GaussianState& state, const DriftMatrix& drift, const DiffusionMatrix& diff,
                                 double t) {
    if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("propagate_covariance: t must be finite and >= 0");
    using Mat12 = Eigen::Matrix<double, 12, 12>;
    Mat12 C = Mat12::Zero();
    C.topLeftCorner<6, 6>() = drift.Y;
    C.topRightCorner<6, 6>() = 2.0 * diff.D;
    C.bottomRightCorner<6, 6>() = -drift.Y.transpose();
    const Mat12 F = expm<12>(t * C);
    const Mat6 M = F.topLeftCorner<6, 6>();
    const Mat6 W = F.topRightCorner<6, 6>() * M.transpose();
    return symmetrize(M * state.cov * M.transpose() + W);
}

// ---------------------------------------------------------------- RK4 oracle

namespace detail {

inline std::int64_t rk4_step_count(double t, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("rk4: dt must be positive");
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("rk4: t must be finite and >= 0");
    const double ratio = t / dt;
    if (ratio > 1e8) throw std::overflow_error("rk4: more than 1e8 steps requested");
    const double n = std::round(ratio);
    if (std::abs(ratio - n) > 1e-6 * std::max(1.0, ratio))
        throw std::invalid_argument("rk4: t must be an integer multiple of dt");
    return static_cast<std::int64_t>(n);
}

template <class Vector, class Rhs>
Vector rk4_integrate(Vector y, double h, std::int64_t steps, Rhs&& f) {
    for (std::int64_t i = 0; i < steps; ++i) {
        const Vector k1 = f(y);
        const Vector k2 = f(y + 0.5 * h * k1);
        const Vector k3 = f(y + 0.5 * h * k2);
        const Vector k4 = f(y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

inline Vec6 rk4_mean_steps(const Vec6& m0, const Mat6& Y, double h, std::int64_t steps) {
    return rk4_integrate(m0, h, steps, [&](const Vec6& m) -> Vec6 { return Y * m; });
}

inline Mat6 rk4_covariance_steps(const Mat6& c0, const Mat6& Y, const Mat6& D, double h, std::int64_t steps) {
    return rk4_integrate(c0, h, steps,
                         [&](const Mat6& s) -> Mat6 { return Y * s + s * Y.transpose() + 2.0 * D; });
}

} // namespace detail

// Classical RK4 on dm/dt = Y m.
inline Vec6 rk4_mean(const GaussianState& state, const DriftMatrix& drift, double t, double dt) {
    const auto n = detail::rk4_step_count(t, dt);
    return detail::rk4_mean_steps(state.mean, drift.Y, dt, n);
}

// Classical RK4 on dS/dt = Y S + S Y^T + 2 D.
inline Mat6 rk4_covariance(const GaussianState& state, const DriftMatrix& drift, const DiffusionMatrix& diff, double t,
                           double dt) {
    const auto n = detail::rk4_step_count(t, dt);
    return detail::rk4_covariance_steps(state.cov, drift.Y, diff.D, dt, n);
}

} // namespace lindblad3
