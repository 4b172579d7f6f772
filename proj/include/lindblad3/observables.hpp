// observables.hpp: angular-momentum expectations built from Gaussian moments

#pragma once

#include <cmath>
#include <stdexcept>

#include "lindblad3/core.hpp"
#include "lindblad3/propagator.hpp"

namespace lindblad3 {

namespace idx {
inline constexpr Eigen::Index q1 = 0, q2 = 1, q3 = 2, p1 = 3, p2 = 4, p3 = 5;
}

// <L3> = sigma_{q1 p2} - sigma_{q2 p1} over symmetrized (non-central) moments.
inline double l3_expectation(const GaussianState& s) {
    const double q1p2 = s.cov(idx::q1, idx::p2) + s.mean[idx::q1] * s.mean[idx::p2];
    const double q2p1 = s.cov(idx::q2, idx::p1) + s.mean[idx::q2] * s.mean[idx::p1];
    return q1p2 - q2p1;
}

// Symmetric system with lambda_11 = lambda_22 = lambda.
inline double l3_decay(double initial_l3, double lambda, double t) { return initial_l3 * std::exp(-2.0 * lambda * t); }

// The four second moments of the (1,2) axis pair that enter sigma_{q1p2}(t)
// and sigma_{q2p1}(t).
struct PairMoments {
    double q1p2 = 0.0;
    double q2p1 = 0.0;
    double q1q2 = 0.0;
    double p1p2 = 0.0;

    static PairMoments from(const Mat6& m) {
        return {m(idx::q1, idx::p2), m(idx::q2, idx::p1), m(idx::q1, idx::q2), m(idx::p1, idx::p2)};
    }
};

enum class CrossMoment { q1p2, q2p1 };

// Trigonometric closed form of sigma_{q1p2}(t) or sigma_{q2p1}(t) for an
// uncoupled bath. Works for central or full moments as long as initial and
// stationary values use the same convention.
inline double cross_covariance_closed_form(CrossMoment which, const PairMoments& initial,
                                           const PairMoments& stationary, const OscillatorSystem& sys,
                                           double lambda11, double lambda22, double t) {
    const double mw1 = sys.mass()[0] * sys.omega()[0];
    const double mw2 = sys.mass()[1] * sys.omega()[1];
    const double c1 = std::cos(sys.omega()[0] * t), s1 = std::sin(sys.omega()[0] * t);
    const double c2 = std::cos(sys.omega()[1] * t), s2 = std::sin(sys.omega()[1] * t);
    const double env = std::exp(-(lambda11 + lambda22) * t);
    const double d_q1p2 = initial.q1p2 - stationary.q1p2;
    const double d_q2p1 = initial.q2p1 - stationary.q2p1;
    const double d_q1q2 = initial.q1q2 - stationary.q1q2;
    const double d_p1p2 = initial.p1p2 - stationary.p1p2;

    if (which == CrossMoment::q1p2) {
        return env * (d_q1p2 * c1 * c2 + d_p1p2 * s1 * c2 / mw1 - mw2 * d_q1q2 * c1 * s2 -
                      (mw2 / mw1) * d_q2p1 * s1 * s2) +
               stationary.q1p2;
    }
    return env * (d_q2p1 * c1 * c2 - mw1 * d_q1q2 * s1 * c2 + d_p1p2 * c1 * s2 / mw2 -
                  (mw1 / mw2) * d_q1p2 * s1 * s2) +
           stationary.q2p1;
}

// |sigma_{q1p2}(inf) - sigma_{q2p1}(inf)|
inline double stationary_equality_check(const DriftMatrix& drift, const DiffusionMatrix& diff) {
    const Mat6 s = stationary_covariance(drift, diff);
    return std::abs(s(idx::q1, idx::p2) - s(idx::q2, idx::p1));
}

// <L^2> for three independent oscillators from per-axis moments
// <p_k^2>, <q_k^2> and (1/2)<p_k q_k + q_k p_k>. Cross-axis correlations in
// the state are ignored.
inline double l2_expectation(const GaussianState& s, double hbar) {
    Vec3 pp, qq, pq;
    for (std::size_t k = 0; k < kAxes; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double mq = s.mean[q_index(k)], mp = s.mean[p_index(k)];
        pp[i] = s.cov(p_index(k), p_index(k)) + mp * mp;
        qq[i] = s.cov(q_index(k), q_index(k)) + mq * mq;
        pq[i] = s.cov(q_index(k), p_index(k)) + mp * mq;
    }
    double sum = 0.0;
    for (Eigen::Index k = 0; k < 3; ++k)
        for (Eigen::Index l = 0; l < 3; ++l)
            if (k != l) sum += pp[k] * qq[l];
    // -(1/2) <pq+qp>_k <pq+qp>_l = -2 pq_k pq_l for each unordered pair
    sum -= 2.0 * (pq[0] * pq[1] + pq[1] * pq[2] + pq[2] * pq[0]);
    return sum - 1.5 * hbar * hbar;
}

struct SingleAxisStationary {
    double sqq = 0.0;
    double spp = 0.0;
    double spq = 0.0;
};

// Stationary moments of one damped oscillator (no pq Hamiltonian term).
inline SingleAxisStationary stationary_single_axis(double m, double omega, double lambda, double Dqq, double Dpp,
                                                   double Dpq) {
    if (!(lambda > 0.0)) throw std::domain_error("stationary_single_axis: lambda must be positive");
    const double mw = m * omega;
    const double w2 = omega * omega;
    const double l2 = lambda * lambda;
    const double den = 2.0 * lambda * (l2 + w2);
    SingleAxisStationary s;
    s.sqq = (mw * mw * (2.0 * l2 + w2) * Dqq + w2 * Dpp + 2.0 * m * w2 * lambda * Dpq) / (mw * mw * den);
    s.spp = (mw * mw * w2 * Dqq + (2.0 * l2 + w2) * Dpp - 2.0 * m * w2 * lambda * Dpq) / den;
    s.spq = (-lambda * mw * mw * Dqq + lambda * Dpp + 2.0 * m * l2 * Dpq) / (m * den);
    return s;
}

// <L^2(inf)> for three identical axes.
inline double l2_asymptotic(const SingleAxisStationary& s, double hbar) {
    return 6.0 * (s.spp * s.sqq - s.spq * s.spq) - 1.5 * hbar * hbar;
}

} // namespace lindblad3
