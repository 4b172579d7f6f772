// core.hpp: oscillator parameters, opening coefficients, drift and diffusion matrices
//
// Phase-space ordering everywhere in this library is (q1, q2, q3, p1, p2, p3).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lindblad3/errors.hpp"

namespace lindblad3 {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using CVec6 = Eigen::Matrix<cplx, 6, 1>;
using Spectrum = std::array<cplx, 6>;

inline constexpr std::size_t kAxes = 3;
inline constexpr std::size_t kDim = 6;

// Index helpers for the (q1,q2,q3,p1,p2,p3) ordering; axis k is 0-based.
constexpr Eigen::Index q_index(std::size_t k) noexcept { return static_cast<Eigen::Index>(k); }
constexpr Eigen::Index p_index(std::size_t k) noexcept { return static_cast<Eigen::Index>(kAxes + k); }

// Real part below this is "strictly stable"; between it and 0 is marginal.
inline constexpr double kStabilityMargin = 1e-12;

// ---------------------------------------------------------------- system

class OscillatorSystem {
public:
    OscillatorSystem() : OscillatorSystem(Vec3::Ones(), Vec3::Ones(), 1.0) {}

    OscillatorSystem(const Vec3& mass, const Vec3& omega, double hbar = 1.0)
        : mass_(mass), omega_(omega), hbar_(hbar) {
        for (std::size_t k = 0; k < kAxes; ++k) {
            if (!(mass_[k] > 0.0) || !std::isfinite(mass_[k]))
                throw InvariantError("mass of axis " + std::to_string(k + 1) + " must be positive");
            if (!(omega_[k] > 0.0) || !std::isfinite(omega_[k]))
                throw InvariantError("omega of axis " + std::to_string(k + 1) + " must be positive");
        }
        if (!(hbar_ > 0.0) || !std::isfinite(hbar_)) throw InvariantError("hbar must be positive");
    }

    // All three axes share mass and frequency.
    static OscillatorSystem isotropic(double mass, double omega, double hbar = 1.0) {
        return {Vec3::Constant(mass), Vec3::Constant(omega), hbar};
    }

    const Vec3& mass() const noexcept { return mass_; }
    const Vec3& omega() const noexcept { return omega_; }
    double hbar() const noexcept { return hbar_; }

    bool is_isotropic() const noexcept {
        return mass_.minCoeff() == mass_.maxCoeff() && omega_.minCoeff() == omega_.maxCoeff();
    }

private:
    Vec3 mass_;
    Vec3 omega_;
    double hbar_;
};

// ---------------------------------------------------------------- Lindblad vectors

// a[k] collects the momentum coefficients a_{jk} of p_k over the six opening
// operators V_j, b[k] the coordinate coefficients b_{jk} of q_k.
struct LindbladVectors {
    std::array<CVec6, kAxes> a{CVec6::Zero(), CVec6::Zero(), CVec6::Zero()};
    std::array<CVec6, kAxes> b{CVec6::Zero(), CVec6::Zero(), CVec6::Zero()};

    static LindbladVectors from_components(const std::vector<std::vector<cplx>>& a,
                                           const std::vector<std::vector<cplx>>& b) {
        auto fill = [](const std::vector<std::vector<cplx>>& src, std::array<CVec6, kAxes>& dst,
                       const char* family) {
            if (src.size() != kAxes)
                throw ShapeError(std::string("expected 3 '") + family + "' vectors, got " +
                                 std::to_string(src.size()));
            for (std::size_t k = 0; k < kAxes; ++k) {
                if (src[k].size() != kDim)
                    throw ShapeError(std::string("'") + family + std::to_string(k + 1) +
                                     "' must have 6 components, got " + std::to_string(src[k].size()));
                for (std::size_t j = 0; j < kDim; ++j) dst[k][static_cast<Eigen::Index>(j)] = src[k][j];
            }
        };
        LindbladVectors v;
        fill(a, v.a, "a");
        fill(b, v.b, "b");
        return v;
    }
};

// ---------------------------------------------------------------- coefficients

struct OpeningCoefficients {
    Mat3 Dqq = Mat3::Zero();
    Mat3 Dpp = Mat3::Zero();
    Mat3 Dqp = Mat3::Zero(); // Dqp(k,l) = D_{q_k p_l}
    Mat3 alpha = Mat3::Zero();
    Mat3 beta = Mat3::Zero();
    Mat3 lambda = Mat3::Zero();

    // alpha, beta and lambda vanish off the diagonal: the axes are coupled
    // only through diffusion, if at all.
    bool is_uncoupled_drift() const {
        Mat3 off = lambda;
        off.diagonal().setZero();
        return alpha.isZero(0.0) && beta.isZero(0.0) && off.isZero(0.0);
    }

    // Every coefficient matrix is diagonal.
    bool is_diagonal() const {
        auto diag = [](const Mat3& m) {
            Mat3 off = m;
            off.diagonal().setZero();
            return off.isZero(0.0);
        };
        return is_uncoupled_drift() && diag(Dqq) && diag(Dpp) && diag(Dqp);
    }
};

namespace detail {

// x^H y, the scalar product a_k^* . a_l used throughout the coefficient map.
inline cplx hdot(const CVec6& x, const CVec6& y) { return x.dot(y); }

inline double psd_floor(const Mat3& m) { return -1e-12 * std::max(1.0, std::abs(m.trace())); }

inline double min_eigenvalue(const Mat3& m) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

} // namespace detail

// Coefficients induced by opening operators V_j = sum_k a_jk p_k + b_jk q_k.
inline OpeningCoefficients build_coefficients(const LindbladVectors& v, double hbar) {
    if (!(hbar > 0.0)) throw InvariantError("hbar must be positive");
    OpeningCoefficients c;
    for (std::size_t k = 0; k < kAxes; ++k) {
        for (std::size_t l = 0; l < kAxes; ++l) {
            const cplx aa = detail::hdot(v.a[k], v.a[l]);
            const cplx bb = detail::hdot(v.b[k], v.b[l]);
            const cplx ab = detail::hdot(v.a[k], v.b[l]);
            const auto i = static_cast<Eigen::Index>(k);
            const auto j = static_cast<Eigen::Index>(l);
            c.Dqq(i, j) = 0.5 * hbar * aa.real();
            c.Dpp(i, j) = 0.5 * hbar * bb.real();
            c.Dqp(i, j) = -0.5 * hbar * ab.real();
            c.alpha(i, j) = -aa.imag();
            c.beta(i, j) = -bb.imag();
            c.lambda(i, j) = -ab.imag();
        }
    }
    // Re/Im of a Hermitian Gram matrix are symmetric/antisymmetric; pin it
    // bitwise so later comparisons do not see rounding noise.
    for (Eigen::Index k = 0; k < 3; ++k) {
        for (Eigen::Index l = k + 1; l < 3; ++l) {
            c.Dqq(l, k) = c.Dqq(k, l);
            c.Dpp(l, k) = c.Dpp(k, l);
            c.alpha(l, k) = -c.alpha(k, l);
            c.beta(l, k) = -c.beta(k, l);
        }
        c.alpha(k, k) = 0.0;
        c.beta(k, k) = 0.0;
    }
    return c;
}

// Per-axis Cauchy-Schwarz slack Dqq_kk Dpp_kk - Dqp_kk^2 - (hbar lambda_kk)^2 / 4.
// Nonnegative for coefficients that come from Lindblad vectors.
inline Vec3 cauchy_schwarz_slack(const OpeningCoefficients& c, double hbar) {
    Vec3 s;
    for (Eigen::Index k = 0; k < 3; ++k) {
        s[k] = c.Dqq(k, k) * c.Dpp(k, k) - c.Dqp(k, k) * c.Dqp(k, k) -
               0.25 * hbar * hbar * c.lambda(k, k) * c.lambda(k, k);
    }
    return s;
}

// Validates a user-supplied coefficient set. Symmetry, antisymmetry and
// semidefiniteness violations throw; a violated Cauchy-Schwarz bound is only
// reported through the returned warnings.
inline std::vector<std::string> validate_coefficients(const OpeningCoefficients& c, double hbar,
                                                      double tol = 1e-12) {
    auto scale = [](const Mat3& m) { return std::max(1.0, m.cwiseAbs().maxCoeff()); };
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw InvariantError(what);
    };
    require(c.Dqq.allFinite() && c.Dpp.allFinite() && c.Dqp.allFinite() && c.alpha.allFinite() &&
                c.beta.allFinite() && c.lambda.allFinite(),
            "coefficients must be finite");
    require((c.Dqq - c.Dqq.transpose()).cwiseAbs().maxCoeff() <= tol * scale(c.Dqq), "Dqq must be symmetric");
    require((c.Dpp - c.Dpp.transpose()).cwiseAbs().maxCoeff() <= tol * scale(c.Dpp), "Dpp must be symmetric");
    require((c.alpha + c.alpha.transpose()).cwiseAbs().maxCoeff() <= tol * scale(c.alpha),
            "alpha must be antisymmetric");
    require((c.beta + c.beta.transpose()).cwiseAbs().maxCoeff() <= tol * scale(c.beta),
            "beta must be antisymmetric");
    require(detail::min_eigenvalue(c.Dqq) >= detail::psd_floor(c.Dqq), "Dqq must be positive semidefinite");
    require(detail::min_eigenvalue(c.Dpp) >= detail::psd_floor(c.Dpp), "Dpp must be positive semidefinite");

    std::vector<std::string> warnings;
    const Vec3 slack = cauchy_schwarz_slack(c, hbar);
    for (Eigen::Index k = 0; k < 3; ++k) {
        if (slack[k] < -tol) {
            std::ostringstream os;
            os.precision(17);
            os << "axis " << k + 1 << ": Dqq*Dpp - Dqp^2 < (hbar*lambda)^2/4 (slack " << slack[k]
               << "); coefficients are not generated by any Lindblad vectors";
            warnings.push_back(os.str());
        }
    }
    return warnings;
}

// ---------------------------------------------------------------- drift

struct DriftMatrix {
    Mat6 Y = Mat6::Zero();
    Spectrum eigenvalues{};
    bool stable = false;
    bool marginal = false; // some -margin <= Re(z) <= 0 and none positive

    double max_real_part() const {
        double r = eigenvalues[0].real();
        for (const auto& z : eigenvalues) r = std::max(r, z.real());
        return r;
    }
};

// Eigenvalues and stability classification for an arbitrary 6x6 drift.
inline DriftMatrix analyze_drift(const Mat6& Y) {
    if (!Y.allFinite()) throw NumericalError("drift matrix has non-finite entries");
    Eigen::EigenSolver<Mat6> es(Y, false);
    if (es.info() != Eigen::Success) {
        std::ostringstream os;
        os.precision(17);
        os << "eigenvalue solver failed for drift matrix\n" << Y;
        throw NumericalError(os.str());
    }
    DriftMatrix d;
    d.Y = Y;
    std::vector<cplx> z(es.eigenvalues().data(), es.eigenvalues().data() + 6);
    std::sort(z.begin(), z.end(), [](const cplx& x, const cplx& y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    std::copy(z.begin(), z.end(), d.eigenvalues.begin());
    const double rmax = d.max_real_part();
    d.stable = rmax < -kStabilityMargin;
    d.marginal = !d.stable && rmax <= kStabilityMargin;
    return d;
}

// Drift of the mean flow dm/dt = Y m. The q-rows carry -lambda_kl, the p-rows
// -lambda_lk; alpha enters the q/p block with a minus sign, beta the p/q block
// with a plus sign.
inline DriftMatrix build_drift_matrix(const OscillatorSystem& sys, const OpeningCoefficients& c) {
    Mat6 Y = Mat6::Zero();
    for (Eigen::Index k = 0; k < 3; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        for (Eigen::Index l = 0; l < 3; ++l) {
            const auto ls = static_cast<std::size_t>(l);
            Y(q_index(ks), q_index(ls)) = -c.lambda(k, l);
            Y(p_index(ks), p_index(ls)) = -c.lambda(l, k);
            if (k == l) {
                Y(q_index(ks), p_index(ls)) = 1.0 / sys.mass()[k];
                Y(p_index(ks), q_index(ls)) = -sys.mass()[k] * sys.omega()[k] * sys.omega()[k];
            } else {
                Y(q_index(ks), p_index(ls)) = -c.alpha(k, l);
                Y(p_index(ks), q_index(ls)) = c.beta(k, l);
            }
        }
    }
    return analyze_drift(Y);
}

// ---------------------------------------------------------------- diffusion

struct DiffusionMatrix {
    Mat6 D = Mat6::Zero();
};

inline DiffusionMatrix assemble_diffusion(const OpeningCoefficients& c) {
    DiffusionMatrix d;
    d.D.topLeftCorner<3, 3>() = c.Dqq;
    d.D.topRightCorner<3, 3>() = c.Dqp;
    d.D.bottomLeftCorner<3, 3>() = c.Dqp.transpose();
    d.D.bottomRightCorner<3, 3>() = c.Dpp;
    return d;
}

} // namespace lindblad3
