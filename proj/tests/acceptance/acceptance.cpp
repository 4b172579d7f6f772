// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "lindblad3/lindblad3.hpp"
#include "support/instances.hpp"

using namespace lindblad3;
using lindblad3::testing::InstanceGenerator;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

double spectrum_distance(const Spectrum& got, const std::vector<cplx>& expected) {
    std::vector<cplx> pool(got.begin(), got.end());
    double worst = 0.0;
    for (const auto& e : expected) {
        auto it = std::min_element(pool.begin(), pool.end(),
                                   [&](const cplx& a, const cplx& b) { return std::abs(a - e) < std::abs(b - e); });
        worst = std::max(worst, std::abs(*it - e));
        pool.erase(it);
    }
    return worst;
}

// lambda_kk in (0, 2], omega_k in (0, 5], masses in [0.5, 2].
struct DiagonalInstance {
    OscillatorSystem system;
    Vec3 lambda;
};

DiagonalInstance random_diagonal(InstanceGenerator& gen) {
    const Vec3 omega(gen.open_uniform(5), gen.open_uniform(5), gen.open_uniform(5));
    return {OscillatorSystem(gen.vec3(0.5, 2.0), omega), Vec3(gen.open_uniform(2), gen.open_uniform(2), gen.open_uniform(2))};
}

OpeningCoefficients friction_only(const Vec3& lambda) {
    OpeningCoefficients c;
    c.lambda = lambda.asDiagonal();
    return c;
}

// 50 coupled + 50 diagonal stable instances, fixed seed.
std::vector<InstanceGenerator::Problem> stable_instances() {
    InstanceGenerator gen(3003);
    std::vector<InstanceGenerator::Problem> out;
    for (int i = 0; i < 50; ++i) out.push_back(gen.stable_coupled());
    for (int i = 0; i < 50; ++i) out.push_back(gen.stable_diagonal());
    return out;
}

InstanceGenerator::Problem unit_symmetric() {
    InstanceGenerator::Problem p{OscillatorSystem::isotropic(1, 1, 1), {}, {}, {}};
    p.coeff.lambda = Mat3::Identity();
    p.coeff.Dqq = p.coeff.Dpp = 0.5 * Mat3::Identity();
    p.drift = build_drift_matrix(p.system, p.coeff);
    p.diff = assemble_diffusion(p.coeff);
    return p;
}

GaussianState evolve(const GaussianState& s0, const InstanceGenerator::Problem& p, double t) {
    return {evolve_mean(s0, p.drift, t), evolve_covariance(s0, p.drift, p.diff, t)};
}

// ------------------------------------------------------------------ criteria

Outcome ac01_eigenvalue_law() {
    InstanceGenerator gen(101);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto inst = random_diagonal(gen);
        std::vector<cplx> roots;
        for (Eigen::Index k = 0; k < 3; ++k) {
            roots.emplace_back(-inst.lambda[k], inst.system.omega()[k]);
            roots.emplace_back(-inst.lambda[k], -inst.system.omega()[k]);
        }
        worst = std::max(worst, spectrum_distance(build_drift_matrix(inst.system, friction_only(inst.lambda)).eigenvalues, roots));
    }
    return {worst <= 1e-10, fmt("max |z - (-lambda +- i omega)| = %.3e (tol 1e-10)", worst)};
}

Outcome ac02_propagator_equivalence() {
    InstanceGenerator gen(202);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto inst = random_diagonal(gen);
        const Mat6 Y = build_drift_matrix(inst.system, friction_only(inst.lambda)).Y;
        for (double t : {0.1, 1.0, 5.0})
            worst = std::max(worst, max_abs(closed_form_propagator(inst.system, inst.lambda, t).M -
                                            matrix_exponential(Y, t).M));
    }
    return {worst <= 1e-10, fmt("max entrywise |closed form - expm| = %.3e (tol 1e-10)", worst)};
}

Outcome ac03_lyapunov_residual() {
    double worst_ratio = 0.0;
    for (const auto& p : stable_instances()) {
        const Mat6 S = stationary_covariance(p.drift, p.diff);
        const double bound = 1e-10 * std::max(1.0, max_abs(p.diff.D));
        worst_ratio = std::max(worst_ratio, lyapunov_residual(p.drift.Y, S, p.diff.D) / bound);
    }
    return {worst_ratio <= 1.0, fmt("max residual / (1e-10 max(1,|D|)) = %.3e over 100 instances (50 coupled)", worst_ratio)};
}

Outcome ac04_integral_vs_algebraic() {
    double worst = 0.0;
    for (const auto& p : stable_instances()) {
        const double horizon = 40.0 / -p.drift.max_real_part();
        const Mat6 Si = stationary_covariance_integral(p.drift, p.diff, horizon, 1e-10);
        worst = std::max(worst, max_abs(Si - stationary_covariance(p.drift, p.diff)));
    }
    return {worst <= 1e-8, fmt("max |integral - Lyapunov| = %.3e (tol 1e-8)", worst)};
}

Outcome ac05_covariance_flow() {
    InstanceGenerator gen(505);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto p = gen.stable_coupled();
        const auto s0 = gen.state();
        for (double t : {0.1, 1.0, 10.0})
            worst = std::max(worst, max_abs(evolve_covariance(s0, p.drift, p.diff, t) -
                                            rk4_covariance(s0, p.drift, p.diff, t, 1e-3)));
    }
    return {worst <= 1e-6, fmt("max |relaxation form - RK4(dt=1e-3)| = %.3e (tol 1e-6)", worst)};
}

Outcome ac06_l3_decay() {
    InstanceGenerator gen(606);
    std::vector<InstanceGenerator::Problem> cases{unit_symmetric()};
    for (int i = 0; i < 10; ++i) cases.push_back(gen.symmetric());
    double worst = 0.0;
    for (const auto& p : cases) {
        const auto s0 = gen.state();
        const double l0 = l3_expectation(s0);
        const double lambda = p.coeff.lambda(0, 0);
        for (int i = 0; i < 100; ++i) {
            const double t = 10.0 * i / 99.0;
            worst = std::max(worst, std::abs(l3_expectation(evolve(s0, p, t)) - l3_decay(l0, lambda, t)));
        }
    }
    const auto unit = unit_symmetric();
    GaussianState s0;
    s0.cov = Mat6::Identity();
    s0.cov(idx::q1, idx::p2) = s0.cov(idx::p2, idx::q1) = 0.3;
    s0.cov(idx::q2, idx::p1) = s0.cov(idx::p1, idx::q2) = 0.1;
    const double ratio = l3_expectation(evolve(s0, unit, 1.0)) / l3_expectation(s0);
    const double ratio_err = std::abs(ratio - std::exp(-2.0));
    return {worst < 1e-9 && ratio_err < 1e-9,
            fmt("max |L3(t) - L3(0)exp(-2 lambda t)| = %.3e; |L3(1)/L3(0) - e^-2| = %.3e (tol 1e-9)", worst, ratio_err)};
}

Outcome ac07_stationary_symmetry() {
    InstanceGenerator gen(707);
    double worst = stationary_equality_check(unit_symmetric().drift, unit_symmetric().diff);
    for (int i = 0; i < 50; ++i) {
        const auto p = gen.symmetric();
        worst = std::max(worst, stationary_equality_check(p.drift, p.diff));
    }
    for (int i = 0; i < 50; ++i) {
        const auto p = gen.stable_diagonal();
        worst = std::max(worst, stationary_equality_check(p.drift, p.diff));
    }
    return {worst < 1e-10, fmt("max |sigma_q1p2(inf) - sigma_q2p1(inf)| = %.3e (tol 1e-10)", worst)};
}

Outcome ac08_single_axis_asymptotics() {
    InstanceGenerator gen(808);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto p = gen.stable_diagonal();
        const Mat6 S = stationary_covariance(p.drift, p.diff);
        for (std::size_t k = 0; k < 3; ++k) {
            const auto j = static_cast<Eigen::Index>(k);
            const auto a = stationary_single_axis(p.system.mass()[j], p.system.omega()[j], p.coeff.lambda(j, j),
                                                  p.coeff.Dqq(j, j), p.coeff.Dpp(j, j), p.coeff.Dqp(j, j));
            worst = std::max({worst, std::abs(a.sqq - S(q_index(k), q_index(k))),
                              std::abs(a.spp - S(p_index(k), p_index(k))), std::abs(a.spq - S(q_index(k), p_index(k)))});
        }
    }
    const auto report = run_stationary_report(parse_config(R"(
system.mass = 1
system.omega = 1
system.hbar = 1
coefficients.source = matrices
coefficients.lambda = [1, 1, 1]
coefficients.Dqq = [0.5, 0.5, 0.5]
coefficients.Dpp = [0.5, 0.5, 0.5]
initial.cov = [1, 1, 1, 1, 1, 1]
time.t_end = 1
time.n_steps = 10
)"));
    const auto& a = (*report.single_axis)[0];
    const double hand = std::max({std::abs(a.sqq - 0.5), std::abs(a.spp - 0.5), std::abs(a.spq),
                                  std::abs(*report.l2_inf_closed_form), std::abs(report.l2_inf)});
    return {worst <= 1e-10 && hand <= 1e-12,
            fmt("max |closed form - Lyapunov block| = %.3e; unit-case report deviation = %.3e", worst, hand)};
}

Outcome ac09_l2_envelope() {
    InstanceGenerator gen(909);
    std::vector<InstanceGenerator::Problem> cases{unit_symmetric()};
    for (int i = 0; i < 20; ++i) cases.push_back(gen.symmetric());
    double worst_ratio = 0.0, worst_limit = 0.0;
    for (const auto& p : cases) {
        const double lambda = p.coeff.lambda(0, 0);
        const double hbar = p.system.hbar();
        const Mat6 S = stationary_covariance(p.drift, p.diff);
        const auto axis = stationary_single_axis(p.system.mass()[0], p.system.omega()[0], lambda, p.coeff.Dqq(0, 0),
                                                 p.coeff.Dpp(0, 0), p.coeff.Dqp(0, 0));
        const double l2_inf = l2_asymptotic(axis, hbar);

        // independent axes displaced from the stationary state
        GaussianState s0;
        s0.mean = gen.vec6(-1, 1);
        s0.cov = S;
        for (std::size_t k = 0; k < 3; ++k) {
            Eigen::Matrix2d B;
            B << gen.uniform(-1, 1), gen.uniform(-1, 1), gen.uniform(-1, 1), gen.uniform(-1, 1);
            const Eigen::Matrix2d excess = B * B.transpose();
            const Eigen::Index q = q_index(k), pk = p_index(k);
            s0.cov(q, q) += excess(0, 0);
            s0.cov(pk, pk) += excess(1, 1);
            s0.cov(q, pk) += excess(0, 1);
            s0.cov(pk, q) += excess(1, 0);
        }
        const double k0 = 10.0 * std::abs(l2_expectation(s0, hbar) - l2_inf);
        for (int i = 0; i <= 200; ++i) {
            const double t = 10.0 * i / 200.0;
            const double dev = std::abs(l2_expectation(evolve(s0, p, t), hbar) - l2_inf);
            worst_ratio = std::max(worst_ratio, dev / (k0 * std::exp(-2.0 * lambda * t)));
        }
        worst_limit = std::max(worst_limit, std::abs(l2_expectation(evolve(s0, p, 20.0 / lambda), hbar) - l2_inf));
    }
    return {worst_ratio <= 1.0 && worst_limit <= 1e-6,
            fmt("max |L2(t)-L2(inf)| / (10|L2(0)-L2(inf)| e^{-2 lambda t}) = %.3f; |L2(20/lambda) - L2(inf)| = %.3e",
                worst_ratio, worst_limit)};
}

Outcome ac10_admissibility() {
    InstanceGenerator gen(1010);
    double worst_psd = std::numeric_limits<double>::infinity(), worst_cs = worst_psd;
    for (int i = 0; i < 1000; ++i) {
        const double hbar = gen.uniform(0.1, 3.0);
        const auto c = build_coefficients(gen.lindblad_vectors(), hbar);
        for (const Mat3* m : {&c.Dqq, &c.Dpp}) {
            const double floor = -1e-12 * std::max(1.0, m->trace());
            worst_psd = std::min(worst_psd, detail::min_eigenvalue(*m) - floor);
        }
        worst_cs = std::min(worst_cs, cauchy_schwarz_slack(c, hbar).minCoeff() + 1e-12);
    }
    return {worst_psd >= 0.0 && worst_cs >= 0.0,
            fmt("min PSD margin = %.3e, min Cauchy-Schwarz margin = %.3e over 1000 draws (both must be >= 0)", worst_psd,
                worst_cs)};
}

Outcome ac11_unitary_limit() {
    InstanceGenerator gen(1111);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const auto sys = OscillatorSystem::isotropic(gen.uniform(0.5, 2), gen.uniform(0.5, 3));
        const auto drift = build_drift_matrix(sys, OpeningCoefficients{});
        const auto s0 = gen.state();
        const double l0 = l3_expectation(s0);
        const double period = 2.0 * std::numbers::pi / sys.omega()[0];
        for (int j = 0; j <= 100; ++j) {
            const double t = period * j / 100.0;
            const GaussianState s{evolve_mean(s0, drift, t), propagate_covariance(s0, drift, DiffusionMatrix{}, t)};
            worst = std::max(worst, std::abs(l3_expectation(s) - l0));
        }
    }
    return {worst < 1e-9, fmt("max |L3(t) - L3(0)| over one period = %.3e (tol 1e-9)", worst)};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"AC01 eigenvalue law", ac01_eigenvalue_law},
        {"AC02 propagator equivalence", ac02_propagator_equivalence},
        {"AC03 Lyapunov residual", ac03_lyapunov_residual},
        {"AC04 integral vs algebraic stationary covariance", ac04_integral_vs_algebraic},
        {"AC05 covariance flow vs RK4", ac05_covariance_flow},
        {"AC06 L3 decay law", ac06_l3_decay},
        {"AC07 stationary q1p2/q2p1 symmetry", ac07_stationary_symmetry},
        {"AC08 single-axis asymptotics", ac08_single_axis_asymptotics},
        {"AC09 L2 envelope and limit", ac09_l2_envelope},
        {"AC10 coefficient admissibility", ac10_admissibility},
        {"AC11 unitary limit", ac11_unitary_limit},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o{false, ""};
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
