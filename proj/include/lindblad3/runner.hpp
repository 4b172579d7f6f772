// runner.hpp: scenario execution: time series, CSV emission, stationary report

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lindblad3/config.hpp"
#include "lindblad3/core.hpp"
#include "lindblad3/observables.hpp"
#include "lindblad3/propagator.hpp"

namespace lindblad3 {

inline const std::array<std::string, 6>& coordinate_names() {
    static const std::array<std::string, 6> n = {"q1", "q2", "q3", "p1", "p2", "p3"};
    return n;
}

// C_q1q1, C_q1q2, ..., C_p3p3: upper triangle, row-major.
inline std::vector<std::string> covariance_column_names(const std::string& prefix = "C_") {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i; j < 6; ++j) out.push_back(prefix + coordinate_names()[i] + coordinate_names()[j]);
    return out;
}

struct TimeSeries {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw std::out_of_range("no column '" + name + "'");
        return static_cast<std::size_t>(it - columns.begin());
    }
};

// Header plus one line per row, comma separated, CRLF terminated.
inline void write_csv(std::ostream& os, const TimeSeries& ts) {
    for (std::size_t i = 0; i < ts.columns.size(); ++i) os << (i ? "," : "") << ts.columns[i];
    os << "\r\n";
    for (const auto& row : ts.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
        os << "\r\n";
    }
}

namespace detail {

inline void append_state_columns(std::vector<std::string>& cols, const OutputSelection& out, const std::string& prefix) {
    if (out.means)
        for (const auto& n : coordinate_names()) cols.push_back(prefix + "m" + n);
    if (out.covariances)
        for (const auto& n : covariance_column_names(prefix + "C_")) cols.push_back(n);
    if (out.l3) cols.push_back(prefix + "L3");
    if (out.l2) cols.push_back(prefix + "L2");
}

inline void append_state_values(std::vector<double>& row, const OutputSelection& out, const GaussianState& s,
                                double hbar) {
    if (out.means)
        for (Eigen::Index i = 0; i < 6; ++i) row.push_back(s.mean[i]);
    if (out.covariances)
        for (Eigen::Index i = 0; i < 6; ++i)
            for (Eigen::Index j = i; j < 6; ++j) row.push_back(s.cov(i, j));
    if (out.l3) row.push_back(l3_expectation(s));
    if (out.l2) row.push_back(l2_expectation(s, hbar));
}

} // namespace detail

// One row per grid time t_i = i * t_end / n_steps, i = 0..n_steps. Stable
// drifts relax towards sigma(inf); otherwise the covariance is propagated
// through the block exponential. With the oracle enabled every requested
// column is repeated with an rk4_ prefix.
inline TimeSeries run_timeseries(const RunConfig& cfg) {
    const DriftMatrix drift = build_drift_matrix(cfg.system, cfg.coefficients);
    const DiffusionMatrix diff = assemble_diffusion(cfg.coefficients);
    if (cfg.outputs.stationary && !drift.stable) throw UnstableDrift(drift.eigenvalues);

    std::optional<Mat6> sigma_inf;
    if (drift.stable) sigma_inf = stationary_covariance(drift, diff);

    TimeSeries ts;
    ts.columns.push_back("t");
    detail::append_state_columns(ts.columns, cfg.outputs, "");
    if (cfg.outputs.stationary) ts.columns.push_back("C_dist_inf");
    if (cfg.oracle.enabled) detail::append_state_columns(ts.columns, cfg.outputs, "rk4_");

    const double h = cfg.grid.t_end / cfg.grid.n_steps;
    const auto substeps = static_cast<std::int64_t>(std::max(1.0, std::ceil(h / cfg.oracle.dt - 1e-9)));
    if (cfg.oracle.enabled && static_cast<double>(substeps) * cfg.grid.n_steps > 1e8)
        throw std::overflow_error("rk4: more than 1e8 oracle steps requested");
    GaussianState oracle = cfg.initial;

    const double hbar = cfg.system.hbar();
    for (int i = 0; i <= cfg.grid.n_steps; ++i) {
        const double t = cfg.grid.time(i);
        GaussianState s;
        const Mat6 M = matrix_exponential(drift.Y, t).M;
        s.mean = M * cfg.initial.mean;
        s.cov = sigma_inf ? relax_covariance(cfg.initial.cov, M, *sigma_inf)
                          : propagate_covariance(cfg.initial, drift, diff, t);

        std::vector<double> row{t};
        detail::append_state_values(row, cfg.outputs, s, hbar);
        if (cfg.outputs.stationary) row.push_back(max_abs(s.cov - *sigma_inf));
        if (cfg.oracle.enabled) {
            if (i > 0) {
                const double hs = h / static_cast<double>(substeps);
                oracle.mean = detail::rk4_mean_steps(oracle.mean, drift.Y, hs, substeps);
                oracle.cov = detail::rk4_covariance_steps(oracle.cov, drift.Y, diff.D, hs, substeps);
            }
            detail::append_state_values(row, cfg.outputs, oracle, hbar);
        }
        ts.rows.push_back(std::move(row));
    }
    return ts;
}

// Largest |X - rk4_X| over all rows and oracle-paired columns; 0 when the
// oracle is off.
inline double max_oracle_discrepancy(const TimeSeries& ts) {
    double worst = 0.0;
    for (std::size_t c = 0; c < ts.columns.size(); ++c) {
        const auto it = std::find(ts.columns.begin(), ts.columns.end(), "rk4_" + ts.columns[c]);
        if (it == ts.columns.end()) continue;
        const auto o = static_cast<std::size_t>(it - ts.columns.begin());
        for (const auto& row : ts.rows) worst = std::max(worst, std::abs(row[c] - row[o]));
    }
    return worst;
}

// ---------------------------------------------------------------- stationary report

struct StationaryReport {
    double hbar = 1.0;
    DriftMatrix drift;
    Mat6 sigma_lyapunov = Mat6::Zero();
    Mat6 sigma_integral = Mat6::Zero();
    double method_discrepancy = 0.0;
    double lyapunov_residual = 0.0;
    double symmetry_residual = 0.0; // |sigma_q1p2 - sigma_q2p1| at t = inf
    std::optional<std::array<SingleAxisStationary, 3>> single_axis;
    double l2_inf = 0.0; // <L^2> evaluated on the stationary moments
    std::optional<double> l2_inf_closed_form;
    std::vector<std::string> warnings;

    std::string to_text() const;
};

namespace detail {

// Three identical axes with diagonal, axis-independent coefficients.
inline bool is_symmetric_case(const OscillatorSystem& sys, const OpeningCoefficients& c) {
    if (!sys.is_isotropic() || !c.is_diagonal()) return false;
    auto same = [](const Mat3& m) { return m(0, 0) == m(1, 1) && m(1, 1) == m(2, 2); };
    return same(c.Dqq) && same(c.Dpp) && same(c.Dqp) && same(c.lambda);
}

} // namespace detail

inline StationaryReport run_stationary_report(const RunConfig& cfg) {
    StationaryReport r;
    r.hbar = cfg.system.hbar();
    r.drift = build_drift_matrix(cfg.system, cfg.coefficients);
    const DiffusionMatrix diff = assemble_diffusion(cfg.coefficients);
    if (!r.drift.stable) throw UnstableDrift(r.drift.eigenvalues);
    r.warnings = cfg.warnings;

    r.sigma_lyapunov = stationary_covariance(r.drift, diff);
    r.lyapunov_residual = lyapunov_residual(r.drift.Y, r.sigma_lyapunov, diff.D);
    const double horizon = 40.0 / -r.drift.max_real_part();
    const double tol = 1e-11 * std::max(1.0, max_abs(r.sigma_lyapunov));
    r.sigma_integral = stationary_covariance_integral(r.drift, diff, horizon, tol);
    r.method_discrepancy = max_abs(r.sigma_lyapunov - r.sigma_integral);
    r.symmetry_residual = std::abs(r.sigma_lyapunov(idx::q1, idx::p2) - r.sigma_lyapunov(idx::q2, idx::p1));

    const auto& c = cfg.coefficients;
    if (c.is_diagonal()) {
        std::array<SingleAxisStationary, 3> axes;
        for (Eigen::Index k = 0; k < 3; ++k)
            axes[static_cast<std::size_t>(k)] =
                stationary_single_axis(cfg.system.mass()[k], cfg.system.omega()[k], c.lambda(k, k), c.Dqq(k, k),
                                       c.Dpp(k, k), c.Dqp(k, k));
        r.single_axis = axes;
        if (detail::is_symmetric_case(cfg.system, c)) r.l2_inf_closed_form = l2_asymptotic(axes[0], r.hbar);
    }

    GaussianState stationary;
    stationary.cov = r.sigma_lyapunov;
    r.l2_inf = l2_expectation(stationary, r.hbar);
    if (r.l2_inf < 0.0)
        r.warnings.push_back("<L^2(inf)> = " + format_double(r.l2_inf) +
                             " is negative: the stationary moments lie outside the physical domain of the <L^2> formula");
    Mat6 cross = r.sigma_lyapunov;
    for (std::size_t k = 0; k < kAxes; ++k) {
        cross(q_index(k), q_index(k)) = cross(p_index(k), p_index(k)) = 0.0;
        cross(q_index(k), p_index(k)) = cross(p_index(k), q_index(k)) = 0.0;
    }
    if (max_abs(cross) > 1e-12 * std::max(1.0, max_abs(r.sigma_lyapunov)))
        r.warnings.push_back("sigma(inf) has cross-axis correlations; <L^2(inf)> ignores them");
    return r;
}

inline std::string StationaryReport::to_text() const {
    std::ostringstream os;
    auto line = [&](const std::string& key, const std::string& value) { os << key << ": " << value << "\n"; };
    line("stable", drift.stable ? "true" : "false");
    line("max_real_part", format_double(drift.max_real_part()));
    for (std::size_t i = 0; i < 6; ++i) {
        line("eigenvalue." + std::to_string(i + 1) + ".re", format_double(drift.eigenvalues[i].real()));
        line("eigenvalue." + std::to_string(i + 1) + ".im", format_double(drift.eigenvalues[i].imag()));
    }
    const auto names = covariance_column_names("");
    auto dump = [&](const std::string& prefix, const Mat6& m) {
        std::size_t n = 0;
        for (Eigen::Index i = 0; i < 6; ++i)
            for (Eigen::Index j = i; j < 6; ++j) line(prefix + names[n++], format_double(m(i, j)));
    };
    dump("sigma_inf.lyapunov.", sigma_lyapunov);
    dump("sigma_inf.integral.", sigma_integral);
    line("sigma_inf.method_discrepancy", format_double(method_discrepancy));
    line("sigma_inf.lyapunov_residual", format_double(lyapunov_residual));
    line("sigma_inf.q1p2_minus_q2p1", format_double(symmetry_residual));
    if (single_axis) {
        for (std::size_t k = 0; k < 3; ++k) {
            const std::string p = "single_axis." + std::to_string(k + 1) + ".";
            line(p + "sqq", format_double((*single_axis)[k].sqq));
            line(p + "spp", format_double((*single_axis)[k].spp));
            line(p + "spq", format_double((*single_axis)[k].spq));
        }
    } else {
        line("single_axis", "unavailable (coupled coefficients)");
    }
    line("l2_inf", format_double(l2_inf));
    if (l2_inf_closed_form) line("l2_inf.closed_form", format_double(*l2_inf_closed_form));
    for (const auto& w : warnings) line("warning", w);
    return os.str();
}

} // namespace lindblad3
