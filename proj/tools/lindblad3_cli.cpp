// lindblad3: command-line driver
//
//   lindblad3 simulate   <config> [--output path] [--oracle] [--oracle-dt dt]
//   lindblad3 stationary <config> [--output path]
//   lindblad3 validate   <config>
//
// Exit codes: 0 success, 1 usage, 2 config error, 3 unstable drift,
// 4 numerical or I/O failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lindblad3/lindblad3.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kUnstable = 3, kNumerical = 4 };

lindblad3::RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw lindblad3::ConfigError("", "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return lindblad3::parse_config(buf.str());
}

// Writes to `path`, or stdout when empty. Opened in binary mode so CRLF
// endings survive unchanged.
template <class Fn>
void emit(const std::string& path, Fn&& write) {
    if (path.empty()) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output '" + path + "'");
    write(out);
}

std::string describe(const lindblad3::RunConfig& cfg) {
    using lindblad3::format_double;
    const auto drift = lindblad3::build_drift_matrix(cfg.system, cfg.coefficients);
    std::ostringstream os;
    os << "source: " << (cfg.source == lindblad3::CoefficientSource::vectors ? "vectors" : "matrices") << "\n";
    os << "hbar: " << format_double(cfg.system.hbar()) << "\n";
    os << "t_end: " << format_double(cfg.grid.t_end) << "\n";
    os << "n_steps: " << cfg.grid.n_steps << "\n";
    os << "oracle: " << (cfg.oracle.enabled ? "on" : "off") << "\n";
    os << "stable: " << (drift.stable ? "true" : "false") << "\n";
    os << "marginal: " << (drift.marginal ? "true" : "false") << "\n";
    for (std::size_t i = 0; i < 6; ++i)
        os << "eigenvalue." << i + 1 << ": " << format_double(drift.eigenvalues[i].real()) << " "
           << format_double(drift.eigenvalues[i].imag()) << "\n";
    for (const auto& w : cfg.warnings) os << "warning: " << w << "\n";
    return os.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Damped Gaussian dynamics of three oscillators under a linear Lindblad master equation"};
    app.require_subcommand(1);

    std::string config_path, output_path;
    bool oracle = false;
    double oracle_dt = 0.0;

    auto* simulate = app.add_subcommand("simulate", "write the time series as CSV");
    simulate->add_option("config", config_path, "configuration file")->required();
    simulate->add_option("--output", output_path, "output path (default stdout)");
    simulate->add_flag("--oracle", oracle, "add RK4 oracle columns");
    simulate->add_option("--oracle-dt", oracle_dt, "RK4 step size")->check(CLI::PositiveNumber);

    auto* stationary = app.add_subcommand("stationary", "write the stationary analysis report");
    stationary->add_option("config", config_path, "configuration file")->required();
    stationary->add_option("--output", output_path, "output path (default stdout)");

    auto* validate = app.add_subcommand("validate", "check a configuration and summarize its drift");
    validate->add_option("config", config_path, "configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        lindblad3::RunConfig cfg = load(config_path);
        for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";

        if (simulate->parsed()) {
            if (oracle) cfg.oracle.enabled = true;
            if (oracle_dt > 0.0) cfg.oracle.dt = oracle_dt;
            const auto ts = lindblad3::run_timeseries(cfg);
            emit(output_path, [&](std::ostream& os) { lindblad3::write_csv(os, ts); });
            if (cfg.oracle.enabled)
                std::cerr << "oracle max discrepancy: " << lindblad3::format_double(lindblad3::max_oracle_discrepancy(ts))
                          << "\n";
        } else if (stationary->parsed()) {
            const auto report = lindblad3::run_stationary_report(cfg);
            emit(output_path, [&](std::ostream& os) { os << report.to_text(); });
        } else {
            std::cout << describe(cfg);
        }
    } catch (const lindblad3::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const lindblad3::InvariantError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const lindblad3::UnstableDrift& e) {
        std::cerr << "unstable drift: " << e.what() << "\n";
        return kUnstable;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumerical;
    }
    return kOk;
}
