// Command-line front end: distance sweeps, maximum-distance search, matching
// grids, equivalent-excess-noise curves, waveform mode matching, and the
// Monte-Carlo covariance check, all driven by one JSON scenario file.
//
// Exit codes: 0 success; 2 configuration/validation error; 3 no positive key
// rate anywhere; 1 unexpected failure or a failed Monte-Carlo check.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cvmdi/mc_oracle.hpp"
#include "cvmdi/sweeps.hpp"
#include "cvmdi/temporal_mode.hpp"

namespace {

using cvmdi::experiments::Scenario;

struct CommonOpts {
    std::string config;
    std::string out;
    bool finite_size = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_finite) {
    cmd->add_option("--config", opts.config, "scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out, "output CSV path (default: stdout)");
    if (with_finite) {
        cmd->add_flag("--finite-size", opts.finite_size,
                      "compute finite-size rates even when the config has no "
                      "finite_size section (defaults: N=1e8, m=N/2)");
    }
}

Scenario load(const CommonOpts& opts) {
    Scenario s = cvmdi::experiments::load_scenario(opts.config);
    if (opts.finite_size && !s.finite_size) {
        s.finite_size = cvmdi::keyrate::FiniteSizeParams{};
    }
    return s;
}

// Streams to the output file when given, otherwise to stdout.
class OutputTarget {
  public:
    explicit OutputTarget(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) {
                throw std::invalid_argument("cannot write output file '" + path + "'");
            }
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

  private:
    std::unique_ptr<std::ofstream> file_;
};

int run(int argc, char** argv) {
    CLI::App app{
        "Key-rate simulator for a two-sender relay protocol with temporal-mode "
        "mismatch"};
    app.require_subcommand(1);

    CommonOpts sweep_opts;
    auto* sweep_cmd = app.add_subcommand(
        "sweep-distance", "key rate vs distance over the configured sweep range");
    add_common(sweep_cmd, sweep_opts, true);

    CommonOpts max_opts;
    auto* max_cmd = app.add_subcommand(
        "max-distance", "largest distance with a positive key rate (bisection)");
    add_common(max_cmd, max_opts, true);

    CommonOpts grid_opts;
    auto* grid_cmd = app.add_subcommand(
        "grid", "key rate over the symmetric (eta_A, eta_B) matching grid at the "
                "configured distance");
    add_common(grid_cmd, grid_opts, true);

    CommonOpts noise_opts;
    auto* noise_cmd = app.add_subcommand(
        "excess-noise",
        "equivalent excess noise vs distance for each configured eta_B coefficient");
    add_common(noise_cmd, noise_opts, false);

    CommonOpts match_opts;
    auto* match_cmd = app.add_subcommand(
        "mode-match",
        "matching coefficients from the waveform files in the config (signal "
        "waveforms are normalized on load)");
    add_common(match_cmd, match_opts, false);

    CommonOpts oracle_opts;
    std::optional<std::uint64_t> oracle_seed;
    auto* oracle_cmd = app.add_subcommand(
        "oracle", "Monte-Carlo check of the analytic covariance matrix (exit 1 on "
                  "a failed check)");
    add_common(oracle_cmd, oracle_opts, false);
    oracle_cmd->add_option("--seed", oracle_seed, "override the sampling seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints the help text or the parse error
        return code == 0 ? 0 : 2;      // bad usage is a validation failure
    }

    if (sweep_cmd->parsed()) {
        const Scenario s = load(sweep_opts);
        const auto rows = cvmdi::experiments::sweep_distance(s);
        OutputTarget out(sweep_opts.out);
        cvmdi::experiments::write_sweep_csv(out.stream(), s, rows);
        return 0;
    }
    if (max_cmd->parsed()) {
        const Scenario s = load(max_opts);
        const double km = cvmdi::experiments::max_distance(s);
        OutputTarget out(max_opts.out);
        cvmdi::experiments::write_max_distance_csv(out.stream(), s, km);
        if (!max_opts.out.empty()) {
            std::cout.precision(12);
            std::cout << "max_distance_km=" << km << "\n";
        }
        return 0;
    }
    if (grid_cmd->parsed()) {
        const Scenario s = load(grid_opts);
        const auto rows = cvmdi::experiments::grid_sweep(s);
        OutputTarget out(grid_opts.out);
        cvmdi::experiments::write_grid_csv(out.stream(), s, rows);
        return 0;
    }
    if (noise_cmd->parsed()) {
        const Scenario s = load(noise_opts);
        const auto rows = cvmdi::experiments::excess_noise_curve(s);
        OutputTarget out(noise_opts.out);
        cvmdi::experiments::write_noise_csv(out.stream(), s, rows);
        return 0;
    }
    if (match_cmd->parsed()) {
        const Scenario s = load(match_opts);
        if (!s.waveforms) {
            throw std::invalid_argument(
                "mode-match needs a matching.waveforms section in the config");
        }
        OutputTarget out(match_opts.out);
        std::ostream& os = out.stream();
        os.precision(12);
        os << "eta_A=" << s.matching.eta_A1 << "\n";
        os << "eta_B=" << s.matching.eta_B1 << "\n";
        return 0;
    }
    if (oracle_cmd->parsed()) {
        const Scenario s = load(oracle_opts);
        const auto channel = cvmdi::experiments::channel_at(s);
        const auto gains = cvmdi::protocol::optimal_gains(channel, s.matching, s.protocol);
        const auto eq =
            cvmdi::protocol::equivalent_channel(channel, s.matching, s.protocol, gains);
        const auto analytic = cvmdi::protocol::covariance_matrix(s.protocol, eq);
        const std::uint64_t seed = oracle_seed.value_or(s.mc.seed);
        const auto estimate = cvmdi::mc::propagate(channel, s.matching, s.protocol, gains,
                                                   s.mc.shots, seed, s.mc.workers);
        const auto report = cvmdi::mc::oracle_report(analytic, estimate);
        OutputTarget out(oracle_opts.out);
        out.stream() << report.text;
        if (!oracle_opts.out.empty()) {
            std::cout << report.text;
        }
        return report.pass ? 0 : 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const cvmdi::NoKeyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const cvmdi::UnphysicalStateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cvmdi::EstimationFailureError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
