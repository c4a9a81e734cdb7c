// relaycap: effective capacity of a two-hop decode-and-forward link under
// buffer-overflow QoS constraints, plus a tandem-queue validation simulator.
//
// Subcommands:
//   compute  --config cfg.json [--out rows.csv] [--deterministic]
//   sweep    --config cfg.json [--out rows.csv] [--deterministic]
//   simulate --config cfg.json [--out report.csv] [--blocks N] [--seeds N]
//            [--margin F] [--seed N] [--deterministic]
//
// Exit codes: 0 success, 2 config error, 3 stability violation,
// 4 stability boundary, 5 numerical failure, 6 insufficient tail data,
// 1 anything else. EFFCAP_THREADS caps the worker pool.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "relaycap/config_io.hpp"
#include "relaycap/effcap.hpp"
#include "relaycap/queuesim.hpp"
#include "relaycap/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitStabilityViolation = 3;
constexpr int kExitStabilityBoundary = 4;
constexpr int kExitNumerical = 5;
constexpr int kExitInsufficientTail = 6;

struct OutputTarget {
    std::ofstream file;
    bool to_stdout = true;

    explicit OutputTarget(const std::string& path) {
        if (!path.empty()) {
            file.open(path);
            if (!file) throw relaycap::ConfigError("cannot open output file: " + path);
            to_stdout = false;
        }
    }
    std::ostream& stream() { return to_stdout ? std::cout : file; }
    // human-readable notes go wherever the CSV is not
    std::ostream& notes() { return to_stdout ? std::cerr : std::cout; }
};

void write_timestamp_header(std::ostream& out, bool deterministic) {
    if (deterministic) return;
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&now));
    out << "# generated " << buf << "\n";
}

void print_summary(std::ostream& out, const relaycap::CapacityResult& res) {
    out << "effective capacity: " << relaycap::csv_number(res.rate) << " bits/block ("
        << to_string(res.case_tag) << ")\n";
    out << "upper bound:        " << relaycap::csv_number(res.upper_bound) << " bits/block\n";
    if (res.theta_bar)
        out << "theta_bar:          " << relaycap::csv_number(*res.theta_bar) << " 1/bits\n";
    if (res.theta_tilde_sol)
        out << "theta_tilde:        " << relaycap::csv_number(*res.theta_tilde_sol) << " 1/bits\n";
    if (res.theta_hat_sol)
        out << "theta_hat:          " << relaycap::csv_number(*res.theta_hat_sol) << " 1/bits\n";
    if (res.tau_sol) {
        out << "tau:                " << relaycap::csv_number(*res.tau_sol)
            << (res.tau_at_bound ? " (at the stability bound; supremum)" : "") << "\n";
    }
    if (res.tau0) out << "tau0:               " << relaycap::csv_number(*res.tau0) << "\n";
    if (res.degenerate) out << "note: flat source rate equation; exponent choice arbitrary\n";
    if (res.multiple_candidate_roots)
        out << "note: multiple crossings detected in the case III.a scan\n";
}

int run_compute(const std::string& config_path, const std::string& out_path, bool deterministic) {
    const auto cfg = relaycap::load_config_file(config_path);
    const auto res = relaycap::effective_capacity(cfg.system);
    OutputTarget out(out_path);
    write_timestamp_header(out.stream(), deterministic);
    relaycap::write_compute_csv(out.stream(), res);
    print_summary(out.notes(), res);
    return kExitOk;
}

int run_sweep(const std::string& config_path, const std::string& out_path, bool deterministic) {
    const auto cfg = relaycap::load_config_file(config_path);
    if (!cfg.sweep) throw relaycap::ConfigError("config has no 'sweep' section");
    const auto rows = relaycap::run_sweep(cfg);
    OutputTarget out(out_path);
    write_timestamp_header(out.stream(), deterministic);
    relaycap::write_sweep_csv(out.stream(), cfg, rows);
    std::size_t failed = 0;
    for (const auto& r : rows) failed += r.status != "ok";
    out.notes() << rows.size() << " grid points, " << failed << " failed\n";
    return kExitOk;
}

int run_simulate(const std::string& config_path, const std::string& out_path, bool deterministic,
                 std::optional<std::uint64_t> blocks, std::optional<int> seeds,
                 std::optional<double> margin, std::optional<std::uint64_t> seed) {
    const auto cfg = relaycap::load_config_file(config_path);
    relaycap::SimBudget budget;
    budget.num_blocks = blocks.value_or(cfg.sim.blocks);
    budget.seeds = seeds.value_or(cfg.sim.seeds);
    budget.base_seed = seed.value_or(cfg.sim.seed);
    const double m = margin.value_or(cfg.sim.margin);
    if (budget.num_blocks < 10000)
        throw relaycap::ConfigError("simulate: blocks must be >= 10^4");

    const auto capacity = relaycap::effective_capacity(cfg.system);
    const auto report = relaycap::validate_rate(cfg.system, capacity, m, budget);

    OutputTarget out(out_path);
    write_timestamp_header(out.stream(), deterministic);
    relaycap::write_validation_csv(out.stream(), report);
    out.notes() << "analytic rate " << relaycap::csv_number(capacity.rate) << " bits/block ("
                << to_string(capacity.case_tag) << ")\n";
    if (report.tau_used)
        out.notes() << "simulated at tau = " << relaycap::csv_number(*report.tau_used) << "\n";
    out.notes() << "low rate " << relaycap::csv_number(report.rate_low) << ": "
                << report.low_pass_count << "/" << budget.seeds << " seeds meet both targets\n";
    out.notes() << "high rate " << relaycap::csv_number(report.rate_high) << ": "
                << report.high_pass_count << "/" << budget.seeds << " seeds show a violation\n";
    out.notes() << "verdict " << (report.passed ? "PASS" : "FAIL") << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"effective capacity of a two-hop relay link under QoS constraints"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    bool deterministic = false;
    std::optional<std::uint64_t> blocks;
    std::optional<int> seeds;
    std::optional<double> margin;
    std::optional<std::uint64_t> seed;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "config file (JSON)")->required();
        sub->add_option("--out", out_path, "output file (default: stdout)");
        sub->add_flag("--deterministic", deterministic,
                      "suppress the timestamp header line for byte-identical reruns");
    };
    auto* compute = app.add_subcommand("compute", "effective capacity of one config");
    add_common(compute);
    auto* sweep = app.add_subcommand("sweep", "evaluate a parameter sweep to CSV");
    add_common(sweep);
    auto* simulate = app.add_subcommand("simulate", "validate the rate with the tandem-queue simulator");
    add_common(simulate);
    simulate->add_option("--blocks", blocks, "blocks per run (>= 10^4)");
    simulate->add_option("--seeds", seeds, "number of independent seeds");
    simulate->add_option("--margin", margin, "rate margin around the analytic value");
    simulate->add_option("--seed", seed, "base seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (compute->parsed()) return run_compute(config_path, out_path, deterministic);
        if (sweep->parsed()) return run_sweep(config_path, out_path, deterministic);
        return run_simulate(config_path, out_path, deterministic, blocks, seeds, margin, seed);
    } catch (const relaycap::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const relaycap::StabilityViolationError& ex) {
        std::cerr << "stability violation: " << ex.what() << "\n";
        return kExitStabilityViolation;
    } catch (const relaycap::StabilityBoundaryError& ex) {
        std::cerr << "stability boundary: " << ex.what() << "\n";
        return kExitStabilityBoundary;
    } catch (const relaycap::NumericalFailure& ex) {
        std::cerr << "numerical failure: " << ex.what() << "\n";
        return kExitNumerical;
    } catch (const relaycap::InsufficientTail& ex) {
        std::cerr << "insufficient tail data: " << ex.what() << "\n";
        return kExitInsufficientTail;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitOther;
    }
}
