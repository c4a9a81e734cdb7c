#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relaycap/effcap.hpp"
#include "relaycap/errors.hpp"
#include "relaycap/lmgf.hpp"
#include "relaycap/rng.hpp"

namespace relaycap {

/// One tandem-queue Monte-Carlo run: constant arrivals at the source,
/// decode-and-forward relay, per-block service drawn from the configured
/// fading models. qmax_grid holds the source-queue thresholds (bits);
/// qmax_grid_relay defaults to the same grid when left empty.
struct SimConfig {
    SystemConfig system;
    std::optional<TimeShare> tau;
    double arrival_rate = 0.0; // bits/block
    std::uint64_t num_blocks = 100000;
    std::uint64_t seed = 1;
    std::vector<double> qmax_grid;
    std::vector<double> qmax_grid_relay;
};

inline void validate(const SimConfig& sim) {
    validate(sim.system);
    detail::airtime_factors(sim.system, sim.tau);
    if (!(sim.arrival_rate >= 0.0) || !std::isfinite(sim.arrival_rate))
        throw ConfigError("sim: arrival_rate must be nonnegative and finite");
    if (sim.num_blocks < 10000) throw ConfigError("sim: num_blocks must be >= 10^4");
    auto check_grid = [](const std::vector<double>& grid, const char* name) {
        if (grid.empty()) throw ConfigError(std::string("sim: ") + name + " must be nonempty");
        double prev = 0.0;
        for (double q : grid) {
            if (!(q > prev)) throw ConfigError(std::string("sim: ") + name +
                                               " must be positive and strictly increasing");
            prev = q;
        }
    };
    check_grid(sim.qmax_grid, "qmax_grid");
    if (!sim.qmax_grid_relay.empty()) check_grid(sim.qmax_grid_relay, "qmax_grid_relay");
}

inline std::uint64_t warmup_blocks(std::uint64_t num_blocks) {
    return std::max<std::uint64_t>(num_blocks / 20, 1000);
}

struct SimResult {
    std::vector<std::uint64_t> exceed_source;
    std::vector<std::uint64_t> exceed_relay;
    std::uint64_t blocks_counted = 0;
    std::uint64_t warmup = 0;
    double final_source_queue = 0.0;
    double final_relay_queue = 0.0;
    double max_source_queue = 0.0;
    double max_relay_queue = 0.0;
    // whole-run totals, for flow-conservation checks
    double total_arrivals = 0.0;
    double total_served_source = 0.0;
    double total_served_relay = 0.0;
};

/// Run the tandem queue. Per block, both gains are drawn independently (one
/// RNG stream per link), the source serves first and the bits it pushes out
/// are available to the relay within the same block. Queues are fluid
/// (real-valued bits). Deterministic for a fixed seed.
inline SimResult simulate_tandem(const SimConfig& sim) {
    validate(sim);
    const auto [f1, f2] = detail::airtime_factors(sim.system, sim.tau);
    const double tb = sim.system.block.tb_bits_scale();
    const double snr1 = sim.system.link1.snr;
    const double snr2 = sim.system.link2.snr;
    const auto& grid_s = sim.qmax_grid;
    const auto& grid_r = sim.qmax_grid_relay.empty() ? sim.qmax_grid : sim.qmax_grid_relay;

    Xoshiro256pp rng1(sim.seed, 1);
    Xoshiro256pp rng2(sim.seed, 2);

    SimResult res;
    res.exceed_source.assign(grid_s.size(), 0);
    res.exceed_relay.assign(grid_r.size(), 0);
    res.warmup = warmup_blocks(sim.num_blocks);

    const double rate = sim.arrival_rate;
    double qs = 0.0;
    double qr = 0.0;
    for (std::uint64_t i = 0; i < sim.num_blocks; ++i) {
        const double z1 = sample_gain(sim.system.link1.fading, rng1);
        const double z2 = sample_gain(sim.system.link2.fading, rng2);
        const double c1 = f1 * tb * std::log2(1.0 + snr1 * z1);
        const double c2 = f2 * tb * std::log2(1.0 + snr2 * z2);

        const double avail_s = qs + rate;
        const double served1 = std::min(avail_s, c1);
        qs = avail_s - served1;

        const double avail_r = qr + served1;
        const double served2 = std::min(avail_r, c2);
        qr = avail_r - served2;

        res.total_arrivals += rate;
        res.total_served_source += served1;
        res.total_served_relay += served2;
        res.max_source_queue = std::max(res.max_source_queue, qs);
        res.max_relay_queue = std::max(res.max_relay_queue, qr);

        if (i >= res.warmup) {
            ++res.blocks_counted;
            for (std::size_t k = 0; k < grid_s.size() && qs > grid_s[k]; ++k)
                ++res.exceed_source[k];
            for (std::size_t k = 0; k < grid_r.size() && qr > grid_r[k]; ++k)
                ++res.exceed_relay[k];
        }
    }
    res.final_source_queue = qs;
    res.final_relay_queue = qr;
    return res;
}

/// Post-warmup queue-occupancy samples of a short pilot run, used to place
/// the threshold grid in the large-deviations regime.
struct PilotSamples {
    std::vector<double> source;
    std::vector<double> relay;
};

inline PilotSamples pilot_occupancy(const SimConfig& sim_template, std::uint64_t pilot_blocks,
                                    std::uint64_t pilot_seed) {
    const auto [f1, f2] = detail::airtime_factors(sim_template.system, sim_template.tau);
    const double tb = sim_template.system.block.tb_bits_scale();
    const double snr1 = sim_template.system.link1.snr;
    const double snr2 = sim_template.system.link2.snr;
    Xoshiro256pp rng1(pilot_seed, 1);
    Xoshiro256pp rng2(pilot_seed, 2);
    const std::uint64_t warmup = warmup_blocks(pilot_blocks);
    PilotSamples out;
    out.source.reserve(pilot_blocks - warmup);
    out.relay.reserve(pilot_blocks - warmup);
    double qs = 0.0, qr = 0.0;
    for (std::uint64_t i = 0; i < pilot_blocks; ++i) {
        const double z1 = sample_gain(sim_template.system.link1.fading, rng1);
        const double z2 = sample_gain(sim_template.system.link2.fading, rng2);
        const double c1 = f1 * tb * std::log2(1.0 + snr1 * z1);
        const double c2 = f2 * tb * std::log2(1.0 + snr2 * z2);
        const double avail_s = qs + sim_template.arrival_rate;
        const double served1 = std::min(avail_s, c1);
        qs = avail_s - served1;
        const double avail_r = qr + served1;
        qr = avail_r - std::min(avail_r, c2);
        if (i >= warmup) {
            out.source.push_back(qs);
            out.relay.push_back(qr);
        }
    }
    return out;
}

/// Log-spaced thresholds spanning the pilot tail from its 99th percentile to
/// 1.8x its 99.99th percentile. Starting lower (near the bulk) drags the
/// pre-asymptotic shoulder into the regression and curves it; the overshoot
/// past the pilot range buys extra decades in the long run proper, where
/// thresholds that stay unvisited simply drop out of the fit. Empty result
/// means the queue tail is too light to place a grid.
inline std::vector<double> auto_qmax_grid(std::vector<double> samples, int points = 12) {
    if (samples.empty()) return {};
    std::sort(samples.begin(), samples.end());
    auto pct = [&](double p) {
        const double idx = p * static_cast<double>(samples.size() - 1);
        return samples[static_cast<std::size_t>(idx)];
    };
    const double hi = 1.8 * pct(0.9999);
    if (!(hi > 0.0)) return {};
    double lo = pct(0.99);
    if (!(lo > 0.0)) lo = hi / 100.0;
    if (!(hi > lo)) return {lo};
    std::vector<double> grid;
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        grid.push_back(lo * std::pow(hi / lo, t));
    }
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

/// Least-squares fit of log exceedance probability against the threshold.
/// slope estimates -theta.
struct TailEstimate {
    double slope = 0.0;     // 1/bits, negative for decaying tails
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<std::uint64_t> exceed_counts;
    std::vector<double> thresholds_used;
    int points_used = 0;
    bool usable = false;
};

/// Fit the tail exponent from exceedance counts over the threshold grid.
/// The fit uses every threshold below the bulk (probability <= 1e-1) that
/// carries at least 10 hits; the deeper the span, the closer the regression
/// sits to the asymptotic regime. Usability additionally demands three or
/// more thresholds inside the canonical [1e-4, 1e-1] window, and fewer than
/// three raises InsufficientTail.
inline TailEstimate estimate_tail_exponent(const std::vector<std::uint64_t>& counts,
                                           const std::vector<double>& qmax_grid,
                                           std::uint64_t num_effective_blocks) {
    if (counts.size() != qmax_grid.size())
        throw ConfigError("estimate_tail_exponent: counts/grid size mismatch");
    if (num_effective_blocks == 0)
        throw ConfigError("estimate_tail_exponent: no effective blocks");
    TailEstimate est;
    est.exceed_counts = counts;
    std::vector<double> xs, ys;
    int window_points = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] < 10) continue;
        const double p = static_cast<double>(counts[k]) / static_cast<double>(num_effective_blocks);
        if (p > 1e-1) continue;
        if (p >= 1e-4) ++window_points;
        xs.push_back(qmax_grid[k]);
        ys.push_back(std::log(p));
    }
    est.points_used = static_cast<int>(xs.size());
    est.thresholds_used = xs;
    if (window_points < 3)
        throw InsufficientTail("tail fit needs >= 3 thresholds with exceedance probability in "
                               "[1e-4, 1e-1]; got " + std::to_string(window_points) +
                               " (enlarge num_blocks or adjust the threshold grid)");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (!(std::abs(denom) > 0.0))
        throw InsufficientTail("tail fit: degenerate threshold grid");
    est.slope = (n * sxy - sx * sy) / denom;
    est.intercept = (sy - est.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ymean = sy / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double fit = est.intercept + est.slope * xs[i];
        ss_res += (ys[i] - fit) * (ys[i] - fit);
        ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
    }
    est.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    est.usable = est.r_squared >= 0.98 && est.points_used >= 3;
    return est;
}

enum class QueueTailStatus { Estimated, LightTail, Unstable };

/// One queue's verdict inside a validation run.
struct QueueCheck {
    QueueTailStatus status = QueueTailStatus::LightTail;
    std::optional<TailEstimate> estimate;
    double target_theta = 0.0;
    bool meets_target = false; // tail at least as fast as the target exponent
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    QueueCheck low_source, low_relay;
    QueueCheck high_source, high_relay;
    bool low_pass = false;  // both queues meet their targets at the backed-off rate
    bool high_pass = false; // at least one queue misses its target at the inflated rate
};

struct SimBudget {
    std::uint64_t num_blocks = 10000000;
    int seeds = 5;
    std::uint64_t base_seed = 1;
    double epsilon_est = 0.15;   // finite-sample slack on exponent comparisons
    double pass_fraction = 0.8;  // fraction of seeds that must agree
};

struct ValidationReport {
    double rate_low = 0.0;
    double rate_high = 0.0;
    std::optional<double> tau_used;
    std::vector<SeedOutcome> seeds;
    int low_pass_count = 0;
    int high_pass_count = 0;
    bool passed = false;
};

namespace detail {

inline QueueCheck check_queue(const std::vector<std::uint64_t>& counts,
                              const std::vector<double>& grid, std::uint64_t n_eff,
                              double final_queue, double drift_threshold, double target_theta,
                              bool low_rate, double epsilon_est) {
    QueueCheck chk;
    chk.target_theta = target_theta;
    if (final_queue > drift_threshold) {
        chk.status = QueueTailStatus::Unstable;
        chk.meets_target = false;
        return chk;
    }
    if (grid.empty()) {
        chk.status = QueueTailStatus::LightTail;
        chk.meets_target = true;
        return chk;
    }
    const double p_first =
        static_cast<double>(counts.front()) / static_cast<double>(n_eff);
    const double p_last = static_cast<double>(counts.back()) / static_cast<double>(n_eff);
    try {
        TailEstimate est = estimate_tail_exponent(counts, grid, n_eff);
        chk.status = QueueTailStatus::Estimated;
        const double theta_hat = -est.slope;
        if (low_rate) {
            chk.meets_target = est.usable && theta_hat >= target_theta * (1.0 - epsilon_est);
        } else {
            // at the inflated rate "meets" keeps its meaning; callers invert it
            chk.meets_target = !(est.usable && theta_hat < target_theta);
        }
        chk.estimate = std::move(est);
        return chk;
    } catch (const InsufficientTail&) {
        if (p_first < 1e-4) {
            // tail decays too fast for the window: better than required
            chk.status = QueueTailStatus::LightTail;
            chk.meets_target = true;
            return chk;
        }
        if (p_last > 1e-1) {
            // occupancy far beyond the pilot regime: treat as drifting
            chk.status = QueueTailStatus::Unstable;
            chk.meets_target = false;
            return chk;
        }
        throw;
    }
}

} // namespace detail

/// Simulate just below and just above the analytic effective capacity and
/// verify the measured tail exponents: both queues must meet their QoS
/// targets at (1-margin)*rate, and at least one must miss at
/// (1+margin)*rate, in a pass_fraction share of the seeds.
inline ValidationReport validate_rate(const SystemConfig& cfg, const CapacityResult& capacity,
                                      double margin, const SimBudget& budget) {
    if (!(margin > 0.0 && margin < 1.0)) throw ConfigError("validate_rate: margin in (0,1)");
    if (budget.num_blocks < 10000) throw ConfigError("validate_rate: blocks must be >= 10^4");
    if (budget.seeds < 1) throw ConfigError("validate_rate: needs at least one seed");

    ValidationReport report;
    std::optional<TimeShare> tau;
    if (cfg.mode == DuplexMode::HalfDuplex) {
        double t = capacity.tau_sol.value_or(0.5);
        if (capacity.tau_at_bound) t -= 1e-6; // the bound itself is a supremum
        tau = TimeShare{t};
        report.tau_used = t;
    }
    report.rate_low = (1.0 - margin) * capacity.rate;
    report.rate_high = (1.0 + margin) * capacity.rate;

    auto make_sim = [&](double rate, std::uint64_t seed) {
        SimConfig sim;
        sim.system = cfg;
        sim.tau = tau;
        sim.arrival_rate = rate;
        sim.num_blocks = budget.num_blocks;
        sim.seed = seed;
        return sim;
    };

    // grids from a pilot at each rate, shared across seeds
    const std::uint64_t pilot_blocks =
        std::clamp<std::uint64_t>(budget.num_blocks / 50, 20000, 200000);
    struct RateSetup {
        std::vector<double> grid_s, grid_r;
    };
    auto setup_rate = [&](double rate, std::uint64_t tag) {
        SimConfig sim = make_sim(rate, 0);
        const auto pilot = pilot_occupancy(sim, pilot_blocks, budget.base_seed * 1000003ull + tag);
        RateSetup s;
        s.grid_s = auto_qmax_grid(pilot.source);
        s.grid_r = auto_qmax_grid(pilot.relay);
        return s;
    };
    const RateSetup low_setup = setup_rate(report.rate_low, 1);
    const RateSetup high_setup = setup_rate(report.rate_high, 2);

    auto run_checks = [&](double rate, const RateSetup& setup, std::uint64_t seed, bool low,
                          QueueCheck& out_s, QueueCheck& out_r) {
        SimConfig sim = make_sim(rate, seed);
        sim.qmax_grid = setup.grid_s.empty() ? std::vector<double>{1.0} : setup.grid_s;
        sim.qmax_grid_relay = setup.grid_r.empty() ? std::vector<double>{1.0} : setup.grid_r;
        const SimResult res = simulate_tandem(sim);
        const double drift = 0.01 * std::max(rate, 1.0) * static_cast<double>(sim.num_blocks);
        out_s = detail::check_queue(res.exceed_source, setup.grid_s, res.blocks_counted,
                                    res.final_source_queue, drift, cfg.theta1, low,
                                    budget.epsilon_est);
        out_r = detail::check_queue(res.exceed_relay, setup.grid_r, res.blocks_counted,
                                    res.final_relay_queue, drift, cfg.theta2, low,
                                    budget.epsilon_est);
    };

    for (int i = 0; i < budget.seeds; ++i) {
        SeedOutcome outcome;
        outcome.seed = budget.base_seed + static_cast<std::uint64_t>(i);
        run_checks(report.rate_low, low_setup, outcome.seed, true, outcome.low_source,
                   outcome.low_relay);
        run_checks(report.rate_high, high_setup, outcome.seed, false, outcome.high_source,
                   outcome.high_relay);
        outcome.low_pass = outcome.low_source.meets_target && outcome.low_relay.meets_target;
        outcome.high_pass =
            !outcome.high_source.meets_target || !outcome.high_relay.meets_target;
        report.low_pass_count += outcome.low_pass ? 1 : 0;
        report.high_pass_count += outcome.high_pass ? 1 : 0;
        report.seeds.push_back(std::move(outcome));
    }
    const int need = static_cast<int>(
        std::ceil(budget.pass_fraction * static_cast<double>(budget.seeds)));
    report.passed = report.low_pass_count >= need && report.high_pass_count >= need;
    return report;
}

} // namespace relaycap
