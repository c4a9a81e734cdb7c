#pragma once

#include <atomic>
#include <cstdlib>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "relaycap/config_io.hpp"
#include "relaycap/effcap.hpp"
#include "relaycap/errors.hpp"
#include "relaycap/queuesim.hpp"
#include "relaycap/solver.hpp"

namespace relaycap {

/// Worker count: EFFCAP_THREADS caps it, hardware concurrency is the default.
inline unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("EFFCAP_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
    }
    return n;
}

/// Index-sharded parallel loop; results land in caller-owned slots, so the
/// output order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const unsigned workers = std::min<std::size_t>(worker_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

struct SweepRow {
    std::vector<double> axis_values;
    std::optional<CapacityResult> result;
    std::optional<double> theta_bar; // present when requested or produced
    std::string status = "ok";
};

namespace detail {

inline SystemConfig config_at_point(const LoadedConfig& base, const SweepSpec& spec, double a1,
                                    std::optional<double> a2) {
    RelayGeometry geom = base.geometry.value_or(RelayGeometry{});
    SystemConfig cfg = base.system;
    auto apply = [&](SweepAxis axis, double v) {
        switch (axis) {
            case SweepAxis::Theta2: cfg.theta2 = v; break;
            case SweepAxis::D: geom.d = v; break;
            case SweepAxis::Snr2Db:
                if (base.geometry) geom.snr2 = db_to_linear(v);
                else cfg.link2.snr = db_to_linear(v);
                break;
        }
    };
    apply(spec.axis1.name, a1);
    if (a2) apply(spec.axis2->name, *a2);
    if (base.geometry)
        cfg = geometry_to_config(geom, cfg.block, cfg.theta1, cfg.theta2, cfg.mode);
    return cfg;
}

inline std::string status_for_current_exception() {
    try {
        throw;
    } catch (const StabilityViolationError&) {
        return "stability-violation";
    } catch (const StabilityBoundaryError&) {
        return "stability-boundary";
    } catch (const ConfigError&) {
        return "config-error";
    } catch (const NumericalFailure&) {
        return "numerical-failure";
    } catch (const Error&) {
        return "error";
    }
}

} // namespace detail

/// Evaluate the sweep over the full grid (axis1 outer, axis2 inner). Failing
/// points carry a status token instead of aborting the sweep.
inline std::vector<SweepRow> run_sweep(const LoadedConfig& base) {
    if (!base.sweep) throw ConfigError("run_sweep: config has no sweep section");
    const SweepSpec& spec = *base.sweep;
    const std::size_t n1 = spec.axis1.grid.size();
    const std::size_t n2 = spec.axis2 ? spec.axis2->grid.size() : 1;
    std::vector<SweepRow> rows(n1 * n2);

    parallel_for(rows.size(), [&](std::size_t idx) {
        const std::size_t i = idx / n2;
        const std::size_t j = idx % n2;
        SweepRow& row = rows[idx];
        row.axis_values.push_back(spec.axis1.grid[i]);
        if (spec.axis2) row.axis_values.push_back(spec.axis2->grid[j]);
        try {
            const SystemConfig cfg = detail::config_at_point(
                base, spec, spec.axis1.grid[i],
                spec.axis2 ? std::optional<double>(spec.axis2->grid[j]) : std::nullopt);
            CapacityResult res = effective_capacity(cfg);
            if (res.theta_bar) {
                row.theta_bar = res.theta_bar;
            } else if (spec.want_theta_bar && cfg.mode == DuplexMode::FullDuplex) {
                const auto tb = solve_theta_bar(cfg);
                if (tb.status == ThetaBarResult::Status::Found) row.theta_bar = tb.value;
            }
            row.result = std::move(res);
        } catch (...) {
            row.status = detail::status_for_current_exception();
        }
    });
    return rows;
}

// ---- CSV emission -------------------------------------------------------

inline std::string capacity_csv_header(const std::vector<std::string>& axis_names) {
    std::string h;
    for (const auto& a : axis_names) h += a + ",";
    return h +
           "rate_bits_per_block,case_tag,theta_bar,theta_tilde_sol,theta_hat_sol,tau_sol,tau0,"
           "upper_bound,status";
}

inline std::string capacity_csv_row(const std::vector<double>& axis_values,
                                    const std::optional<CapacityResult>& result,
                                    const std::optional<double>& theta_bar,
                                    const std::string& status) {
    std::string row;
    for (double v : axis_values) row += csv_number(v) + ",";
    if (result) {
        row += csv_number(result->rate) + "," + to_string(result->case_tag) + "," +
               csv_optional(theta_bar) + "," + csv_optional(result->theta_tilde_sol) + "," +
               csv_optional(result->theta_hat_sol) + "," + csv_optional(result->tau_sol) + "," +
               csv_optional(result->tau0) + "," + csv_number(result->upper_bound);
    } else {
        row += ",,,,,,,";
    }
    row += "," + status;
    return row;
}

inline void write_sweep_csv(std::ostream& out, const LoadedConfig& base,
                            const std::vector<SweepRow>& rows) {
    std::vector<std::string> axis_names{to_string(base.sweep->axis1.name)};
    if (base.sweep->axis2) axis_names.push_back(to_string(base.sweep->axis2->name));
    out << capacity_csv_header(axis_names) << "\n";
    for (const auto& row : rows)
        out << capacity_csv_row(row.axis_values, row.result, row.theta_bar, row.status) << "\n";
}

inline void write_compute_csv(std::ostream& out, const CapacityResult& result) {
    out << capacity_csv_header({}) << "\n";
    out << capacity_csv_row({}, result, result.theta_bar, "ok") << "\n";
}

inline const char* to_string(QueueTailStatus s) {
    switch (s) {
        case QueueTailStatus::Estimated: return "estimated";
        case QueueTailStatus::LightTail: return "light-tail";
        case QueueTailStatus::Unstable: return "unstable";
    }
    return "?";
}

inline void write_validation_csv(std::ostream& out, const ValidationReport& report) {
    out << "seed,rate,queue,status,theta_hat,r_squared,points_used,meets_target\n";
    auto emit = [&](std::uint64_t seed, double rate, const char* queue, const QueueCheck& chk) {
        out << seed << "," << csv_number(rate) << "," << queue << "," << to_string(chk.status)
            << ",";
        if (chk.estimate) {
            out << csv_number(-chk.estimate->slope) << "," << csv_number(chk.estimate->r_squared)
                << "," << chk.estimate->points_used;
        } else {
            out << ",,";
        }
        out << "," << (chk.meets_target ? 1 : 0) << "\n";
    };
    for (const auto& s : report.seeds) {
        emit(s.seed, report.rate_low, "source", s.low_source);
        emit(s.seed, report.rate_low, "relay", s.low_relay);
        emit(s.seed, report.rate_high, "source", s.high_source);
        emit(s.seed, report.rate_high, "relay", s.high_relay);
    }
    out << "verdict," << (report.passed ? "PASS" : "FAIL") << ",,," << report.low_pass_count << ","
        << report.high_pass_count << ",," << "\n";
}

} // namespace relaycap
