#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "relaycap/errors.hpp"
#include "relaycap/lmgf.hpp"
#include "relaycap/solver.hpp"

namespace relaycap {

/// Raised when a computation requires the stability condition and the
/// configured ergodic rates reverse it.
class StabilityViolationError : public Error {
public:
    explicit StabilityViolationError(const std::string& msg) : Error(msg) {}
};

/// Raised when the ergodic rates are equal within tolerance; the queueing
/// analysis needs strict inequality, so such configs are refused.
class StabilityBoundaryError : public Error {
public:
    explicit StabilityBoundaryError(const std::string& msg) : Error(msg) {}
};

enum class CaseTag {
    FD_I,
    FD_II,
    FD_IIIa,
    FD_IIIb,
    FD_IIIc,
    FD_SupportDegenerate,
    HD_I,
    HD_II,
};

inline const char* to_string(CaseTag tag) {
    switch (tag) {
        case CaseTag::FD_I: return "FD-I";
        case CaseTag::FD_II: return "FD-II";
        case CaseTag::FD_IIIa: return "FD-IIIa";
        case CaseTag::FD_IIIb: return "FD-IIIb";
        case CaseTag::FD_IIIc: return "FD-IIIc";
        case CaseTag::FD_SupportDegenerate: return "FD-SupportDegenerate";
        case CaseTag::HD_I: return "HD-I";
        case CaseTag::HD_II: return "HD-II";
    }
    return "?";
}

/// Effective capacity of the two-hop link plus the branch taken and every
/// internal solution produced along the way.
struct CapacityResult {
    double rate = 0.0; // bits/block
    CaseTag case_tag = CaseTag::FD_I;
    std::optional<double> theta_bar;
    std::optional<double> theta_tilde_sol;
    std::optional<double> theta_hat_sol;
    std::optional<double> tau_sol;
    std::optional<double> tau0;
    double upper_bound = 0.0;
    bool degenerate = false;          // flat-g equation, any exponent solves it
    bool tau_at_bound = false;        // rate is a supremum at tau0, not attained
    bool multiple_candidate_roots = false;
};

/// Linear source-relay-destination geometry with power-law path loss.
struct RelayGeometry {
    double d = 0.5;               // source-relay distance, total normalized to 1
    double path_loss_alpha = 4.0;
    double snr1 = 1.0;            // linear
    double snr2 = 1.0;
};

inline void validate(const RelayGeometry& geom) {
    if (!(geom.d > 0.0 && geom.d < 1.0)) throw ConfigError("geometry: d must lie in (0, 1)");
    if (!(geom.path_loss_alpha > 0.0)) throw ConfigError("geometry: path loss must be > 0");
    if (!(geom.snr1 > 0.0) || !(geom.snr2 > 0.0))
        throw ConfigError("geometry: snr values must be > 0");
}

/// Rayleigh links with mean gains 1/d^alpha and 1/(1-d)^alpha.
inline SystemConfig geometry_to_config(const RelayGeometry& geom, const BlockConfig& block,
                                       double theta1, double theta2, DuplexMode mode) {
    validate(geom);
    SystemConfig cfg;
    cfg.link1 = {RayleighFading{std::pow(geom.d, -geom.path_loss_alpha)}, geom.snr1};
    cfg.link2 = {RayleighFading{std::pow(1.0 - geom.d, -geom.path_loss_alpha)}, geom.snr2};
    cfg.block = block;
    cfg.theta1 = theta1;
    cfg.theta2 = theta2;
    cfg.mode = mode;
    validate(cfg);
    return cfg;
}

enum class StabilityStatus { Ok, Boundary, Violation };

inline const char* to_string(StabilityStatus s) {
    switch (s) {
        case StabilityStatus::Ok: return "ok";
        case StabilityStatus::Boundary: return "stability-boundary";
        case StabilityStatus::Violation: return "stability-violation";
    }
    return "?";
}

/// Compares the (airtime-scaled) ergodic rates of the two hops. The relay
/// hop must be strictly faster on average for the tandem queues to be stable.
inline StabilityStatus stability_check(const SystemConfig& cfg,
                                       const std::optional<TimeShare>& tau = std::nullopt) {
    const auto [f1, f2] = detail::airtime_factors(cfg, tau);
    const double e1 = f1 * ergodic_log2_rate(cfg.link1, cfg.block);
    const double e2 = f2 * ergodic_log2_rate(cfg.link2, cfg.block);
    if (std::abs(e1 - e2) <= 1e-9 * std::max({std::abs(e1), std::abs(e2), 1e-300}))
        return StabilityStatus::Boundary;
    return e1 < e2 ? StabilityStatus::Ok : StabilityStatus::Violation;
}

namespace detail {

inline bool near_equal(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

// per-hop effective capacities at the configured exponents (full-duplex)
inline double ec1_at(const SystemConfig& cfg, double theta) {
    return -log_exp_moment(cfg.link1, cfg.block, -theta) / theta;
}
inline double ec2_at(const SystemConfig& cfg, double theta) {
    return -log_exp_moment(cfg.link2, cfg.block, -theta) / theta;
}

} // namespace detail

/// Per-link effective-capacity bound on the supported arrival rates:
/// min of the two hops' effective capacities in full-duplex, the airtime-
/// optimized source-hop effective capacity in half-duplex.
inline double upper_bound(const SystemConfig& cfg) {
    validate(cfg);
    if (cfg.mode == DuplexMode::FullDuplex) {
        return std::min(detail::ec1_at(cfg, cfg.theta1), detail::ec2_at(cfg, cfg.theta2));
    }
    const double tau0 = solve_tau0(cfg);
    const double tau_star = solve_tau_star(cfg);
    return detail::hd_ec1(cfg, std::min(tau0, tau_star));
}

/// Case dispatch for the full-duplex relay. Requires strictly stable
/// configs; boundary and reversed configs raise.
inline CapacityResult effective_capacity_full_duplex(const SystemConfig& cfg) {
    validate(cfg);
    if (cfg.mode != DuplexMode::FullDuplex)
        throw ConfigError("effective_capacity_full_duplex: config is half-duplex");
    switch (stability_check(cfg)) {
        case StabilityStatus::Violation:
            throw StabilityViolationError("relay hop slower on average than source hop");
        case StabilityStatus::Boundary:
            throw StabilityBoundaryError("ergodic rates equal; strict inequality required");
        case StabilityStatus::Ok: break;
    }

    CapacityResult res;
    const double ec1 = detail::ec1_at(cfg, cfg.theta1);
    const double ec2 = detail::ec2_at(cfg, cfg.theta2);
    res.upper_bound = std::min(ec1, ec2);
    res.theta_hat_sol = cfg.theta2;

    if (cfg.theta1 >= cfg.theta2) {
        res.case_tag = CaseTag::FD_I;
        res.rate = std::min(ec1, ec2);
        if (ec1 <= ec2) {
            res.theta_tilde_sol = cfg.theta1;
        } else {
            // source queue relaxes until its rate matches the relay bottleneck
            const auto sup1 = capacity_support(cfg.link1, cfg.block);
            if (ec2 > sup1.min_bits && sup1.max_bits > sup1.min_bits) {
                auto residual = [&](double tt) { return g_rate(cfg, tt) - ec2; };
                double hi = 2.0 * cfg.theta1;
                while (residual(hi) > 0.0 && hi < 0x1p40) hi *= 2.0;
                if (residual(hi) <= 0.0)
                    res.theta_tilde_sol = detail::refine_root(residual, cfg.theta1, hi,
                                                              residual(cfg.theta1), residual(hi),
                                                              1e-13, 1e-9);
            }
        }
        return res;
    }

    const auto tb = solve_theta_bar(cfg);
    if (tb.status == ThetaBarResult::Status::SupportDegenerate) {
        // peak source rate within the guaranteed relay rate: the relay never
        // buffers and the source hop alone decides the capacity
        res.case_tag = CaseTag::FD_SupportDegenerate;
        res.rate = ec1;
        res.theta_tilde_sol = cfg.theta1;
        res.theta_hat_sol.reset();
        return res;
    }
    res.theta_bar = tb.value;

    if (cfg.theta2 <= tb.value || detail::near_equal(cfg.theta2, tb.value)) {
        res.case_tag = CaseTag::FD_II;
        res.rate = ec1;
        res.theta_tilde_sol = cfg.theta1;
        res.theta_hat_sol = tb.value;
        return res;
    }

    const double g2 = g_rate(cfg, cfg.theta2);
    if (g2 <= ec2 || detail::near_equal(g2, ec2)) {
        res.case_tag = CaseTag::FD_IIIa;
        const auto sol = solve_theta_tilde_star_a(cfg);
        res.theta_tilde_sol = sol.value;
        res.multiple_candidate_roots = sol.sign_changes > 1;
        res.rate = g_rate(cfg, sol.value);
        return res;
    }

    const auto sup1 = capacity_support(cfg.link1, cfg.block);
    if (ec2 > sup1.min_bits && !detail::near_equal(ec2, sup1.min_bits)) {
        res.case_tag = CaseTag::FD_IIIb;
        const auto sol = solve_theta_tilde_star_b(cfg);
        res.theta_tilde_sol = sol.value;
        res.degenerate = sol.degenerate;
        res.rate = sol.degenerate ? g_rate(cfg, sol.value) : ec2;
        return res;
    }

    res.case_tag = CaseTag::FD_IIIc;
    res.rate = ec2;
    res.theta_tilde_sol.reset();
    return res;
}

/// Case dispatch for the half-duplex relay: pick the best feasible time
/// share, capped by the stability bound tau0. When the cap binds, the rate is
/// the supremum value evaluated at tau0 and tau_at_bound is set.
inline CapacityResult effective_capacity_half_duplex(const SystemConfig& cfg) {
    validate(cfg);
    if (cfg.mode != DuplexMode::HalfDuplex)
        throw ConfigError("effective_capacity_half_duplex: config is full-duplex");

    CapacityResult res;
    const double tau0 = solve_tau0(cfg);
    const double tau_star = solve_tau_star(cfg);
    res.tau0 = tau0;
    res.upper_bound = detail::hd_ec1(cfg, std::min(tau0, tau_star));
    res.theta_tilde_sol = cfg.theta1;
    res.theta_hat_sol = cfg.theta2;

    if (cfg.theta1 >= cfg.theta2) {
        res.case_tag = CaseTag::HD_I;
        const double tau = std::min(tau0, tau_star);
        res.tau_sol = tau;
        res.tau_at_bound = tau0 <= tau_star;
        res.rate = detail::hd_ec1(cfg, tau);
        return res;
    }
    res.case_tag = CaseTag::HD_II;
    const double tau_prime = solve_tau_prime(cfg);
    const double tau = std::min(tau0, tau_prime);
    res.tau_sol = tau;
    res.tau_at_bound = tau0 <= tau_prime;
    res.rate = detail::hd_ec1(cfg, tau);
    return res;
}

/// Mode dispatch.
inline CapacityResult effective_capacity(const SystemConfig& cfg) {
    return cfg.mode == DuplexMode::FullDuplex ? effective_capacity_full_duplex(cfg)
                                              : effective_capacity_half_duplex(cfg);
}

} // namespace relaycap
