#pragma once

#include <cassert>
#include <cmath>
#include <optional>

#include "relaycap/channel.hpp"
#include "relaycap/errors.hpp"

// Unit conventions used throughout: QoS exponents (theta) are in 1/bits,
// rates in bits/block, queue lengths in bits.

namespace relaycap {

enum class DuplexMode { FullDuplex, HalfDuplex };

/// Full problem instance. link1 is the source-relay hop, link2 relay-destination.
struct SystemConfig {
    LinkConfig link1;
    LinkConfig link2;
    BlockConfig block;
    double theta1 = 0.01; // source QoS exponent, 1/bits
    double theta2 = 0.01; // relay QoS exponent, 1/bits
    DuplexMode mode = DuplexMode::FullDuplex;
};

inline void validate(const SystemConfig& cfg) {
    validate(cfg.link1);
    validate(cfg.link2);
    validate(cfg.block);
    if (!(cfg.theta1 > 0.0) || !std::isfinite(cfg.theta1))
        throw ConfigError("system: theta1 must be positive and finite");
    if (!(cfg.theta2 > 0.0) || !std::isfinite(cfg.theta2))
        throw ConfigError("system: theta2 must be positive and finite");
}

/// Half-duplex time-sharing fraction: the source transmits in the first
/// tau fraction of each block, the relay in the rest.
struct TimeShare {
    double value = 0.5;
};

inline void validate(const TimeShare& ts) {
    if (!(ts.value >= 0.0 && ts.value <= 1.0))
        throw ConfigError("time share: tau must lie in [0, 1]");
}

namespace detail {

// Airtime fractions (source, relay): (1, 1) in full-duplex, (tau, 1-tau) in
// half-duplex. tau must be present exactly when the mode is half-duplex.
inline std::pair<double, double> airtime_factors(const SystemConfig& cfg,
                                                 const std::optional<TimeShare>& tau) {
    if (cfg.mode == DuplexMode::FullDuplex) {
        if (tau.has_value())
            throw ConfigError("tau must be absent in full-duplex mode");
        return {1.0, 1.0};
    }
    if (!tau.has_value())
        throw ConfigError("tau is required in half-duplex mode");
    validate(*tau);
    return {tau->value, 1.0 - tau->value};
}

} // namespace detail

/// LMGF of the source-relay service process at exponent theta (1/bits).
inline double lambda_sr(const SystemConfig& cfg, double theta,
                        const std::optional<TimeShare>& tau = std::nullopt) {
    const auto [f1, f2] = detail::airtime_factors(cfg, tau);
    (void)f2;
    return log_exp_moment(cfg.link1, cfg.block, theta * f1);
}

/// LMGF of the relay-destination service process at exponent theta.
inline double lambda_rd(const SystemConfig& cfg, double theta,
                        const std::optional<TimeShare>& tau = std::nullopt) {
    const auto [f1, f2] = detail::airtime_factors(cfg, tau);
    (void)f1;
    return log_exp_moment(cfg.link2, cfg.block, theta * f2);
}

/// LMGF of the departure process from the source (the relay's arrival
/// process) under constant arrivals R with source solution theta_tilde:
/// R*theta for theta <= theta_tilde, R*theta_tilde + Lambda_sr(theta -
/// theta_tilde) beyond. Continuous at theta = theta_tilde.
inline double lambda_relay_arrival(const SystemConfig& cfg, double theta, double arrival_rate,
                                   double theta_tilde,
                                   const std::optional<TimeShare>& tau = std::nullopt) {
    if (!(arrival_rate >= 0.0)) throw ConfigError("lambda_relay_arrival: R must be >= 0");
    if (!(theta >= 0.0)) throw ConfigError("lambda_relay_arrival: theta must be >= 0");
    if (!(theta_tilde > 0.0)) throw ConfigError("lambda_relay_arrival: theta_tilde must be > 0");
    if (theta <= theta_tilde) return arrival_rate * theta;
    return arrival_rate * theta_tilde + lambda_sr(cfg, theta - theta_tilde, tau);
}

/// Source rate equation: g(theta_tilde) = -Lambda_sr(-theta_tilde)/theta_tilde,
/// the rate the source sustains at queue exponent theta_tilde. Non-increasing;
/// tends to the (airtime-scaled) ergodic rate as theta_tilde -> 0 and to the
/// minimum link-1 rate as theta_tilde -> infinity.
inline double g_rate(const SystemConfig& cfg, double theta_tilde,
                     const std::optional<TimeShare>& tau = std::nullopt) {
    if (!(theta_tilde > 0.0)) throw ConfigError("g_rate: theta_tilde must be > 0");
    return -lambda_sr(cfg, -theta_tilde, tau) / theta_tilde;
}

/// Relay rate equation h(theta_tilde, theta_hat): the rate the relay queue
/// sustains at exponent theta_hat when the source queue runs at theta_tilde.
/// For theta_hat <= theta_tilde the relay sees constant-rate arrivals and h
/// is the plain hop-2 effective capacity; beyond, the source departure
/// process enters and the normalization switches to theta_tilde.
inline double h_rate(const SystemConfig& cfg, double theta_tilde, double theta_hat,
                     const std::optional<TimeShare>& tau = std::nullopt) {
    if (!(theta_tilde > 0.0) || !(theta_hat > 0.0))
        throw ConfigError("h_rate: exponents must be > 0");
    if (theta_hat <= theta_tilde) {
        const double first = -lambda_rd(cfg, -theta_hat, tau) / theta_hat;
#ifndef NDEBUG
        if (theta_hat == theta_tilde) {
            const double other =
                -(lambda_rd(cfg, -theta_hat, tau) + lambda_sr(cfg, theta_hat - theta_tilde, tau)) /
                theta_tilde;
            assert(std::abs(other - first) <= 1e-10 * std::max(1.0, std::abs(first)));
        }
#endif
        return first;
    }
    return -(lambda_rd(cfg, -theta_hat, tau) + lambda_sr(cfg, theta_hat - theta_tilde, tau)) /
           theta_tilde;
}

/// The case-analysis function
///   f(theta) = -(1/theta1) (Lambda_rd(-theta) + Lambda_sr(theta - theta1)).
/// Continuous and concave, f(0) = g(theta1), and increasing at the origin
/// under the stability condition.
inline double f_func(const SystemConfig& cfg, double theta,
                     const std::optional<TimeShare>& tau = std::nullopt) {
    if (!(theta >= 0.0)) throw ConfigError("f_func: theta must be >= 0");
    return -(lambda_rd(cfg, -theta, tau) + lambda_sr(cfg, theta - cfg.theta1, tau)) / cfg.theta1;
}

/// Virtual effective capacity of the relay-destination hop at exponent theta.
/// Decreasing; tends to the link-2 ergodic rate as theta -> 0.
inline double virtual_ec(const SystemConfig& cfg, double theta,
                         const std::optional<TimeShare>& tau = std::nullopt) {
    if (!(theta > 0.0)) throw ConfigError("virtual_ec: theta must be > 0");
    return -lambda_rd(cfg, -theta, tau) / theta;
}

/// Virtual effective bandwidth of the source departure process, evaluated at
/// offset theta - theta1: (1/theta) Lambda_sr(theta - theta1). Increasing,
/// negative below theta1, exactly 0 at theta = theta1, and approaches the
/// peak link-1 rate as theta grows.
inline double virtual_eb(const SystemConfig& cfg, double theta,
                         const std::optional<TimeShare>& tau = std::nullopt) {
    if (!(theta >= 0.0)) throw ConfigError("virtual_eb: theta must be >= 0");
    if (theta == 0.0) return -std::numeric_limits<double>::infinity();
    return lambda_sr(cfg, theta - cfg.theta1, tau) / theta;
}

/// Diagnostic from the concavity analysis: the gap, in bits/symbol, between
/// the link-2 ergodic rate and the tilted mean rate of link 1 at tilt
/// -theta1_arg. Nondecreasing in its argument; positive at 0 under stability.
inline double tilted_rate_gap(const SystemConfig& cfg, double theta1_arg) {
    if (!(theta1_arg >= 0.0)) throw ConfigError("tilted_rate_gap: argument must be >= 0");
    return ergodic_log2_rate(cfg.link2, cfg.block) -
           tilted_mean_log2(cfg.link1, cfg.block, -theta1_arg);
}

/// Diagnostic from the monotonicity analysis of h(theta_tilde, theta2):
/// nonnegative whenever g(theta2) > h(theta2, theta2), nonincreasing in
/// theta_tilde. Dimensionless.
inline double h_growth_factor(const SystemConfig& cfg, double theta_tilde) {
    if (!(theta_tilde > 0.0)) throw ConfigError("h_growth_factor: theta_tilde must be > 0");
    const double tb = cfg.block.tb_bits_scale();
    const double s = cfg.theta2 - theta_tilde;
    return theta_tilde * tb * tilted_mean_log2(cfg.link1, cfg.block, s) +
           log_exp_moment(cfg.link1, cfg.block, s) +
           log_exp_moment(cfg.link2, cfg.block, -cfg.theta2);
}

} // namespace relaycap
