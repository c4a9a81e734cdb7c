#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "relaycap/errors.hpp"
#include "relaycap/lmgf.hpp"

namespace relaycap {

enum class RootWant { AnyRoot, SmallestRoot };

/// A bracketed scalar root problem. The target must be continuous on
/// [lo, hi]. AnyRoot requires a sign change at the endpoints; SmallestRoot
/// scans the bracket uniformly and refines the leftmost sign change.
struct RootSpec {
    std::function<double(double)> target;
    double lo = 0.0;
    double hi = 1.0;
    double tolerance_x = 1e-10;
    double tolerance_f = 1e-9;
    RootWant want = RootWant::AnyRoot;
    int scan_points = 256;
};

namespace detail {

// Bisection with a guarded secant step inside a confirmed bracket.
// Stops once |f| <= tol_f or the bracket narrows to tol_x.
inline double refine_root(const std::function<double(double)>& f, double a, double b, double fa,
                          double fb, double tol_x, double tol_f) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    double best_x = std::abs(fa) < std::abs(fb) ? a : b;
    double best_f = std::min(std::abs(fa), std::abs(fb));
    for (int iter = 0; iter < 200 && b - a > tol_x && best_f > tol_f; ++iter) {
        double x = 0.5 * (a + b);
        if (fb != fa) {
            const double s = b - fb * (b - a) / (fb - fa);
            const double margin = 0.01 * (b - a);
            if (s > a + margin && s < b - margin) x = s;
        }
        const double fx = f(x);
        if (std::abs(fx) < best_f) {
            best_f = std::abs(fx);
            best_x = x;
        }
        if (fx == 0.0) return x;
        if ((fa < 0.0) == (fx < 0.0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    return best_f <= tol_f ? best_x : 0.5 * (a + b);
}

} // namespace detail

/// Solve the root problem. Throws NoRootInBracket if no sign change exists
/// (at the endpoints for AnyRoot, anywhere in the scan for SmallestRoot).
inline double bracketed_root(const RootSpec& spec) {
    if (!(spec.lo < spec.hi)) throw ConfigError("bracketed_root: requires lo < hi");
    if (!(spec.tolerance_x > 0.0) || !(spec.tolerance_f > 0.0))
        throw ConfigError("bracketed_root: tolerances must be positive");
    const auto& f = spec.target;
    if (spec.want == RootWant::AnyRoot) {
        const double fa = f(spec.lo);
        const double fb = f(spec.hi);
        if (fa == 0.0) return spec.lo;
        if (fb == 0.0) return spec.hi;
        if ((fa < 0.0) == (fb < 0.0))
            throw NoRootInBracket("bracketed_root: endpoints have the same sign");
        return detail::refine_root(f, spec.lo, spec.hi, fa, fb, spec.tolerance_x,
                                   spec.tolerance_f);
    }
    // SmallestRoot: uniform scan, then refine the leftmost sign-change cell
    const int n = spec.scan_points;
    double x_prev = spec.lo;
    double f_prev = f(x_prev);
    if (f_prev == 0.0) return x_prev;
    for (int i = 1; i < n; ++i) {
        const double x = spec.lo + (spec.hi - spec.lo) * static_cast<double>(i) / (n - 1);
        const double fx = f(x);
        if (fx == 0.0) return x;
        if ((f_prev < 0.0) != (fx < 0.0))
            return detail::refine_root(f, x_prev, x, f_prev, fx, spec.tolerance_x,
                                       spec.tolerance_f);
        x_prev = x;
        f_prev = fx;
    }
    throw NoRootInBracket("bracketed_root: no sign change in scan");
}

/// Count sign changes of the target over a uniform scan (diagnostic used to
/// flag potentially non-unique case-III solutions).
inline int count_sign_changes(const std::function<double(double)>& f, double lo, double hi,
                              int n = 256) {
    int changes = 0;
    double f_prev = f(lo);
    for (int i = 1; i < n; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
        const double fx = f(x);
        if (fx == 0.0 || (f_prev < 0.0) != (fx < 0.0)) ++changes;
        f_prev = fx;
    }
    return changes;
}

struct ThetaBarResult {
    enum class Status { Found, SupportDegenerate };
    Status status = Status::Found;
    double value = 0.0;
};

/// The relay-exponent threshold: the unique theta > 0 beyond the concave peak
/// with f(theta) = f(0). SupportDegenerate when the peak link-1 rate does not
/// exceed the minimum link-2 rate, in which case the relay constraint never
/// binds and no threshold exists.
inline ThetaBarResult solve_theta_bar(const SystemConfig& cfg) {
    const auto sup1 = capacity_support(cfg.link1, cfg.block);
    const auto sup2 = capacity_support(cfg.link2, cfg.block);
    if (!(sup1.max_bits > sup2.min_bits))
        return {ThetaBarResult::Status::SupportDegenerate, 0.0};

    const double f0 = f_func(cfg, 0.0);
    auto residual = [&](double th) { return f_func(cfg, th) - f0; };

    double hi = 1.0;
    while (residual(hi) >= 0.0) {
        hi *= 2.0;
        if (hi > 0x1p40) throw NumericalFailure("solve_theta_bar: no upper bracket found");
    }
    double lo = cfg.theta1 + 1e-9;
    if (lo >= hi) lo = 0.5 * hi;
    while (residual(lo) <= 0.0) {
        lo *= 0.5;
        if (lo < 1e-10 * cfg.theta1)
            throw NumericalFailure("solve_theta_bar: cannot resolve threshold near zero");
    }
    const double theta_bar = detail::refine_root(residual, lo, hi, residual(lo), residual(hi),
                                                 1e-13, 1e-9);
    // concavity sanity: strictly above f(0) on the left, below on the right
    if (!(residual(lo) > 0.0) || !(residual(theta_bar + 1e-9) < 1e-6))
        throw NumericalFailure("solve_theta_bar: concavity check failed");
    return {ThetaBarResult::Status::Found, theta_bar};
}

struct ThetaTildeResult {
    double value = 0.0;
    bool degenerate = false;     // flat g; any exponent solves the equation
    int sign_changes = 1;        // scan diagnostic, >1 means multiple candidates
};

/// Case III.a search: smallest theta_tilde in [theta1, theta2] with
/// g(theta_tilde) = h(theta_tilde, theta2).
inline ThetaTildeResult solve_theta_tilde_star_a(const SystemConfig& cfg,
                                                 const std::optional<TimeShare>& tau = std::nullopt) {
    auto residual = [&](double tt) {
        return g_rate(cfg, tt, tau) - h_rate(cfg, tt, cfg.theta2, tau);
    };
    RootSpec spec;
    spec.target = residual;
    spec.lo = cfg.theta1;
    spec.hi = cfg.theta2;
    spec.tolerance_x = 1e-13;
    spec.want = RootWant::SmallestRoot;
    const double root = bracketed_root(spec);
    return {root, false, count_sign_changes(residual, cfg.theta1, cfg.theta2)};
}

/// Case III.b search: theta_tilde >= theta2 with g(theta_tilde) equal to the
/// link-2 effective capacity at theta2 (a constant level in this regime).
/// Flat g (deterministic link 1) makes every exponent a solution; theta2 is
/// returned with the degenerate flag set.
inline ThetaTildeResult solve_theta_tilde_star_b(const SystemConfig& cfg,
                                                 const std::optional<TimeShare>& tau = std::nullopt) {
    const double level = virtual_ec(cfg, cfg.theta2, tau);
    const auto sup1 = capacity_support(cfg.link1, cfg.block);
    if (sup1.max_bits == sup1.min_bits) return {std::max(cfg.theta2, cfg.theta1), true, 1};

    auto residual = [&](double tt) { return g_rate(cfg, tt, tau) - level; };
    double lo = cfg.theta2;
    double f_lo = residual(lo);
    if (f_lo <= 0.0) return {lo, false, 1}; // boundary: g(theta2) already at the level
    double hi = 2.0 * lo;
    while (residual(hi) > 0.0) {
        hi *= 2.0;
        if (hi > 0x1p40)
            throw NoRootInBracket("solve_theta_tilde_star_b: level below the g range");
    }
    const double root = detail::refine_root(residual, lo, hi, f_lo, residual(hi), 1e-13, 1e-9);
    return {root, false, 1};
}

/// Stability bound on the half-duplex time share, from the ratio of the
/// per-symbol ergodic rates of the two hops.
inline double solve_tau0(const SystemConfig& cfg) {
    const double e1 = ergodic_log2_rate(cfg.link1, cfg.block);
    const double e2 = ergodic_log2_rate(cfg.link2, cfg.block);
    if (!(e1 > 0.0) || !(e2 > 0.0))
        throw NumericalFailure("solve_tau0: ergodic rates must be positive");
    return e2 / (e1 + e2);
}

namespace detail {

// Verifies a residual is nondecreasing on a coarse grid and solves it on
// [0, 1]. The tau equations are increasing-minus-decreasing by construction;
// a detected violation indicates a numerical problem, not a wrong bracket.
inline double solve_monotone_tau(const std::function<double(double)>& residual,
                                 const std::string& what) {
    const int kGrid = 64;
    double prev = residual(0.0);
    double slack = 0.0;
    for (int i = 1; i <= kGrid; ++i) {
        const double r = residual(static_cast<double>(i) / kGrid);
        slack = std::max(slack, prev - r);
        prev = r;
    }
    if (slack > 1e-6) throw NumericalFailure(what + ": residual not monotone");
    const double f0 = residual(0.0);
    const double f1 = residual(1.0);
    if (f0 == 0.0) return 0.0;
    if (f1 == 0.0) return 1.0;
    if ((f0 < 0.0) == (f1 < 0.0)) throw NoRootInBracket(what + ": no sign change on [0, 1]");
    return refine_root(residual, 0.0, 1.0, f0, f1, 1e-14, 1e-9);
}

// tau-scaled effective capacity of the source hop at theta1
inline double hd_ec1(const SystemConfig& cfg, double tau) {
    return -log_exp_moment(cfg.link1, cfg.block, -tau * cfg.theta1) / cfg.theta1;
}

} // namespace detail

/// Half-duplex balance point: the tau equating the airtime-scaled effective
/// capacities of the two hops at their own exponents.
inline double solve_tau_star(const SystemConfig& cfg) {
    auto residual = [&](double tau) {
        const double rhs =
            -log_exp_moment(cfg.link2, cfg.block, -(1.0 - tau) * cfg.theta2) / cfg.theta2;
        return detail::hd_ec1(cfg, tau) - rhs;
    };
    return detail::solve_monotone_tau(residual, "solve_tau_star");
}

/// Half-duplex balance point for theta2 > theta1, where the relay queue sees
/// the source departure process rather than the raw service process.
/// Coincides with solve_tau_star at theta2 = theta1.
inline double solve_tau_prime(const SystemConfig& cfg) {
    auto residual = [&](double tau) {
        const double rhs = -(log_exp_moment(cfg.link2, cfg.block, -(1.0 - tau) * cfg.theta2) +
                             log_exp_moment(cfg.link1, cfg.block,
                                            tau * (cfg.theta2 - cfg.theta1))) /
                           cfg.theta1;
        return detail::hd_ec1(cfg, tau) - rhs;
    };
    return detail::solve_monotone_tau(residual, "solve_tau_prime");
}

} // namespace relaycap
