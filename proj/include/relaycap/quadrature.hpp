#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "relaycap/errors.hpp"

namespace relaycap {

/// Running log-sum-exp with max-shift, for accumulating positive quantities
/// whose logs span hundreds of units without overflow.
class LogSumAccumulator {
public:
    void add(double log_x) {
        if (log_x == -std::numeric_limits<double>::infinity()) return;
        if (log_x <= max_) {
            sum_ += std::exp(log_x - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - log_x) + 1.0;
            max_ = log_x;
        }
    }

    double log_total() const {
        if (sum_ <= 0.0) return -std::numeric_limits<double>::infinity();
        return max_ + std::log(sum_);
    }

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
};

struct QuadratureOptions {
    double rel_tol = 1e-12;
    // panels whose log contribution falls this far below the running total
    // are accepted without refinement
    double negligible_log_gap = 70.0;
    int max_depth = 48;
    std::size_t max_panels = 200000;
};

namespace detail {

// Gauss-Kronrod 7-15 abscissae and weights (QUADPACK dqk15).
inline constexpr double kGk15Abscissae[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kGk15KronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGk15GaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelEstimate {
    double log_kronrod;
    double log_gauss;
};

// One 15-point Kronrod / 7-point Gauss panel on [a, b], all in log domain.
// LogF maps x to the log of a nonnegative integrand.
template <typename LogF>
PanelEstimate gk15_log_panel(const LogF& log_f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double log_h = std::log(h);
    LogSumAccumulator kron;
    LogSumAccumulator gauss;
    for (int i = 0; i < 8; ++i) {
        const double xi = kGk15Abscissae[i];
        const double wk = kGk15KronrodWeights[i];
        double fl = log_f(c - h * xi);
        double fr = (i < 7) ? log_f(c + h * xi) : -std::numeric_limits<double>::infinity();
        kron.add(std::log(wk) + log_h + fl);
        if (i < 7) kron.add(std::log(wk) + log_h + fr);
        if (i % 2 == 1 || i == 7) {
            const double wg = kGk15GaussWeights[i / 2];
            gauss.add(std::log(wg) + log_h + fl);
            if (i < 7) gauss.add(std::log(wg) + log_h + fr);
        }
    }
    return {kron.log_total(), gauss.log_total()};
}

inline double panel_rel_error(const PanelEstimate& est) {
    if (est.log_kronrod == -std::numeric_limits<double>::infinity()) return 0.0;
    if (est.log_gauss == -std::numeric_limits<double>::infinity()) return 1.0;
    return std::abs(std::expm1(est.log_gauss - est.log_kronrod));
}

} // namespace detail

/// log of the integral of a nonnegative integrand over the union of the
/// intervals [points[0], points[1]], ..., given log_f(x) = log integrand.
/// Adaptive Gauss-Kronrod bisection; the per-panel relative error target is
/// opts.rel_tol. Throws NumericalFailure if the audited error estimate of the
/// total exceeds the tolerance by more than three orders of magnitude.
template <typename LogF>
double log_integrate(const LogF& log_f, const std::vector<double>& points,
                     const QuadratureOptions& opts = {}) {
    struct Panel {
        double a, b;
        int depth;
    };
    std::vector<Panel> stack;
    stack.reserve(64);
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (points[i + 1] > points[i]) stack.push_back({points[i], points[i + 1], 0});
    }

    LogSumAccumulator total;
    LogSumAccumulator err;
    double running_max = -std::numeric_limits<double>::infinity();
    std::size_t panels = 0;

    while (!stack.empty()) {
        if (++panels > opts.max_panels)
            throw NumericalFailure("quadrature: panel budget exhausted");
        const Panel p = stack.back();
        stack.pop_back();
        const auto est = detail::gk15_log_panel(log_f, p.a, p.b);
        const double rel = detail::panel_rel_error(est);
        const bool negligible = est.log_kronrod < running_max - opts.negligible_log_gap;
        if (rel <= opts.rel_tol || negligible || p.depth >= opts.max_depth) {
            total.add(est.log_kronrod);
            running_max = std::max(running_max, est.log_kronrod);
            if (est.log_kronrod > -std::numeric_limits<double>::infinity() && rel > 0.0)
                err.add(est.log_kronrod + std::log(rel));
        } else {
            const double mid = 0.5 * (p.a + p.b);
            stack.push_back({p.a, mid, p.depth + 1});
            stack.push_back({mid, p.b, p.depth + 1});
        }
    }

    const double log_total = total.log_total();
    const double log_err = err.log_total();
    if (log_total != -std::numeric_limits<double>::infinity() &&
        log_err != -std::numeric_limits<double>::infinity() &&
        std::exp(log_err - log_total) > 1e3 * opts.rel_tol) {
        throw NumericalFailure("quadrature: tolerance not reached");
    }
    return log_total;
}

/// log of the integral of a nonnegative integrand over [lower, infinity).
/// interior_points are optional split hints in the original variable (peaks,
/// scale changes). Uses the substitution u = lower + (1-t)/t, t in (0, 1].
template <typename LogF>
double log_integrate_semi_infinite(const LogF& log_f, double lower,
                                   const std::vector<double>& interior_points,
                                   const QuadratureOptions& opts = {}) {
    auto transformed = [&](double t) {
        const double u = lower + (1.0 - t) / t;
        return log_f(u) - 2.0 * std::log(t);
    };
    std::vector<double> tpoints;
    tpoints.push_back(0.0);
    for (auto it = interior_points.rbegin(); it != interior_points.rend(); ++it) {
        if (*it > lower) tpoints.push_back(1.0 / (1.0 + (*it - lower)));
    }
    tpoints.push_back(1.0);
    std::sort(tpoints.begin(), tpoints.end());
    tpoints.erase(std::unique(tpoints.begin(), tpoints.end()), tpoints.end());
    return log_integrate(transformed, tpoints, opts);
}

} // namespace relaycap
