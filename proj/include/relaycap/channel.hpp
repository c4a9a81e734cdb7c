#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "relaycap/errors.hpp"
#include "relaycap/fading.hpp"
#include "relaycap/quadrature.hpp"

namespace relaycap {

inline constexpr double kLn2 = 0.6931471805599453094;

/// One hop: fading distribution plus linear SNR.
struct LinkConfig {
    FadingModel fading;
    double snr = 1.0;
};

inline void validate(const LinkConfig& link) {
    validate(link.fading);
    if (!(link.snr > 0.0) || !std::isfinite(link.snr))
        throw ConfigError("link: snr must be positive and finite");
}

/// Block-fading parameters. tb_bits_scale() converts bits/symbol to
/// bits/block (symbols per block = T * B).
struct BlockConfig {
    double t_seconds = 0.002;
    double b_hz = 1e5;

    double tb_bits_scale() const { return t_seconds * b_hz; }
};

inline void validate(const BlockConfig& block) {
    if (!(block.t_seconds > 0.0) || !std::isfinite(block.t_seconds))
        throw ConfigError("block: t_seconds must be positive and finite");
    if (!(block.b_hz > 0.0) || !std::isfinite(block.b_hz))
        throw ConfigError("block: b_hz must be positive and finite");
}

/// Shannon rate of one block at the given power gain, in bits/block.
inline double per_block_capacity(const LinkConfig& link, const BlockConfig& block, double gain) {
    return block.tb_bits_scale() * std::log2(1.0 + link.snr * gain);
}

namespace detail {

// Split hints for integrands of the form (1+c*u)^a * exp(-u) on [0, inf):
// the unit-mean exponential scale plus the integrand peak for a > 0.
inline std::vector<double> moment_split_points(double c, double a) {
    std::vector<double> pts = {0.5, 1.0, 3.0};
    if (a > 0.0) {
        const double peak = a - 1.0 / c;
        if (peak > 4.0) {
            pts.push_back(0.5 * peak);
            pts.push_back(peak);
            pts.push_back(2.0 * peak);
            pts.push_back(4.0 * peak);
        }
    }
    return pts;
}

} // namespace detail

/// log E{ exp(s * TB * log2(1 + snr z)) }, the kernel inside every LMGF.
/// s is signed and in 1/bits. Always 0 at s = 0. Rayleigh expectations are
/// evaluated by quadrature in the log domain so that |s|*TB products of
/// order 1e4 neither overflow nor underflow.
inline double log_exp_moment(const LinkConfig& link, const BlockConfig& block, double s) {
    if (!std::isfinite(s)) throw ConfigError("log_exp_moment: s must be finite");
    if (s == 0.0) return 0.0;
    const double tb = block.tb_bits_scale();
    const double a = s * tb / kLn2; // exponent of (1 + snr*z)

    struct Visitor {
        const LinkConfig& link;
        double a;
        double operator()(const PointMassFading& m) const {
            return a * std::log1p(link.snr * m.gain);
        }
        double operator()(const DiscreteFading& m) const {
            LogSumAccumulator acc;
            for (std::size_t i = 0; i < m.gains.size(); ++i) {
                if (m.probs[i] <= 0.0) continue;
                acc.add(std::log(m.probs[i]) + a * std::log1p(link.snr * m.gains[i]));
            }
            return acc.log_total();
        }
        double operator()(const RayleighFading& m) const {
            const double c = link.snr * m.mean_power; // z = mean_power * u, u ~ Exp(1)
            const double aa = a;
            auto log_f = [c, aa](double u) { return aa * std::log1p(c * u) - u; };
            return log_integrate_semi_infinite(log_f, 0.0,
                                               detail::moment_split_points(c, aa));
        }
    };
    const double result = std::visit(Visitor{link, a}, link.fading);
    if (std::isnan(result)) throw NumericalFailure("log_exp_moment: evaluation failed");
    if (result == std::numeric_limits<double>::infinity())
        throw DivergentMoment("log_exp_moment: moment diverges");
    return result;
}

/// E{ exp(s * TB * log2(1 + snr z)) }. Prefer log_exp_moment when the result
/// may leave the representable range.
inline double exp_moment(const LinkConfig& link, const BlockConfig& block, double s) {
    const double lm = log_exp_moment(link, block, s);
    const double m = std::exp(lm);
    if (!std::isfinite(m))
        throw NumericalFailure("exp_moment: value not representable, use log_exp_moment");
    return m;
}

/// Exponentially tilted mean of the per-symbol rate:
/// E{ e^{s TB log2(1+snr z)} log2(1+snr z) } / E{ e^{s TB log2(1+snr z)} },
/// in bits/symbol. At s = 0 this is the ergodic per-symbol rate.
inline double tilted_mean_log2(const LinkConfig& link, const BlockConfig& block, double s) {
    if (!std::isfinite(s)) throw ConfigError("tilted_mean_log2: s must be finite");
    const double tb = block.tb_bits_scale();
    const double a = s * tb / kLn2;

    struct Visitor {
        const LinkConfig& link;
        double a;
        double operator()(const PointMassFading& m) const {
            return std::log1p(link.snr * m.gain) / kLn2;
        }
        double operator()(const DiscreteFading& m) const {
            LogSumAccumulator num;
            LogSumAccumulator den;
            for (std::size_t i = 0; i < m.gains.size(); ++i) {
                if (m.probs[i] <= 0.0) continue;
                const double lr = std::log1p(link.snr * m.gains[i]);
                const double lw = std::log(m.probs[i]) + a * lr;
                den.add(lw);
                if (lr > 0.0) num.add(lw + std::log(lr / kLn2));
            }
            return std::exp(num.log_total() - den.log_total());
        }
        double operator()(const RayleighFading& m) const {
            const double c = link.snr * m.mean_power;
            const double aa = a;
            const auto pts = detail::moment_split_points(c, aa);
            auto log_den = [c, aa](double u) { return aa * std::log1p(c * u) - u; };
            auto log_num = [c, aa](double u) {
                const double lr = std::log1p(c * u);
                if (lr <= 0.0) return -std::numeric_limits<double>::infinity();
                return aa * lr - u + std::log(lr / kLn2);
            };
            const double ln_num = log_integrate_semi_infinite(log_num, 0.0, pts);
            const double ln_den = log_integrate_semi_infinite(log_den, 0.0, pts);
            return std::exp(ln_num - ln_den);
        }
    };
    return std::visit(Visitor{link, a}, link.fading);
}

/// Mean per-symbol rate E{ log2(1 + snr z) }, bits/symbol.
inline double ergodic_log2_rate(const LinkConfig& link, const BlockConfig& block) {
    return tilted_mean_log2(link, block, 0.0);
}

/// Mean per-block rate TB * E{ log2(1 + snr z) }, bits/block.
inline double ergodic_rate(const LinkConfig& link, const BlockConfig& block) {
    return block.tb_bits_scale() * ergodic_log2_rate(link, block);
}

/// Almost-sure range of the per-block rate; max is +infinity when the gain
/// distribution is unbounded.
struct CapacityRange {
    double min_bits;
    double max_bits;
};

inline CapacityRange capacity_support(const LinkConfig& link, const BlockConfig& block) {
    const double lo = essential_inf(link.fading);
    const double hi = essential_sup(link.fading);
    const double tb = block.tb_bits_scale();
    const double max_bits = std::isinf(hi) ? std::numeric_limits<double>::infinity()
                                           : tb * std::log2(1.0 + link.snr * hi);
    return {tb * std::log2(1.0 + link.snr * lo), max_bits};
}

} // namespace relaycap
