#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "relaycap/errors.hpp"
#include "relaycap/rng.hpp"

namespace relaycap {

/// Exponentially distributed power gain (Rayleigh amplitude fading).
/// mean_power absorbs path loss, e.g. 1/d^alpha in the linear geometry.
struct RayleighFading {
    double mean_power = 1.0;
};

/// Deterministic gain (no fading).
struct PointMassFading {
    double gain = 1.0;
};

/// Finitely supported gain distribution.
struct DiscreteFading {
    std::vector<double> gains;
    std::vector<double> probs;
};

using FadingModel = std::variant<RayleighFading, PointMassFading, DiscreteFading>;

inline void validate(const FadingModel& model) {
    struct Visitor {
        void operator()(const RayleighFading& m) const {
            if (!(m.mean_power > 0.0) || !std::isfinite(m.mean_power))
                throw ConfigError("rayleigh fading: mean_power must be positive and finite");
        }
        void operator()(const PointMassFading& m) const {
            if (!(m.gain >= 0.0) || !std::isfinite(m.gain))
                throw ConfigError("point-mass fading: gain must be nonnegative and finite");
        }
        void operator()(const DiscreteFading& m) const {
            if (m.gains.empty() || m.gains.size() != m.probs.size())
                throw ConfigError("discrete fading: gains and probs must be nonempty and equally sized");
            double sum = 0.0;
            for (std::size_t i = 0; i < m.gains.size(); ++i) {
                if (!(m.gains[i] >= 0.0) || !std::isfinite(m.gains[i]))
                    throw ConfigError("discrete fading: gains must be nonnegative and finite");
                if (!(m.probs[i] >= 0.0))
                    throw ConfigError("discrete fading: probs must be nonnegative");
                sum += m.probs[i];
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw ConfigError("discrete fading: probs must sum to 1 (got " + std::to_string(sum) + ")");
        }
    };
    std::visit(Visitor{}, model);
}

/// Essential infimum of the gain.
inline double essential_inf(const FadingModel& model) {
    struct Visitor {
        double operator()(const RayleighFading&) const { return 0.0; }
        double operator()(const PointMassFading& m) const { return m.gain; }
        double operator()(const DiscreteFading& m) const {
            double lo = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m.gains.size(); ++i)
                if (m.probs[i] > 0.0) lo = std::min(lo, m.gains[i]);
            return lo;
        }
    };
    return std::visit(Visitor{}, model);
}

/// Essential supremum of the gain; +infinity for Rayleigh.
inline double essential_sup(const FadingModel& model) {
    struct Visitor {
        double operator()(const RayleighFading&) const {
            return std::numeric_limits<double>::infinity();
        }
        double operator()(const PointMassFading& m) const { return m.gain; }
        double operator()(const DiscreteFading& m) const {
            double hi = 0.0;
            for (std::size_t i = 0; i < m.gains.size(); ++i)
                if (m.probs[i] > 0.0) hi = std::max(hi, m.gains[i]);
            return hi;
        }
    };
    return std::visit(Visitor{}, model);
}

inline double mean_gain(const FadingModel& model) {
    struct Visitor {
        double operator()(const RayleighFading& m) const { return m.mean_power; }
        double operator()(const PointMassFading& m) const { return m.gain; }
        double operator()(const DiscreteFading& m) const {
            double s = 0.0;
            for (std::size_t i = 0; i < m.gains.size(); ++i) s += m.gains[i] * m.probs[i];
            return s;
        }
    };
    return std::visit(Visitor{}, model);
}

/// One i.i.d. draw of the power gain.
inline double sample_gain(const FadingModel& model, Xoshiro256pp& rng) {
    struct Visitor {
        Xoshiro256pp& rng;
        double operator()(const RayleighFading& m) const {
            return rng.next_exponential(m.mean_power);
        }
        double operator()(const PointMassFading& m) const { return m.gain; }
        double operator()(const DiscreteFading& m) const {
            const double u = rng.next_double();
            double cum = 0.0;
            for (std::size_t i = 0; i < m.gains.size(); ++i) {
                cum += m.probs[i];
                if (u < cum) return m.gains[i];
            }
            return m.gains.back();
        }
    };
    return std::visit(Visitor{rng}, model);
}

} // namespace relaycap
