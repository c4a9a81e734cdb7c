#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "relaycap/effcap.hpp"
#include "relaycap/errors.hpp"
#include "relaycap/lmgf.hpp"

// JSON config schema (all rates dimensionless/linear unless the key carries
// a _db suffix):
//
// {
//   "mode": "full_duplex" | "half_duplex",
//   "theta1": 0.01, "theta2": 0.001,
//   "block": {"t_seconds": 0.002, "b_hz": 1e5},          // optional
//   "geometry": {"d": 0.5, "path_loss_alpha": 4,
//                "snr1_db": 0, "snr2_db": 10},           // or snr1/snr2 linear
//   -- or explicit links --
//   "link1": {"fading": {"kind": "rayleigh", "mean_power": 16}, "snr_db": 0},
//   "link2": {"fading": {"kind": "point", "gain": 1}, "snr": 1},
//   // discrete fading: {"kind": "discrete", "gains": [...], "probs": [...]}
//   "sweep": { "axis1": {"name": "theta2", "grid": [...] |
//                        {"start":, "stop":, "points":, "spacing": "log"}},
//              "axis2": {...},                            // optional
//              "outputs": ["capacity", "theta_bar", ...] } // optional
//   "sim": {"blocks": 1e7, "seeds": 5, "margin": 0.1, "seed": 1}  // optional
// }

namespace relaycap {

using json = nlohmann::json;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

namespace detail {

inline double require_number(const json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw ConfigError("config: missing or non-numeric field '" + key + "'");
    return j.at(key).get<double>();
}

inline double number_or(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw ConfigError("config: field '" + key + "' must be a number");
    return j.at(key).get<double>();
}

// accepts either "<base>" (linear) or "<base>_db"
inline double snr_field(const json& j, const std::string& base) {
    const std::string db_key = base + "_db";
    if (j.contains(db_key) && j.contains(base))
        throw ConfigError("config: give either '" + base + "' or '" + db_key + "', not both");
    if (j.contains(db_key)) return db_to_linear(require_number(j, db_key));
    return require_number(j, base);
}

} // namespace detail

inline FadingModel fading_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError("config: fading must be an object with a 'kind' tag");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rayleigh") return RayleighFading{detail::require_number(j, "mean_power")};
    if (kind == "point") return PointMassFading{detail::require_number(j, "gain")};
    if (kind == "discrete") {
        DiscreteFading d;
        if (!j.contains("gains") || !j.contains("probs"))
            throw ConfigError("config: discrete fading needs 'gains' and 'probs'");
        d.gains = j.at("gains").get<std::vector<double>>();
        d.probs = j.at("probs").get<std::vector<double>>();
        return d;
    }
    throw ConfigError("config: unknown fading kind '" + kind + "'");
}

inline json fading_to_json(const FadingModel& model) {
    struct Visitor {
        json operator()(const RayleighFading& m) const {
            return {{"kind", "rayleigh"}, {"mean_power", m.mean_power}};
        }
        json operator()(const PointMassFading& m) const {
            return {{"kind", "point"}, {"gain", m.gain}};
        }
        json operator()(const DiscreteFading& m) const {
            return {{"kind", "discrete"}, {"gains", m.gains}, {"probs", m.probs}};
        }
    };
    return std::visit(Visitor{}, model);
}

inline LinkConfig link_from_json(const json& j) {
    if (!j.is_object() || !j.contains("fading"))
        throw ConfigError("config: link needs a 'fading' object");
    LinkConfig link;
    link.fading = fading_from_json(j.at("fading"));
    link.snr = detail::snr_field(j, "snr");
    validate(link);
    return link;
}

inline json link_to_json(const LinkConfig& link) {
    return {{"fading", fading_to_json(link.fading)}, {"snr", link.snr}};
}

struct SimSettings {
    std::uint64_t blocks = 10000000;
    int seeds = 5;
    double margin = 0.1;
    std::uint64_t seed = 1;
};

enum class SweepAxis { Theta2, D, Snr2Db };

inline const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::Theta2: return "theta2";
        case SweepAxis::D: return "d";
        case SweepAxis::Snr2Db: return "snr2_db";
    }
    return "?";
}

struct AxisSpec {
    SweepAxis name = SweepAxis::Theta2;
    std::vector<double> grid;
};

struct SweepSpec {
    AxisSpec axis1;
    std::optional<AxisSpec> axis2;
    bool want_theta_bar = false;
};

/// Parsed config file: the system instance plus optional sweep/sim sections.
/// A geometry block, when given, is retained so sweeps can move d or SNR2.
struct LoadedConfig {
    SystemConfig system;
    std::optional<RelayGeometry> geometry;
    std::optional<SweepSpec> sweep;
    SimSettings sim;
};

namespace detail {

inline std::vector<double> grid_from_json(const json& j) {
    std::vector<double> grid;
    if (j.is_array()) {
        grid = j.get<std::vector<double>>();
    } else if (j.is_object()) {
        const double start = require_number(j, "start");
        const double stop = require_number(j, "stop");
        const int points = static_cast<int>(require_number(j, "points"));
        const std::string spacing = j.value("spacing", std::string("linear"));
        if (points < 2 || points > 10000)
            throw ConfigError("config: grid points must lie in [2, 10^4]");
        for (int i = 0; i < points; ++i) {
            const double t = static_cast<double>(i) / (points - 1);
            if (spacing == "log") {
                if (!(start > 0.0) || !(stop > 0.0))
                    throw ConfigError("config: log grids need positive endpoints");
                grid.push_back(start * std::pow(stop / start, t));
            } else if (spacing == "linear") {
                grid.push_back(start + (stop - start) * t);
            } else {
                throw ConfigError("config: unknown grid spacing '" + spacing + "'");
            }
        }
    } else {
        throw ConfigError("config: grid must be an array or {start, stop, points}");
    }
    if (grid.size() < 2 || grid.size() > 10000)
        throw ConfigError("config: grid must have between 2 and 10^4 points");
    const bool increasing = grid[1] > grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (increasing ? grid[i] <= grid[i - 1] : grid[i] >= grid[i - 1])
            throw ConfigError("config: grid must be strictly monotone");
    }
    return grid;
}

inline AxisSpec axis_from_json(const json& j) {
    AxisSpec axis;
    const std::string name = j.value("name", std::string());
    if (name == "theta2") axis.name = SweepAxis::Theta2;
    else if (name == "d") axis.name = SweepAxis::D;
    else if (name == "snr2_db") axis.name = SweepAxis::Snr2Db;
    else throw ConfigError("config: sweep axis must be theta2, d, or snr2_db");
    if (!j.contains("grid")) throw ConfigError("config: sweep axis needs a grid");
    axis.grid = grid_from_json(j.at("grid"));
    return axis;
}

} // namespace detail

inline LoadedConfig config_from_json(const json& j) {
    LoadedConfig out;
    const std::string mode = j.value("mode", std::string("full_duplex"));
    if (mode == "full_duplex") out.system.mode = DuplexMode::FullDuplex;
    else if (mode == "half_duplex") out.system.mode = DuplexMode::HalfDuplex;
    else throw ConfigError("config: mode must be full_duplex or half_duplex");

    out.system.theta1 = detail::require_number(j, "theta1");
    out.system.theta2 = detail::require_number(j, "theta2");
    if (j.contains("block")) {
        const auto& b = j.at("block");
        out.system.block.t_seconds = detail::number_or(b, "t_seconds", 0.002);
        out.system.block.b_hz = detail::number_or(b, "b_hz", 1e5);
    }

    if (j.contains("geometry") == j.contains("link1"))
        throw ConfigError("config: give exactly one of 'geometry' or 'link1'/'link2'");
    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        RelayGeometry geom;
        geom.d = detail::require_number(g, "d");
        geom.path_loss_alpha = detail::number_or(g, "path_loss_alpha", 4.0);
        geom.snr1 = detail::snr_field(g, "snr1");
        geom.snr2 = detail::snr_field(g, "snr2");
        out.geometry = geom;
        out.system = geometry_to_config(geom, out.system.block, out.system.theta1,
                                        out.system.theta2, out.system.mode);
    } else {
        if (!j.contains("link2")) throw ConfigError("config: 'link1' requires 'link2'");
        out.system.link1 = link_from_json(j.at("link1"));
        out.system.link2 = link_from_json(j.at("link2"));
    }
    validate(out.system);

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        SweepSpec spec;
        if (!s.contains("axis1")) throw ConfigError("config: sweep needs axis1");
        spec.axis1 = detail::axis_from_json(s.at("axis1"));
        if (s.contains("axis2")) spec.axis2 = detail::axis_from_json(s.at("axis2"));
        if (s.contains("outputs")) {
            for (const auto& o : s.at("outputs")) {
                const std::string name = o.get<std::string>();
                if (name == "theta_bar") spec.want_theta_bar = true;
                else if (name != "capacity" && name != "case_tag" && name != "tau" &&
                         name != "upper_bound")
                    throw ConfigError("config: unknown sweep output '" + name + "'");
            }
        }
        if ((spec.axis1.name == SweepAxis::D || (spec.axis2 && spec.axis2->name == SweepAxis::D)) &&
            !out.geometry)
            throw ConfigError("config: d sweeps need a 'geometry' base config");
        out.sweep = spec;
    }

    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        out.sim.blocks = static_cast<std::uint64_t>(detail::number_or(s, "blocks", 1e7));
        out.sim.seeds = static_cast<int>(detail::number_or(s, "seeds", 5));
        out.sim.margin = detail::number_or(s, "margin", 0.1);
        out.sim.seed = static_cast<std::uint64_t>(detail::number_or(s, "seed", 1));
    }
    return out;
}

inline json config_to_json(const LoadedConfig& cfg) {
    json j;
    j["mode"] = cfg.system.mode == DuplexMode::FullDuplex ? "full_duplex" : "half_duplex";
    j["theta1"] = cfg.system.theta1;
    j["theta2"] = cfg.system.theta2;
    j["block"] = {{"t_seconds", cfg.system.block.t_seconds}, {"b_hz", cfg.system.block.b_hz}};
    if (cfg.geometry) {
        j["geometry"] = {{"d", cfg.geometry->d},
                         {"path_loss_alpha", cfg.geometry->path_loss_alpha},
                         {"snr1", cfg.geometry->snr1},
                         {"snr2", cfg.geometry->snr2}};
    } else {
        j["link1"] = link_to_json(cfg.system.link1);
        j["link2"] = link_to_json(cfg.system.link2);
    }
    return j;
}

inline LoadedConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw ConfigError("config parse error in " + path + ": " + ex.what());
    }
    return config_from_json(j);
}

/// RFC 4180 style field quoting; numbers are emitted with up to 12
/// significant digits and never need quoting.
inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string csv_number(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

inline std::string csv_optional(const std::optional<double>& v) {
    return v ? csv_number(*v) : std::string();
}

} // namespace relaycap
