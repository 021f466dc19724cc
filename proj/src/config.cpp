#include "bbmlab/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bbmlab/cantor.hpp"
#include "bbmlab/errors.hpp"

namespace bbmlab {

namespace pt = boost::property_tree;

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Index: return "i";
        case SweepAxis::Radius: return "r";
        case SweepAxis::Smoothness: return "s";
        case SweepAxis::Delta: return "delta";
        case SweepAxis::Grid: return "grid";
        case SweepAxis::Depth: return "depth";
    }
    return "?";
}

SweepAxis parse_axis(const std::string& name) {
    static const std::map<std::string, SweepAxis> table = {
        {"i", SweepAxis::Index},        {"r", SweepAxis::Radius},  {"s", SweepAxis::Smoothness},
        {"delta", SweepAxis::Delta},    {"grid", SweepAxis::Grid}, {"depth", SweepAxis::Depth}};
    const auto it = table.find(name);
    if (it == table.end()) throw ConfigError("unknown sweep axis '" + name + "'");
    return it->second;
}

namespace {

const std::map<std::string, std::set<std::string>> kKeys = {
    {"scenario", {"name", "description", "functional", "p", "q", "eps", "eps_from_radius", "axis", "ladder", "energy"}},
    {"space", {"kind", "cells", "breakpoints", "weights", "depth"}},
    {"function", {"kind", "c0", "ax", "ay", "amplitude", "frequency", "phase", "coeffs", "knots", "values", "a", "b",
                  "height", "depth", "center", "half_width"}},
    {"mollifier", {"family", "i", "r", "s", "power", "radii", "heights"}},
    {"lambda", {"phi", "height", "kappa", "knots", "values", "anchor", "Q", "delta"}},
    {"domain", {"outer", "inner"}},
    {"tolerance", {"plateau", "oracle", "oracle_tol", "floor", "bound", "bound_eps", "bound_q_shift",
                   "min_cells_per_radius"}},
};

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {
        for (const auto& [section, body] : tree) {
            const auto known = kKeys.find(section);
            if (known == kKeys.end()) throw ConfigError("unknown section [" + section + "]");
            for (const auto& [key, value] : body) {
                if (!known->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
                if (!value.empty()) throw ConfigError("nested value under '" + key + "'");
            }
        }
    }

    bool has(const std::string& section, const std::string& key) const {
        return static_cast<bool>(tree_.get_child_optional(pt::ptree::path_type(section + "/" + key, '/')));
    }

    std::string text(const std::string& section, const std::string& key, const std::string& fallback) const {
        if (!has(section, key)) return fallback;
        return boost::trim_copy(tree_.get<std::string>(pt::ptree::path_type(section + "/" + key, '/')));
    }

    double number(const std::string& section, const std::string& key, double fallback) const {
        if (!has(section, key)) return fallback;
        return parse_number(text(section, key, ""), section, key);
    }

    std::vector<double> list(const std::string& section, const std::string& key) const {
        std::vector<double> out;
        if (!has(section, key)) return out;
        std::vector<std::string> parts;
        const std::string raw = text(section, key, "");
        boost::split(parts, raw, boost::is_any_of(", "), boost::token_compress_on);
        for (const auto& part : parts)
            if (!part.empty()) out.push_back(parse_number(part, section, key));
        return out;
    }

    bool flag(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = boost::to_lower_copy(text(section, key, ""));
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError("[" + section + "] " + key + ": expected a boolean, got '" + v + "'");
    }

private:
    static double parse_number(const std::string& s, const std::string& section, const std::string& key) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size() || !std::isfinite(v))
            throw ConfigError("[" + section + "] " + key + ": '" + s + "' is not a finite number");
        return v;
    }

    const pt::ptree& tree_;
};

std::size_t count_of(double v, const std::string& what) {
    if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError(what + " must be a positive integer");
    return static_cast<std::size_t>(v);
}

Region region_of(const std::vector<double>& v, const std::string& key) {
    if (v.size() == 2) return {v[0], v[1], 0.0, 1.0};
    if (v.size() == 4) return {v[0], v[1], v[2], v[3]};
    throw ConfigError("[domain] " + key + ": expected 2 or 4 numbers");
}

FunctionSpec function_of(const Reader& in, std::string& label) {
    const std::string kind = in.text("function", "kind", "affine");
    label = kind;
    if (kind == "affine") return Affine{in.number("function", "c0", 0.0), in.number("function", "ax", 1.0),
                                        in.number("function", "ay", 0.0)};
    if (kind == "sine") return Sine{in.number("function", "amplitude", 1.0), in.number("function", "frequency", 1.0),
                                    in.number("function", "phase", 0.0)};
    if (kind == "polynomial") return Polynomial{in.list("function", "coeffs")};
    if (kind == "piecewise-linear") return PiecewiseLinear{in.list("function", "knots"), in.list("function", "values")};
    if (kind == "indicator") return Indicator{in.number("function", "a", 0.0), in.number("function", "b", 0.5),
                                              in.number("function", "height", 1.0)};
    if (kind == "cantor") return CantorPrimitive{static_cast<int>(count_of(in.number("function", "depth", 1.0), "[function] depth"))};
    if (kind == "bump") return Bump{in.number("function", "center", 0.5), in.number("function", "half_width", 0.125),
                                    in.number("function", "amplitude", 1.0)};
    if (kind == "bump-f0") return bump_f0(in.number("function", "amplitude", 1.0));
    throw ConfigError("unknown function kind '" + kind + "'");
}

PhiSpec phi_of(const Reader& in) {
    const std::string kind = in.text("lambda", "phi", "step");
    if (kind == "step") return step_phi(in.number("lambda", "height", 1.0));
    if (kind == "clamped-power") return clamped_power_phi(in.number("lambda", "kappa", 2.0));
    if (kind == "table") return table_phi(in.list("lambda", "knots"), in.list("lambda", "values"), in.number("lambda", "kappa", 2.0));
    throw ConfigError("unknown phi kind '" + kind + "'");
}

FunctionalKind functional_of(const std::string& name) {
    if (name == "I") return FunctionalKind::I;
    if (name == "Psi") return FunctionalKind::Psi;
    if (name == "Phi") return FunctionalKind::Phi;
    if (name == "Lambda") return FunctionalKind::Lambda;
    throw ConfigError("unknown functional '" + name + "' (I, Psi, Phi, Lambda)");
}

ScenarioConfig from_tree(const pt::ptree& tree) {
    const Reader in(tree);
    ScenarioConfig c;
    try {
        c.name = in.text("scenario", "name", c.name);
        c.description = in.text("scenario", "description", "");
        c.functional = functional_of(in.text("scenario", "functional", "I"));
        c.p = in.number("scenario", "p", c.p);
        c.q = in.number("scenario", "q", c.q);
        c.eps = in.number("scenario", "eps", c.eps);
        c.eps_from_radius = in.flag("scenario", "eps_from_radius", false);
        c.axis = parse_axis(in.text("scenario", "axis", "i"));
        c.ladder = in.list("scenario", "ladder");
        const std::string energy = in.text("scenario", "energy", "computed");
        if (energy == "computed") {
            c.energy_source = EnergySource::Computed;
        } else if (energy == "approximant") {
            c.energy_source = EnergySource::Approximant;
        } else {
            c.energy_source = EnergySource::Fixed;
            c.fixed_energy = in.number("scenario", "energy", 1.0);
        }

        const std::string shape = in.text("space", "kind", "interval");
        if (shape == "interval") c.space.shape = SpaceShape::Interval;
        else if (shape == "planar") c.space.shape = SpaceShape::Planar;
        else if (shape == "cantor") c.space.shape = SpaceShape::Cantor;
        else throw ConfigError("unknown space kind '" + shape + "'");
        c.space.breakpoints = in.list("space", "breakpoints");
        c.space.weights = in.list("space", "weights");
        c.space.depth = static_cast<int>(in.number("space", "depth", 0.0));
        if (c.space.shape == SpaceShape::Cantor) {
            if (c.space.depth < 1 || c.space.depth > kMaxCantorDepth) throw ConfigError("[space] depth out of range");
            c.space.cells = in.has("space", "cells") ? count_of(in.number("space", "cells", 0.0), "[space] cells")
                                                     : cantor_min_cells(c.space.depth);
        } else {
            c.space.cells = count_of(in.number("space", "cells", 1000.0), "[space] cells");
        }

        c.function = function_of(in, c.function_label);

        c.family = parse_family(in.text("mollifier", "family", "flat-window"));
        c.index = in.number("mollifier", "i", c.index);
        c.radius = in.number("mollifier", "r", c.radius);
        c.smoothness = in.number("mollifier", "s", c.smoothness);
        c.kernel_power = in.number("mollifier", "power", c.kernel_power);
        c.radii = in.list("mollifier", "radii");
        c.heights = in.list("mollifier", "heights");

        if (in.has("lambda", "phi") || c.functional == FunctionalKind::Lambda) c.phi = phi_of(in);
        c.anchor = parse_anchor(in.text("lambda", "anchor", "y-ball"));
        c.Q = in.number("lambda", "Q", c.Q);
        c.delta = in.number("lambda", "delta", c.delta);

        if (in.has("domain", "outer")) c.domain.outer = region_of(in.list("domain", "outer"), "outer");
        if (in.has("domain", "inner")) c.domain.inner = region_of(in.list("domain", "inner"), "inner");

        c.plateau_tol = in.number("tolerance", "plateau", c.plateau_tol);
        c.has_oracle = in.has("tolerance", "oracle");
        c.oracle = in.number("tolerance", "oracle", 0.0);
        c.oracle_tol = in.number("tolerance", "oracle_tol", c.oracle_tol);
        c.has_floor = in.has("tolerance", "floor");
        c.ratio_floor = in.number("tolerance", "floor", 0.0);
        c.bound_tol = in.number("tolerance", "bound", c.bound_tol);
        c.bound_eps = in.number("tolerance", "bound_eps", c.bound_eps);
        c.bound_q_shift = in.number("tolerance", "bound_q_shift", c.bound_q_shift);
        c.min_cells_per_radius = in.number("tolerance", "min_cells_per_radius", c.min_cells_per_radius);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (c.ladder.empty()) throw ConfigError("[scenario] ladder must list at least one value");
    if (!(c.bound_q_shift > c.bound_eps)) throw ConfigError("[tolerance] bound_q_shift must exceed bound_eps");
    return c;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
    std::istringstream in(text);
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return from_tree(tree);
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void override_grid(ScenarioConfig& config, std::size_t n) {
    if (n == 0) throw ConfigError("--grid must be positive");
    config.space.cells = n;
}

}  // namespace bbmlab
