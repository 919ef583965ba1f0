#pragma once

// Run configuration: an INI file (sections run, gas, wall, inlet, q0, grid,
// output, criteria) read with boost::property_tree, command-line overrides
// of the form section.key=value, and builders that turn the resolved tree
// into a nozzle. Errors name the offending key.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "potflow/errors.hpp"
#include "potflow/gas.hpp"
#include "potflow/nozzle.hpp"

namespace potflow {

namespace pt = boost::property_tree;

enum class Mode { ValidateOnly, CriteriaOnly, Solve, SolveContinue };

inline const char* name(Mode m) {
    switch (m) {
        case Mode::ValidateOnly: return "validate-only";
        case Mode::CriteriaOnly: return "criteria-only";
        case Mode::Solve: return "solve";
        case Mode::SolveContinue: return "solve+continue";
    }
    return "?";
}

struct GridSettings {
    int N = 128;
    double safety = 0.8;
    double phi_max = num::kInf, x_max = num::kInf;
    double vac_tol = 1e-6;
    double grad_blowup_factor = 50.0;
    double continue_factor = 0.5;
};

struct OutputSettings {
    std::string dir = ".";
    bool json = true, csv = true, fields_json = false;
    int snapshot_stride = 0;  // 0: final state only
    std::vector<double> sections;
};

struct RunConfig {
    pt::ptree tree;  // resolved key/value tree, embedded in the report
    std::string name;
    Mode mode = Mode::SolveContinue;
    double gamma = 1.4;
    GridSettings grid;
    OutputSettings output;
    std::optional<double> zeta_cap;  // criteria.zeta_cap; the solve supplies it otherwise
};

namespace detail {

inline std::string get_str(const pt::ptree& t, const std::string& key, std::optional<std::string> def = std::nullopt) {
    if (auto v = t.get_optional<std::string>(key)) return boost::algorithm::trim_copy(*v);
    if (def) return *def;
    throw ConfigError(key + ": missing");
}

inline double parse_double(const std::string& key, const std::string& s) {
    const std::string v = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(s));
    if (v == "inf" || v == "+inf") return num::kInf;
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key + ": '" + s + "' is not a number");
    }
}

inline bool has(const pt::ptree& t, const std::string& key) { return t.get_optional<std::string>(key).has_value(); }

inline double get_num(const pt::ptree& t, const std::string& key, std::optional<double> def = std::nullopt) {
    if (has(t, key)) return parse_double(key, get_str(t, key));
    if (def) return *def;
    throw ConfigError(key + ": missing");
}

// Angle in radians, given as key (radians) or key_deg (degrees).
inline double get_angle(const pt::ptree& t, const std::string& key, std::optional<double> def = std::nullopt) {
    if (has(t, key) && has(t, key + "_deg")) throw ConfigError(key + ": give either radians or degrees, not both");
    if (has(t, key + "_deg")) return get_num(t, key + "_deg") * num::kPi / 180.0;
    return get_num(t, key, def);
}

inline std::vector<double> get_list(const pt::ptree& t, const std::string& key) {
    std::vector<std::string> parts;
    const std::string s = get_str(t, key);
    boost::algorithm::split(parts, s, boost::is_any_of(", "), boost::token_compress_on);
    std::vector<double> out;
    for (const auto& p : parts)
        if (!p.empty()) out.push_back(parse_double(key, p));
    return out;
}

// Speed given as an absolute value (key), a Mach number (key_mach) or a
// fraction of the supersonic range (key_frac: c_star + f (c_max - c_star)).
inline double get_speed(const pt::ptree& t, const GasModel& gas, const std::string& key) {
    const int given = has(t, key) + has(t, key + "_mach") + has(t, key + "_frac");
    if (given == 0) throw ConfigError(key + ": missing (or " + key + "_mach, " + key + "_frac)");
    if (given > 1) throw ConfigError(key + ": give exactly one of " + key + ", " + key + "_mach, " + key + "_frac");
    if (has(t, key)) return get_num(t, key);
    if (has(t, key + "_mach")) {
        const double M = get_num(t, key + "_mach");
        if (!(M > 0.0)) throw ConfigError(key + "_mach: must be positive");
        // q^2 = M^2 c^2 with c^2 = 1 - (gamma - 1) q^2 / 2.
        return M / std::sqrt(1.0 + 0.5 * (gas.gamma() - 1.0) * M * M);
    }
    const double f = get_num(t, key + "_frac");
    return gas.c_star() + f * (gas.c_max() - gas.c_star());
}

inline std::vector<std::pair<double, double>> read_points(const std::string& key, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(key + ": cannot read '" + path + "'");
    std::vector<std::pair<double, double>> pts;
    std::string line;
    while (std::getline(is, line)) {
        boost::algorithm::trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> parts;
        boost::algorithm::split(parts, line, boost::is_any_of(", \t"), boost::token_compress_on);
        if (parts.size() < 2) throw ConfigError(key + ": malformed line '" + line + "' in " + path);
        pts.emplace_back(parse_double(key, parts[0]), parse_double(key, parts[1]));
    }
    return pts;
}

// Spline sample arrays from inline lists (a_key, b_key) or a two-column file.
inline void spline_source(const pt::ptree& t, const std::string& sec, const std::string& a_key, const std::string& b_key,
                          std::vector<double>& a, std::vector<double>& b) {
    const bool inline_pts = has(t, sec + "." + a_key) || has(t, sec + "." + b_key);
    const bool file = has(t, sec + ".points_file");
    if (inline_pts == file) throw ConfigError(sec + ": give exactly one spline source (" + a_key + "/" + b_key + " or points_file)");
    if (file) {
        for (const auto& [u, v] : read_points(sec + ".points_file", get_str(t, sec + ".points_file"))) {
            a.push_back(u);
            b.push_back(v);
        }
    } else {
        a = get_list(t, sec + "." + a_key);
        b = get_list(t, sec + "." + b_key);
    }
    if (a.size() != b.size() || a.size() < 4) throw ConfigError(sec + ": spline needs at least 4 matching samples");
}

}  // namespace detail

/// Parses INI text and applies overrides ("section.key=value").
inline RunConfig parse_config(const std::string& ini_text, const std::vector<std::string>& overrides = {}) {
    RunConfig c;
    std::istringstream is(ini_text);
    try {
        pt::ini_parser::read_ini(is, c.tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || o.find('.') == std::string::npos || o.find('.') > eq)
            throw ConfigError("override '" + o + "': expected section.key=value");
        c.tree.put(boost::algorithm::trim_copy(o.substr(0, eq)), boost::algorithm::trim_copy(o.substr(eq + 1)));
    }
    using namespace detail;
    const auto& t = c.tree;
    c.name = get_str(t, "run.name", std::string("unnamed"));
    const std::string mode = get_str(t, "run.mode", std::string("solve+continue"));
    if (mode == "validate-only") c.mode = Mode::ValidateOnly;
    else if (mode == "criteria-only") c.mode = Mode::CriteriaOnly;
    else if (mode == "solve") c.mode = Mode::Solve;
    else if (mode == "solve+continue") c.mode = Mode::SolveContinue;
    else throw ConfigError("run.mode: unknown mode '" + mode + "'");

    c.gamma = get_num(t, "gas.gamma");
    if (!(c.gamma > 1.0)) throw ConfigError("gas.gamma: must exceed 1");

    auto& g = c.grid;
    const double N = get_num(t, "grid.N", 128.0);
    if (!(N >= 16.0) || N != std::floor(N) || N > 1e6) throw ConfigError("grid.N: must be an integer >= 16");
    g.N = static_cast<int>(N);
    g.safety = get_num(t, "grid.safety", g.safety);
    if (!(g.safety > 0.0 && g.safety <= 1.0)) throw ConfigError("grid.safety: must lie in (0, 1]");
    g.phi_max = get_num(t, "grid.phi_max", g.phi_max);
    g.x_max = get_num(t, "grid.x_max", g.x_max);
    g.vac_tol = get_num(t, "grid.vac_tol", g.vac_tol);
    if (!(g.vac_tol > 0.0 && g.vac_tol < 1e-2)) throw ConfigError("grid.vac_tol: must lie in (0, 1e-2)");
    g.grad_blowup_factor = get_num(t, "grid.grad_blowup_factor", g.grad_blowup_factor);
    if (!(g.grad_blowup_factor > 1.0)) throw ConfigError("grid.grad_blowup_factor: must exceed 1");
    g.continue_factor = get_num(t, "grid.continue_factor", g.continue_factor);
    if (!(g.phi_max > 0.0) || !(g.x_max > 0.0)) throw ConfigError("grid.phi_max/x_max: must be positive");

    auto& o = c.output;
    o.dir = get_str(t, "output.dir", "out/" + c.name);
    const std::string formats = boost::algorithm::to_lower_copy(get_str(t, "output.formats", std::string("json,csv")));
    std::vector<std::string> fs;
    boost::algorithm::split(fs, formats, boost::is_any_of(", "), boost::token_compress_on);
    o.json = o.csv = o.fields_json = false;
    for (const auto& f : fs) {
        if (f == "json") o.json = true;
        else if (f == "csv") o.csv = true;
        else if (f == "fields-json") o.fields_json = true;
        else if (!f.empty()) throw ConfigError("output.formats: unknown format '" + f + "'");
    }
    const double stride = get_num(t, "output.snapshot_stride", 0.0);
    if (!(stride >= 0.0) || stride != std::floor(stride)) throw ConfigError("output.snapshot_stride: non-negative integer");
    o.snapshot_stride = static_cast<int>(stride);
    if (has(t, "output.sections")) o.sections = get_list(t, "output.sections");
    if (has(t, "criteria.zeta_cap")) c.zeta_cap = get_num(t, "criteria.zeta_cap");
    return c;
}

inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot read '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), overrides);
}

/// INI text of the resolved tree (sections sorted as stored).
inline std::string to_ini(const RunConfig& c) {
    std::ostringstream os;
    pt::ini_parser::write_ini(os, c.tree);
    return os.str();
}

inline WallCurve build_wall(const RunConfig& c) {
    using namespace detail;
    const auto& t = c.tree;
    const std::string fam = get_str(t, "wall.family");
    auto n = [&](const std::string& k, std::optional<double> d = std::nullopt) { return get_num(t, "wall." + k, d); };
    try {
        if (fam == "line") return WallCurve::line(n("l0", 0.0), n("y0"), n("slope", 0.0));
        if (fam == "power-law") return WallCurve::power_law(n("l0"), n("a"), n("b"), n("k"));
        if (fam == "flare") return WallCurve::flare(n("l0"), n("y0"), n("s0", 0.0), n("c"), n("beta"));
        if (fam == "arctan-profile")
            return WallCurve::arctan_profile(n("l0", 0.0), n("y0"), get_angle(t, "wall.theta0", 0.0),
                                             get_angle(t, "wall.dtheta"), n("x_s"), n("width"));
        if (fam == "bump")
            return WallCurve::bump(n("l0", 0.0), n("y0"), get_angle(t, "wall.theta0", 0.0), get_angle(t, "wall.delta"),
                                   n("x_b"), n("width"));
        if (fam == "spline") {
            std::vector<double> x, y;
            spline_source(t, "wall", "x", "y", x, y);
            WallTail tail;
            const std::string tk = get_str(t, "wall.tail", std::string("none"));
            if (tk == "slope-limit") tail = {WallTail::Kind::SlopeLimit, n("tail_slope"), num::kInf};
            else if (tk == "unbounded") tail = {WallTail::Kind::Unbounded, 0.0, num::kInf};
            else if (tk != "none") throw ConfigError("wall.tail: unknown tail '" + tk + "'");
            return WallCurve::spline(std::move(x), std::move(y), n("d_left", num::kInf), n("d_right", num::kInf), tail);
        }
    } catch (const DataError& e) {
        throw ConfigError(std::string("wall: ") + e.what());
    }
    throw ConfigError("wall.family: unknown family '" + fam + "'");
}

inline InletCurve build_inlet(const RunConfig& c, const WallCurve& w) {
    using namespace detail;
    const auto& t = c.tree;
    const std::string fam = get_str(t, "inlet.family");
    const double l0 = w.l0(), Y = w.f(l0), s = w.d1(l0);
    try {
        if (fam == "vertical") return InletCurve::vertical(l0, Y);
        if (fam == "arc") return InletCurve::arc(l0, Y, s);
        if (fam == "smoothstep") return InletCurve::smoothstep(l0, Y, s);
        if (fam == "parabola") return InletCurve::parabola(l0, Y, s);
        if (fam == "spline") {
            std::vector<double> y, x;
            spline_source(t, "inlet", "y", "x", y, x);
            return InletCurve::spline(std::move(y), std::move(x), 0.0, -s);
        }
    } catch (const DataError& e) {
        throw ConfigError(std::string("inlet: ") + e.what());
    }
    throw ConfigError("inlet.family: unknown family '" + fam + "'");
}

inline SpeedProfile build_profile(const RunConfig& c, const GasModel& gas, const WallCurve& w, const InletCurve& in) {
    using namespace detail;
    const auto& t = c.tree;
    const std::string p = get_str(t, "q0.profile");
    const double Y = in.height();
    try {
        if (p == "constant") return profiles::constant(get_speed(t, gas, "q0.q"));
        if (p == "cosine") return profiles::cosine(get_speed(t, gas, "q0.q"), get_num(t, "q0.amp"), Y);
        if (p == "cosine-bump") return profiles::cosine_bump(get_speed(t, gas, "q0.q"), get_num(t, "q0.amp"), Y);
        if (p == "admissible-cosine-bump")
            return profiles::admissible_cosine_bump(gas, in, get_speed(t, gas, "q0.q"), get_num(t, "q0.fraction", 0.5));
        if (p == "compatible-quadratic") return profiles::compatible_quadratic(get_speed(t, gas, "q0.q"), w, Y);
        if (p == "saturating")
            return profiles::saturating(gas, in, get_speed(t, gas, "q0.q"), get_num(t, "q0.sign", 1.0),
                                        get_num(t, "q0.fraction", 1.0));
        if (p == "vacuum-segment")
            return profiles::vacuum_segment(gas, in, get_num(t, "q0.y1"), get_num(t, "q0.y2"),
                                            get_num(t, "q0.fraction", 1.0));
    } catch (const DataError& e) {
        throw ConfigError(std::string("q0: ") + e.what());
    }
    throw ConfigError("q0.profile: unknown profile '" + p + "'");
}

inline Nozzle build_nozzle(const RunConfig& c, const GasModel& gas) {
    auto w = build_wall(c);
    auto in = build_inlet(c, w);
    auto q = build_profile(c, gas, w, in);
    return {std::move(w), std::move(in), std::move(q)};
}

/// Config section that owns a validation label.
inline std::string config_key_of(const std::string& label) {
    static const std::map<std::string, std::string> keys = {
        {"wall.height", "wall"},           {"wall.slope", "wall"},
        {"wall.convexity", "wall"},        {"wall.extent", "wall"},
        {"inlet.height", "inlet"},         {"inlet.top-point", "inlet"},
        {"inlet.axis-slope", "inlet"},     {"inlet.wall-slope", "inlet"},
        {"inlet.concavity", "inlet"},      {"inlet.speed-range", "q0"},
        {"inlet.axis-compatibility", "q0"}, {"inlet.wall-compatibility", "q0"},
        {"inlet.admissibility", "q0"}};
    const auto it = keys.find(label);
    return it == keys.end() ? "config" : it->second;
}

// ---- built-in scenarios ----------------------------------------------------

struct Scenario {
    std::string name, doc, ini;
};

inline const std::vector<Scenario>& scenarios() {
    static const std::vector<Scenario> lib = {
        {"straight-uniform", "horizontal straight wall, uniform Mach 2.02 inlet: the constant solution",
         R"([run]
name = straight-uniform
mode = solve
[gas]
gamma = 1.4
[wall]
family = line
l0 = 0
y0 = 1
slope = 0
[inlet]
family = vertical
[q0]
profile = constant
q = 1.5
[grid]
N = 128
phi_max = 1000
)"},
        {"straight-expanding-fan",
         "diverging straight wall, circular-arc inlet, admissible speed bump: smooth accelerating flow",
         R"([run]
name = straight-expanding-fan
mode = solve
[gas]
gamma = 1.4
[wall]
family = line
l0 = 1
y0 = 1
slope = 0.15113521805829508
[inlet]
family = arc
[q0]
profile = admissible-cosine-bump
q_frac = 0.25
fraction = 0.5
[grid]
N = 128
phi_max = 1000
[output]
sections = 2, 4
)"},
        {"convex-arctan-wall", "wall turning by 85 degrees after x = 0.5, Mach 3 inlet: vacuum forms on the wall",
         R"([run]
name = convex-arctan-wall
mode = solve+continue
[gas]
gamma = 1.4
[wall]
family = arctan-profile
l0 = 0
y0 = 1
theta0 = 0
dtheta_deg = 85
x_s = 0.5
width = 1
[inlet]
family = vertical
[q0]
profile = constant
q_mach = 3
[grid]
N = 128
)"},
        {"convex-powerlaw-wall", "cubic wall f = 1 + 0.1 x^3, Mach 4 inlet: vacuum on an unbounded-slope wall",
         R"([run]
name = convex-powerlaw-wall
mode = solve+continue
[gas]
gamma = 1.4
[wall]
family = power-law
l0 = 0
a = 1
b = 0.1
k = 3
[inlet]
family = vertical
[q0]
profile = constant
q_mach = 4
[grid]
N = 128
)"},
        {"near-limit-inlet", "convex-arctan-wall geometry with q0 close to the limit speed; sweep q0.q_frac toward 1",
         R"([run]
name = near-limit-inlet
mode = solve+continue
[gas]
gamma = 1.4
[wall]
family = arctan-profile
l0 = 0
y0 = 1
theta0 = 0
dtheta_deg = 85
x_s = 0.5
width = 1
[inlet]
family = vertical
[q0]
profile = constant
q_frac = 0.99
[grid]
N = 128
)"},
        {"nonconvex-bump", "wall convex then concave around x = 5, uniform Mach 2 inlet: a shock forms",
         R"([run]
name = nonconvex-bump
mode = solve
[gas]
gamma = 1.4
[wall]
family = bump
l0 = 0
y0 = 1
theta0 = 0
delta = -0.15
x_b = 5
width = 0.7
[inlet]
family = vertical
[q0]
profile = constant
q_mach = 2
[grid]
N = 128
phi_max = 1000
)"},
        {"inadmissible-inlet", "straight nozzle whose inlet speed gradient breaks the admissibility bound: a shock forms",
         R"([run]
name = inadmissible-inlet
mode = solve
[gas]
gamma = 1.4
[wall]
family = line
l0 = 0
y0 = 1
slope = 0
[inlet]
family = vertical
[q0]
profile = cosine
q = 1.6
amp = 0.05
[grid]
N = 128
phi_max = 1000
)"},
        {"inlet-vacuum", "limit speed on the inlet segment [0.4, 0.6]: two sub-flows around an inner vacuum wedge",
         R"([run]
name = inlet-vacuum
mode = solve
[gas]
gamma = 1.4
[wall]
family = line
l0 = 1
y0 = 1
slope = 0.15113521805829508
[inlet]
family = arc
[q0]
profile = vacuum-segment
y1 = 0.4
y2 = 0.6
fraction = 0.5
[grid]
N = 128
phi_max = 10
)"},
        {"asymptotic-flare", "wall with f'' = 0.1 x^-1.05 and a finite limiting slope: asymptotic vacuum indicator",
         R"([run]
name = asymptotic-flare
mode = solve
[gas]
gamma = 1.4
[wall]
family = flare
l0 = 1
y0 = 1
s0 = 0.3
c = 0.1
beta = 1.05
[inlet]
family = arc
[q0]
profile = compatible-quadratic
q_mach = 2
[grid]
N = 128
x_max = 10000
)"},
    };
    return lib;
}

inline const Scenario& find_scenario(const std::string& name) {
    for (const auto& s : scenarios())
        if (s.name == name) return s;
    throw ConfigError("scenario '" + name + "' is not in the library");
}

}  // namespace potflow
