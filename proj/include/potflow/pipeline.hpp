#pragma once

// The run pipeline behind `flow run`: validate, evaluate the design
// criteria, march (and continue past vacuum), reconstruct, then write
// report.json and fields.csv. Exit codes: 0 completed (any physical
// outcome), 1 invalid input, 2 numeric failure.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "potflow/config.hpp"
#include "potflow/criteria.hpp"
#include "potflow/physmap.hpp"
#include "potflow/vacuum.hpp"

namespace potflow {

inline constexpr const char* kVersion = "0.1.0";

struct RunResult {
    int exit_code = 0;
    std::string error;  // "<config key>: <condition>: <detail>" when exit_code != 0
    nlohmann::json report;
    std::optional<Nozzle> nozzle;
    ValidationReport validation;
    std::optional<CriteriaReport> criteria;
    std::optional<GlobalFlow> flow;
    std::optional<BoundaryReport> boundary;
    std::optional<InletVacuumResult> inlet_vacuum;
    double wall_pair_violation = 0.0;
};

/// x_check - delta <= x0 <= x_hat + delta, with delta three wall cells of
/// arc length around the vacuum point.
struct BoundsCheck {
    double x_check = num::kInf, x0 = num::kInf, x_hat = num::kInf, delta = 0.0;
    bool holds = false;
};

inline BoundsCheck bounds_check(const CriteriaReport& c, const SolveOutcome& out, const WallCurve& w) {
    BoundsCheck b;
    b.x0 = out.x0;
    b.x_check = c.x_check.x_check.value_or(num::kInf);
    b.x_hat = c.x_hat.value_or(num::kInf);
    const auto& tr = out.wall_trace;
    double cell = 0.0;
    for (std::size_t k = tr.size() > 10 ? tr.size() - 10 : 1; k < tr.size(); ++k) {
        const double dx = tr[k].x - tr[k - 1].x, dy = w.f(tr[k].x) - w.f(tr[k - 1].x);
        cell = std::max(cell, std::hypot(dx, dy));
    }
    b.delta = 3.0 * cell;
    b.holds = b.x_check - b.delta <= b.x0 && b.x0 <= b.x_hat + b.delta;
    return b;
}

namespace detail {

using nlohmann::json;

inline json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }
inline json opt_or_null(const std::optional<double>& v) { return v ? num_or_null(*v) : json(); }

inline json to_json(const pt::ptree& t) {
    json j = json::object();
    for (const auto& [k, v] : t) {
        if (v.empty()) j[k] = v.data();
        else j[k] = to_json(v);
    }
    return j;
}

inline json to_json(const ValidationReport& v) {
    json checks = json::array();
    for (const auto& c : v.checks)
        checks.push_back({{"label", c.label}, {"key", config_key_of(c.label)}, {"pass", c.pass}, {"fatal", c.fatal},
                          {"message", c.message}});
    json viol = json::array();
    for (const auto& [a, b] : v.violations) viol.push_back({a, b});
    return {{"ok", v.ok()},
            {"checks", checks},
            {"min_margin", num_or_null(v.min_margin)},
            {"argmin_margin", v.argmin_margin},
            {"strictly_positive", v.strictly_positive},
            {"violations", viol}};
}

inline json to_json(const CriteriaReport& c) {
    return {{"shock", {{"necessary", c.shock.necessary},
                       {"sup", num_or_null(c.shock.sup)},
                       {"witness_psi", c.shock.witness},
                       {"straight_nozzle", c.straight_wall},
                       {"conclusive", c.straight_wall}}},
            {"turning_budget", c.budget},
            {"x_hat", opt_or_null(c.x_hat)},
            {"x_hat_inconclusive", c.x_hat_inconclusive},
            {"x_check", {{"value", opt_or_null(c.x_check.x_check)},
                         {"zeta_used", c.x_check.zeta_used},
                         {"saturated", c.x_check.saturated}}},
            {"x_check_capped", {{"value", opt_or_null(c.x_check_capped.x_check)},
                                {"zeta_used", c.x_check_capped.zeta_used},
                                {"saturated", c.x_check_capped.saturated}}},
            {"asymptotic", {{"verdict", name(c.asymptotic.verdict)},
                            {"branch", c.asymptotic.branch},
                            {"growth_decades", c.asymptotic.growth_decades}}}};
}

inline json to_json(const SolveOutcome& o) {
    json j = {{"tag", SolveOutcome::name(o.tag)},
              {"phi_end", o.phi_end},
              {"steps", o.steps},
              {"zeta", num_or_null(o.zeta)},
              {"x0", num_or_null(o.x0)},
              {"continued", o.continued}};
    if (o.tag == SolveOutcome::Tag::VacuumAtWall) j["vacuum_node"] = o.vacuum_node;
    if (o.shock)
        j["shock"] = {{"phi", o.shock->phi}, {"psi", o.shock->psi}, {"criterion", o.shock->criterion},
                      {"value", o.shock->value}, {"x_wall", o.final_state.x_wall}};
    return j;
}

inline json march_diagnostics(const SolveOutcome& o) {
    return {{"min_q", num_or_null(o.min_q)},
            {"max_q", num_or_null(o.max_q)},
            {"max_W_scaled", num_or_null(o.max_W_scaled)},
            {"min_Z_scaled", num_or_null(o.min_Z_scaled)},
            {"max_Qphi_scaled", num_or_null(o.max_Qphi_scaled)},
            {"sign_violation_phi", num_or_null(o.sign_violation_phi)},
            {"admissible_inlet", o.admissible_inlet},
            {"wall_turning_monotone", o.wall_turning_monotone},
            {"max_lip_phi", o.max_lip_phi},
            {"max_lip_psi", o.max_lip_psi}};
}

inline std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace detail

/// Runs the configured pipeline. With write_files the report and field
/// table go to output.dir.
inline RunResult execute(const RunConfig& cfg, bool write_files = true) {
    using nlohmann::json;
    using namespace detail;
    RunResult r;
    json& rep = r.report;
    rep["meta"] = {{"tool", "potflow"}, {"version", kVersion}, {"name", cfg.name}, {"mode", name(cfg.mode)},
                   {"timestamp", timestamp()}};
    rep["config"] = to_json(cfg.tree);
    auto fail = [&](int code, std::string msg) {
        r.exit_code = code;
        r.error = std::move(msg);
        rep["error"] = {{"exit_code", code}, {"message", r.error}};
    };
    std::vector<FieldSnapshot> snaps;
    std::vector<FieldPoint> extra;
    try {
        const GasModel gas(cfg.gamma);
        r.nozzle = build_nozzle(cfg, gas);
        const Nozzle& nz = *r.nozzle;
        r.validation = validate(nz, gas);
        rep["validation"] = to_json(r.validation);
        if (r.validation.fatal_failure()) {
            for (const auto& c : r.validation.checks)
                if (!c.pass && c.fatal) {
                    fail(1, config_key_of(c.label) + ": " + c.label + " violated: " + c.message);
                    break;
                }
        } else if (cfg.mode != Mode::ValidateOnly) {
            const auto inlet = build_potential_inlet(nz, gas, cfg.grid.N);
            r.criteria = evaluate_criteria(nz, gas, inlet, r.validation, cfg.zeta_cap);
            if (cfg.mode != Mode::CriteriaOnly) {
                MarchOptions mo;
                mo.safety = cfg.grid.safety;
                mo.phi_max = cfg.grid.phi_max;
                mo.x_max = cfg.grid.x_max;
                mo.vac_tol_rel = cfg.grid.vac_tol;
                mo.grad_blowup_factor = cfg.grid.grad_blowup_factor;
                if (nz.q0.has_vacuum_segment()) {
                    r.inlet_vacuum = solve_with_inlet_vacuum(nz, gas, cfg.grid.N, mo);
                    const auto& iv = *r.inlet_vacuum;
                    const auto& V = iv.region;
                    json sub = json::object();
                    if (iv.lower) sub["lower"] = {{"outcome", to_json(*iv.lower)}, {"diagnostics", march_diagnostics(*iv.lower)}};
                    if (iv.upper) sub["upper"] = {{"outcome", to_json(*iv.upper)}, {"diagnostics", march_diagnostics(*iv.upper)}};
                    rep["outcome"] = sub;
                    rep["diagnostics"] = {{"inner_vacuum", {{"y1", V.y1}, {"y2", V.y2}, {"x1", V.x1}, {"x2", V.x2},
                                                             {"s1", V.s1}, {"s2", V.s2}, {"half_line", V.half_line()},
                                                             {"lower_is_axis", V.lower_is_axis()},
                                                             {"joins_wall_vacuum", V.joins_wall_vacuum()}}},
                                          {"max_edge_deviation", iv.max_edge_deviation},
                                          {"min_q", num_or_null(iv.min_q)},
                                          {"max_q", num_or_null(iv.max_q)}};
                    snaps = iv.lower_fields;
                    snaps.insert(snaps.end(), iv.upper_fields.begin(), iv.upper_fields.end());
                } else {
                    GlobalOptions go;
                    go.march = mo;
                    go.snapshot_stride = cfg.output.snapshot_stride;
                    go.continue_factor = cfg.grid.continue_factor;
                    go.sections = cfg.output.sections;
                    go.continue_vacuum = cfg.mode == Mode::SolveContinue;
                    r.flow = solve_global(nz, gas, cfg.grid.N, go);
                    const GlobalFlow& g = *r.flow;
                    const auto& out = g.outcome;
                    rep["outcome"] = to_json(out);
                    json d = march_diagnostics(out);
                    d["min_q_gas"] = num_or_null(g.min_q);
                    d["max_q_gas"] = num_or_null(g.max_q);
                    d["closure_defect"] = g.closure_defect;
                    d["wall_deviation"] = g.wall_deviation;
                    d["min_u"] = num_or_null(g.min_u);
                    json secs = json::array();
                    for (const auto& c : g.sections)
                        secs.push_back({{"X", c.X}, {"complete", c.complete()},
                                        {"flux", c.complete() ? json(c.flux()) : json()},
                                        {"relative_error", c.complete() ? json((c.flux() - g.inlet.m) / g.inlet.m) : json()}});
                    d["sections"] = secs;
                    d["mass_flux"] = g.inlet.m;
                    std::vector<double> th, h;
                    for (const auto& w : out.wall_trace) {
                        th.push_back(w.theta);
                        h.push_back(w.h);
                    }
                    r.wall_pair_violation = wall_pair_violation(th, h);
                    d["wall_pair_violation"] = r.wall_pair_violation;
                    if (out.tag == SolveOutcome::Tag::VacuumAtWall) {
                        // The solve fixes zeta, which sharpens the lower bound.
                        if (!cfg.zeta_cap) r.criteria = evaluate_criteria(nz, gas, g.inlet, r.validation, out.zeta);
                        const auto b = bounds_check(*r.criteria, out, nz.wall);
                        d["bounds"] = {{"x_check", num_or_null(b.x_check)}, {"x0", b.x0},
                                       {"x_hat", num_or_null(b.x_hat)}, {"delta", b.delta}, {"holds", b.holds}};
                        d["vacuum_point_margin"] = vacuum_point_inequality(nz.wall, g.inlet, gas, out.zeta, out.x0);
                    }
                    if (g.region) {
                        const auto& R = *g.region;
                        d["free_boundary"] = {{"x0", R.x0}, {"y0", R.y0}, {"slope", R.slope},
                                              {"potential_defect", g.boundary_phi_defect},
                                              {"angle_deviation", g.boundary_angle_dev},
                                              {"theta_gap_at_zeta", g.theta_gap_at_zeta},
                                              {"theta_below_top", g.theta_below_top},
                                              {"theta_top_monotone", g.theta_top_monotone}};
                        r.boundary = boundary_diagnostics(g, gas, nz.wall);
                        const auto& B = *r.boundary;
                        d["boundary"] = {{"p_phi", B.p_phi}, {"p_x", B.p_x}, {"fit_samples", B.fit_samples},
                                         {"fit_confident", B.fit_confident}, {"rplus_wall", B.rplus_wall},
                                         {"rplus_spread", B.rplus_spread}, {"simple_wave", B.simple_wave},
                                         {"distance", B.distance}, {"dq_dn", B.dq_dn},
                                         {"dq_dn_decreasing", B.dq_dn_decreasing},
                                         {"indicator_applicable", B.indicator_applicable},
                                         {"indicator", B.indicator}, {"indicator_growing", B.indicator_growing}};
                        double x_hi = R.x0, y_hi = R.y0;
                        for (std::size_t i = 0; i < g.x_last.size(); ++i) {
                            x_hi = std::max(x_hi, g.x_last[i]);
                            y_hi = std::max(y_hi, g.y_last[i]);
                        }
                        extra = g.vacuum_fill(x_hi, 1.25 * y_hi, 40, 40);
                    }
                    if (g.continuation) {
                        const auto& c = *g.continuation;
                        d["continuation"] = {{"n0", c.n0}, {"k0", c.k0}, {"k1", c.k1},
                                             {"nodes_in_region", c.nodes_in_region},
                                             {"max_diff_region", c.max_diff_region},
                                             {"max_diff_common", c.max_diff_common},
                                             {"phi_reach", c.phi_reach}, {"theta_top", c.theta_top},
                                             {"max_theta_interior", c.max_theta_interior},
                                             {"min_rplus", c.min_rplus}, {"rplus_budget", c.rplus_budget},
                                             {"network_nodes", c.network_nodes}};
                    }
                    rep["diagnostics"] = d;
                    snaps = g.snapshots;
                }
            }
            rep["criteria"] = to_json(*r.criteria);
            if (r.flow) rep["criteria"]["wall_pair_violation"] = r.wall_pair_violation;
        }
    } catch (const ConfigError& e) {
        fail(1, e.what());
    } catch (const DataError& e) {
        fail(1, std::string("input: ") + e.what());
    } catch (const DomainError& e) {
        fail(1, std::string("input: ") + e.what());
    } catch (const BranchError& e) {
        fail(1, std::string("input: ") + e.what());
    } catch (const std::exception& e) {
        fail(2, std::string("numeric: ") + e.what());
    }
    if (write_files) {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.output.dir);
        if (cfg.output.json) {
            std::ofstream os(fs::path(cfg.output.dir) / "report.json");
            os << rep.dump(2) << '\n';
        }
        if (cfg.output.csv) write_csv((fs::path(cfg.output.dir) / "fields.csv").string(), snaps, extra);
        if (cfg.output.fields_json) {
            ExportMeta meta{cfg.gamma, r.flow ? r.flow->inlet.m : 0.0,
                            r.flow ? SolveOutcome::name(r.flow->outcome.tag) : "", r.flow ? r.flow->outcome.zeta : num::kInf,
                            r.flow ? r.flow->outcome.x0 : num::kInf};
            write_json((fs::path(cfg.output.dir) / "fields.json").string(), snaps, meta);
        }
    }
    return r;
}

}  // namespace potflow
