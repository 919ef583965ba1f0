// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
// below. Exit status is the number of failed criteria (0 when all pass).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "potflow/pipeline.hpp"

using namespace potflow;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Scen {
    RunConfig cfg;
    GasModel gas;
    Nozzle nz;
};

Scen load(const std::string& name, const std::vector<std::string>& ov = {}) {
    auto cfg = parse_config(find_scenario(name).ini, ov);
    GasModel g(cfg.gamma);
    auto nz = build_nozzle(cfg, g);
    return {std::move(cfg), g, std::move(nz)};
}

MarchOptions march_options(const RunConfig& c) {
    MarchOptions o;
    o.safety = c.grid.safety;
    o.phi_max = c.grid.phi_max;
    o.x_max = c.grid.x_max;
    o.vac_tol_rel = c.grid.vac_tol;
    o.grad_blowup_factor = c.grid.grad_blowup_factor;
    return o;
}

double min_of(const std::vector<double>& v) {
    double m = num::kInf;
    for (double x : v) m = std::min(m, x);
    return m;
}

int failures = 0;
double slowest = 0.0;
std::string slowest_name;

void report(int id, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void timed(const std::string& label, Clock::time_point t0) {
    const double s = seconds_since(t0);
    if (s > slowest) {
        slowest = s;
        slowest_name = label;
    }
}

std::string fmt(const char* f, auto... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

// ---- tolerances -------------------------------------------------------------
constexpr double kConstTol = 1e-12;       // 1: per-step change of (h, theta)
constexpr double kConstTime = 1.0;        // 1: seconds at N = 128
constexpr double kFiveThirdsTol = 1e-8;   // 2
constexpr double kDriftOrder = 1.8;       // 3
constexpr double kSignTol = 1e-8;         // 4
constexpr double kSpeedTol = 1e-6;        // 5, 10
constexpr double kGrowthRel = 0.15;       // 6
constexpr double kGrowthTime = 30.0;      // 6: seconds at N = 256
constexpr double kPairTol = 1e-6;         // 7
constexpr double kWallExpLo = 1.7, kWallExpHi = 2.3;  // 8
constexpr double kNetworkTol = 1e-8;      // 9
constexpr double kAngleTol = 1e-4;        // 9: radians
constexpr double kConvOrder = 1.8;        // 11
constexpr double kFluxRel = 1e-6;         // 11
constexpr double kEdgeTol = 1e-12;        // 12: relative, half-line predicate
constexpr double kScenarioTime = 60.0;    // every scenario run

void c1_constant_solution() {
    auto s = load("straight-uniform");
    const auto t0 = Clock::now();
    auto in = build_potential_inlet(s.nz, s.gas, 128);
    Marcher mc(s.gas, &s.nz.wall);
    auto st = mc.initial_state(in);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const auto h = st.h, th = st.theta;
        mc.step(st, mc.cfl_step(st, s.cfg.grid.safety), s.cfg.grid.vac_tol);
        for (std::size_t i = 0; i < st.size(); ++i)
            worst = std::max({worst, std::abs(st.h[i] - h[i]), std::abs(st.theta[i] - th[i])});
    }
    const double secs = seconds_since(t0);
    report(1, worst <= kConstTol && secs < kConstTime,
           fmt("straight-uniform, 10^4 steps at N=128: max per-step change %.2e (tol %.0e), %.3f s (limit %.0f s)",
               worst, kConstTol, secs, kConstTime));
}

void c2_turning_budget() {
    const double d = std::abs(GasModel(5.0 / 3.0).h_max() - num::kPi / 2);
    bool decreasing = true;
    std::string list;
    double prev = num::kInf;
    for (double g : {1.2, 1.4, 5.0 / 3.0, 2.0, 3.0}) {
        const double h = GasModel(g).h_max();
        decreasing = decreasing && h < prev;
        prev = h;
        list += fmt(" %.6f", h);
    }
    report(2, d <= kFiveThirdsTol && decreasing,
           fmt("|h_max(5/3) - pi/2| = %.2e (tol %.0e); h_max over gamma {1.2,1.4,5/3,2,3}:%s %s", d, kFiveThirdsTol,
               list.c_str(), decreasing ? "strictly decreasing" : "NOT decreasing"));
}

void c3_drift() {
    std::vector<double> drift;
    const auto t0 = Clock::now();
    for (int N : {64, 128, 256}) {
        auto s = load("straight-expanding-fan");
        auto in = build_potential_inlet(s.nz, s.gas, N);
        std::vector<CharacteristicTracer::Trace> tr;
        for (double f : {0.1, 0.2, 0.3, 0.4, 0.5}) tr.push_back({f * in.m, +1});
        for (double f : {0.5, 0.6, 0.7, 0.8, 0.9}) tr.push_back({f * in.m, -1});
        CharacteristicTracer T(tr);
        auto o = march_options(s.cfg);
        o.phi_max = 2.0;
        o.sink = std::ref(T);
        march(in, s.gas, &s.nz.wall, o);
        drift.push_back(T.max_drift());
    }
    timed("drift", t0);
    const double p1 = num::observed_order(drift[0], drift[1]), p2 = num::observed_order(drift[1], drift[2]);
    report(3, std::min(p1, p2) >= kDriftOrder,
           fmt("straight-expanding-fan, 10 traced characteristics to phi=2: drift %.2e %.2e %.2e at N=64/128/256, "
               "orders %.2f %.2f (min %.1f)",
               drift[0], drift[1], drift[2], p1, p2, kDriftOrder));
}

void c4_signs() {
    bool ok = true;
    std::string detail;
    int runs = 0;
    for (const char* name : {"straight-uniform", "straight-expanding-fan", "convex-arctan-wall", "convex-powerlaw-wall",
                             "near-limit-inlet", "asymptotic-flare"}) {
        auto s = load(name);
        const auto t0 = Clock::now();
        auto in = build_potential_inlet(s.nz, s.gas, s.cfg.grid.N);
        auto o = march_options(s.cfg);
        o.continue_past_vacuum = false;
        const auto out = march(in, s.gas, &s.nz.wall, o);
        timed(name, t0);
        if (!out.admissible_inlet) {
            ok = false;
            detail += fmt(" %s: inlet not admissible;", name);
            continue;
        }
        ++runs;
        const bool pass = out.max_W_scaled <= kSignTol && out.min_Z_scaled >= -kSignTol && out.max_Qphi_scaled <= kSignTol;
        ok = ok && pass;
        detail += fmt(" %s W<=%.1e Z>=%.1e Qphi<=%.1e;", name, out.max_W_scaled, out.min_Z_scaled, out.max_Qphi_scaled);
    }
    report(4, ok && runs > 0, fmt("scaled signs on %d admissible-inlet runs (tol %.0e):%s", runs, kSignTol, detail.c_str()));
}

void c5_straight_speeds() {
    bool ok = true;
    std::string detail;
    for (const char* name : {"straight-uniform", "straight-expanding-fan"}) {
        auto s = load(name, {"grid.phi_max=1000"});
        const auto t0 = Clock::now();
        auto in = build_potential_inlet(s.nz, s.gas, s.cfg.grid.N);
        const auto out = march(in, s.gas, &s.nz.wall, march_options(s.cfg));
        timed(name, t0);
        const double q0min = min_of(in.q0);
        const bool pass = out.tag == SolveOutcome::Tag::NoVacuumReached && out.phi_end >= 1000.0 &&
                          out.min_q >= q0min - kSpeedTol && out.max_q < s.gas.c_max();
        ok = ok && pass;
        detail += fmt(" %s to phi=%.0f: min q %.9f vs inf q0 %.9f, max q %.6f < c_max %.6f, %s;", name, out.phi_end,
                      out.min_q, q0min, out.max_q, s.gas.c_max(), SolveOutcome::name(out.tag));
    }
    report(5, ok, detail.substr(1));
}

void c6_growth() {
    bool ok = true;
    std::string detail;
    for (double gamma : {1.4, 2.0}) {
        auto s = load("straight-expanding-fan", {fmt("gas.gamma=%.17g", gamma), "grid.N=256", "grid.phi_max=1000"});
        const auto t0 = Clock::now();
        auto in = build_potential_inlet(s.nz, s.gas, 256);
        std::vector<double> phi, negQ;
        auto o = march_options(s.cfg);
        o.sink = [&](const StripState& st) {
            if (st.phi < 10.0) return;
            phi.push_back(st.phi + 1.0);
            negQ.push_back(-s.gas.hodograph_A(s.gas.local(st.h[0]).q));
        };
        const auto out = march(in, s.gas, &s.nz.wall, o);
        const double secs = seconds_since(t0);
        timed("growth", t0);
        const double alpha = num::loglog_fit(phi, negQ).first;
        const double want = 2.0 / (gamma + 1.0);
        const double rel = std::abs(alpha - want) / want;
        const bool pass = out.tag == SolveOutcome::Tag::NoVacuumReached && rel <= kGrowthRel && secs < kGrowthTime;
        ok = ok && pass;
        detail += fmt(" gamma=%.1f: alpha %.4f vs 2/(gamma+1) %.4f (rel %.1f%%, tol %.0f%%), %.2f s;", gamma, alpha, want,
                      100 * rel, 100 * kGrowthRel, secs);
    }
    report(6, ok, "straight-expanding-fan, -Q(phi,0) ~ (phi+1)^alpha on phi in [10, 1000] at N=256:" + detail);
}

// Shared by 7, 8 and 9: the convex-arctan-wall pipeline at one resolution.
struct ArctanRun {
    RunResult r;
    double secs;
};

const ArctanRun& arctan(int N) {
    static std::map<int, ArctanRun> cache;
    auto it = cache.find(N);
    if (it != cache.end()) return it->second;
    auto cfg = parse_config(find_scenario("convex-arctan-wall").ini, {"grid.N=" + std::to_string(N)});
    const auto t0 = Clock::now();
    auto r = execute(cfg, false);
    const double secs = seconds_since(t0);
    timed("convex-arctan-wall N=" + std::to_string(N), t0);
    return cache.emplace(N, ArctanRun{std::move(r), secs}).first->second;
}

void c7_vacuum_bounds() {
    const auto& run = arctan(128);
    const auto& r = run.r;
    if (r.exit_code != 0 || !r.flow) {
        report(7, false, "convex-arctan-wall did not complete: " + r.error);
        return;
    }
    const auto& out = r.flow->outcome;
    const bool at_wall = out.tag == SolveOutcome::Tag::VacuumAtWall && out.vacuum_node == out.final_state.last();
    const auto b = bounds_check(*r.criteria, out, r.nozzle->wall);
    const bool pass = at_wall && b.holds && r.wall_pair_violation <= kPairTol;
    report(7, pass,
           fmt("convex-arctan-wall N=128: %s at node %zu of %zu; x_check %.6f - d <= x0 %.6f <= x_hat %.6f + d "
               "(d = %.4f) %s; pairwise wall inequality worst violation %.2e (tol %.0e)",
               SolveOutcome::name(out.tag), out.vacuum_node, out.final_state.last(), b.x_check, b.x0, b.x_hat, b.delta,
               b.holds ? "holds" : "FAILS", r.wall_pair_violation, kPairTol));
}

void c8_wall_exponent() {
    bool ok = true;
    std::string detail;
    for (int N : {64, 128, 256}) {
        const auto& r = arctan(N).r;
        if (!r.boundary) {
            ok = false;
            detail += fmt(" N=%d: no boundary report;", N);
            continue;
        }
        const auto& B = *r.boundary;
        const bool pass = B.fit_samples >= 4 && B.p_phi >= kWallExpLo && B.p_phi <= kWallExpHi;
        ok = ok && pass;
        detail += fmt(" N=%d p=%.3f (%d samples);", N, B.p_phi, B.fit_samples);
    }
    report(8, ok, fmt("c_max - q(phi,m) ~ (zeta-phi)^p on convex-arctan-wall, p in [%.1f, %.1f]:", kWallExpLo, kWallExpHi) +
                      detail);
}

void c9_free_boundary() {
    const auto& r = arctan(128).r;
    if (!r.flow || !r.flow->continuation || !r.boundary) {
        report(9, false, "convex-arctan-wall: no continuation report");
        return;
    }
    const auto& c = *r.flow->continuation;
    const auto& B = *r.boundary;
    const double dev = r.flow->boundary_angle_dev;
    const bool pass = c.nodes_in_region > 0 && c.max_diff_region <= kNetworkTol && dev <= kAngleTol && B.dq_dn_decreasing;
    report(9, pass,
           fmt("truncations n0=%d/%d agree to %.2e on %zu guaranteed-region nodes (tol %.0e); boundary angle deviation "
               "%.2e rad (tol %.0e); |dq/dn| at d=%.4f,%.4f,%.4f: %.4e %.4e %.4e %s",
               c.n0, c.n0 + 1, c.max_diff_region, c.nodes_in_region, kNetworkTol, dev, kAngleTol, B.distance[0],
               B.distance[1], B.distance[2], B.dq_dn[0], B.dq_dn[1], B.dq_dn[2],
               B.dq_dn_decreasing ? "strictly decreasing" : "NOT decreasing"));
}

void c10_shocks() {
    bool ok = true;
    std::string detail;
    for (const char* name : {"inadmissible-inlet", "nonconvex-bump"}) {
        auto s = load(name);
        const auto t0 = Clock::now();
        auto in = build_potential_inlet(s.nz, s.gas, s.cfg.grid.N);
        const auto out = march(in, s.gas, &s.nz.wall, march_options(s.cfg));
        timed(name, t0);
        const double q0min = min_of(in.q0);
        const bool pass = out.tag == SolveOutcome::Tag::ShockDetected && std::isfinite(out.phi_end) &&
                          out.min_q >= q0min - kSpeedTol;
        ok = ok && pass;
        detail += fmt(" %s: %s at phi=%.3f (%s), min q %.6f vs inf q0 %.6f;", name, SolveOutcome::name(out.tag),
                      out.phi_end, out.shock ? out.shock->criterion.c_str() : "-", out.min_q, q0min);
    }
    for (const char* name : {"convex-arctan-wall", "convex-powerlaw-wall"}) {
        auto s = load(name);
        const auto t0 = Clock::now();
        auto in = build_potential_inlet(s.nz, s.gas, s.cfg.grid.N);
        auto o = march_options(s.cfg);
        o.continue_past_vacuum = false;
        const auto out = march(in, s.gas, &s.nz.wall, o);
        timed(name, t0);
        const bool pass = !out.shock && out.tag == SolveOutcome::Tag::VacuumAtWall;
        ok = ok && pass;
        detail += fmt(" %s: %s, detector %s;", name, SolveOutcome::name(out.tag), out.shock ? "FIRED" : "silent");
    }
    report(10, ok, detail.substr(1));
}

void c11_physical_plane() {
    std::vector<double> closure, flux_err;
    auto s = load("straight-expanding-fan");
    const auto t0 = Clock::now();
    for (int N : {64, 128, 256}) {
        GlobalOptions go;
        go.march = march_options(s.cfg);
        go.march.phi_max = 10.0;
        go.sections = {2.0, 4.0};
        const auto G = solve_global(s.nz, s.gas, N, go);
        closure.push_back(G.closure_defect);
        if (N == 256)
            for (const auto& c : G.sections)
                flux_err.push_back(c.complete() ? std::abs(c.flux() - G.inlet.m) / G.inlet.m : num::kInf);
    }
    timed("closure", t0);
    std::vector<double> wall;
    for (int N : {64, 128, 256}) wall.push_back(arctan(N).r.flow->wall_deviation);
    const double pc1 = num::observed_order(closure[0], closure[1]), pc2 = num::observed_order(closure[1], closure[2]);
    const double pw1 = num::observed_order(wall[0], wall[1]), pw2 = num::observed_order(wall[1], wall[2]);
    double worst_flux = 0.0;
    for (double e : flux_err) worst_flux = std::max(worst_flux, e);
    const bool pass = std::min(pc1, pc2) >= kConvOrder && std::min(pw1, pw2) >= kConvOrder && worst_flux <= kFluxRel &&
                      flux_err.size() == 2;
    report(11, pass,
           fmt("closure defect (straight-expanding-fan, phi=10) %.2e %.2e %.2e orders %.2f %.2f; wall-streamline "
               "deviation (convex-arctan-wall) %.2e %.2e %.2e orders %.2f %.2f (min %.1f); mass flux at x=2,4 "
               "(N=256) rel err %.1e %.1e (tol %.0e)",
               closure[0], closure[1], closure[2], pc1, pc2, wall[0], wall[1], wall[2], pw1, pw2, kConvOrder,
               flux_err.size() > 0 ? flux_err[0] : num::kInf, flux_err.size() > 1 ? flux_err[1] : num::kInf, kFluxRel));
}

void c12_inlet_vacuum() {
    auto s = load("inlet-vacuum");
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    try {
        const auto r = solve_with_inlet_vacuum(s.nz, s.gas, s.cfg.grid.N, march_options(s.cfg));
        const bool solved = r.lower && r.upper && r.lower->tag != SolveOutcome::Tag::ShockDetected &&
                            r.upper->tag != SolveOutcome::Tag::ShockDetected;
        const auto& V = r.region;
        const bool formulas = V.s1 == -s.nz.inlet.d1(V.y1) && V.s2 == -s.nz.inlet.d1(V.y2) &&
                              V.x1 == s.nz.inlet.x(V.y1) && V.x2 == s.nz.inlet.x(V.y2);
        ok = solved && formulas && r.max_edge_deviation <= kEdgeTol;
        detail += fmt("[%.1f, %.1f]: sub-flows %s / %s, traced edges off the half-lines by %.1e (tol %.0e);", V.y1, V.y2,
                      r.lower ? SolveOutcome::name(r.lower->tag) : "-", r.upper ? SolveOutcome::name(r.upper->tag) : "-",
                      r.max_edge_deviation, kEdgeTol);
    } catch (const std::exception& e) {
        ok = false;
        detail += std::string("main case threw: ") + e.what() + ";";
    }
    auto degenerate = [&](double y1, double y2, auto&& check, const char* what) {
        auto d = load("inlet-vacuum", {fmt("q0.y1=%.17g", y1), fmt("q0.y2=%.17g", y2)});
        try {
            const auto r = solve_with_inlet_vacuum(d.nz, d.gas, d.cfg.grid.N, march_options(d.cfg));
            const bool pass = check(r) && r.max_edge_deviation <= kEdgeTol;
            ok = ok && pass;
            detail += fmt(" y1=%.1f y2=%.1f: %s %s;", y1, y2, what, pass ? "yes" : "NO");
        } catch (const std::exception& e) {
            ok = false;
            detail += fmt(" y1=%.1f y2=%.1f threw: %s;", y1, y2, e.what());
        }
    };
    degenerate(
        0.5, 0.5,
        [&](const InletVacuumResult& r) {
            const double x = r.region.x1 + 1.0;
            return r.region.half_line() && r.lower && r.upper && r.region.contains(x, r.region.lower(x)) &&
                   !r.region.contains(x, r.region.lower(x) + 1e-6);
        },
        "inner vacuum is a single half-line");
    degenerate(
        0.0, 0.4,
        [&](const InletVacuumResult& r) {
            return r.region.lower_is_axis() && r.region.s1 == 0.0 && !r.lower && r.upper &&
                   r.region.contains(r.region.x1 + 5.0, 0.0);
        },
        "lower boundary is the axis");
    timed("inlet-vacuum", t0);
    report(12, ok, "inlet-vacuum " + detail);
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    const std::vector<std::function<void()>> all = {c1_constant_solution, c2_turning_budget, c3_drift, c4_signs,
                                                    c5_straight_speeds,   c6_growth,         c7_vacuum_bounds,
                                                    c8_wall_exponent,     c9_free_boundary,  c10_shocks,
                                                    c11_physical_plane,   c12_inlet_vacuum};
    for (std::size_t k = 0; k < all.size(); ++k) {
        try {
            all[k]();
        } catch (const std::exception& e) {
            report(static_cast<int>(k + 1), false, std::string("threw: ") + e.what());
        }
    }
    std::printf("slowest scenario run: %s, %.2f s (limit %.0f s)%s\n", slowest_name.c_str(), slowest, kScenarioTime,
                slowest < kScenarioTime ? "" : "  EXCEEDED");
    if (slowest >= kScenarioTime) ++failures;
    std::printf("%d of 12 criteria failed; total %.1f s\n", failures, seconds_since(t0));
    return failures;
}
