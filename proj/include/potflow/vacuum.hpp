#pragma once

// Flow past the first vacuum point. The strip march is continued with the
// top edge turned into a free boundary (h = h_max, fixed angle). A
// characteristic network built from the state at zeta provides the
// truncation-level comparison: every network node depends only on the two
// characteristics through it, so truncated strips agree wherever their
// domains of determinacy overlap.

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "potflow/errors.hpp"
#include "potflow/gas.hpp"
#include "potflow/march.hpp"
#include "potflow/nozzle.hpp"
#include "potflow/numerics.hpp"
#include "potflow/physmap.hpp"

namespace potflow {

// ---- vacuum region above the wall -----------------------------------------

struct VacuumRegion {
    double x0 = 0.0, y0 = 0.0, slope = 0.0;
    double zeta = 0.0;  // potential at the first vacuum point
    double c_max = 0.0;

    double angle() const { return std::atan(slope); }
    double boundary_y(double x) const { return y0 + slope * (x - x0); }
    /// Closed region x >= x0 above the tangent half-line, with a tolerance
    /// that admits points on the boundary itself.
    bool contains(double x, double y, double tol = 1e-9) const {
        return x >= x0 - tol && y >= boundary_y(x) - tol * (1.0 + std::abs(y));
    }
    /// Affine potential on the closed vacuum region; its restriction to the
    /// boundary is zeta + c_max sqrt(1 + slope^2) (x - x0).
    double phi(double x, double y) const {
        return zeta + c_max * ((x - x0) + slope * (y - y0)) / std::sqrt(1.0 + slope * slope);
    }
    double u() const { return c_max / std::sqrt(1.0 + slope * slope); }
    double v() const { return c_max * slope / std::sqrt(1.0 + slope * slope); }
};

// ---- characteristic network -------------------------------------------------

struct NetNode {
    double phi, psi, h, theta, lambda;
};

struct CharNetwork {
    std::vector<std::vector<NetNode>> rows;
    std::size_t node_count() const {
        std::size_t n = 0;
        for (const auto& r : rows) n += r.size();
        return n;
    }
};

/// Network of + and - characteristics from data on phi = phi0 at the given
/// psi nodes (psi[0] = 0 on the axis). Node invariants are exact copies of
/// the parents' invariants; positions use the trapezoid average of lambda.
inline CharNetwork characteristic_network(const GasModel& gas, double phi0, const std::vector<double>& psi,
                                          const std::vector<double>& h, const std::vector<double>& theta,
                                          std::size_t max_rows = static_cast<std::size_t>(-1)) {
    if (psi.size() < 2 || psi.front() != 0.0) throw DataError("network data must start on the axis");
    CharNetwork net;
    std::vector<NetNode> row;
    for (std::size_t j = 0; j < psi.size(); ++j)
        row.push_back({phi0, psi[j], h[j], theta[j], gas.local(h[j]).lambda});
    net.rows.push_back(row);
    bool front_on_axis = true;
    while (net.rows.size() < max_rows) {
        const auto& r = net.rows.back();
        std::vector<NetNode> next;
        next.reserve(r.size());
        if (!front_on_axis) {
            const NetNode& B = r.front();
            const double hp = B.h + B.theta;
            const double lp = gas.local(hp).lambda;
            const double b = 0.5 * (B.lambda + lp);
            if (!(b > 0.0)) break;
            next.push_back({B.phi + B.psi / b, 0.0, hp, 0.0, lp});
        }
        for (std::size_t i = 0; i + 1 < r.size(); ++i) {
            const NetNode &A = r[i], &B = r[i + 1];
            const double RA = A.h - A.theta, RB = B.h + B.theta;
            const double hp = 0.5 * (RA + RB), tp = 0.5 * (RB - RA);
            const double lp = gas.local(hp).lambda;
            const double a = 0.5 * (A.lambda + lp), b = 0.5 * (B.lambda + lp);
            const double phi = (B.psi - A.psi + a * A.phi + b * B.phi) / (a + b);
            next.push_back({phi, A.psi + a * (phi - A.phi), hp, tp, lp});
        }
        if (next.empty()) break;
        front_on_axis = !front_on_axis;
        net.rows.push_back(std::move(next));
    }
    return net;
}

struct ContinuationReport {
    int n0 = 0;
    double k0 = 0.0, k1 = 0.0;           // truncation levels m (1 - 2^-n)
    double lambda_k0 = 0.0;              // b^(1/2)(Q(zeta, k0))
    std::size_t nodes_in_region = 0;     // coarse-network nodes inside the guaranteed region
    double max_diff_region = 0.0;        // max node difference there (h, theta, phi, psi)
    double max_diff_common = 0.0;        // over all common nodes
    double phi_reach = 0.0;              // largest phi covered by the coarse network
    double theta_top = 0.0;              // arctan f'(x0)
    double max_theta_interior = -num::kInf;
    double min_rplus = num::kInf, rplus_budget = 0.0;  // R+ inside stays >= h_max - theta_top
    std::size_t network_nodes = 0;
};

/// Two truncation levels n0 and n0 + 1 of the continuation, built from the
/// state at zeta. Requires N divisible by 2^(n0+1).
inline ContinuationReport continue_past_vacuum(const StripState& at_zeta, const GasModel& gas, const WallCurve& wall,
                                               int n0 = 3) {
    const std::size_t N = at_zeta.last();
    const std::size_t div = std::size_t{1} << (n0 + 1);
    if (N % div != 0) throw DataError("grid.N must be divisible by " + std::to_string(div) + " for the continuation");
    const double hmax = gas.h_max();
    if (!(at_zeta.h[N] >= hmax * (1.0 - 1e-4))) throw DataError("continuation: top node is not at the vacuum state");
    ContinuationReport rep;
    rep.n0 = n0;
    rep.theta_top = wall.angle(at_zeta.x_wall);
    if (std::abs(at_zeta.theta[N] - rep.theta_top) > 1e-9)
        throw DataError("continuation: total inlet turning does not match arctan f'(x0)");
    for (std::size_t i = 0; i < N; ++i)
        if (!(at_zeta.h[i] > 0.0)) throw DataError("continuation: data not strictly supersonic");

    const std::size_t j0 = N - N / (std::size_t{1} << n0), j1 = N - N / (std::size_t{1} << (n0 + 1));
    std::vector<double> psi(N + 1);
    for (std::size_t j = 0; j <= N; ++j) psi[j] = at_zeta.psi(j);
    auto cut = [](const std::vector<double>& v, std::size_t j) { return std::vector<double>(v.begin(), v.begin() + j + 1); };
    const auto net0 = characteristic_network(gas, at_zeta.phi, cut(psi, j0), cut(at_zeta.h, j0), cut(at_zeta.theta, j0));
    const auto net1 = characteristic_network(gas, at_zeta.phi, cut(psi, j1), cut(at_zeta.h, j1), cut(at_zeta.theta, j1));
    rep.k0 = psi[j0];
    rep.k1 = psi[j1];
    rep.lambda_k0 = gas.local(at_zeta.h[j0]).lambda;
    rep.network_nodes = net1.node_count();
    for (std::size_t r = 0; r < net0.rows.size() && r < net1.rows.size(); ++r) {
        const auto &a = net0.rows[r], &b = net1.rows[r];
        for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
            const double d = std::max({std::abs(a[i].h - b[i].h), std::abs(a[i].theta - b[i].theta),
                                       std::abs(a[i].phi - b[i].phi), std::abs(a[i].psi - b[i].psi)});
            rep.max_diff_common = std::max(rep.max_diff_common, d);
            if (a[i].psi <= rep.k0 - rep.lambda_k0 * (a[i].phi - at_zeta.phi)) {
                ++rep.nodes_in_region;
                rep.max_diff_region = std::max(rep.max_diff_region, d);
            }
            rep.phi_reach = std::max(rep.phi_reach, a[i].phi);
        }
    }
    rep.rplus_budget = hmax - rep.theta_top;
    for (std::size_t r = 1; r < net1.rows.size(); ++r)
        for (const auto& nd : net1.rows[r]) {
            rep.max_theta_interior = std::max(rep.max_theta_interior, nd.theta);
            rep.min_rplus = std::min(rep.min_rplus, nd.h - nd.theta);
        }
    return rep;
}

// ---- global flow -----------------------------------------------------------

struct GlobalFlow {
    SolveOutcome outcome;
    PotentialInletData inlet;
    std::vector<FieldSnapshot> snapshots;
    std::optional<VacuumRegion> region;
    std::optional<ContinuationReport> continuation;
    StripState last;
    std::vector<double> x_last, y_last;
    double min_q = num::kInf, max_q = 0.0;  // gas nodes of the whole run
    double boundary_phi_defect = 0.0;       // free-boundary nodes against the affine potential
    double boundary_angle_dev = 0.0;        // traced free-boundary segments against arctan f'(x0)
    double theta_gap_at_zeta = 0.0;         // theta(zeta, m) - theta(zeta, psi_{N-1}): unresolved band
    bool theta_below_top = true;            // theta < theta(zeta, m) strictly inside
    bool theta_top_monotone = true;         // theta(phi, psi_{N-1}) nondecreasing after zeta
    double min_u = num::kInf;
    double closure_defect = 0.0, wall_deviation = 0.0;
    std::vector<SectionCut> sections;

    /// Samples of the vacuum region on a physical lattice (flag 1, rho = 0).
    std::vector<FieldPoint> vacuum_fill(double x_hi, double y_hi, int nx, int ny) const {
        std::vector<FieldPoint> pts;
        if (!region) return pts;
        const auto& R = *region;
        const double th = R.angle();
        for (int i = 0; i <= nx; ++i)
            for (int j = 0; j <= ny; ++j) {
                const double x = R.x0 + (x_hi - R.x0) * i / nx;
                const double y = y_hi * j / ny;
                if (!R.contains(x, y, 0.0)) continue;
                pts.push_back({R.phi(x, y), outcome.final_state.psi(outcome.final_state.last()), x, y, th, R.c_max, 0.0,
                               num::kInf, 1});
            }
        return pts;
    }
};

struct GlobalOptions {
    MarchOptions march;
    int snapshot_stride = 0;
    int n0 = 3;                       // truncation level of the network comparison
    double continue_factor = 0.5;     // continuation length in units of zeta when continue_phi is unset
    std::vector<double> sections;     // vertical sections for the mass-flux check
    bool build_network = true;
    bool continue_vacuum = true;      // false stops at zeta
};

/// March, continue past vacuum when it forms, and reconstruct the physical
/// field.
inline GlobalFlow solve_global(const Nozzle& nz, const GasModel& gas, int N, const GlobalOptions& go = {}) {
    GlobalFlow g;
    g.inlet = build_potential_inlet(nz, gas, N);
    const double hmax = gas.h_max();
    Reconstructor rec(gas, g.inlet, nz.inlet, &nz.wall, go.snapshot_stride, go.sections);
    MarchOptions mo = go.march;
    mo.continue_past_vacuum = go.continue_vacuum;
    double zeta = num::kInf, th_top = 0.0;
    double prev_top_inner = -num::kInf;
    double bx = num::kNaN, by = num::kNaN, bphi = num::kNaN;
    mo.sink = [&](const StripState& s) {
        rec(s);
        if (go.march.sink) go.march.sink(s);
        const std::size_t n = s.size(), Nn = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (s.h[i] >= hmax) continue;
            const double q = gas.local(s.h[i]).q;
            g.min_q = std::min(g.min_q, q);
            g.max_q = std::max(g.max_q, q);
        }
        const double x = rec.x()[Nn], y = rec.y()[Nn];
        if (s.top != Edge::Vacuum) {
            // Candidate vacuum point: the last wall-top state is the one at zeta.
            bx = x;
            by = y;
            bphi = s.phi;
            return;
        }
        if (!g.region) {
            zeta = bphi;
            th_top = s.theta[Nn];
            g.theta_gap_at_zeta = th_top - s.theta[Nn - 1];
            VacuumRegion R;
            R.x0 = bx;
            R.y0 = by;
            R.slope = std::tan(th_top);
            R.zeta = zeta;
            R.c_max = gas.c_max();
            g.region = R;
        }
        if (x != bx || y != by)
            g.boundary_angle_dev = std::max(g.boundary_angle_dev, std::abs(std::atan2(y - by, x - bx) - th_top));
        bx = x;
        by = y;
        for (std::size_t i = 0; i < Nn; ++i)
            if (!(s.theta[i] < th_top)) g.theta_below_top = false;
        if (s.theta[Nn - 1] < prev_top_inner - 1e-14) g.theta_top_monotone = false;
        prev_top_inner = s.theta[Nn - 1];
        // Free-boundary node against the affine potential of the vacuum region.
        g.boundary_phi_defect = std::max(g.boundary_phi_defect, std::abs(g.region->phi(x, y) - s.phi));
    };
    // The continuation stops at zeta (1 + continue_factor) unless a limit is given.
    const bool open_end = !std::isfinite(go.march.continue_phi);
    if (open_end && go.continue_vacuum) {
        // First pass without continuation finds zeta cheaply.
        MarchOptions probe = go.march;
        probe.continue_past_vacuum = false;
        probe.sink = nullptr;
        const auto pre = march(g.inlet, gas, &nz.wall, probe);
        if (pre.tag == SolveOutcome::Tag::VacuumAtWall) mo.continue_phi = pre.zeta * (1.0 + go.continue_factor);
    }
    g.outcome = march(g.inlet, gas, &nz.wall, mo);
    g.last = g.outcome.final_state;
    rec.capture(g.last);
    g.snapshots = rec.snapshots();
    g.x_last = rec.x();
    g.y_last = rec.y();
    g.min_u = rec.min_u();
    g.closure_defect = rec.closure_defect(g.last);
    g.wall_deviation = rec.wall_deviation();
    g.sections = rec.sections();
    const bool divisible = N % (1 << (go.n0 + 1)) == 0;
    if (g.outcome.tag == SolveOutcome::Tag::VacuumAtWall && go.build_network && go.continue_vacuum && divisible)
        g.continuation = continue_past_vacuum(g.outcome.at_vacuum, gas, nz.wall, go.n0);
    return g;
}

// ---- boundary diagnostics ---------------------------------------------------

struct BoundaryReport {
    // Wall approach: c_max - q(phi, m) ~ a (zeta - phi)^p on the last decade before zeta.
    double p_phi = 0.0, p_x = 0.0;
    std::size_t fit_samples = 0;
    bool fit_confident = false;
    // R+ on the top eighth of the strip at zeta. Uniform R+ makes the flow
    // next to the free boundary a simple wave with straight - characteristics.
    double rplus_wall = 0.0, rplus_spread = 0.0;
    bool simple_wave = false;
    // Normal derivative of the speed at decreasing distances to the free boundary.
    std::vector<double> distance, dq_dn;
    bool dq_dn_decreasing = false;
    // Blow-up indicator (c_max - q)^(-(gamma+1+eps)/(4 gamma - 4)) |grad q . e| along (-1, f'(x0)).
    bool indicator_applicable = false;
    std::vector<double> indicator;
    bool indicator_growing = false;
};

namespace detail {

// Exponent fit of c_max - q against (zeta - phi) and (x0 - x) on the last
// tenth of [0, zeta] before the vacuum point.
inline void fit_wall_approach(const SolveOutcome& out, BoundaryReport& rep) {
    const auto& tr = out.wall_trace;
    const double d_hi = 0.1 * (out.zeta - tr.front().phi);
    std::vector<double> a, b, ax;
    for (const auto& w : tr) {
        const double d = out.zeta - w.phi;
        if (!(d > 0.0) || d > d_hi || !(w.deficit > 0.0)) continue;
        a.push_back(d);
        ax.push_back(out.x0 - w.x);
        b.push_back(w.deficit);
    }
    rep.fit_samples = a.size();
    if (a.size() < 4) return;
    rep.p_phi = num::loglog_fit(a, b).first;
    rep.p_x = num::loglog_fit(ax, b).first;
    rep.fit_confident = a.size() >= 8;
}

// Simple wave next to a convex wall: the - characteristic leaving the wall
// at x_w is the straight ray of direction theta_w - mu carrying
// h = R+ + theta_w.
struct WallRays {
    const GasModel& gas;
    const WallCurve& wall;
    double rplus, x0;

    struct Ray {
        double x, y, alpha, deficit;
    };
    Ray ray(double xw) const {
        const double th = wall.angle(xw);
        const double h = std::min(rplus + th, gas.h_max());
        const auto L = gas.local_exact(h);
        const double mu = L.q > 0.0 ? std::asin(std::min(1.0, std::sqrt(std::max(L.sigma, 0.0)) / L.q)) : 0.0;
        return {xw, wall.f(xw), th - mu, L.deficit};
    }
    // Signed side of (px, py) relative to the ray from x_w; positive above.
    double side(double xw, double px, double py) const {
        const Ray r = ray(xw);
        return std::cos(r.alpha) * (py - r.y) - std::sin(r.alpha) * (px - r.x);
    }
    // c_max - q at a point below the boundary ray, NaN outside the fan.
    double deficit(double px, double py) const {
        const double hi = x0;
        if (side(hi, px, py) >= 0.0) return num::kNaN;
        double span = 1e-3 * std::max(1.0, std::abs(x0));
        double lo = hi - span;
        while (side(lo, px, py) < 0.0) {
            span *= 2.0;
            lo = hi - span;
            if (lo <= wall.l0()) {
                lo = wall.l0();
                if (side(lo, px, py) < 0.0) return num::kNaN;
                break;
            }
        }
        const double xw = num::bracketed_root([&](double x) { return side(x, px, py); }, lo, hi, side(lo, px, py),
                                              side(hi, px, py), 60);
        return ray(xw).deficit;
    }
};

}  // namespace detail

/// Wall-approach exponent, normal derivative trend and blow-up indicator.
/// The last two evaluate the simple wave next to the free boundary, whose
/// speed range is confined to one psi cell of the strip. Refuses runs
/// without a vacuum.
inline BoundaryReport boundary_diagnostics(const GlobalFlow& g, const GasModel& gas, const WallCurve& wall,
                                           double eps = 0.1) {
    if (g.outcome.tag != SolveOutcome::Tag::VacuumAtWall || !g.region)
        throw DataError("boundary diagnostics need a run that reached vacuum at the wall");
    BoundaryReport rep;
    detail::fit_wall_approach(g.outcome, rep);

    const StripState& z = g.outcome.at_vacuum;
    const std::size_t N = z.last();
    const std::size_t k0 = N - std::max<std::size_t>(N / 8, 2);
    rep.rplus_wall = g.outcome.wall_trace.back().h - g.outcome.wall_trace.back().theta;
    for (std::size_t i = k0; i < N; ++i)
        rep.rplus_spread = std::max(rep.rplus_spread, std::abs(z.r_plus(i) - rep.rplus_wall));
    rep.simple_wave = rep.rplus_spread <= 1e-6 * gas.h_max();

    const auto& R = *g.region;
    const detail::WallRays rays{gas, wall, rep.rplus_wall, g.outcome.x0};
    const double th = wall.angle(g.outcome.x0);
    const double L = 0.25 * std::max(1.0, R.y0);
    const double bx = R.x0 + L * std::cos(th), by = R.y0 + L * std::sin(th);
    const double nx = std::sin(th), ny = -std::cos(th);  // into the gas
    const double en = std::sqrt(1.0 + R.slope * R.slope);
    const double ex = -1.0 / en, ey = R.slope / en;
    const double expo = -(gas.gamma() + 1.0 + eps) / (4.0 * gas.gamma() - 4.0);
    const double d0 = 0.02 * L;
    for (double f : {1.0, 0.5, 0.25}) {
        const double d = d0 * f, dl = d / 8.0;
        const double px = bx + d * nx, py = by + d * ny;
        const double dn = (rays.deficit(px + dl * nx, py + dl * ny) - rays.deficit(px - dl * nx, py - dl * ny)) / (2 * dl);
        const double de = (rays.deficit(px + dl * ex, py + dl * ey) - rays.deficit(px - dl * ex, py - dl * ey)) / (2 * dl);
        rep.distance.push_back(d);
        rep.dq_dn.push_back(std::abs(dn));
        rep.indicator.push_back(std::pow(rays.deficit(px, py), expo) * std::abs(de));
    }
    bool finite = true;
    for (std::size_t k = 0; k < 3; ++k) finite = finite && std::isfinite(rep.dq_dn[k]) && std::isfinite(rep.indicator[k]);
    rep.dq_dn_decreasing = finite && rep.dq_dn[0] > rep.dq_dn[1] && rep.dq_dn[1] > rep.dq_dn[2];
    rep.indicator_growing = finite && rep.indicator[2] > rep.indicator[1] && rep.indicator[1] > rep.indicator[0];
    rep.indicator_applicable = gas.gamma() < 3.0 && wall.d2(R.x0) > 0.0;
    return rep;
}

// ---- vacuum on the inlet ----------------------------------------------------

/// Inner vacuum region behind an inlet segment [y1, y2] where q0 = c_max:
/// bounded by the inlet and the half-lines y = y_k - Upsilon'(y_k)(x - Upsilon(y_k)).
struct InnerVacuum {
    double y1 = 0.0, y2 = 0.0, Y = 0.0;
    double x1 = 0.0, x2 = 0.0;  // Upsilon(y_k)
    double s1 = 0.0, s2 = 0.0;  // -Upsilon'(y_k)
    const InletCurve* inlet = nullptr;
    const WallCurve* wall = nullptr;

    bool half_line() const { return y1 == y2; }
    bool lower_is_axis() const { return y1 == 0.0; }
    bool joins_wall_vacuum() const { return y2 == Y; }
    double lower(double x) const { return y1 + s1 * (x - x1); }
    double upper(double x) const { return y2 + s2 * (x - x2); }

    bool contains(double x, double y, double tol = 1e-12) const {
        const double t = tol * (1.0 + std::abs(y));
        if (!joins_wall_vacuum() && (x < x2 - tol || y > upper(x) + t)) return false;
        if (joins_wall_vacuum() && wall && x >= wall->l0() && y > wall->f(x) + t) return false;
        if (x >= x1) return y >= lower(x) - t;
        return y >= y1 - t && inlet && x >= inlet->x(y) - tol;
    }
};

struct InletVacuumResult {
    InnerVacuum region;
    std::optional<SolveOutcome> lower, upper;
    std::vector<double> lower_edge_x, lower_edge_y, upper_edge_x, upper_edge_y;  // traced free-boundary nodes
    std::vector<FieldSnapshot> lower_fields, upper_fields;  // final states of the sub-strips
    double max_edge_deviation = 0.0;  // traced edges against the half-line formulas
    double min_q = num::kInf, max_q = 0.0;
};

/// Two independent sub-strip solves below and above the vacuum segment,
/// run concurrently.
inline InletVacuumResult solve_with_inlet_vacuum(const Nozzle& nz, const GasModel& gas, int N,
                                                 const MarchOptions& mo = {}) {
    if (!nz.q0.has_vacuum_segment()) throw DataError("inlet.vac_lo/vac_hi: profile has no vacuum segment");
    const double Y = nz.inlet.height();
    InletVacuumResult res;
    auto& V = res.region;
    V.y1 = nz.q0.vac_lo;
    V.y2 = nz.q0.vac_hi;
    V.Y = Y;
    V.x1 = nz.inlet.x(V.y1);
    V.x2 = nz.inlet.x(V.y2);
    V.s1 = -nz.inlet.d1(V.y1);
    V.s2 = -nz.inlet.d1(V.y2);
    V.inlet = &nz.inlet;
    V.wall = &nz.wall;
    for (double y = 0.0; y <= Y; y += Y / 256.0) {
        if (y >= V.y1 && y <= V.y2) continue;
        if (!(nz.q0.q(y) > gas.c_star())) throw DataError("inlet.speed-range: q0 reaches the sonic speed");
    }

    struct Sub {
        SolveOutcome out;
        std::vector<double> ex, ey;
        std::vector<FieldSnapshot> fields;
        double dev = 0.0;
    };
    auto run = [&](double lo, double hi, bool edge_top) {
        Sub sub;
        auto in = build_potential_inlet(nz, gas, N, lo, hi);
        Reconstructor rec(gas, in, nz.inlet, &nz.wall);
        MarchOptions o = mo;
        const double ys = edge_top ? hi : lo;
        const double xs = nz.inlet.x(ys), ss = -nz.inlet.d1(ys);
        o.sink = [&](const StripState& s) {
            rec(s);
            const std::size_t e = edge_top ? s.last() : 0;
            const double x = rec.x()[e], y = rec.y()[e];
            sub.ex.push_back(x);
            sub.ey.push_back(y);
            sub.dev = std::max(sub.dev, std::abs(y - (ys + ss * (x - xs))) / (1.0 + std::abs(y)));
        };
        // The strip below the segment has no wall, so x_max cannot end it.
        if (!std::isfinite(o.phi_max) && (edge_top || !std::isfinite(o.x_max))) o.phi_max = 10.0;
        sub.out = march(in, gas, edge_top ? nullptr : &nz.wall, o);
        rec.capture(sub.out.final_state);
        sub.fields = rec.snapshots();
        return sub;
    };
    std::future<Sub> f_lo, f_up;
    if (V.y1 > 0.0) f_lo = std::async(std::launch::async, run, 0.0, V.y1, true);
    if (V.y2 < Y) f_up = std::async(std::launch::async, run, V.y2, Y, false);
    if (f_lo.valid()) {
        auto s = f_lo.get();
        res.lower = std::move(s.out);
        res.lower_edge_x = std::move(s.ex);
        res.lower_edge_y = std::move(s.ey);
        res.lower_fields = std::move(s.fields);
        res.max_edge_deviation = std::max(res.max_edge_deviation, s.dev);
    }
    if (f_up.valid()) {
        auto s = f_up.get();
        res.upper = std::move(s.out);
        res.upper_edge_x = std::move(s.ex);
        res.upper_edge_y = std::move(s.ey);
        res.upper_fields = std::move(s.fields);
        res.max_edge_deviation = std::max(res.max_edge_deviation, s.dev);
    }
    for (const auto* o : {res.lower ? &*res.lower : nullptr, res.upper ? &*res.upper : nullptr}) {
        if (!o) continue;
        res.min_q = std::min(res.min_q, o->min_q);
        res.max_q = std::max(res.max_q, o->max_q);
    }
    return res;
}

}  // namespace potflow
