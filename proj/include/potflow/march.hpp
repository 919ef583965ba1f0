#pragma once

// Downstream marching of the potential-stream strip in the Riemann
// invariants R+ = h - theta (constant along dpsi/dphi = +lambda) and
// R- = h + theta (constant along dpsi/dphi = -lambda), where h = H(Q) is
// the turning variable and lambda = b^(1/2)(Q). Each step is
// semi-Lagrangian: feet of both characteristics are traced back with the
// midpoint rule and the invariants are interpolated with monotone cubic
// Hermite polynomials.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "potflow/errors.hpp"
#include "potflow/gas.hpp"
#include "potflow/nozzle.hpp"
#include "potflow/numerics.hpp"

namespace potflow {

/// How the strip is closed at its lower and upper edge.
enum class Edge {
    Axis,    // symmetry line: theta = 0, reflection
    Wall,    // upper wall: theta = arctan f'(X_up)
    Vacuum,  // free boundary: node held at h = h_max with a fixed angle
};

struct StripState {
    double phi = 0.0;
    double psi0 = 0.0, dpsi = 0.0;  // psi_i = psi0 + i dpsi
    std::vector<double> h, theta;
    std::vector<double> lambda, lambda_prev;  // characteristic speed now and one step back
    double x_wall = 0.0;
    double dphi_last = 0.0;
    long steps = 0;
    Edge bottom = Edge::Axis, top = Edge::Wall;
    double theta_bottom = 0.0, theta_top = 0.0;  // held angles of vacuum edges

    std::size_t size() const { return h.size(); }
    std::size_t last() const { return h.size() - 1; }
    double psi(std::size_t i) const { return psi0 + dpsi * static_cast<double>(i); }
    double r_plus(std::size_t i) const { return h[i] - theta[i]; }
    double r_minus(std::size_t i) const { return h[i] + theta[i]; }
};

struct ShockDiagnostic {
    double phi = 0.0, psi = 0.0;
    std::string criterion;  // "foot-crossing" | "gradient-blowup"
    double value = 0.0;
};

struct WallSample {
    double phi, x, q, theta, h, deficit;
};

struct Snapshot {
    double phi;
    double x_wall;
    std::vector<double> h, theta;
};

struct MarchOptions {
    double safety = 0.8;
    double phi_max = num::kInf;
    double x_max = num::kInf;
    long max_steps = 50'000'000;
    double vac_tol_rel = 1e-6;       // vacuum when h_wall >= h_max (1 - vac_tol_rel)
    double grad_blowup_factor = 50;  // compressive gradient growth that counts as blow-up
    double front_fraction = 0.6;     // share of a 7-cell compression carried by one cell
    double sign_tol_rel = 1e-8;
    int history_stride = 0;          // 0 keeps no snapshots
    bool detect_shocks = true;
    bool continue_past_vacuum = false;
    double continue_phi = num::kInf;  // end of the continuation when it runs
    std::function<void(const StripState&)> sink;
};

struct SolveOutcome {
    enum class Tag { NoVacuumReached, VacuumAtWall, ShockDetected };
    Tag tag = Tag::NoVacuumReached;
    double phi_end = 0.0;
    double zeta = num::kInf, x0 = num::kInf;
    std::size_t vacuum_node = 0;
    std::optional<ShockDiagnostic> shock;
    std::vector<Snapshot> history;
    std::vector<WallSample> wall_trace;
    StripState at_vacuum;  // state at zeta (top node at the vacuum tolerance)
    StripState final_state;
    bool continued = false;
    long steps = 0;

    // Diagnostics accumulated over every accepted step.
    double min_q = num::kInf, max_q = 0.0;
    double max_W_scaled = -num::kInf, min_Z_scaled = num::kInf, max_Qphi_scaled = -num::kInf;
    double sign_scale = 1.0;
    double max_lip_phi = 0.0, max_lip_psi = 0.0;  // |b^(1/2) Q_phi|, |b Q_psi|
    bool admissible_inlet = false;
    bool wall_turning_monotone = true;
    double sign_violation_phi = num::kInf;  // first phi with W > 0 or Z < 0 beyond tolerance

    static const char* name(Tag t) {
        switch (t) {
            case Tag::NoVacuumReached: return "NoVacuumReached";
            case Tag::VacuumAtWall: return "VacuumAtWall";
            case Tag::ShockDetected: return "ShockDetected";
        }
        return "?";
    }
};

/// Raised by step() when the wall node reaches the vacuum threshold.
struct VacuumReached {
    double h_wall;
};

class Marcher {
public:
    Marcher(const GasModel& gas, const WallCurve* wall) : gas_(gas), wall_(wall) {}

    /// Initial strip state from inlet data.
    StripState initial_state(const PotentialInletData& in) const {
        const std::size_t n = in.size();
        StripState s;
        s.phi = 0.0;
        s.psi0 = in.psi0;
        s.dpsi = in.dpsi();
        s.h = in.h0;
        s.theta = in.angle0;
        s.x_wall = wall_ ? wall_->l0() : 0.0;
        if (in.vacuum_below) {
            s.bottom = Edge::Vacuum;
            s.theta_bottom = in.angle0.front();
        } else {
            if (in.y_lo != 0.0) throw DataError("inlet: a strip not starting at the axis must start on a vacuum segment");
            s.bottom = Edge::Axis;
            s.theta[0] = 0.0;
        }
        if (in.vacuum_above) {
            s.top = Edge::Vacuum;
            s.theta_top = in.angle0.back();
        } else {
            if (!wall_) throw DataError("wall: a strip ending at the wall needs a wall curve");
            s.top = Edge::Wall;
            s.theta[n - 1] = wall_->angle(s.x_wall);
        }
        apply_vacuum_edges(s);
        s.lambda.resize(n);
        for (std::size_t i = 0; i < n; ++i) s.lambda[i] = gas_.local(s.h[i]).lambda;
        s.lambda_prev = s.lambda;
        return s;
    }

    double cfl_step(const StripState& s, double safety) const {
        double lmax = 0.0;
        for (double l : s.lambda) lmax = std::max(lmax, l);
        if (!std::isfinite(lmax)) throw NumericError("characteristic speed is unbounded (sonic state)");
        if (!(lmax > 0.0)) return num::kInf;
        return safety * s.dpsi / lmax;
    }

    /// Feet of the + and - characteristics arriving at every node, in
    /// index units. foot_plus[0] and foot_minus[last] are unused.
    void trace_feet(const StripState& s, double dphi, std::vector<double>& fp, std::vector<double>& fm) const {
        const std::size_t n = s.size();
        mid_.resize(n);
        const bool have_prev = s.dphi_last > 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double l = s.lambda[i];
            if (have_prev) l += 0.5 * dphi * (s.lambda[i] - s.lambda_prev[i]) / s.dphi_last;
            mid_[i] = std::max(l, 0.0);
        }
        const double nu = dphi / s.dpsi;
        const double top = static_cast<double>(n - 1);
        auto lam_at = [&](double u) {
            u = std::clamp(u, 0.0, top);
            std::size_t k = static_cast<std::size_t>(u);
            if (k >= n - 1) k = n - 2;
            const double t = u - static_cast<double>(k);
            return mid_[k] + t * (mid_[k + 1] - mid_[k]);
        };
        fp.resize(n);
        fm.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double ui = static_cast<double>(i);
            double f = ui - nu * mid_[i];
            for (int it = 0; it < 2; ++it) f = ui - nu * lam_at(0.5 * (ui + f));
            fp[i] = f;
            double g = ui + nu * mid_[i];
            for (int it = 0; it < 2; ++it) g = ui + nu * lam_at(0.5 * (ui + g));
            fm[i] = g;
        }
    }

    /// One semi-Lagrangian step of size dphi. Throws VacuumReached when the
    /// wall node would reach h_max - vac_tol (the state is then unchanged).
    void step(StripState& s, double dphi, double vac_tol) const {
        const std::size_t n = s.size(), N = n - 1;
        rp_.resize(n);
        rm_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            rp_[i] = s.h[i] - s.theta[i];
            rm_[i] = s.h[i] + s.theta[i];
        }
        num::monotone_slopes(rp_, sp_);
        num::monotone_slopes(rm_, sm_);
        trace_feet(s, dphi, fp_, fm_);
        const double top = static_cast<double>(N);
        auto interp = [&](const std::vector<double>& y, const std::vector<double>& sl, double u) {
            if (u < -1e-9 || u > top + 1e-9)
                throw NumericError("characteristic foot left the strip (CFL violated) at phi = " + std::to_string(s.phi));
            u = std::clamp(u, 0.0, top);
            std::size_t k = static_cast<std::size_t>(u);
            if (k >= N) k = N - 1;
            return num::hermite_cell(y, sl, k, u - static_cast<double>(k));
        };

        const double hmax = gas_.h_max();
        // Wall node first: it decides whether the step crosses vacuum.
        double x_new = s.x_wall, h_top = s.h[N], th_top = s.theta[N];
        if (s.top == Edge::Wall) {
            const double rplus = interp(rp_, sp_, fp_[N]);
            const auto w = wall_step(s, dphi, rplus);
            if (w.h >= hmax - vac_tol) throw VacuumReached{w.h};
            x_new = w.x;
            h_top = w.h;
            th_top = w.theta;
        }

        hn_.resize(n);
        tn_.resize(n);
        for (std::size_t i = 1; i < N; ++i) {
            const double a = interp(rp_, sp_, fp_[i]);
            const double b = interp(rm_, sm_, fm_[i]);
            hn_[i] = 0.5 * (a + b);
            tn_[i] = 0.5 * (b - a);
        }
        if (s.bottom == Edge::Axis) {
            hn_[0] = interp(rm_, sm_, fm_[0]);
            tn_[0] = 0.0;
        } else {
            hn_[0] = hmax;
            tn_[0] = s.theta_bottom;
        }
        if (s.top == Edge::Wall) {
            hn_[N] = h_top;
            tn_[N] = th_top;
        } else {
            hn_[N] = hmax;
            tn_[N] = s.theta_top;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (hn_[i] < 0.0) {
                if (hn_[i] < -1e-12) throw NumericError("turning variable became negative (sonic state reached)");
                hn_[i] = 0.0;
            }
            if (hn_[i] > hmax) hn_[i] = hmax;
        }
        s.h.swap(hn_);
        s.theta.swap(tn_);
        s.lambda_prev.swap(s.lambda);
        s.lambda.resize(n);
        for (std::size_t i = 0; i < n; ++i) s.lambda[i] = gas_.local(s.h[i]).lambda;
        s.x_wall = x_new;
        s.phi += dphi;
        s.dphi_last = dphi;
        ++s.steps;
    }

    /// Wall value h after a trial step, used to locate the vacuum point.
    double trial_wall_h(const StripState& s, double dphi) const {
        const std::size_t N = s.last();
        rp_.resize(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) rp_[i] = s.h[i] - s.theta[i];
        num::monotone_slopes(rp_, sp_);
        trace_feet(s, dphi, fp_, fm_);
        double u = std::clamp(fp_[N], 0.0, static_cast<double>(N));
        std::size_t k = std::min(static_cast<std::size_t>(u), N - 1);
        const double rplus = num::hermite_cell(rp_, sp_, k, u - static_cast<double>(k));
        return wall_step(s, dphi, rplus).h;
    }

    const std::vector<double>& last_foot_plus() const { return fp_; }
    const std::vector<double>& last_foot_minus() const { return fm_; }

    const GasModel& gas() const { return gas_; }
    const WallCurve* wall() const { return wall_; }

    void apply_vacuum_edges(StripState& s) const {
        if (s.bottom == Edge::Vacuum) {
            s.h.front() = gas_.h_max();
            s.theta.front() = s.theta_bottom;
        }
        if (s.top == Edge::Vacuum) {
            s.h.back() = gas_.h_max();
            s.theta.back() = s.theta_top;
        }
    }

private:
    struct WallUpdate {
        double x, h, theta;
    };

    // Trapezoid rule for dX/dphi = cos(theta_w) / q_w with a few fixed-point sweeps.
    WallUpdate wall_step(const StripState& s, double dphi, double rplus) const {
        const std::size_t N = s.last();
        const double q_old = gas_.local(s.h[N]).q;
        const double rate_old = std::cos(s.theta[N]) / q_old;
        double x = s.x_wall + dphi * rate_old;
        double th = 0.0, h = 0.0;
        for (int it = 0; it < 4; ++it) {
            th = wall_->angle(x);
            h = rplus + th;
            const double q = gas_.local(std::min(h, gas_.h_max())).q;
            x = s.x_wall + 0.5 * dphi * (rate_old + std::cos(th) / q);
        }
        th = wall_->angle(x);
        return {x, rplus + th, th};
    }

    const GasModel& gas_;
    const WallCurve* wall_;
    mutable std::vector<double> rp_, rm_, sp_, sm_, fp_, fm_, hn_, tn_, mid_;
};

namespace detail {

// Compressive one-cell gradients of both families: + waves steepen where
// R+ increases with psi, - waves where R- decreases.
inline double compressive_gradient(const StripState& s, std::size_t& where, std::size_t margin = 0) {
    double g = 0.0;
    where = margin;
    for (std::size_t i = margin; i + 1 + margin < s.size(); ++i) {
        const double dp = s.r_plus(i + 1) - s.r_plus(i);
        const double dm = s.r_minus(i) - s.r_minus(i + 1);
        const double c = std::max(dp, dm);
        if (c > g) {
            g = c;
            where = i;
        }
    }
    return g / s.dpsi;
}

// Share of the compression in a 7-cell window carried by the steepest cell.
inline double front_share(const StripState& s, std::size_t i, bool plus) {
    const std::size_t lo = i >= 3 ? i - 3 : 0, hi = std::min(s.last(), i + 4);
    double sum = 0.0, peak = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
        const double d = plus ? s.r_plus(k + 1) - s.r_plus(k) : s.r_minus(k) - s.r_minus(k + 1);
        if (d > 0.0) sum += d;
        peak = std::max(peak, d);
    }
    return sum > 0.0 ? peak / sum : 0.0;
}

}  // namespace detail

/// Full march: step until the end of the domain, vacuum at the wall or a
/// detected shock. With continue_past_vacuum the top edge becomes a
/// vacuum edge at zeta and the march goes on to opts.continue_phi.
inline SolveOutcome march(const PotentialInletData& in, const GasModel& gas, const WallCurve* wall,
                          const MarchOptions& opts = {}) {
    if (in.size() < 17) throw DataError("grid.N must be at least 16");
    if (!(opts.safety > 0.0 && opts.safety <= 1.0)) throw DataError("grid.safety must be in (0, 1]");
    Marcher mc(gas, wall);
    StripState s = mc.initial_state(in);
    SolveOutcome out;
    const double hmax = gas.h_max();
    const double vac_tol = opts.vac_tol_rel * hmax;
    const std::size_t n = s.size(), N = n - 1;

    // Sign-structure scale and admissibility of the inlet.
    double scale = hmax / in.m;
    for (std::size_t j = 0; j < in.size(); ++j) {
        if (std::isfinite(in.W0[j])) scale = std::max(scale, std::abs(in.W0[j]));
        if (std::isfinite(in.Z0[j])) scale = std::max(scale, std::abs(in.Z0[j]));
    }
    out.sign_scale = scale;
    const double sign_tol = opts.sign_tol_rel * scale;
    out.admissible_inlet = true;
    for (std::size_t j = 0; j < in.size(); ++j) {
        if (!std::isfinite(in.W0[j]) || !std::isfinite(in.Z0[j])) continue;
        if (in.W0[j] > sign_tol || in.Z0[j] < -sign_tol) out.admissible_inlet = false;
    }
    std::size_t where = 0;
    // Growth of a compression is measured against the inlet's own; inlets
    // without one rely on front collapse and foot crossing alone.
    const double g_init = detail::compressive_gradient(s, where);
    const bool growth_test = g_init > 1e-6 * hmax / in.m;
    const double g_ref = std::max(g_init, 1e-2 * hmax / in.m);

    auto record = [&](const StripState& st) {
        for (std::size_t i = 0; i < st.size(); ++i) {
            const auto L = gas.local(st.h[i]);
            if (!(st.h[i] >= hmax && ((i == 0 && st.bottom == Edge::Vacuum) || (i == N && st.top == Edge::Vacuum)))) {
                out.min_q = std::min(out.min_q, L.q);
                out.max_q = std::max(out.max_q, L.q);
            }
        }
        if (st.top == Edge::Wall) {
            const auto L = gas.local(st.h[N]);
            if (!out.wall_trace.empty() && st.theta[N] < out.wall_trace.back().theta - 1e-14)
                out.wall_turning_monotone = false;
            out.wall_trace.push_back({st.phi, st.x_wall, L.q, st.theta[N], st.h[N], L.deficit});
        }
        if (opts.history_stride > 0 && st.steps % opts.history_stride == 0)
            out.history.push_back({st.phi, st.x_wall, st.h, st.theta});
        if (opts.sink) opts.sink(st);
    };

    // Sign, acceleration and Lipschitz diagnostics over gas cells.
    auto diagnose = [&](const StripState& st) {
        double wmax = -num::kInf, zmin = num::kInf, qphi = -num::kInf;
        for (std::size_t i = 0; i + 1 < st.size(); ++i) {
            const bool vac_cell = (st.h[i] >= hmax) || (st.h[i + 1] >= hmax);
            if (vac_cell) continue;
            const double W = (st.r_plus(i + 1) - st.r_plus(i)) / st.dpsi;
            const double Z = (st.r_minus(i + 1) - st.r_minus(i)) / st.dpsi;
            wmax = std::max(wmax, W);
            zmin = std::min(zmin, Z);
            qphi = std::max(qphi, 0.5 * (W - Z));
            const double lam = 0.5 * (st.lambda[i] + st.lambda[i + 1]);
            out.max_lip_phi = std::max(out.max_lip_phi, std::abs(lam * 0.5 * (W - Z)));
            out.max_lip_psi = std::max(out.max_lip_psi, std::abs(lam * 0.5 * (W + Z)));
        }
        out.max_W_scaled = std::max(out.max_W_scaled, wmax / scale);
        out.min_Z_scaled = std::min(out.min_Z_scaled, zmin / scale);
        out.max_Qphi_scaled = std::max(out.max_Qphi_scaled, qphi / scale);
        return wmax > sign_tol || zmin < -sign_tol;
    };

    record(s);
    diagnose(s);
    bool vacuum_mode = false;
    const double phi_stop_cont = opts.continue_phi;

    while (true) {
        const double phi_stop = vacuum_mode ? phi_stop_cont : opts.phi_max;
        if (s.phi >= phi_stop || (!vacuum_mode && s.top == Edge::Wall && s.x_wall >= opts.x_max)) break;
        if (s.steps >= opts.max_steps) throw NumericError("march exceeded grid.max_steps");
        double dphi = mc.cfl_step(s, opts.safety);
        if (!std::isfinite(dphi)) break;  // whole strip at vacuum
        if (s.phi + dphi > phi_stop) dphi = phi_stop - s.phi;
        try {
            mc.step(s, dphi, vac_tol);
        } catch (const VacuumReached&) {
            // Locate the step size at which the wall node reaches the threshold.
            const double target = hmax - vac_tol;
            const double h0 = s.h[N];
            double lo = 0.0, hi = dphi;
            const double g_lo = h0 - target, g_hi = mc.trial_wall_h(s, dphi) - target;
            double dz = lo;
            if (g_lo < 0.0 && g_hi > 0.0) {
                dz = num::bracketed_root([&](double d) { return mc.trial_wall_h(s, d) - target; }, lo, hi, g_lo, g_hi,
                                         48);
            }
            // Take the partial step with a hair more room so that it is accepted.
            if (dz > 0.0) mc.step(s, dz, vac_tol * (1.0 - 1e-9) - 1e-15 * hmax);
            diagnose(s);
            record(s);
            std::size_t vmax = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (s.h[i] > s.h[vmax]) vmax = i;
            out.tag = SolveOutcome::Tag::VacuumAtWall;
            out.zeta = s.phi;
            out.x0 = s.x_wall;
            out.vacuum_node = vmax;
            out.at_vacuum = s;
            if (!opts.continue_past_vacuum) break;
            vacuum_mode = true;
            out.continued = true;
            s.top = Edge::Vacuum;
            s.theta_top = s.theta[N];
            mc.apply_vacuum_edges(s);
            s.lambda[N] = 0.0;
            continue;
        }
        const bool bad_sign = diagnose(s);
        record(s);
        // Compression (W > 0 or Z < 0) after an admissible inlet means a
        // nonconvex wall; it is recorded, not treated as a shock.
        if (bad_sign && out.admissible_inlet && !std::isfinite(out.sign_violation_phi))
            out.sign_violation_phi = s.phi;

        if (opts.detect_shocks && !vacuum_mode) {
            std::optional<ShockDiagnostic> hit;
            const auto& fp = mc.last_foot_plus();
            const auto& fm = mc.last_foot_minus();
            for (std::size_t i = 1; i < N && !hit; ++i)
                if (fp[i + 1] <= fp[i]) hit = ShockDiagnostic{s.phi, s.psi(i), "foot-crossing", fp[i + 1] - fp[i]};
            for (std::size_t i = 0; i + 1 < N && !hit; ++i)
                if (fm[i + 1] <= fm[i]) hit = ShockDiagnostic{s.phi, s.psi(i), "foot-crossing", fm[i + 1] - fm[i]};
            if (!hit) {
                // Cells next to the edges hold freshly injected boundary
                // compression and a one-sided window; they are left to the
                // foot test.
                const double g = detail::compressive_gradient(s, where, 4);
                const bool plus = (s.r_plus(where + 1) - s.r_plus(where)) >= (s.r_minus(where) - s.r_minus(where + 1));
                const bool steep = growth_test && g >= opts.grad_blowup_factor * g_ref;
                const bool collapsed = g >= 4.0 * g_ref && g * s.dpsi >= 1e-4 * hmax &&
                                       detail::front_share(s, where, plus) >= opts.front_fraction;
                if (steep || collapsed)
                    hit = ShockDiagnostic{s.phi, s.psi(where) + 0.5 * s.dpsi, "gradient-blowup", g / g_ref};
            }
            if (hit) {
                out.tag = SolveOutcome::Tag::ShockDetected;
                out.shock = hit;
                break;
            }
        }
    }
    if (opts.history_stride > 0 && (out.history.empty() || out.history.back().phi != s.phi))
        out.history.push_back({s.phi, s.x_wall, s.h, s.theta});
    out.phi_end = s.phi;
    out.steps = s.steps;
    out.final_state = std::move(s);
    return out;
}

/// Follows + and - characteristics through consecutive accepted states
/// (dpsi/dphi = +-lambda, Heun in phi, monotone cubic in psi) and records
/// the largest drift of the carried invariant R+ = h - theta or
/// R- = h + theta. Use as, or inside, a march sink.
class CharacteristicTracer {
public:
    struct Trace {
        double psi;
        int sign;  // +1 or -1
        double r0 = 0.0, drift = 0.0;
        bool alive = true;
    };

    explicit CharacteristicTracer(std::vector<Trace> traces) : traces_(std::move(traces)) {}

    void operator()(const StripState& s) {
        if (!have_) {
            for (auto& tr : traces_) tr.r0 = invariant(s, tr.psi, tr.sign);
            prev_ = s;
            have_ = true;
            return;
        }
        const double dphi = s.phi - prev_.phi;
        const double lo = s.psi0 + s.dpsi, hi = s.psi(s.last()) - s.dpsi;
        for (auto& tr : traces_) {
            if (!tr.alive) continue;
            const double l0 = interp(prev_, prev_.lambda, tr.psi);
            const double pred = tr.psi + tr.sign * dphi * l0;
            if (pred < lo || pred > hi) {
                tr.alive = false;
                continue;
            }
            const double next = tr.psi + tr.sign * dphi * 0.5 * (l0 + interp(s, s.lambda, pred));
            if (next < lo || next > hi) {
                tr.alive = false;
                continue;
            }
            tr.psi = next;
            tr.drift = std::max(tr.drift, std::abs(invariant(s, next, tr.sign) - tr.r0));
        }
        prev_ = s;
    }

    double max_drift() const {
        double d = 0.0;
        for (const auto& tr : traces_) d = std::max(d, tr.drift);
        return d;
    }
    const std::vector<Trace>& traces() const { return traces_; }

private:
    static double interp(const StripState& s, const std::vector<double>& v, double psi) {
        std::vector<double> sl;
        num::monotone_slopes(v, sl);
        const auto [i, t] = num::locate(psi - s.psi0, s.dpsi, v.size());
        return num::hermite_cell(v, sl, i, t);
    }
    static double invariant(const StripState& s, double psi, int sign) {
        std::vector<double> r(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) r[i] = sign > 0 ? s.r_plus(i) : s.r_minus(i);
        return interp(s, r, psi);
    }

    std::vector<Trace> traces_;
    StripState prev_;
    bool have_ = false;
};

}  // namespace potflow
