#pragma once

// Closed-form design checks evaluated without a solve: shock necessity for
// straight nozzles, the turning budget, the first-vacuum bracket [x_check,
// x_hat] on a convex wall, and the asymptotic vacuum indicator of the tail.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "potflow/errors.hpp"
#include "potflow/gas.hpp"
#include "potflow/nozzle.hpp"
#include "potflow/numerics.hpp"

namespace potflow {

struct ShockVerdict {
    bool necessary = false;
    double sup = 0.0;      // sup of G0 + b^(1/2)(Q0) |Q0'| = sup max(W0, -Z0)
    double witness = 0.0;  // psi of the supremum
    double tol = 0.0;
};

/// Sufficient and necessary for straight nozzles: a shock must form iff the
/// supremum is positive.
inline ShockVerdict shock_necessity(const PotentialInletData& in, double tol_rel = 1e-8) {
    ShockVerdict v;
    double scale = 0.0;
    v.sup = -num::kInf;
    for (std::size_t j = 0; j < in.size(); ++j) {
        if (!std::isfinite(in.W0[j]) || !std::isfinite(in.Z0[j])) continue;
        scale = std::max({scale, std::abs(in.W0[j]), std::abs(in.Z0[j])});
        const double s = std::max(in.W0[j], -in.Z0[j]);
        if (s > v.sup) {
            v.sup = s;
            v.witness = in.psi[j];
        }
    }
    v.tol = tol_rel * std::max(scale, 1.0);
    v.necessary = v.sup > v.tol;
    return v;
}

/// h_max - H(Q0 at the wall end of the inlet).
inline double turning_budget(const GasModel& gas, double q_wall) {
    if (q_wall >= gas.c_max()) return 0.0;
    return gas.h_max() - gas.turning_of_speed(q_wall);
}

namespace detail {

/// Limit of arctan f' at the end of the wall, if known.
inline std::optional<double> final_angle(const WallCurve& w) {
    if (std::isfinite(w.l1())) return w.angle(w.l1());
    switch (w.tail().kind) {
        case WallTail::Kind::SlopeLimit: return std::atan(w.tail().slope_limit);
        case WallTail::Kind::Unbounded: return num::kPi / 2;
        case WallTail::Kind::None: return std::nullopt;
    }
    return std::nullopt;
}

// Smallest x in [a, b] with g(x) >= 0 for nondecreasing g, g(a) < 0 <= g(b).
template <class G>
double first_crossing(G&& g, double a, double b) {
    const double ga = g(a), gb = g(b);
    if (gb == 0.0) {
        // Flat stretch at zero: bisect for the infimum instead.
        for (int it = 0; it < 200; ++it) {
            const double m = 0.5 * (a + b);
            (g(m) >= 0.0 ? b : a) = m;
        }
        return b;
    }
    return num::bracketed_root(g, a, b, ga, gb, 60);
}

// Upper end of the wall to search: l1, or doubling until g >= 0.
template <class G>
std::optional<double> bracket_end(G&& g, const WallCurve& w) {
    if (std::isfinite(w.l1())) return g(w.l1()) >= 0.0 ? std::optional<double>(w.l1()) : std::nullopt;
    double span = std::max(1.0, std::abs(w.l0()));
    for (int k = 0; k < 80; ++k, span *= 2.0)
        if (g(w.l0() + span) >= 0.0) return w.l0() + span;
    return std::nullopt;
}

}  // namespace detail

/// x_hat: infimum of x where the wall has turned by the whole budget.
/// nullopt when the wall's total turning never reaches it.
inline std::optional<double> vacuum_upper_bound(const WallCurve& w, const GasModel& gas, double q_wall) {
    const double budget = turning_budget(gas, q_wall);
    const auto total = detail::final_angle(w);
    if (!total) throw DataError("wall.tail: tail metadata is needed for an unbounded wall (inconclusive)");
    const double a0 = w.angle(w.l0());
    if (*total - a0 < budget) return std::nullopt;
    auto g = [&](double x) { return w.angle(x) - a0 - budget; };
    if (g(w.l0()) >= 0.0) return w.l0();
    auto end = detail::bracket_end(g, w);
    if (!end) return std::nullopt;
    return detail::first_crossing(g, w.l0(), *end);
}

struct LowerBound {
    std::optional<double> x_check;  // nullopt stands for +infinity
    double zeta_used = 0.0;
    bool saturated = false;  // h(x) reached 0
};

/// x_check: no vacuum on the wall for l0 <= x <= x_check. The unknown
/// potential of the vacuum point enters through zeta_cap (0 when absent).
inline LowerBound no_vacuum_lower_bound(const WallCurve& w, const PotentialInletData& in, const GasModel& gas,
                                        std::optional<double> zeta_cap = std::nullopt) {
    LowerBound lb;
    lb.zeta_used = zeta_cap.value_or(0.0);
    const double m = in.m;
    // Trapezoid sums on the psi grid for the inlet integrals.
    double iq = 0.0, ig = 0.0;
    for (std::size_t j = 1; j < in.size(); ++j) {
        iq += 0.5 * in.dpsi() * (in.Q0[j - 1] + in.Q0[j]);
        ig += 0.5 * in.dpsi() * (in.G0[j - 1] + in.G0[j]);
    }
    if (!std::isfinite(iq) || !std::isfinite(ig)) throw DataError("no_vacuum_lower_bound: inlet touches vacuum");
    const double l0 = w.l0(), a0 = w.angle(l0), cm = gas.c_max(), hmax = gas.h_max();
    auto wall_term = [&](double x) {
        return num::integrate(
            [&](double s) {
                const double d = w.d1(s);
                return (w.angle(s) - a0) * std::sqrt(1.0 + d * d);
            },
            l0, x, 1e-10, 1e-14);
    };
    auto hx = [&](double x) { return (iq + lb.zeta_used * ig - cm * wall_term(x)) / m; };
    auto g = [&](double x) {
        const double h = hx(x);
        const double H = h >= 0.0 ? 0.0 : gas.turning_H(h);
        return w.angle(x) - (hmax - H);
    };
    if (g(l0) >= 0.0) {
        lb.x_check = l0;
        return lb;
    }
    const auto end = detail::bracket_end(g, w);
    if (!end) return lb;
    lb.x_check = detail::first_crossing(g, l0, *end);
    lb.saturated = hx(*lb.x_check) >= 0.0;
    return lb;
}

/// Inequality at the vacuum point itself: arctan f'(X_up(zeta)) exceeds
/// h_max - H(h(X_up(zeta))) with the true zeta. Returns the left minus
/// right side.
inline double vacuum_point_inequality(const WallCurve& w, const PotentialInletData& in, const GasModel& gas,
                                      double zeta, double x0) {
    double iq = 0.0, ig = 0.0;
    for (std::size_t j = 1; j < in.size(); ++j) {
        iq += 0.5 * in.dpsi() * (in.Q0[j - 1] + in.Q0[j]);
        ig += 0.5 * in.dpsi() * (in.G0[j - 1] + in.G0[j]);
    }
    const double a0 = w.angle(w.l0());
    const double wt = num::integrate(
        [&](double s) {
            const double d = w.d1(s);
            return (w.angle(s) - a0) * std::sqrt(1.0 + d * d);
        },
        w.l0(), x0, 1e-10, 1e-14);
    const double h = (iq + zeta * ig - gas.c_max() * wt) / in.m;
    return w.angle(x0) - (gas.h_max() - (h >= 0.0 ? 0.0 : gas.turning_H(h)));
}

/// Largest violation of the wall turning inequality over all sample pairs
/// x1 <= x2: (theta2 - theta1) - (h2 - h1), i.e. how far R+ = h - theta
/// decreases along the wall. Samples in wall order.
inline double wall_pair_violation(const std::vector<double>& theta, const std::vector<double>& h) {
    if (theta.size() != h.size()) throw DataError("wall_pair_violation: sample arrays differ in length");
    // Negative when R+ strictly increases between every pair.
    double best = -num::kInf, worst = -num::kInf;  // running max of R+ and max violation
    for (std::size_t j = 0; j < h.size(); ++j) {
        const double r = h[j] - theta[j];
        if (j > 0) worst = std::max(worst, best - r);
        best = std::max(best, r);
    }
    return h.size() < 2 ? 0.0 : worst;
}

enum class Indication { Indicated, NotIndicated, Inconclusive };

inline const char* name(Indication i) {
    switch (i) {
        case Indication::Indicated: return "indicated";
        case Indication::NotIndicated: return "not-indicated";
        case Indication::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct AsymptoticReport {
    Indication verdict = Indication::Inconclusive;
    std::string branch;  // "slope-limit" | "unbounded-slope" | ""
    std::vector<double> x, value;
    double growth_decades = 0.0;
};

/// Tail quantity f'' x^(2g/(g+1)) (finite limiting slope) or
/// f''/(f')^3 f^(2g/(g+1)) (unbounded slope), sampled at geometrically
/// spaced abscissae over four decades. Indicated when strictly increasing
/// with at least min_growth decades of growth; not indicated when it does
/// not grow at all.
inline AsymptoticReport asymptotic_vacuum_indicator(const WallCurve& w, const GasModel& gas,
                                                    double min_growth = 0.2) {
    AsymptoticReport r;
    if (std::isfinite(w.l1())) return r;
    const double e = 2.0 * gas.gamma() / (gas.gamma() + 1.0);
    const auto kind = w.tail().kind;
    if (kind == WallTail::Kind::None) return r;
    r.branch = kind == WallTail::Kind::SlopeLimit ? "slope-limit" : "unbounded-slope";
    const double x_a = std::max(10.0, 10.0 * std::abs(w.l0()));
    for (int k = 0; k <= 16; ++k) {
        const double x = x_a * std::pow(10.0, k / 4.0);
        double v;
        if (kind == WallTail::Kind::SlopeLimit) {
            v = w.d2(x) * std::pow(x, e);
        } else {
            const double d = w.d1(x);
            v = w.d2(x) / (d * d * d) * std::pow(w.f(x), e);
        }
        r.x.push_back(x);
        r.value.push_back(v);
    }
    bool increasing = true, positive = true;
    for (std::size_t k = 0; k < r.value.size(); ++k) {
        if (!(r.value[k] > 0.0)) positive = false;
        if (k > 0 && !(r.value[k] > r.value[k - 1])) increasing = false;
    }
    if (!positive) {
        // f'' vanishes on the tail: the quantity is identically zero.
        bool zero = true;
        for (double v : r.value)
            if (v != 0.0) zero = false;
        r.verdict = zero ? Indication::NotIndicated : Indication::Inconclusive;
        return r;
    }
    r.growth_decades = std::log10(r.value.back() / r.value.front());
    if (increasing && r.growth_decades >= min_growth) {
        r.verdict = Indication::Indicated;
    } else if (r.growth_decades <= 0.0) {
        r.verdict = Indication::NotIndicated;
    }
    return r;
}

struct CriteriaReport {
    double margin_min = 0.0, margin_argmin = 0.0;
    ShockVerdict shock;
    bool straight_wall = false;
    double budget = 0.0;
    std::optional<double> x_hat;
    bool x_hat_inconclusive = false;
    LowerBound x_check, x_check_capped;  // zeta_cap absent / supplied
    AsymptoticReport asymptotic;
};

inline bool is_straight(const WallCurve& w) {
    if (w.family() == "line") return true;
    const double span = std::isfinite(w.l1()) ? w.l1() - w.l0() : 50.0 * std::max(1.0, w.f(w.l0()));
    for (int i = 0; i <= 200; ++i)
        if (w.d2(w.l0() + span * i / 200.0) != 0.0) return false;
    return w.tail().kind != WallTail::Kind::Unbounded;
}

inline CriteriaReport evaluate_criteria(const Nozzle& nz, const GasModel& gas, const PotentialInletData& in,
                                        const ValidationReport& val, std::optional<double> zeta_cap = std::nullopt) {
    CriteriaReport c;
    c.margin_min = val.min_margin;
    c.margin_argmin = val.argmin_margin;
    c.shock = shock_necessity(in);
    c.straight_wall = is_straight(nz.wall);
    const double q_wall = nz.q0.q(nz.inlet.height());
    c.budget = turning_budget(gas, q_wall);
    try {
        c.x_hat = vacuum_upper_bound(nz.wall, gas, q_wall);
    } catch (const DataError&) {
        c.x_hat_inconclusive = true;
    }
    if (!nz.q0.has_vacuum_segment()) {
        c.x_check = no_vacuum_lower_bound(nz.wall, in, gas);
        if (zeta_cap) c.x_check_capped = no_vacuum_lower_bound(nz.wall, in, gas, zeta_cap);
    }
    c.asymptotic = asymptotic_vacuum_indicator(nz.wall, gas);
    return c;
}

}  // namespace potflow
