#pragma once

// Nozzle geometry (upper wall f, inlet curve Upsilon), inlet speed
// profiles, validation of the admissibility conditions and the
// transformation of inlet data to the potential-stream plane.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/numeric/odeint.hpp>

#include "potflow/errors.hpp"
#include "potflow/gas.hpp"
#include "potflow/numerics.hpp"

namespace potflow {

/// Behaviour of the wall as x -> l1, needed by the asymptotic criteria.
struct WallTail {
    enum class Kind { None, SlopeLimit, Unbounded };
    Kind kind = Kind::None;
    double slope_limit = 0.0;  // lim f' for SlopeLimit
    double l1 = num::kInf;
};

class WallCurve {
public:
    using Fn = std::function<double(double)>;

    WallCurve() = default;

    const std::string& family() const { return family_; }
    double l0() const { return l0_; }
    double l1() const { return tail_.l1; }
    const WallTail& tail() const { return tail_; }

    double f(double x) const { return f_(x); }
    double d1(double x) const { return d1_(x); }
    double d2(double x) const { return d2_(x); }
    /// Wall inclination arctan f'(x).
    double angle(double x) const { return angle_ ? angle_(x) : std::atan(d1_(x)); }

    /// Straight wall through (l0, y0) with the given slope.
    static WallCurve line(double l0, double y0, double slope) {
        WallCurve w;
        w.family_ = "line";
        w.l0_ = l0;
        w.f_ = [=](double x) { return y0 + slope * (x - l0); };
        w.d1_ = [=](double) { return slope; };
        w.d2_ = [](double) { return 0.0; };
        w.tail_ = {WallTail::Kind::SlopeLimit, slope, num::kInf};
        return w;
    }

    /// f(x) = a + b x^k on [l0, inf), l0 > 0.
    static WallCurve power_law(double l0, double a, double b, double k) {
        if (!(l0 > 0.0 || (l0 == 0.0 && k > 2.0)))
            throw DataError("wall.l0: power-law wall needs l0 > 0 (or l0 = 0 with k > 2)");
        WallCurve w;
        w.family_ = "power-law";
        w.l0_ = l0;
        w.f_ = [=](double x) { return a + b * std::pow(x, k); };
        w.d1_ = [=](double x) { return b * k * std::pow(x, k - 1.0); };
        w.d2_ = [=](double x) { return b * k * (k - 1.0) * std::pow(x, k - 2.0); };
        if (k > 1.0)
            w.tail_ = {WallTail::Kind::Unbounded, 0.0, num::kInf};
        else
            w.tail_ = {WallTail::Kind::SlopeLimit, k == 1.0 ? b : 0.0, num::kInf};
        return w;
    }

    /// f'' = c x^(-beta) with f'(l0) = s0, f(l0) = y0 (l0 > 0).
    static WallCurve flare(double l0, double y0, double s0, double c, double beta) {
        if (!(l0 > 0.0)) throw DataError("wall.l0: flare wall needs l0 > 0");
        WallCurve w;
        w.family_ = "flare";
        w.l0_ = l0;
        // Antiderivatives of x^(-beta) and of that, normalised to vanish at l0.
        auto g1 = [=](double x) {
            return beta == 1.0 ? std::log(x / l0) : (std::pow(x, 1.0 - beta) - std::pow(l0, 1.0 - beta)) / (1.0 - beta);
        };
        auto g2 = [=](double x) {
            if (beta == 1.0) return x * std::log(x / l0) - (x - l0);
            if (beta == 2.0) return std::log(x / l0) - (x - l0) / l0;
            const double e = 2.0 - beta;
            return (std::pow(x, e) - std::pow(l0, e)) / ((1.0 - beta) * e) -
                   std::pow(l0, 1.0 - beta) * (x - l0) / (1.0 - beta);
        };
        w.f_ = [=](double x) { return y0 + s0 * (x - l0) + c * g2(x); };
        w.d1_ = [=](double x) { return s0 + c * g1(x); };
        w.d2_ = [=](double x) { return c * std::pow(x, -beta); };
        if (beta > 1.0)
            w.tail_ = {WallTail::Kind::SlopeLimit, s0 + c * std::pow(l0, 1.0 - beta) / (beta - 1.0), num::kInf};
        else
            w.tail_ = {WallTail::Kind::Unbounded, 0.0, num::kInf};
        return w;
    }

    /// Straight up to x_s, then the inclination rises by dtheta following
    /// theta0 + (2 dtheta / pi) atan(((x - x_s)_+ / width)^3). f'' vanishes at x_s.
    static WallCurve arctan_profile(double l0, double y0, double theta0, double dtheta, double x_s, double width) {
        if (!(theta0 + dtheta < 0.5 * num::kPi) || theta0 < 0.0 || dtheta < 0.0 || !(width > 0.0) || x_s < l0)
            throw DataError("wall: arctan-profile needs 0 <= theta0, theta0 + dtheta < pi/2, width > 0, x_s >= l0");
        auto th = [=](double x) {
            const double u = std::max(0.0, x - x_s) / width;
            return theta0 + 2.0 * dtheta / num::kPi * std::atan(u * u * u);
        };
        auto dth = [=](double x) {
            const double u = std::max(0.0, x - x_s) / width;
            const double u3 = u * u * u;
            return 2.0 * dtheta / num::kPi * 3.0 * u * u / (width * (1.0 + u3 * u3));
        };
        WallCurve w = from_angle("arctan-profile", l0, y0, th, dth, x_s, x_s + 60.0 * width);
        w.tail_ = {WallTail::Kind::SlopeLimit, std::tan(theta0 + dtheta), num::kInf};
        return w;
    }

    /// Straight wall of inclination theta0 with a Gaussian dip of depth
    /// delta centred at x_b: a nonconvex perturbation of a straight line.
    static WallCurve bump(double l0, double y0, double theta0, double delta, double x_b, double width) {
        if (!(width > 0.0)) throw DataError("wall.width must be positive");
        auto th = [=](double x) {
            const double u = (x - x_b) / width;
            return theta0 - delta * std::exp(-u * u);
        };
        auto dth = [=](double x) {
            const double u = (x - x_b) / width;
            return 2.0 * delta * u / width * std::exp(-u * u);
        };
        WallCurve w = from_angle("bump", l0, y0, th, dth, l0, x_b + 8.0 * width);
        w.tail_ = {WallTail::Kind::SlopeLimit, std::tan(theta0), num::kInf};
        return w;
    }

    /// C2 cubic spline through samples; both ends clamped when slopes are given.
    static WallCurve spline(std::vector<double> x, std::vector<double> y, double d_left = num::kInf,
                            double d_right = num::kInf, WallTail tail = {}) {
        auto s = std::make_shared<num::CubicSpline>(std::move(x), std::move(y), d_left, d_right);
        WallCurve w;
        w.family_ = "spline";
        w.l0_ = s->front();
        w.f_ = [s](double x) { return (*s)(x); };
        w.d1_ = [s](double x) { return s->d1(x); };
        w.d2_ = [s](double x) { return s->d2(x); };
        if (tail.kind == WallTail::Kind::None) tail.l1 = s->back();
        w.tail_ = tail;
        return w;
    }

    static WallCurve analytic(std::string family, double l0, Fn f, Fn d1, Fn d2, WallTail tail = {}) {
        WallCurve w;
        w.family_ = std::move(family);
        w.l0_ = l0;
        w.f_ = std::move(f);
        w.d1_ = std::move(d1);
        w.d2_ = std::move(d2);
        w.tail_ = tail;
        return w;
    }

private:
    // Wall given by its inclination; f is tabulated on [x_a, x_b] by
    // integrating tan(theta) and continued by quadrature beyond.
    static WallCurve from_angle(std::string family, double l0, double y0, Fn th, Fn dth, double x_a, double x_b) {
        WallCurve w;
        w.family_ = std::move(family);
        w.l0_ = l0;
        const double s_a = std::tan(th(l0));
        const double y_a = y0 + s_a * (x_a - l0);
        auto table = std::make_shared<num::ChebyshevTable>(
            num::ChebyshevTable([th](double x) { return std::tan(th(x)); }, x_a, x_b, 1e-13).integral());
        const double y_b = y_a + (*table)(x_b);
        w.f_ = [=](double x) {
            if (x <= x_a) return y0 + std::tan(th(l0)) * (x - l0);
            if (x <= x_b) return y_a + (*table)(x);
            return y_b + num::integrate([&](double s) { return std::tan(th(s)); }, x_b, x, 1e-13, 1e-14);
        };
        w.d1_ = [th](double x) { return std::tan(th(x)); };
        w.d2_ = [th, dth](double x) {
            const double c = std::cos(th(x));
            return dth(x) / (c * c);
        };
        w.angle_ = th;
        return w;
    }

    std::string family_;
    double l0_ = 0.0;
    Fn f_, d1_, d2_, angle_;
    WallTail tail_;
};

/// Inlet curve x = Upsilon(y) on [0, Y], Y = f(l0).
class InletCurve {
public:
    using Fn = std::function<double(double)>;

    InletCurve() = default;

    const std::string& family() const { return family_; }
    double height() const { return Y_; }
    double x(double y) const { return u_(y); }
    double d1(double y) const { return u1_(y); }
    double d2(double y) const { return u2_(y); }

    static InletCurve vertical(double l0, double Y) {
        InletCurve c;
        c.family_ = "vertical";
        c.Y_ = Y;
        c.u_ = [=](double) { return l0; };
        c.u1_ = [](double) { return 0.0; };
        c.u2_ = [](double) { return 0.0; };
        return c;
    }

    /// Circular arc centred on the axis, meeting the wall at right angles.
    static InletCurve arc(double l0, double Y, double wall_slope) {
        if (!(wall_slope > 0.0)) return vertical(l0, Y);
        InletCurve c;
        c.family_ = "arc";
        c.Y_ = Y;
        const double R2 = Y * Y * (1.0 + wall_slope * wall_slope) / (wall_slope * wall_slope);
        const double cx = l0 - Y / wall_slope;
        c.u_ = [=](double y) { return cx + std::sqrt(R2 - y * y); };
        c.u1_ = [=](double y) { return -y / std::sqrt(R2 - y * y); };
        c.u2_ = [=](double y) {
            const double r = std::sqrt(R2 - y * y);
            return -R2 / (r * r * r);
        };
        return c;
    }

    /// Quartic with Upsilon'' vanishing at both ends.
    static InletCurve smoothstep(double l0, double Y, double wall_slope) {
        InletCurve c;
        c.family_ = "smoothstep";
        c.Y_ = Y;
        const double s = wall_slope;
        c.u_ = [=](double y) {
            const double t = y / Y;
            return l0 + s * Y * (0.5 - t * t * t + 0.5 * t * t * t * t);
        };
        c.u1_ = [=](double y) {
            const double t = y / Y;
            return s * (-3.0 * t * t + 2.0 * t * t * t);
        };
        c.u2_ = [=](double y) {
            const double t = y / Y;
            return s * (-6.0 * t + 6.0 * t * t) / Y;
        };
        return c;
    }

    static InletCurve parabola(double l0, double Y, double wall_slope) {
        InletCurve c;
        c.family_ = "parabola";
        c.Y_ = Y;
        const double s = wall_slope;
        c.u_ = [=](double y) { return l0 + s * (Y * Y - y * y) / (2.0 * Y); };
        c.u1_ = [=](double y) { return -s * y / Y; };
        c.u2_ = [=](double) { return -s / Y; };
        return c;
    }

    static InletCurve spline(std::vector<double> y, std::vector<double> x, double d_bottom = 0.0,
                             double d_top = num::kInf) {
        auto s = std::make_shared<num::CubicSpline>(std::move(y), std::move(x), d_bottom, d_top);
        InletCurve c;
        c.family_ = "spline";
        c.Y_ = s->back();
        if (std::abs(s->front()) > 1e-12) throw DataError("inlet.samples must start at y = 0");
        c.u_ = [s](double y) { return (*s)(y); };
        c.u1_ = [s](double y) { return s->d1(y); };
        c.u2_ = [s](double y) { return s->d2(y); };
        return c;
    }

    static InletCurve analytic(std::string family, double Y, Fn u, Fn u1, Fn u2) {
        InletCurve c;
        c.family_ = std::move(family);
        c.Y_ = Y;
        c.u_ = std::move(u);
        c.u1_ = std::move(u1);
        c.u2_ = std::move(u2);
        return c;
    }

private:
    std::string family_;
    double Y_ = 1.0;
    Fn u_, u1_, u2_;
};

/// Inlet speed q0(y) with its derivative. A vacuum segment [y1, y2]
/// (q0 = c_max there) is recorded when present.
struct SpeedProfile {
    std::string family;
    std::function<double(double)> q, dq;
    double vac_lo = std::numeric_limits<double>::quiet_NaN();
    double vac_hi = std::numeric_limits<double>::quiet_NaN();
    bool has_vacuum_segment() const { return !std::isnan(vac_lo); }
};

struct Nozzle {
    WallCurve wall;
    InletCurve inlet;
    SpeedProfile q0;
};

/// Right-hand side of the inlet admissibility inequality |q0'| <= rhs:
/// -Upsilon'' / (1 + Upsilon'^2) * q c / sqrt(q^2 - c^2).
inline double admissible_slope(const GasModel& gas, const InletCurve& in, double y, double q) {
    const double u1 = in.d1(y), u2 = in.d2(y);
    const double c2 = std::max(0.0, gas.sound2(q));
    const double d = q * q - c2;
    if (!(d > 0.0)) return num::kInf;
    return -u2 / (1.0 + u1 * u1) * q * std::sqrt(c2) / std::sqrt(d);
}

namespace profiles {

inline SpeedProfile constant(double q) {
    return {"constant", [=](double) { return q; }, [](double) { return 0.0; }};
}

/// q_mid + amp cos(pi y / Y): flat at both ends.
inline SpeedProfile cosine(double q_mid, double amp, double Y) {
    return {"cosine", [=](double y) { return q_mid + amp * std::cos(num::kPi * y / Y); },
            [=](double y) { return -amp * num::kPi / Y * std::sin(num::kPi * y / Y); }};
}

/// q_base + amp (1 - cos(pi y / Y)) / 2: increasing, flat at both ends.
inline SpeedProfile cosine_bump(double q_base, double amp, double Y) {
    return {"cosine-bump", [=](double y) { return q_base + 0.5 * amp * (1.0 - std::cos(num::kPi * y / Y)); },
            [=](double y) { return 0.5 * amp * num::kPi / Y * std::sin(num::kPi * y / Y); }};
}

/// Cosine bump whose amplitude is the given fraction of the largest one
/// the admissibility inequality allows on this inlet.
inline SpeedProfile admissible_cosine_bump(const GasModel& gas, const InletCurve& in, double q_base, double fraction) {
    const double Y = in.height();
    double amp = 0.0;
    for (int it = 0; it < 6; ++it) {
        double best = num::kInf;
        for (int i = 1; i < 400; ++i) {
            const double y = Y * i / 400.0;
            const double q = q_base + 0.5 * amp * (1.0 - std::cos(num::kPi * y / Y));
            const double shape = 0.5 * num::kPi / Y * std::sin(num::kPi * y / Y);
            best = std::min(best, admissible_slope(gas, in, y, q) / shape);
        }
        amp = fraction * best;
    }
    auto p = cosine_bump(q_base, amp, Y);
    p.family = "admissible-cosine-bump";
    return p;
}

/// q_axis + c y^2 with c chosen to meet the wall compatibility condition.
inline SpeedProfile compatible_quadratic(double q_axis, const WallCurve& wall, double Y) {
    const double s = wall.d1(wall.l0());
    const double K = wall.d2(wall.l0()) / (1.0 + s * s);
    const double den = 2.0 * Y - K * Y * Y;
    if (!(den > 0.0)) throw DataError("inlet.q0: wall curvature too large for a quadratic compatible profile");
    const double c = K * q_axis / den;
    return {"compatible-quadratic", [=](double y) { return q_axis + c * y * y; },
            [=](double y) { return 2.0 * c * y; }};
}

namespace detail {

// Integrates q' = sign * frac * rhs(q, y) from y_from (speed q_from) to
// y_to in w = sqrt(c_max - q), which stays regular at the limit speed.
// Returns samples (y ascending, q, q').
struct Samples {
    std::vector<double> y, q, dq;
};

inline Samples integrate_saturating(const GasModel& gas, const InletCurve& in, double y_from, double q_from,
                                    double y_to, double sign, double frac,
                                    const std::function<double(double)>& weight = {}, int n = 2001) {
    const double cm = gas.c_max(), e = gas.gamma() - 1.0;
    auto rhs = [&](double w, double y) {
        w = std::max(w, 0.0);
        const double q = cm - w * w;
        // c / w stays finite at w = 0.
        const double c_over_w = std::sqrt(0.5 * e * (2.0 * cm - w * w));
        const double c = c_over_w * w;
        const double d = std::sqrt(std::max(q * q - c * c, 1e-300));
        const double u1 = in.d1(y), u2 = in.d2(y);
        const double k = -u2 / (1.0 + u1 * u1);
        const double wt = weight ? weight(y) : 1.0;
        return -sign * frac * wt * k * q * c_over_w / (2.0 * d);  // dw/dy
    };
    using State = std::vector<double>;
    auto sys = [&](const State& s, State& ds, double y) { ds[0] = rhs(s[0], y); };
    State s{std::sqrt(std::max(0.0, cm - q_from))};
    std::vector<double> ys(n), ws(n);
    for (int i = 0; i < n; ++i) ys[i] = y_from + (y_to - y_from) * i / (n - 1);
    int k = 0;
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_dense_output(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
    ode::integrate_times(stepper, sys, s, ys.begin(), ys.end(), (y_to - y_from) / (n - 1),
                         [&](const State& st, double) { ws[k++] = std::max(0.0, st[0]); });
    Samples out;
    for (int i = 0; i < n; ++i) {
        const double w = ws[i], y = ys[i];
        const double q = cm - w * w;
        double dq = sign * frac * (weight ? weight(ys[i]) : 1.0) * admissible_slope(gas, in, y, q);
        if (!std::isfinite(dq)) dq = 0.0;
        if (w == 0.0) dq = 0.0;
        out.y.push_back(y);
        out.q.push_back(q);
        out.dq.push_back(dq);
    }
    if (y_to < y_from) {
        std::reverse(out.y.begin(), out.y.end());
        std::reverse(out.q.begin(), out.q.end());
        std::reverse(out.dq.begin(), out.dq.end());
    }
    return out;
}

inline SpeedProfile hermite_profile(std::string family, Samples s) {
    using boost::math::interpolators::cubic_hermite;
    const double lo = s.y.front(), hi = s.y.back();
    auto h = std::make_shared<cubic_hermite<std::vector<double>>>(std::move(s.y), std::move(s.q), std::move(s.dq));
    SpeedProfile p;
    p.family = std::move(family);
    p.q = [h, lo, hi](double y) { return (*h)(std::clamp(y, lo, hi)); };
    p.dq = [h, lo, hi](double y) { return h->prime(std::clamp(y, lo, hi)); };
    return p;
}

}  // namespace detail

/// Profile saturating the admissibility inequality (scaled by frac <= 1),
/// anchored at q0(Y) = q_top. sign = +1 gives W0 = 0 (speed increasing
/// towards the wall), sign = -1 gives Z0 = 0.
inline SpeedProfile saturating(const GasModel& gas, const InletCurve& in, double q_top, double sign = 1.0,
                               double frac = 1.0) {
    auto s = detail::integrate_saturating(gas, in, in.height(), q_top, 0.0, sign, frac);
    return detail::hermite_profile("saturating", std::move(s));
}

/// q0 = c_max on [y1, y2], saturating (scaled by frac) on either side so
/// that the speed drops away from the segment in both directions. The
/// slope is tapered to zero at the axis and at the wall so both
/// compatibility conditions hold for a wall with f''(l0) = 0.
inline SpeedProfile vacuum_segment(const GasModel& gas, const InletCurve& in, double y1, double y2,
                                   double frac = 1.0) {
    const double Y = in.height();
    if (!(0.0 <= y1 && y1 <= y2 && y2 <= Y)) throw DataError("inlet.vac_lo/vac_hi must satisfy 0 <= y1 <= y2 <= Y");
    auto smooth = [](double t) {
        t = std::clamp(t, 0.0, 1.0);
        return t * t * (3.0 - 2.0 * t);
    };
    std::shared_ptr<SpeedProfile> lower, upper;
    if (y1 > 0.0) {
        const std::function<double(double)> wl = [=](double y) { return smooth(y / (0.5 * y1)); };
        lower = std::make_shared<SpeedProfile>(detail::hermite_profile(
            "lower", detail::integrate_saturating(gas, in, y1, gas.c_max(), 0.0, 1.0, frac, wl)));
    }
    if (y2 < Y) {
        const double a = 0.5 * (Y - y2);
        const std::function<double(double)> wu = [=](double y) { return smooth((Y - y) / a); };
        upper = std::make_shared<SpeedProfile>(detail::hermite_profile(
            "upper", detail::integrate_saturating(gas, in, y2, gas.c_max(), Y, -1.0, frac, wu)));
    }
    const double cm = gas.c_max();
    SpeedProfile p;
    p.family = "vacuum-segment";
    p.q = [=](double y) {
        if (y < y1) return lower->q(y);
        if (y > y2) return upper->q(y);
        return cm;
    };
    p.dq = [=](double y) {
        if (y < y1) return lower->dq(y);
        if (y > y2) return upper->dq(y);
        return 0.0;
    };
    p.vac_lo = y1;
    p.vac_hi = y2;
    for (double y : {0.0, Y})
        if (!(y >= y1 && y <= y2) && !(p.q(y) > gas.c_star()))
            throw DataError("inlet.speed-range: saturating profile drops to the sonic speed before y = " +
                            std::to_string(y));
    return p;
}

}  // namespace profiles

// ---- validation ------------------------------------------------------------

struct ValidationCheck {
    std::string label;  // descriptive condition name, e.g. "inlet.admissibility"
    bool pass = true;
    bool fatal = true;  // failing a fatal check aborts the pipeline
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    std::vector<double> y, margin;  // admissibility margin samples
    double min_margin = num::kInf, argmin_margin = 0.0;
    bool strictly_positive = false;
    std::vector<std::pair<double, double>> violations;  // y-intervals with negative margin

    bool ok() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
    }
    bool fatal_failure() const {
        return std::any_of(checks.begin(), checks.end(), [](const auto& c) { return !c.pass && c.fatal; });
    }
    bool passed(const std::string& label) const {
        for (const auto& c : checks)
            if (c.label == label) return c.pass;
        return true;
    }
    std::vector<std::string> failed() const {
        std::vector<std::string> out;
        for (const auto& c : checks)
            if (!c.pass) out.push_back(c.label);
        return out;
    }
};

struct ValidationOptions {
    double eq_tol = 1e-8;       // equality constraints
    double margin_tol = 1e-8;   // admissibility slack
    int samples = 2001;
    double wall_span = 50.0;    // sampled wall length in units of f(l0) when l1 = inf
};

inline ValidationReport validate(const Nozzle& nz, const GasModel& gas, const ValidationOptions& opt = {}) {
    ValidationReport rep;
    const WallCurve& w = nz.wall;
    const InletCurve& in = nz.inlet;
    const double l0 = w.l0(), Y = in.height();
    auto add = [&](std::string label, bool pass, bool fatal, std::string msg) {
        rep.checks.push_back({std::move(label), pass, fatal, pass ? std::string() : std::move(msg)});
    };
    auto finite = [](double v) { return std::isfinite(v); };
    auto fmt = [](double v) {
        std::ostringstream s;
        s.precision(10);
        s << v;
        return s.str();
    };

    // Wall.
    const double f0 = w.f(l0), s0 = w.d1(l0);
    if (!finite(f0) || !finite(s0) || !finite(w.d2(l0))) throw DataError("wall: evaluator returned NaN at l0");
    add("wall.height", f0 > 0.0, true, "f(l0) = " + fmt(f0) + " must be positive");
    add("wall.slope", s0 >= 0.0, true, "f'(l0) = " + fmt(s0) + " must be non-negative");
    const double x_end = std::isfinite(w.l1()) ? w.l1() : l0 + opt.wall_span * std::max(f0, 1.0);
    double worst = 0.0, at = l0, prev_sum = -num::kInf;
    bool grows = true;
    for (int i = 0; i < opt.samples; ++i) {
        const double x = l0 + (x_end - l0) * i / (opt.samples - 1.0) * (1.0 - (std::isfinite(w.l1()) ? 1e-9 : 0.0));
        const double d2 = w.d2(x), fx = w.f(x);
        if (!finite(d2) || !finite(fx)) throw DataError("wall: evaluator returned NaN at x = " + fmt(x));
        if (d2 < worst) {
            worst = d2;
            at = x;
        }
        if (!(x + fx > prev_sum)) grows = false;
        prev_sum = x + fx;
    }
    add("wall.convexity", worst >= -opt.eq_tol, false, "f'' = " + fmt(worst) + " < 0 at x = " + fmt(at));
    add("wall.extent", grows, true, "x + f(x) must increase along the sampled wall");
    add("inlet.height", std::abs(Y - f0) <= opt.eq_tol, true,
        "inlet height " + fmt(Y) + " differs from f(l0) = " + fmt(f0));

    // Inlet curve.
    add("inlet.top-point", std::abs(in.x(Y) - l0) <= opt.eq_tol, true,
        "Upsilon(f(l0)) = " + fmt(in.x(Y)) + " must equal l0 = " + fmt(l0));
    add("inlet.axis-slope", std::abs(in.d1(0.0)) <= opt.eq_tol, true, "Upsilon'(0) = " + fmt(in.d1(0.0)) + " must be 0");
    add("inlet.wall-slope", std::abs(in.d1(Y) + s0) <= opt.eq_tol, true,
        "Upsilon'(f(l0)) = " + fmt(in.d1(Y)) + " must equal -f'(l0) = " + fmt(-s0));
    double u2max = -num::kInf, u2at = 0.0;
    for (int i = 0; i < opt.samples; ++i) {
        const double y = Y * i / (opt.samples - 1.0);
        const double u2 = in.d2(y);
        if (!finite(u2) || !finite(in.x(y)) || !finite(in.d1(y)))
            throw DataError("inlet: evaluator returned NaN at y = " + fmt(y));
        if (u2 > u2max) {
            u2max = u2;
            u2at = y;
        }
    }
    add("inlet.concavity", u2max <= opt.eq_tol, true, "Upsilon'' = " + fmt(u2max) + " > 0 at y = " + fmt(u2at));

    // Speed profile.
    const SpeedProfile& q0 = nz.q0;
    double qmin = num::kInf, qmax = -num::kInf;
    bool in_range = true;
    double bad_y = 0.0;
    rep.y.resize(opt.samples);
    rep.margin.resize(opt.samples);
    for (int i = 0; i < opt.samples; ++i) {
        const double y = Y * i / (opt.samples - 1.0);
        const double q = q0.q(y), dq = q0.dq(y);
        if (!finite(q) || !finite(dq)) throw DataError("inlet.q0: profile returned NaN at y = " + fmt(y));
        const bool on_segment = q0.has_vacuum_segment() && y >= q0.vac_lo && y <= q0.vac_hi;
        if (!on_segment) {
            qmin = std::min(qmin, q);
            qmax = std::max(qmax, q);
            if (!(q > gas.c_star() && q < gas.c_max())) {
                if (in_range) bad_y = y;
                in_range = false;
            }
        }
        double m = on_segment ? 0.0 : admissible_slope(gas, in, y, std::min(q, gas.c_max())) - std::abs(dq);
        if (!std::isfinite(m)) m = 0.0;
        rep.y[i] = y;
        rep.margin[i] = m;
        if (m < rep.min_margin) {
            rep.min_margin = m;
            rep.argmin_margin = y;
        }
    }
    add("inlet.speed-range", in_range, true,
        "q0 must stay in (c_star, c_max) = (" + fmt(gas.c_star()) + ", " + fmt(gas.c_max()) + "); fails at y = " +
            fmt(bad_y));
    add("inlet.axis-compatibility", std::abs(q0.dq(0.0)) <= opt.eq_tol, true,
        "q0'(0) = " + fmt(q0.dq(0.0)) + " must be 0");
    const double want = w.d2(l0) / (1.0 + s0 * s0) * q0.q(Y);
    add("inlet.wall-compatibility", std::abs(q0.dq(Y) - want) <= opt.eq_tol, true,
        "q0'(f(l0)) = " + fmt(q0.dq(Y)) + " must equal f''(l0) q0 / (1 + f'(l0)^2) = " + fmt(want));

    // Violating intervals of the admissibility inequality.
    for (int i = 0; i < opt.samples; ++i) {
        if (rep.margin[i] >= -opt.margin_tol) continue;
        const double lo = rep.y[i];
        while (i + 1 < opt.samples && rep.margin[i + 1] < -opt.margin_tol) ++i;
        rep.violations.emplace_back(lo, rep.y[i]);
    }
    std::string where;
    for (const auto& [a, b] : rep.violations) where += " [" + fmt(a) + ", " + fmt(b) + "]";
    add("inlet.admissibility", rep.violations.empty(), false,
        "|q0'| exceeds the admissible slope on y in" + where + " (min margin " + fmt(rep.min_margin) + ")");
    rep.strictly_positive = true;
    for (int i = 1; i + 1 < opt.samples; ++i)
        if (!(rep.margin[i] > 0.0)) rep.strictly_positive = false;
    (void)qmin;
    (void)qmax;
    return rep;
}

// ---- potential-plane inlet data -------------------------------------------

struct PotentialInletData {
    double m = 0.0;              // mass flux through the (sub-)strip
    double psi0 = 0.0;           // stream value at the lower edge
    double y_lo = 0.0, y_hi = 0.0;
    std::vector<double> psi;     // uniform, psi0 .. psi0 + m
    std::vector<double> y;       // Y_in(psi)
    std::vector<double> q0, Q0, G0, W0, Z0, dQ0;
    std::vector<double> h0;      // turning variable H(Q0)
    std::vector<double> theta0;  // -int G0 by the trapezoid rule
    std::vector<double> angle0;  // -arctan Upsilon'(y), the exact inlet inclination
    bool vacuum_below = false, vacuum_above = false;  // edge nodes sit on a vacuum segment

    std::size_t size() const { return psi.size(); }
    double dpsi() const { return m / static_cast<double>(psi.size() - 1); }
};

/// Mass-flux density along the inlet, q0 rho(q0^2) sqrt(1 + Upsilon'^2).
inline double inlet_flux_density(const Nozzle& nz, const GasModel& gas, double y) {
    const double q = std::min(nz.q0.q(y), gas.c_max());
    const double u1 = nz.inlet.d1(y);
    return q * gas.density(q) * std::sqrt(1.0 + u1 * u1);
}

/// Stream-function values at the inlet for the interval [y_lo, y_hi] with
/// N uniform cells; the default is the whole inlet.
inline PotentialInletData build_potential_inlet(const Nozzle& nz, const GasModel& gas, int N, double y_lo = 0.0,
                                                double y_hi = num::kInf) {
    if (N < 16) throw DataError("grid.N must be at least 16");
    const InletCurve& in = nz.inlet;
    if (!std::isfinite(y_hi)) y_hi = in.height();
    if (!(y_hi > y_lo)) throw DataError("inlet: empty strip");
    auto rate = [&](double y) { return inlet_flux_density(nz, gas, y); };

    // Cumulative flux on a fine y-grid, then per-node root-finding.
    const int M = 1024;
    std::vector<double> yk(M + 1), Pk(M + 1, 0.0);
    for (int k = 0; k <= M; ++k) yk[k] = y_lo + (y_hi - y_lo) * k / M;
    for (int k = 1; k <= M; ++k) Pk[k] = Pk[k - 1] + num::integrate(rate, yk[k - 1], yk[k], 1e-14, 1e-16);
    PotentialInletData d;
    d.m = Pk[M];
    d.y_lo = y_lo;
    d.y_hi = y_hi;
    if (!(d.m > 0.0)) throw NumericError("inlet mass flux is not positive");
    d.psi0 = y_lo > 0.0 ? num::integrate(rate, 0.0, y_lo, 1e-14, 1e-16) : 0.0;
    const double cm = gas.c_max();
    d.vacuum_below = nz.q0.q(y_lo) >= cm;
    d.vacuum_above = nz.q0.q(y_hi) >= cm;

    const int n = N + 1;
    d.psi.resize(n);
    d.y.resize(n);
    for (int j = 0; j < n; ++j) {
        const double target = d.m * j / N;
        d.psi[j] = d.psi0 + target;
        if (j == 0) {
            d.y[j] = y_lo;
            continue;
        }
        if (j == N) {
            d.y[j] = y_hi;
            continue;
        }
        const auto it = std::upper_bound(Pk.begin(), Pk.end(), target);
        const int k = std::clamp(static_cast<int>(it - Pk.begin()) - 1, 0, M - 1);
        auto g = [&](double y) { return Pk[k] + num::integrate(rate, yk[k], y, 1e-14, 1e-17) - target; };
        d.y[j] = num::bracketed_root(g, yk[k], yk[k + 1], Pk[k] - target, Pk[k + 1] - target, 52);
    }

    d.q0.resize(n);
    d.Q0.resize(n);
    d.G0.resize(n);
    d.W0.resize(n);
    d.Z0.resize(n);
    d.dQ0.resize(n);
    d.h0.resize(n);
    d.theta0.resize(n);
    d.angle0.resize(n);
    for (int j = 0; j < n; ++j) {
        const double y = d.y[j];
        const double q = std::min(nz.q0.q(y), cm);
        const double u1 = in.d1(y), u2 = in.d2(y);
        const double sq = std::sqrt(1.0 + u1 * u1);
        d.q0[j] = q;
        d.angle0[j] = -std::atan(u1);
        if (q >= cm) {
            d.h0[j] = gas.h_max();
            d.Q0[j] = -num::kInf;
            d.G0[j] = u2 < 0.0 ? -num::kInf : 0.0;
            d.dQ0[j] = -num::kInf;
            d.W0[j] = d.Z0[j] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double rho = gas.density(q);
        d.h0[j] = gas.turning_of_speed(q);
        d.Q0[j] = gas.hodograph_A(q);
        d.G0[j] = u2 / (sq * sq * sq) / (q * rho);
        d.dQ0[j] = gas.dA_dq(q) * nz.q0.dq(y) / (q * rho * sq);
        const double lam = gas.local_exact(d.h0[j]).lambda;
        const double lq = std::isfinite(lam) ? lam * d.dQ0[j] : 0.0;
        d.W0[j] = d.G0[j] - lq;
        d.Z0[j] = -d.G0[j] - lq;
    }
    d.theta0[0] = d.angle0[0];
    const double dpsi = d.dpsi();
    for (int j = 1; j < n; ++j) {
        const double a = d.G0[j - 1], b = d.G0[j];
        const double inc = (std::isfinite(a) && std::isfinite(b)) ? 0.5 * dpsi * (a + b) : 0.0;
        d.theta0[j] = d.theta0[j - 1] - inc;
    }
    return d;
}

}  // namespace potflow
