#pragma once

// Small numerical toolbox shared by the modules: adaptive quadrature,
// piecewise Chebyshev tables, bracketed roots, a C2 cubic spline, the
// monotone cubic Hermite kernel used by the marcher and a log-log fit.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "potflow/errors.hpp"

namespace potflow::num {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kPi = std::numbers::pi;

/// Adaptive Gauss-Kronrod (7/15) integral of f over [a, b] by bisection.
/// Boost's own adaptive driver reports leaf error estimates in the
/// reference-interval scale, so the recursion is done here on top of the
/// non-adaptive rule. Throws NumericError when the error estimate misses
/// both tolerances.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-12, double abs_tol = 1e-14,
                 unsigned max_depth = 18) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    if (a == b) return 0.0;
    if (b < a) return -integrate(f, b, a, rel_tol, abs_tol, max_depth);
    auto leaf = [&](double lo, double hi, double& err, double& l1) {
        double e = 0.0, l = 0.0;
        const double v = GK::integrate(f, lo, hi, 0, 0.0, &e, &l);
        err = e * 0.5 * (hi - lo);
        l1 = l;
        return v;
    };
    double err0 = 0.0, l1 = 0.0;
    const double v0 = leaf(a, b, err0, l1);
    const double tol = std::max(abs_tol, rel_tol * std::abs(v0));
    double err_sum = 0.0, l1_sum = 0.0;
    auto rec = [&](auto&& self, double lo, double hi, double v, double err, double l, unsigned depth,
                   double local_tol) -> double {
        if (err <= local_tol || depth == 0) {
            err_sum += err;
            l1_sum += l;
            return v;
        }
        const double mid = 0.5 * (lo + hi);
        double e1, e2, l1a, l2a;
        const double v1 = leaf(lo, mid, e1, l1a), v2 = leaf(mid, hi, e2, l2a);
        return self(self, lo, mid, v1, e1, l1a, depth - 1, 0.5 * local_tol) +
               self(self, mid, hi, v2, e2, l2a, depth - 1, 0.5 * local_tol);
    };
    const double v = rec(rec, a, b, v0, err0, l1, max_depth, tol);
    if (!std::isfinite(v)) throw NumericError("quadrature produced a non-finite value");
    if (err_sum > std::max(abs_tol, 64.0 * rel_tol * l1_sum)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "quadrature did not converge (error %.3g, |f| %.3g)", err_sum, l1_sum);
        throw NumericError(buf);
    }
    return v;
}

/// Root of f on [a, b] where f(a), f(b) bracket a sign change (TOMS 748).
template <class F>
double bracketed_root(F&& f, double a, double b, double fa, double fb, int bits = 50,
                      std::uintmax_t max_iter = 200) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0)) throw NumericError("root is not bracketed");
    boost::math::tools::eps_tolerance<double> tol(bits);
    std::uintmax_t it = max_iter;
    auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, it);
    if (it >= max_iter) throw NumericError("root finder exceeded its iteration budget");
    return 0.5 * (r.first + r.second);
}

template <class F>
double bracketed_root(F&& f, double a, double b, int bits = 50) {
    return bracketed_root(f, a, b, f(a), f(b), bits);
}

/// Piecewise Chebyshev interpolant on equal panels of [a, b]. The panel
/// count doubles until the trailing coefficients of every panel fall
/// below tol.
class ChebyshevTable {
public:
    ChebyshevTable() = default;

    template <class F>
    ChebyshevTable(F&& f, double a, double b, double tol, int degree = 20, int max_panels = 1 << 12)
        : a_(a), b_(b), deg_(degree) {
        const int n = deg_ + 1;
        std::vector<double> nodes(n);
        for (int j = 0; j < n; ++j) nodes[j] = std::cos(kPi * (j + 0.5) / n);
        for (int panels = 2; panels <= max_panels; panels *= 2) {
            const double w = (b_ - a_) / panels;
            coef_.assign(static_cast<std::size_t>(panels) * n, 0.0);
            std::vector<double> fv(n);
            bool ok = true;
            for (int p = 0; p < panels; ++p) {
                const double lo = a_ + p * w;
                for (int j = 0; j < n; ++j) fv[j] = f(lo + 0.5 * w * (nodes[j] + 1.0));
                double* c = &coef_[static_cast<std::size_t>(p) * n];
                for (int k = 0; k < n; ++k) {
                    double s = 0.0;
                    for (int j = 0; j < n; ++j) s += fv[j] * std::cos(kPi * k * (j + 0.5) / n);
                    c[k] = 2.0 * s / n;
                }
                c[0] *= 0.5;
                // Coefficients of an n-point transform carry roundoff of order n eps |f|.
                double fmax = 0.0;
                for (double x : fv) fmax = std::max(fmax, std::abs(x));
                const double floor = 4.0 * n * std::numeric_limits<double>::epsilon() * fmax;
                if (std::abs(c[n - 1]) + std::abs(c[n - 2]) > std::max(tol, floor)) ok = false;
            }
            panels_ = panels;
            inv_w_ = panels / (b_ - a_);
            if (ok) return;
        }
        throw NumericError("Chebyshev table did not reach its tolerance");
    }

    double operator()(double x) const {
        const double u = (x - a_) * inv_w_;
        int p = static_cast<int>(u);
        p = std::clamp(p, 0, panels_ - 1);
        const double t = 2.0 * (u - p) - 1.0;
        const double* c = &coef_[static_cast<std::size_t>(p) * (deg_ + 1)];
        double b1 = 0.0, b2 = 0.0;
        for (int k = deg_; k >= 1; --k) {
            const double b0 = 2.0 * t * b1 - b2 + c[k];
            b2 = b1;
            b1 = b0;
        }
        return t * b1 - b2 + c[0];
    }

    /// Table of the antiderivative vanishing at the lower end, obtained by
    /// integrating each panel's series exactly.
    ChebyshevTable integral() const {
        ChebyshevTable r;
        r.a_ = a_;
        r.b_ = b_;
        r.inv_w_ = inv_w_;
        r.panels_ = panels_;
        r.deg_ = deg_ + 1;
        const int n = deg_ + 1, m = n + 1;
        const double half_w = 0.5 / inv_w_;
        r.coef_.assign(static_cast<std::size_t>(panels_) * m, 0.0);
        double offset = 0.0;
        for (int p = 0; p < panels_; ++p) {
            const double* c = &coef_[static_cast<std::size_t>(p) * n];
            double* A = &r.coef_[static_cast<std::size_t>(p) * m];
            auto cc = [&](int k) { return k == 0 ? 2.0 * c[0] : (k < n ? c[k] : 0.0); };
            double at_lo = 0.0, at_hi = 0.0;
            for (int k = 1; k < m; ++k) {
                A[k] = half_w * (cc(k - 1) - cc(k + 1)) / (2.0 * k);
                at_lo += (k % 2 ? -A[k] : A[k]);
                at_hi += A[k];
            }
            A[0] = offset - at_lo;
            offset = A[0] + at_hi;
        }
        return r;
    }

    double lower() const { return a_; }
    double upper() const { return b_; }
    int panels() const { return panels_; }

private:
    double a_ = 0.0, b_ = 1.0, inv_w_ = 1.0;
    int deg_ = 0, panels_ = 0;
    std::vector<double> coef_;
};

/// C2 cubic spline through (x_i, y_i). Each end is either clamped to a
/// given first derivative or natural (zero second derivative).
class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(std::vector<double> x, std::vector<double> y, double d_left = kInf,
                double d_right = kInf)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw DataError("spline needs at least two matching samples");
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) throw DataError("spline sample is not finite");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1])) throw DataError("spline abscissas must be strictly increasing");
        // Tridiagonal system for the second derivatives M_i.
        std::vector<double> sub(n, 0.0), dia(n, 0.0), sup(n, 0.0), rhs(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
            sub[i] = h0 / 6.0;
            dia[i] = (h0 + h1) / 3.0;
            sup[i] = h1 / 6.0;
            rhs[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
        }
        const double hl = x_[1] - x_[0], hr = x_[n - 1] - x_[n - 2];
        if (std::isfinite(d_left)) {
            dia[0] = hl / 3.0;
            sup[0] = hl / 6.0;
            rhs[0] = (y_[1] - y_[0]) / hl - d_left;
        } else {
            dia[0] = 1.0;
        }
        if (std::isfinite(d_right)) {
            sub[n - 1] = hr / 6.0;
            dia[n - 1] = hr / 3.0;
            rhs[n - 1] = d_right - (y_[n - 1] - y_[n - 2]) / hr;
        } else {
            dia[n - 1] = 1.0;
        }
        for (std::size_t i = 1; i < n; ++i) {
            const double w = sub[i] / dia[i - 1];
            dia[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m_.assign(n, 0.0);
        m_[n - 1] = rhs[n - 1] / dia[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) m_[i] = (rhs[i] - sup[i] * m_[i + 1]) / dia[i];
    }

    double operator()(double x) const { return eval(x, 0); }
    double d1(double x) const { return eval(x, 1); }
    double d2(double x) const { return eval(x, 2); }
    double front() const { return x_.front(); }
    double back() const { return x_.back(); }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }

private:
    double eval(double x, int order) const {
        const std::size_t n = x_.size();
        std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
        i = std::clamp<std::size_t>(i, 1, n - 1) - 1;
        const double h = x_[i + 1] - x_[i];
        const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
        switch (order) {
            case 0:
                return a * y_[i] + b * y_[i + 1] +
                       ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
            case 1:
                return (y_[i + 1] - y_[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m_[i] +
                       (3.0 * b * b - 1.0) / 6.0 * h * m_[i + 1];
            default:
                return a * m_[i] + b * m_[i + 1];
        }
    }

    std::vector<double> x_, y_, m_;
};

/// Limited node slopes (per cell, i.e. already multiplied by the spacing)
/// for monotone cubic Hermite interpolation on a uniform grid: harmonic
/// mean of the adjacent differences, zero at local extrema.
inline void monotone_slopes(const std::vector<double>& y, std::vector<double>& s) {
    const std::size_t n = y.size();
    s.assign(n, 0.0);
    if (n < 2) return;
    if (n == 2) {
        s[0] = s[1] = y[1] - y[0];
        return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d0 = y[i] - y[i - 1], d1 = y[i + 1] - y[i];
        s[i] = (d0 * d1 > 0.0) ? 2.0 * d0 * d1 / (d0 + d1) : 0.0;
    }
    auto end_slope = [](double d0, double d1) {
        double m = 0.5 * (3.0 * d0 - d1);
        if (m * d0 <= 0.0) return 0.0;
        if (d0 * d1 <= 0.0 && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return m;
    };
    s[0] = end_slope(y[1] - y[0], y[2] - y[1]);
    s[n - 1] = end_slope(y[n - 1] - y[n - 2], y[n - 2] - y[n - 3]);
}

/// Hermite cubic on cell [i, i+1] at fraction t, written so that
/// constant data is reproduced exactly.
inline double hermite_cell(const std::vector<double>& y, const std::vector<double>& s, std::size_t i,
                           double t) {
    const double d = y[i + 1] - y[i];
    const double t2 = t * t, t3 = t2 * t;
    return y[i] + d * (3.0 * t2 - 2.0 * t3) + s[i] * (t3 - 2.0 * t2 + t) + s[i + 1] * (t3 - t2);
}

/// Locate x on the uniform grid {i*dx}, i = 0..n-1: returns the cell index
/// in [0, n-2] and the local fraction.
inline std::pair<std::size_t, double> locate(double x, double dx, std::size_t n) {
    const double u = x / dx;
    double fl = std::floor(u);
    fl = std::clamp(fl, 0.0, static_cast<double>(n - 2));
    return {static_cast<std::size_t>(fl), u - fl};
}

/// Least-squares slope and intercept of log(y) against log(x).
inline std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) throw NumericError("log-log fit needs at least two positive samples");
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw NumericError("log-log fit is degenerate");
    const double slope = (n * sxy - sx * sy) / den;
    return {slope, (sy - slope * sx) / n};
}

/// Observed convergence order from errors on grids refined by two.
inline double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

/// Composite Simpson rule on a non-uniform grid (pairs of cells fitted by
/// parabolas; an odd trailing cell is closed with a three-point end rule).
inline double simpson_nonuniform(const std::vector<double>& x, const std::vector<double>& f) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * (x[1] - x[0]) * (f[0] + f[1]);
    auto pair = [&](std::size_t i) {
        const double h0 = x[i + 1] - x[i], h1 = x[i + 2] - x[i + 1], hs = h0 + h1;
        return hs / 6.0 *
               ((2.0 - h1 / h0) * f[i] + hs * hs / (h0 * h1) * f[i + 1] + (2.0 - h0 / h1) * f[i + 2]);
    };
    double s = 0.0;
    std::size_t i = 0;
    for (; i + 2 < n; i += 2) s += pair(i);
    if (i + 1 < n) {
        // Last single cell [n-2, n-1] from the parabola through n-3..n-1.
        const double h0 = x[n - 2] - x[n - 3], h1 = x[n - 1] - x[n - 2];
        s += h1 * ((2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1)) * f[n - 1] +
                   (h1 + 3.0 * h0) / (6.0 * h0) * f[n - 2] - h1 * h1 / (6.0 * h0 * (h0 + h1)) * f[n - 3]);
    }
    return s;
}

}  // namespace potflow::num
