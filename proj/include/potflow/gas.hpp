#pragma once

// Polytropic gas state functions on the supersonic branch.
//
// Internally most quantities are parametrised by the hodograph angle
// v in [0, pi/2], defined through c^2 = sigma_star * cos^2 v, where
// sigma_star = 2/(gamma+1) is the squared sonic speed. v = 0 is the sonic
// state and v = pi/2 is vacuum. In this variable the turning integrand is
// smooth on the closed interval, so the budget H(-inf) needs no tail
// treatment, and the inverse of H is analytic in h^(1/3).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "potflow/errors.hpp"
#include "potflow/numerics.hpp"

namespace potflow {

class GasModel {
public:
    /// Quantities derived from a turning value h, used in marching loops.
    struct Local {
        double v = 0;        // hodograph angle
        double sigma = 0;    // squared sound speed
        double rho = 0;      // density
        double q = 0;        // speed
        double deficit = 0;  // c_max - q, without cancellation
        double lambda = 0;   // characteristic speed b^(1/2)
    };

    explicit GasModel(double gamma) : g_(gamma) {
        if (!(gamma > 1.0) || !std::isfinite(gamma))
            throw DomainError("gamma must be a finite number greater than 1, got " + std::to_string(gamma));
        sig_star_ = 2.0 / (g_ + 1.0);
        c_star_ = std::sqrt(sig_star_);
        c_max_ = std::sqrt(2.0 / (g_ - 1.0));
        rho_star_ = std::pow(sig_star_, 1.0 / (g_ - 1.0));
        kappa_ = std::sqrt((g_ + 1.0) / (g_ - 1.0));
        lam_coef_ = std::sqrt(0.5 * (g_ - 1.0));

        const double half_pi = 0.5 * std::numbers::pi;
        auto k = [this](double v) { return turning_integrand(v); };
        h_of_v_ = num::ChebyshevTable(k, 0.0, half_pi, 1e-15 * kappa_).integral();
        h_max_ = h_of_v_(half_pi);
        s_max_ = std::cbrt(h_max_);
        v_of_s_ = num::ChebyshevTable(
            [&](double s) {
                if (s <= 0.0) return 0.0;
                if (s >= s_max_) return half_pi;
                const double target = s * s * s;
                return num::bracketed_root([&](double v) { return h_of_v_(v) - target; }, 0.0, half_pi,
                                           -target, h_max_ - target, 52);
            },
            0.0, s_max_, 1e-13);
    }

    double gamma() const { return g_; }
    double c_star() const { return c_star_; }
    double c_max() const { return c_max_; }
    double h_max() const { return h_max_; }
    double sigma_star() const { return sig_star_; }
    double rho_star() const { return rho_star_; }

    // ---- closed forms in the speed ------------------------------------

    double density(double q) const {
        check_speed(q);
        if (q >= c_max_) return 0.0;
        return std::pow(std::max(0.0, sound2(q)), 1.0 / (g_ - 1.0));
    }

    /// Squared sound speed 1 - (gamma-1) q^2 / 2.
    double sound2(double q) const { return 1.0 - 0.5 * (g_ - 1.0) * q * q; }

    double mach(double q) const {
        check_speed(q);
        const double c2 = sound2(q);
        return c2 > 0.0 ? q / std::sqrt(c2) : num::kInf;
    }

    /// Hodograph angle of a supersonic speed.
    double angle_of_speed(double q) const {
        check_supersonic(q);
        const double s2 = 0.25 * (g_ * g_ - 1.0) * (q * q - sig_star_);
        const double c2 = std::max(0.0, 1.0 - s2);
        return std::atan2(std::sqrt(std::clamp(s2, 0.0, 1.0)), std::sqrt(c2));
    }

    double dA_dq(double q) const {
        check_supersonic(q);
        const double c2 = sound2(q);
        return (c2 - q * q) / (q * density(q) * c2);
    }

    double dB_dq(double q) const {
        check_supersonic(q);
        return density(q) / q;
    }

    // ---- hodograph functions ------------------------------------------

    double hodograph_A(double q) const {
        check_supersonic(q);
        if (q >= c_max_) throw DomainError("hodograph A diverges at the limit speed");
        if (q <= c_star_) return 0.0;
        return A_of_density(density(q));
    }

    double hodograph_B(double q) const {
        check_supersonic(q);
        if (q <= c_star_) return 0.0;
        const double rho = density(q);
        const double e = g_ - 1.0;
        return num::integrate(
            [&](double r) { return std::pow(r, e) / speed2_of_density(r); }, rho, rho_star_, 1e-12, 1e-15);
    }

    /// A as a function of density on (0, rho_star], integrated in
    /// u = log(rho / rho_star). The integrand (q^2 - c^2) / (q^2 rho) uses
    /// sigma_star - sigma = -sigma_star expm1((gamma-1) u), so nothing
    /// cancels near the sonic state.
    double A_of_density(double rho) const {
        if (!(rho > 0.0)) throw DomainError("density must be positive on the hodograph branch");
        if (rho >= rho_star_) return 0.0;
        const double e = g_ - 1.0, lead = 2.0 / e;
        return num::integrate(
            [&](double u) {
                const double x = e * u;
                const double sig = sig_star_ * std::exp(x);
                const double q2 = 2.0 * (1.0 - sig) / e;
                return lead * std::expm1(x) / (q2 * rho_star_ * std::exp(u));
            },
            std::log(rho / rho_star_), 0.0, 1e-13, 0.0);
    }

    /// Density on the supersonic branch with A = Q.
    double density_of_A(double Q) const {
        if (Q > 0.0 || std::isnan(Q)) throw DomainError("hodograph variable must be non-positive");
        if (Q == 0.0) return rho_star_;
        if (Q == -num::kInf) return 0.0;
        double hi = rho_star_;
        double lo = 1.0 / (1.0 / rho_star_ - Q);
        double flo = A_of_density(lo) - Q;
        while (flo > 0.0) {
            hi = lo;
            lo *= 0.5;
            if (lo < 1e-300) throw NumericError("hodograph inversion underflow");
            flo = A_of_density(lo) - Q;
        }
        if (flo == 0.0) return lo;
        const double fhi = A_of_density(hi) - Q;
        return num::bracketed_root([&](double r) { return A_of_density(r) - Q; }, lo, hi, flo, fhi, 52);
    }

    double A_inverse_plus(double Q) const {
        if (Q == 0.0) return c_star_;
        return speed_of_density(density_of_A(Q));
    }

    double wavespeed_b(double Q) const {
        if (!(Q < 0.0)) throw DomainError("wave speed is unbounded at the sonic state (Q = 0)");
        const double rho = density_of_A(Q);
        const double q2 = speed2_of_density(rho);
        const double sig = std::pow(rho, g_ - 1.0);
        return rho * rho * sig / (0.5 * (g_ + 1.0) * q2 - 1.0);
    }

    double source_p(double Q) const {
        if (!(Q < 0.0)) throw DomainError("source term is unbounded at the sonic state (Q = 0)");
        const double rho = density_of_A(Q);
        const double q2 = speed2_of_density(rho);
        const double sig = std::pow(rho, g_ - 1.0);
        const double d = 0.5 * (g_ + 1.0) * q2 - 1.0;
        return (g_ + 1.0) * q2 * q2 / (d * d * d) * std::pow(rho, 3.0) * sig;
    }

    // ---- turning function ----------------------------------------------

    /// Integrand of the turning function in the hodograph angle.
    double turning_integrand(double v) const {
        const double s2 = std::sin(v) * std::sin(v);
        return 2.0 * kappa_ * s2 / (g_ - 1.0 + 2.0 * s2);
    }

    double turning_of_angle(double v) const {
        if (v <= 0.0) return 0.0;
        if (v >= 0.5 * std::numbers::pi) return h_max_;
        return h_of_v_(v);
    }

    /// Hodograph angle of a turning value (table plus Newton polish).
    double angle_of_turning(double h) const {
        if (h <= 0.0) return 0.0;
        if (h >= h_max_) return 0.5 * std::numbers::pi;
        double v = v_of_s_(std::cbrt(h));
        for (int it = 0; it < 3; ++it) {
            const double k = turning_integrand(v);
            if (k < 1e-300) break;
            const double dv = (h_of_v_(v) - h) / k;
            v = std::clamp(v - dv, 0.0, 0.5 * std::numbers::pi);
            if (std::abs(dv) < 1e-16) break;
        }
        return v;
    }

    double turning_H(double Q) const {
        if (Q > 0.0 || std::isnan(Q)) throw DomainError("turning function needs Q <= 0");
        if (Q == 0.0) return 0.0;
        if (Q == -num::kInf) return h_max_;
        const double rho = density_of_A(Q);
        const double ratio = std::pow(rho, g_ - 1.0) / sig_star_;
        return turning_of_angle(std::atan2(std::sqrt(std::max(0.0, 1.0 - ratio)), std::sqrt(ratio)));
    }

    double H_inverse(double h) const {
        if (h < 0.0 || std::isnan(h)) throw DomainError("turning value must be non-negative");
        if (h >= h_max_) throw VacuumBudgetExceeded("turning value reaches the vacuum budget");
        if (h == 0.0) return 0.0;
        const double v = angle_of_turning(h);
        const double cv = std::cos(v);
        return A_of_density(std::pow(sig_star_ * cv * cv, 1.0 / (g_ - 1.0)));
    }

    double turning_of_speed(double q) const {
        if (q >= c_max_) return h_max_;
        return turning_of_angle(angle_of_speed(q));
    }

    double speed_of_turning(double h) const { return local_exact(h).q; }

    /// Fast evaluation used by the marcher (table only, no polish).
    Local local(double h) const {
        const double s = std::cbrt(std::clamp(h, 0.0, h_max_));
        return from_angle(s >= s_max_ ? 0.5 * std::numbers::pi : v_of_s_(s));
    }

    Local local_exact(double h) const { return from_angle(angle_of_turning(h)); }

    double lambda(double h) const { return local(h).lambda; }

    Local from_angle(double v) const {
        Local L;
        L.v = v;
        const bool vac = v >= 0.5 * std::numbers::pi;
        const double cv = vac ? 0.0 : std::cos(v), sv = vac ? 1.0 : std::sin(v);
        L.sigma = sig_star_ * cv * cv;
        L.rho = std::pow(L.sigma, 1.0 / (g_ - 1.0));
        const double q2 = 2.0 * (1.0 - L.sigma) / (g_ - 1.0);
        L.q = std::sqrt(q2);
        L.deficit = 2.0 * L.sigma / ((g_ - 1.0) * (c_max_ + L.q));
        L.lambda = sv > 0.0 ? lam_coef_ * c_star_ * cv * L.rho / sv : num::kInf;
        return L;
    }

    double speed2_of_density(double rho) const { return 2.0 * (1.0 - std::pow(rho, g_ - 1.0)) / (g_ - 1.0); }
    double speed_of_density(double rho) const { return std::sqrt(speed2_of_density(rho)); }

private:
    void check_speed(double q) const {
        if (!(q >= 0.0) || q > c_max_ * (1.0 + 1e-15))
            throw DomainError("speed " + std::to_string(q) + " outside [0, c_max]");
    }
    void check_supersonic(double q) const {
        check_speed(q);
        if (q < c_star_ * (1.0 - 1e-15))
            throw BranchError("speed " + std::to_string(q) + " is subsonic; only the supersonic branch is served");
    }

    double g_;
    double sig_star_ = 0, c_star_ = 0, c_max_ = 0, rho_star_ = 0, kappa_ = 0, lam_coef_ = 0;
    double h_max_ = 0, s_max_ = 0;
    num::ChebyshevTable h_of_v_, v_of_s_;
};

}  // namespace potflow
