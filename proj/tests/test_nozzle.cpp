#include <gtest/gtest.h>

#include <cmath>

#include "potflow/nozzle.hpp"

using namespace potflow;

namespace {

double fd1(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2 * h);
}

Nozzle straight_vertical(double q) {
    return {WallCurve::line(0.0, 1.0, 0.0), InletCurve::vertical(0.0, 1.0), profiles::constant(q)};
}

}  // namespace

TEST(Wall, FamiliesAreSelfConsistent) {
    std::vector<WallCurve> walls = {
        WallCurve::line(0.0, 1.0, 0.3),
        WallCurve::power_law(1.0, 0.5, 0.5, 2.0),
        WallCurve::flare(1.0, 1.0, 0.1, 0.2, 1.0),
        WallCurve::flare(1.0, 1.0, 0.1, 0.2, 1.5),
        WallCurve::arctan_profile(0.0, 1.0, 0.1, 1.2, 0.5, 0.8),
        WallCurve::bump(0.0, 1.0, 0.2, 0.05, 3.0, 0.5),
    };
    for (const auto& w : walls) {
        std::function<double(double)> f = [&](double x) { return w.f(x); };
        std::function<double(double)> d1 = [&](double x) { return w.d1(x); };
        for (double x : {w.l0() + 0.1, w.l0() + 0.7, w.l0() + 2.5, w.l0() + 9.0, w.l0() + 80.0}) {
            EXPECT_NEAR(fd1(f, x), w.d1(x), 1e-7 * std::max(1.0, std::abs(w.d1(x)))) << w.family() << " x=" << x;
            EXPECT_NEAR(fd1(d1, x), w.d2(x), 1e-6 * std::max(1.0, std::abs(w.d2(x)))) << w.family() << " x=" << x;
            EXPECT_NEAR(w.angle(x), std::atan(w.d1(x)), 1e-14);
        }
    }
}

TEST(Wall, ArctanProfileIsStraightBeforeOnset) {
    auto w = WallCurve::arctan_profile(0.0, 1.0, 0.0, 1.4, 0.5, 0.4);
    EXPECT_EQ(w.d2(0.3), 0.0);
    EXPECT_EQ(w.d2(0.5), 0.0);
    EXPECT_GT(w.d2(0.6), 0.0);
    EXPECT_NEAR(w.angle(1e4), 1.4, 1e-9);
}

TEST(Wall, SplineRejectsNonMonotoneSamples) {
    EXPECT_THROW(WallCurve::spline({0.0, 1.0, 0.5}, {1.0, 1.1, 1.2}), DataError);
}

TEST(Inlet, CurvesMeetTheGeometricEndConditions) {
    const double s = 0.25;
    for (const auto& c : {InletCurve::arc(2.0, 1.5, s), InletCurve::smoothstep(2.0, 1.5, s),
                          InletCurve::parabola(2.0, 1.5, s)}) {
        EXPECT_NEAR(c.x(1.5), 2.0, 1e-14) << c.family();
        EXPECT_NEAR(c.d1(0.0), 0.0, 1e-15);
        EXPECT_NEAR(c.d1(1.5), -s, 1e-14);
        for (int i = 0; i <= 20; ++i) EXPECT_LE(c.d2(1.5 * i / 20), 0.0);
    }
    auto sm = InletCurve::smoothstep(2.0, 1.5, s);
    EXPECT_EQ(sm.d2(0.0), 0.0);
    EXPECT_NEAR(sm.d2(1.5), 0.0, 1e-15);
}

TEST(Validate, StraightVerticalConstantPassesWithZeroMargin) {
    GasModel g(1.4);
    auto rep = validate(straight_vertical(1.5), g);
    EXPECT_TRUE(rep.ok());
    for (double m : rep.margin) EXPECT_EQ(m, 0.0);
    EXPECT_FALSE(rep.strictly_positive);
}

TEST(Validate, CurvedInletGivesPositiveMargin) {
    GasModel g(1.4);
    Nozzle nz{WallCurve::line(1.0, 1.0, 0.3), InletCurve::arc(1.0, 1.0, 0.3), profiles::constant(1.5)};
    auto rep = validate(nz, g);
    EXPECT_TRUE(rep.ok());
    EXPECT_TRUE(rep.strictly_positive);
    EXPECT_GT(rep.min_margin, 0.0);
}

TEST(Validate, DoubledSlopeFailsOnlyAdmissibility) {
    GasModel g(1.4);
    auto in = InletCurve::smoothstep(1.0, 1.0, 0.3);
    auto sat = profiles::saturating(g, in, 1.8);
    Nozzle ok{WallCurve::line(1.0, 1.0, 0.3), in, sat};
    auto rep_ok = validate(ok, g);
    EXPECT_TRUE(rep_ok.ok()) << (rep_ok.failed().empty() ? "" : rep_ok.failed()[0]);

    const double top = sat.q(1.0);
    SpeedProfile twice{"doubled", [=](double y) { return top + 2.0 * (sat.q(y) - top); },
                       [=](double y) { return 2.0 * sat.dq(y); }};
    Nozzle bad{WallCurve::line(1.0, 1.0, 0.3), in, twice};
    auto rep = validate(bad, g);
    ASSERT_EQ(rep.failed().size(), 1u);
    EXPECT_EQ(rep.failed()[0], "inlet.admissibility");
    EXPECT_FALSE(rep.fatal_failure());
    ASSERT_FALSE(rep.violations.empty());
    EXPECT_LT(rep.violations.front().first, rep.violations.back().second);
}

TEST(Validate, FatalGeometryErrors) {
    GasModel g(1.4);
    Nozzle nz{WallCurve::line(0.0, 1.0, 0.2), InletCurve::vertical(0.0, 1.0), profiles::constant(1.5)};
    auto rep = validate(nz, g);
    EXPECT_FALSE(rep.passed("inlet.wall-slope"));
    EXPECT_TRUE(rep.fatal_failure());

    Nozzle nan{WallCurve::line(0.0, 1.0, 0.0), InletCurve::vertical(0.0, 1.0),
               SpeedProfile{"nan", [](double) { return std::nan(""); }, [](double) { return 0.0; }}};
    EXPECT_THROW(validate(nan, g), DataError);
}

TEST(PotentialInlet, UniformVerticalInlet) {
    GasModel g(1.4);
    const double q = 1.5;
    auto d = build_potential_inlet(straight_vertical(q), g, 32);
    EXPECT_NEAR(d.m, q * g.density(q), 1e-14);
    for (std::size_t j = 0; j < d.size(); ++j) {
        EXPECT_NEAR(d.Q0[j], g.hodograph_A(q), 1e-14);
        EXPECT_EQ(d.G0[j], 0.0);
        EXPECT_EQ(d.W0[j], 0.0);
        EXPECT_EQ(d.Z0[j], 0.0);
        EXPECT_EQ(d.theta0[j], 0.0);
        EXPECT_NEAR(d.y[j], d.psi[j] / (q * g.density(q)), 1e-13);
    }
}

TEST(PotentialInlet, SaturatingArcInletHasVanishingW) {
    GasModel g(1.4);
    auto in = InletCurve::arc(1.0, 1.0, 0.3);
    Nozzle nz{WallCurve::line(1.0, 1.0, 0.3), in, profiles::saturating(g, in, 1.9)};
    auto d = build_potential_inlet(nz, g, 64);
    for (std::size_t j = 0; j < d.size(); ++j) {
        EXPECT_NEAR(d.W0[j], 0.0, 1e-8);
        EXPECT_NEAR(d.Z0[j], -2.0 * d.G0[j], 1e-8);
        EXPECT_GE(d.Z0[j], 0.0);
    }
}

TEST(PotentialInlet, StreamMapInvertsAndAngleIdentityConvergesQuadratically) {
    GasModel g(1.4);
    const double s = 0.3;
    auto in = InletCurve::arc(1.0, 1.0, s);
    const double Y = 1.0;
    auto q0 = profiles::cosine_bump(1.5, 0.02, Y);
    Nozzle nz{WallCurve::line(1.0, 1.0, s), in, q0};
    double prev = 0.0;
    for (int N : {32, 64, 128}) {
        auto d = build_potential_inlet(nz, g, N);
        for (std::size_t j = 1; j < d.size(); j += 5) {
            const double psi = num::integrate([&](double y) { return inlet_flux_density(nz, g, y); }, 0.0, d.y[j]);
            EXPECT_NEAR(psi, d.psi[j], 1e-9);
        }
        const double err = std::abs(d.theta0.back() - std::atan(s));
        if (prev > 0.0) {
            EXPECT_GT(std::log2(prev / err), 1.8);
        }
        prev = err;
        EXPECT_EQ(d.theta0.front(), 0.0);
    }
}

TEST(PotentialInlet, AdmissibleInletHasSignedGradients) {
    GasModel g(2.0);
    auto in = InletCurve::arc(1.0, 1.0, 0.4);
    Nozzle nz{WallCurve::line(1.0, 1.0, 0.4), in, profiles::cosine_bump(1.2, 0.01, 1.0)};
    ASSERT_TRUE(validate(nz, g).ok());
    auto d = build_potential_inlet(nz, g, 128);
    for (std::size_t j = 0; j < d.size(); ++j) {
        EXPECT_LE(d.W0[j], 1e-12);
        EXPECT_GE(d.Z0[j], -1e-12);
    }
}

TEST(Profiles, CompatibleQuadraticMeetsWallCondition) {
    GasModel g(1.4);
    auto w = WallCurve::power_law(1.0, 0.0, 1.0, 2.0);
    auto p = profiles::compatible_quadratic(1.5, w, 1.0);
    EXPECT_EQ(p.dq(0.0), 0.0);
    EXPECT_NEAR(p.dq(1.0), w.d2(1.0) / (1 + w.d1(1.0) * w.d1(1.0)) * p.q(1.0), 1e-14);
}

TEST(Profiles, VacuumSegmentReachesLimitSpeedContinuously) {
    GasModel g(1.4);
    auto in = InletCurve::parabola(1.0, 1.0, 1.0);
    auto p = profiles::vacuum_segment(g, in, 0.4, 0.6);
    EXPECT_EQ(p.q(0.5), g.c_max());
    EXPECT_NEAR(p.q(0.4 - 1e-9), g.c_max(), 1e-6);
    EXPECT_NEAR(p.q(0.6 + 1e-9), g.c_max(), 1e-6);
    EXPECT_LT(p.q(0.1), g.c_max());
    EXPECT_GT(p.q(0.0), g.c_star());
    EXPECT_GT(p.q(1.0), g.c_star());
    for (int i = 0; i <= 100; ++i) {
        const double y = i / 100.0;
        if (y >= 0.4 && y <= 0.6) continue;
        EXPECT_LE(std::abs(p.dq(y)), admissible_slope(g, in, y, p.q(y)) + 1e-8) << y;
    }
}
