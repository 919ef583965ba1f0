#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "potflow/vacuum.hpp"

using namespace potflow;

namespace {

Nozzle expanding_fan(const GasModel& g) {
    const double s = std::tan(0.15);
    auto in = InletCurve::arc(1.0, 1.0, s);
    const double q_base = g.c_star() + 0.25 * (g.c_max() - g.c_star());
    return {WallCurve::line(1.0, 1.0, s), in, profiles::admissible_cosine_bump(g, in, q_base, 0.5)};
}

}  // namespace

TEST(Reconstruct, UniformFlowIsExact) {
    GasModel g(1.4);
    Nozzle nz{WallCurve::line(0.0, 1.0, 0.0), InletCurve::vertical(0.0, 1.0), profiles::constant(1.5)};
    auto in = build_potential_inlet(nz, g, 64);
    Reconstructor rec(g, in, nz.inlet, &nz.wall, 0, {3.0});
    MarchOptions o;
    o.phi_max = 10.0;
    o.sink = std::ref(rec);
    auto out = march(in, g, &nz.wall, o);
    // Streamlines are horizontal and x = phi / q.
    for (std::size_t i = 0; i < rec.x().size(); ++i) {
        EXPECT_NEAR(rec.x()[i], out.phi_end / 1.5, 1e-12);
        EXPECT_NEAR(rec.y()[i], in.y[i], 1e-14);
    }
    EXPECT_LT(rec.closure_defect(out.final_state), 1e-12);
    EXPECT_LT(rec.wall_deviation(), 1e-14);
    ASSERT_EQ(rec.sections().size(), 1u);
    ASSERT_TRUE(rec.sections()[0].complete());
    EXPECT_NEAR(rec.sections()[0].flux(), in.m, 1e-12);
}

TEST(Reconstruct, ClosureDefectConvergesAtSecondOrder) {
    GasModel g(1.4);
    auto nz = expanding_fan(g);
    std::vector<double> defect;
    for (int N : {64, 128, 256}) {
        GlobalOptions go;
        go.march.phi_max = 10.0;
        go.sections = {2.0};
        auto G = solve_global(nz, g, N, go);
        defect.push_back(G.closure_defect);
        ASSERT_EQ(G.sections.size(), 1u);
        ASSERT_TRUE(G.sections[0].complete());
        EXPECT_NEAR(G.sections[0].flux(), G.inlet.m, 1e-5 * G.inlet.m);
    }
    EXPECT_GE(num::observed_order(defect[0], defect[1]), 1.8);
    EXPECT_GE(num::observed_order(defect[1], defect[2]), 1.8);
}

TEST(Export, EmptyCsvIsHeaderOnly) {
    std::ostringstream os;
    write_csv(os, {});
    EXPECT_EQ(os.str(), std::string(kCsvHeader) + "\n");
}

TEST(Export, CsvRowsCarryVelocityComponents) {
    FieldSnapshot f;
    f.phi = 2.0;
    f.dpsi = 0.5;
    f.x = {1.0};
    f.y = {0.0};
    f.q = {2.0};
    f.theta = {num::kPi / 2};
    f.rho = {0.25};
    f.mach = {3.0};
    f.vacuum = {0};
    std::ostringstream os;
    write_csv(os, {f});
    std::istringstream is(os.str());
    std::string header, row;
    std::getline(is, header);
    std::getline(is, row);
    std::vector<double> v;
    std::stringstream rs(row);
    for (std::string c; std::getline(rs, c, ',');) v.push_back(std::stod(c));
    ASSERT_EQ(v.size(), 10u);
    EXPECT_NEAR(v[4], 0.0, 1e-15);  // u
    EXPECT_DOUBLE_EQ(v[5], 2.0);    // v
    EXPECT_EQ(v[9], 0.0);
}

TEST(Export, JsonRoundTripIsLossless) {
    GasModel g(1.4);
    auto nz = expanding_fan(g);
    GlobalOptions go;
    go.march.phi_max = 3.0;
    go.snapshot_stride = 5;
    auto G = solve_global(nz, g, 32, go);
    ASSERT_FALSE(G.snapshots.empty());
    ExportMeta meta{1.4, G.inlet.m, "NoVacuumReached", num::kInf, num::kInf};
    const auto j = fields_to_json(G.snapshots, meta);
    ExportMeta back;
    const auto snaps = fields_from_json(nlohmann::json::parse(j.dump()), &back);
    ASSERT_EQ(snaps.size(), G.snapshots.size());
    EXPECT_EQ(back.m, meta.m);
    EXPECT_TRUE(std::isinf(back.zeta));
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        EXPECT_EQ(snaps[k].phi, G.snapshots[k].phi);
        EXPECT_EQ(snaps[k].x, G.snapshots[k].x);
        EXPECT_EQ(snaps[k].q, G.snapshots[k].q);
        EXPECT_EQ(snaps[k].mach, G.snapshots[k].mach);
    }
}

TEST(Export, VacuumNodesAreFlagged) {
    GasModel g(1.4);
    Nozzle nz{WallCurve::arctan_profile(0.0, 1.0, 0.0, 85.0 * num::kPi / 180.0, 0.5, 1.0),
              InletCurve::vertical(0.0, 1.0), profiles::constant(std::sqrt(9.0 / 2.8))};
    GlobalOptions go;
    go.build_network = false;
    auto G = solve_global(nz, g, 64, go);
    ASSERT_TRUE(G.region.has_value());
    const auto& last = G.snapshots.back();
    EXPECT_EQ(last.vacuum.back(), 1);
    EXPECT_EQ(last.rho.back(), 0.0);
    EXPECT_EQ(last.vacuum.front(), 0);
    const auto fill = G.vacuum_fill(G.region->x0 + 1.0, 12.0, 10, 10);
    ASSERT_FALSE(fill.empty());
    for (const auto& p : fill) {
        EXPECT_EQ(p.vacuum, 1);
        EXPECT_EQ(p.rho, 0.0);
        EXPECT_TRUE(G.region->contains(p.x, p.y));
    }
}
