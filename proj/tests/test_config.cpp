#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "potflow/pipeline.hpp"

using namespace potflow;

namespace {

std::string message_of(const std::string& ini, const std::vector<std::string>& ov = {}) {
    try {
        auto c = parse_config(ini, ov);
        GasModel g(c.gamma);
        build_nozzle(c, g);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const std::string kBase = find_scenario("straight-uniform").ini;

}  // namespace

TEST(Scenarios, LibraryIsComplete) {
    std::set<std::string> names;
    for (const auto& s : scenarios()) {
        names.insert(s.name);
        EXPECT_FALSE(s.doc.empty());
    }
    for (const char* n : {"straight-uniform", "straight-expanding-fan", "convex-arctan-wall", "convex-powerlaw-wall",
                          "near-limit-inlet", "nonconvex-bump", "inadmissible-inlet", "inlet-vacuum",
                          "asymptotic-flare"})
        EXPECT_TRUE(names.count(n)) << n;
    EXPECT_GE(names.size(), 9u);
    EXPECT_THROW(find_scenario("nope"), ConfigError);
}

TEST(Scenarios, EveryConfigRoundTrips) {
    for (const auto& s : scenarios()) {
        const auto a = parse_config(s.ini);
        const auto b = parse_config(to_ini(a));
        EXPECT_EQ(a.tree, b.tree) << s.name;
        EXPECT_EQ(a.name, s.name);
        GasModel g(a.gamma);
        const auto nz = build_nozzle(b, g);
        EXPECT_FALSE(validate(nz, g).fatal_failure()) << s.name;
    }
}

TEST(Config, OverridesReplaceFileKeys) {
    const auto c = parse_config(kBase, {"grid.N=64", "q0.q=1.7", "run.mode=criteria-only", "output.dir=/tmp/x"});
    EXPECT_EQ(c.grid.N, 64);
    EXPECT_EQ(c.mode, Mode::CriteriaOnly);
    EXPECT_EQ(c.output.dir, "/tmp/x");
    GasModel g(c.gamma);
    EXPECT_DOUBLE_EQ(build_nozzle(c, g).q0.q(0.5), 1.7);
}

TEST(Config, SpeedMayBeGivenAsMachOrFraction) {
    GasModel g(1.4);
    auto with = [](const std::string& line) {
        std::string ini = kBase;
        ini.replace(ini.find("q = 1.5"), 7, line);
        return ini;
    };
    auto c = parse_config(with("q_mach = 3"));
    EXPECT_NEAR(build_nozzle(c, g).q0.q(0.0), std::sqrt(9.0 / 2.8), 1e-14);
    c = parse_config(with("q_frac = 0.5"));
    EXPECT_NEAR(build_nozzle(c, g).q0.q(0.0), 0.5 * (g.c_star() + g.c_max()), 1e-14);
    // Two forms at once are ambiguous.
    EXPECT_NE(message_of(kBase, {"q0.q_mach=2"}).find("q0.q"), std::string::npos);
}

TEST(Config, ErrorsNameTheKey) {
    EXPECT_NE(message_of(kBase, {"grid.N=8"}).find("grid.N"), std::string::npos);
    EXPECT_NE(message_of(kBase, {"grid.safety=1.5"}).find("grid.safety"), std::string::npos);
    EXPECT_NE(message_of(kBase, {"gas.gamma=0.9"}).find("gas.gamma"), std::string::npos);
    EXPECT_NE(message_of(kBase, {"wall.family=zigzag"}).find("wall.family"), std::string::npos);
    EXPECT_NE(message_of(kBase, {"inlet.family=zigzag"}).find("inlet.family"), std::string::npos);
    EXPECT_NE(message_of(kBase, {"q0.profile=zigzag"}).find("q0.profile"), std::string::npos);
    EXPECT_NE(message_of(kBase, {"run.mode=fast"}).find("run.mode"), std::string::npos);
    EXPECT_NE(message_of(kBase, {"output.formats=xml"}).find("output.formats"), std::string::npos);
    EXPECT_NE(message_of(kBase, {"nokey"}).find("override"), std::string::npos);
    EXPECT_NE(message_of(kBase, {"wall.slope=abc"}).find("wall.slope"), std::string::npos);
    EXPECT_THROW(load_config("/nonexistent/file.ini"), ConfigError);
}

TEST(Pipeline, InvalidInletExitsWithOneAndCitesTheCondition) {
    auto c = parse_config(kBase, {"q0.q=0.5"});
    const auto r = execute(c, false);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.error.find("q0"), std::string::npos);
    EXPECT_NE(r.error.find("inlet.speed-range"), std::string::npos);
    EXPECT_TRUE(r.report.contains("validation"));
}

TEST(Pipeline, ModesStopEarly) {
    auto v = execute(parse_config(kBase, {"run.mode=validate-only"}), false);
    EXPECT_EQ(v.exit_code, 0);
    EXPECT_FALSE(v.report.contains("criteria"));
    auto c = execute(parse_config(kBase, {"run.mode=criteria-only"}), false);
    EXPECT_EQ(c.exit_code, 0);
    EXPECT_TRUE(c.report.contains("criteria"));
    EXPECT_FALSE(c.report.contains("outcome"));
}

TEST(Pipeline, ShockRunCompletesWithExitZero) {
    const auto r = execute(parse_config(find_scenario("inadmissible-inlet").ini, {"grid.N=64"}), false);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.report["outcome"]["tag"], "ShockDetected");
    EXPECT_TRUE(r.report["criteria"]["shock"]["necessary"].get<bool>());
}

TEST(Pipeline, ReportIsDeterministicApartFromTheTimestamp) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "potflow_det";
    fs::remove_all(dir);
    std::string text[2], csv[2];
    for (int k = 0; k < 2; ++k) {
        auto c = parse_config(find_scenario("convex-arctan-wall").ini,
                              {"grid.N=64", "output.dir=" + (dir / std::to_string(k)).string()});
        ASSERT_EQ(execute(c, true).exit_code, 0);
        std::ifstream is(dir / std::to_string(k) / "report.json");
        auto j = nlohmann::json::parse(is);
        j["meta"].erase("timestamp");
        j["config"]["output"].erase("dir");
        text[k] = j.dump();
        std::ifstream cs(dir / std::to_string(k) / "fields.csv");
        csv[k].assign(std::istreambuf_iterator<char>(cs), {});
    }
    EXPECT_EQ(text[0], text[1]);
    EXPECT_EQ(csv[0], csv[1]);
    EXPECT_EQ(csv[0].substr(0, csv[0].find('\n')), kCsvHeader);
    fs::remove_all(dir);
}
