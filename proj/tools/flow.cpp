// flow: command-line front end.
//   flow run <config> [--override key=value]...
//   flow scenarios [--dump name]
//   flow sweep <config> --param key=v1,v2,... [--threads n]

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "potflow/pipeline.hpp"

namespace {

using namespace potflow;

// Config argument: a file path, or "scenario:<name>" for a built-in.
RunConfig resolve(const std::string& arg, const std::vector<std::string>& overrides) {
    const std::string prefix = "scenario:";
    if (arg.rfind(prefix, 0) == 0) return parse_config(find_scenario(arg.substr(prefix.size())).ini, overrides);
    return load_config(arg, overrides);
}

std::string summary(const RunResult& r) {
    if (r.exit_code != 0) return "error: " + r.error;
    if (!r.report.contains("outcome")) return "ok (" + r.report["meta"]["mode"].get<std::string>() + ")";
    const auto& o = r.report["outcome"];
    if (!o.contains("tag")) return "inlet vacuum: two sub-flows";
    std::string s = o["tag"].get<std::string>() + " phi_end=" + o["phi_end"].dump();
    if (!o["x0"].is_null()) s += " x0=" + o["x0"].dump();
    if (o.contains("shock")) s += " shock@x_wall=" + o["shock"]["x_wall"].dump();
    return s;
}

int cmd_run(const std::string& path, const std::vector<std::string>& overrides) {
    RunConfig cfg;
    try {
        cfg = resolve(path, overrides);
    } catch (const std::exception& e) {
        std::cerr << "flow: " << e.what() << '\n';
        return 1;
    }
    const RunResult r = execute(cfg, true);
    if (r.exit_code != 0) std::cerr << "flow: " << r.error << '\n';
    std::cout << cfg.name << ": " << summary(r) << '\n';
    return r.exit_code;
}

int cmd_scenarios(const std::string& dump) {
    if (!dump.empty()) {
        try {
            std::cout << find_scenario(dump).ini;
        } catch (const std::exception& e) {
            std::cerr << "flow: " << e.what() << '\n';
            return 1;
        }
        return 0;
    }
    for (const auto& s : scenarios()) std::cout << s.name << "  " << s.doc << '\n';
    return 0;
}

int cmd_sweep(const std::string& path, const std::string& param, const std::vector<std::string>& overrides,
              unsigned threads) {
    const auto eq = param.find('=');
    if (eq == std::string::npos) {
        std::cerr << "flow: --param expects key=v1,v2,...\n";
        return 1;
    }
    const std::string key = param.substr(0, eq);
    std::vector<std::string> values;
    std::stringstream ss(param.substr(eq + 1));
    for (std::string v; std::getline(ss, v, ',');)
        if (!v.empty()) values.push_back(v);
    if (values.empty()) {
        std::cerr << "flow: --param " << key << " has no values\n";
        return 1;
    }
    std::vector<RunConfig> cfgs;
    try {
        for (const auto& v : values) {
            auto ov = overrides;
            ov.push_back(key + "=" + v);
            cfgs.push_back(resolve(path, ov));
            cfgs.back().output.dir = (std::filesystem::path(cfgs.back().output.dir) / (key + "=" + v)).string();
        }
    } catch (const std::exception& e) {
        std::cerr << "flow: " << e.what() << '\n';
        return 1;
    }
    std::vector<RunResult> results(cfgs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < cfgs.size();) results[i] = execute(cfgs[i], true);
    };
    threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(cfgs.size()));
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    pool.clear();
    int code = 0;
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        std::cout << key << "=" << values[i] << ": " << summary(results[i]) << '\n';
        code = std::max(code, results[i].exit_code);
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"steady supersonic potential flow in expanding nozzles"};
    app.require_subcommand(1);

    std::string config, dump, param;
    std::vector<std::string> overrides;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());

    auto* run = app.add_subcommand("run", "run a config file (or scenario:<name>)");
    run->add_option("config", config, "config path or scenario:<name>")->required();
    run->add_option("-o,--override", overrides, "section.key=value, applied after the file");

    auto* list = app.add_subcommand("scenarios", "list built-in scenarios");
    list->add_option("--dump", dump, "print the config of one scenario");

    auto* sweep = app.add_subcommand("sweep", "run a config once per parameter value");
    sweep->add_option("config", config, "config path or scenario:<name>")->required();
    sweep->add_option("--param", param, "key=v1,v2,...")->required();
    sweep->add_option("-o,--override", overrides, "section.key=value applied to every run");
    sweep->add_option("-j,--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);
    if (*run) return cmd_run(config, overrides);
    if (*list) return cmd_scenarios(dump);
    return cmd_sweep(config, param, overrides, threads);
}
