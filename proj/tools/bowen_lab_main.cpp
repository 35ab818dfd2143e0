#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bowenlab/errors.hpp"
#include "bowenlab/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"bowen-lab: Bowen-ball distortion and unstable-linearization experiments"};
    std::string suite;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("suite", suite, "linearize | distortion | spectrum | splitting | full")
        ->required();
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--out-dir", out_dir, "output directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", seed, "seed (overrides config)");
    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    try {
        bowenlab::RunConfig cfg = bowenlab::RunConfig::from_json_file(config_path);
        cfg.suite = suite;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed_set) cfg.seed = seed;
        const bowenlab::RunReport rep = bowenlab::run_suite(cfg);
        for (const auto& [name, verdict] : rep.verdicts)
            std::printf("%-28s %s\n", name.c_str(), verdict.c_str());
        std::printf("wall_time %.2fs\n", rep.wall_time);
        return rep.any_fail() ? 1 : 0;
    } catch (const bowenlab::usage_error& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
