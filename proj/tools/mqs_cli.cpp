#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "mqs/config.hpp"
#include "mqs/errors.hpp"
#include "mqs/runner.hpp"

// Exit codes: 0 success, 2 configuration problem, 3 model/runtime error,
// 4 oracle-check discrepancy.
int main(int argc, char** argv) {
    CLI::App app{
        "Measurement-driven macroscopic-superposition simulator for a "
        "two-component condensate"};
    std::string config_path, mode_name, out_dir;
    uint64_t seed = 0;
    bool desk = false, full = false, validate_only = false;

    app.add_option("--config", config_path, "JSON run-configuration file")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Override the RNG master seed");
    app.add_option(
        "--mode", mode_name,
        "coherent | trajectories | interference | oracle-check | collapse-demo");
    app.add_option("--out", out_dir, "Output directory");
    auto* desk_flag = app.add_flag("--desk-scale", desk,
                                   "Reduced populations for quick runs");
    auto* full_flag =
        app.add_flag("--full-scale", full, "Headline working point (N = 1000)");
    desk_flag->excludes(full_flag);
    full_flag->excludes(desk_flag);
    app.add_flag("--validate", validate_only,
                 "Report configuration problems and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        mqs::RunConfig cfg;
        if (!config_path.empty()) cfg = mqs::load_config_file(config_path);
        if (desk) mqs::apply_desk_profile(cfg);
        if (full) mqs::apply_full_profile(cfg);
        if (app.count("--seed") > 0) cfg.seed = seed;
        if (!mode_name.empty()) cfg.mode = mqs::mode_from_string(mode_name);
        if (!out_dir.empty()) cfg.out_dir = out_dir;

        const auto violations = mqs::validate_config(cfg);
        if (!violations.empty()) {
            for (const auto& v : violations)
                std::fprintf(stderr, "config: %s\n", v.c_str());
            return 2;
        }
        if (validate_only) {
            std::printf("configuration ok\n");
            return 0;
        }
        return mqs::run(cfg);
    } catch (const mqs::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const mqs::Error& e) {
        std::fprintf(stderr, "model error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
