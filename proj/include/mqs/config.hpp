#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "mqs/errors.hpp"

namespace mqs {

enum class RunMode {
    coherent,      // outcoupling pulse, n0 histogram + conditional phase
    trajectories,  // continuous observation ensemble, waiting-time law
    interference,  // conditioned ensemble, centered fringes, sigma smearing
    oracle_check,  // dense cross-validation of the fast paths
    collapse_demo  // generic measurement-collapse kernel demonstration
};

std::string to_string(RunMode mode);
RunMode mode_from_string(const std::string& name);

// Flat, fully defaulted run configuration. All quantities dimensionless;
// times in units of 1/V (coherent) or 1/W (continuous observation).
struct RunConfig {
    RunMode mode = RunMode::coherent;
    int n1 = 1000;
    int n2 = 1000;
    double alpha = 0.7853981633974483;   // pi/4, balanced coupling
    double coupling_v = 1.0;
    double time_t = 0.17408301063648043;  // sin^2(Vt) = 0.03: mean transfer 30
    double rate_w = 0.00025;              // 1/(4N): initial detection rate 0.5
    int nu = 30;
    double sigma = 0.0;
    std::string initial_number_model = "fixed";  // or "poissonian"
    double mean1 = -1.0;  // Poissonian means; negative = use n1/n2
    double mean2 = -1.0;
    double target_cosphi = 0.0;  // conditioning target for interference runs
    int n0_max = -1;             // negative = automatic cutoff
    int phi_grid_size = 2048;
    int ensemble_size = 200;
    uint64_t seed = 2026;
    std::string out_dir = "out";
    std::string format = "csv";

    bool operator==(const RunConfig&) const = default;
};

// Strict parse: unknown keys and wrong types are ConfigErrors naming the key.
RunConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const RunConfig& cfg);  // round-trips exactly
RunConfig load_config_file(const std::string& path);

// Every violated precondition across all modules, one message each;
// empty = runnable.
std::vector<std::string> validate_config(const RunConfig& cfg);

// Scaling profiles: desk keeps runtimes CI-friendly (N=100, nu=8, capped
// ensemble); full restores the N=1000 working point.
void apply_desk_profile(RunConfig& cfg);
void apply_full_profile(RunConfig& cfg);

}  // namespace mqs
