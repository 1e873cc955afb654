#include "mqs/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mqs/coherent.hpp"
#include "mqs/interference.hpp"
#include "mqs/qmc.hpp"

namespace mqs {

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::coherent: return "coherent";
        case RunMode::trajectories: return "trajectories";
        case RunMode::interference: return "interference";
        case RunMode::oracle_check: return "oracle-check";
        case RunMode::collapse_demo: return "collapse-demo";
    }
    throw Error("unreachable mode");
}

RunMode mode_from_string(const std::string& name) {
    for (RunMode m : {RunMode::coherent, RunMode::trajectories,
                      RunMode::interference, RunMode::oracle_check,
                      RunMode::collapse_demo})
        if (to_string(m) == name) return m;
    throw ConfigError("unknown mode '" + name +
                      "' (expected coherent, trajectories, interference, "
                      "oracle-check, or collapse-demo)");
}

namespace {

using nlohmann::json;

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config field '") + key +
                          "' has the wrong type");
    }
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "mode",      "n1",     "n2",        "alpha",
        "coupling_v", "time_t", "rate_w",    "nu",
        "sigma",     "initial_number_model", "mean1", "mean2",
        "target_cosphi", "n0_max", "phi_grid_size", "ensemble_size",
        "seed",      "out_dir", "format"};
    return keys;
}

}  // namespace

RunConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    const auto& keys = known_keys();
    for (const auto& [k, v] : j.items())
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
            throw ConfigError("unknown config key '" + k + "'");
    RunConfig cfg;
    std::string mode_name = to_string(cfg.mode);
    read_field(j, "mode", mode_name);
    cfg.mode = mode_from_string(mode_name);
    read_field(j, "n1", cfg.n1);
    read_field(j, "n2", cfg.n2);
    read_field(j, "alpha", cfg.alpha);
    read_field(j, "coupling_v", cfg.coupling_v);
    read_field(j, "time_t", cfg.time_t);
    read_field(j, "rate_w", cfg.rate_w);
    read_field(j, "nu", cfg.nu);
    read_field(j, "sigma", cfg.sigma);
    read_field(j, "initial_number_model", cfg.initial_number_model);
    read_field(j, "mean1", cfg.mean1);
    read_field(j, "mean2", cfg.mean2);
    read_field(j, "target_cosphi", cfg.target_cosphi);
    read_field(j, "n0_max", cfg.n0_max);
    read_field(j, "phi_grid_size", cfg.phi_grid_size);
    read_field(j, "ensemble_size", cfg.ensemble_size);
    read_field(j, "seed", cfg.seed);
    read_field(j, "out_dir", cfg.out_dir);
    read_field(j, "format", cfg.format);
    return cfg;
}

std::string config_to_json_text(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["mode"] = to_string(cfg.mode);
    j["n1"] = cfg.n1;
    j["n2"] = cfg.n2;
    j["alpha"] = cfg.alpha;
    j["coupling_v"] = cfg.coupling_v;
    j["time_t"] = cfg.time_t;
    j["rate_w"] = cfg.rate_w;
    j["nu"] = cfg.nu;
    j["sigma"] = cfg.sigma;
    j["initial_number_model"] = cfg.initial_number_model;
    j["mean1"] = cfg.mean1;
    j["mean2"] = cfg.mean2;
    j["target_cosphi"] = cfg.target_cosphi;
    j["n0_max"] = cfg.n0_max;
    j["phi_grid_size"] = cfg.phi_grid_size;
    j["ensemble_size"] = cfg.ensemble_size;
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    j["format"] = cfg.format;
    return j.dump();
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json_text(buf.str());
}

std::vector<std::string> validate_config(const RunConfig& cfg) {
    std::vector<std::string> report;
    auto check = [&](auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            report.emplace_back(e.what());
        }
    };
    const SectorSpec sector{cfg.n1, cfg.n2};
    check([&] { sector.validate(); });
    if (cfg.format != "csv" && cfg.format != "json")
        report.push_back("format must be 'csv' or 'json', got '" + cfg.format + "'");
    if (cfg.out_dir.empty()) report.push_back("output directory must be non-empty");
    if (cfg.phi_grid_size < 2) report.push_back("phi_grid_size must be >= 2");
    if (cfg.ensemble_size < 1) report.push_back("ensemble_size must be >= 1");
    if (cfg.initial_number_model != "fixed" &&
        cfg.initial_number_model != "poissonian")
        report.push_back("initial_number_model must be 'fixed' or 'poissonian', got '" +
                         cfg.initial_number_model + "'");
    if (std::abs(cfg.target_cosphi) > 1.0)
        report.push_back("target_cosphi must lie in [-1, 1]");

    switch (cfg.mode) {
        case RunMode::coherent:
            check([&] {
                CouplingParams p{cfg.coupling_v, cfg.alpha, cfg.time_t};
                p.validate(sector);
            });
            break;
        case RunMode::trajectories:
            check([&] {
                ContinuousParams p{cfg.rate_w, cfg.nu, cfg.seed};
                p.validate(sector);
            });
            break;
        case RunMode::interference:
            check([&] {
                ContinuousParams p{cfg.rate_w, cfg.nu, cfg.seed};
                p.validate(sector);
            });
            check([&] {
                DetectionModel m;
                m.sigma = cfg.sigma;
                m.initial_number_model =
                    cfg.initial_number_model == "poissonian"
                        ? DetectionModel::InitialNumbers::poissonian
                        : DetectionModel::InitialNumbers::fixed;
                m.mean1 = cfg.mean1 > 0 ? cfg.mean1 : cfg.n1;
                m.mean2 = cfg.mean2 > 0 ? cfg.mean2 : cfg.n2;
                m.validate();
            });
            break;
        case RunMode::oracle_check:
        case RunMode::collapse_demo:
            break;  // fixed internal parameters
    }
    return report;
}

void apply_desk_profile(RunConfig& cfg) {
    cfg.n1 = 100;
    cfg.n2 = 100;
    cfg.nu = 8;  // smallest count that still resolves the fringe comb at N=100
    cfg.rate_w = 1.0 / (4.0 * cfg.n1);
    cfg.ensemble_size = std::min(cfg.ensemble_size, 400);
    if (cfg.mean1 > 0) cfg.mean1 = cfg.n1;
    if (cfg.mean2 > 0) cfg.mean2 = cfg.n2;
}

void apply_full_profile(RunConfig& cfg) {
    cfg.n1 = 1000;
    cfg.n2 = 1000;
    cfg.rate_w = 1.0 / (4.0 * cfg.n1);
    if (cfg.mean1 > 0) cfg.mean1 = cfg.n1;
    if (cfg.mean2 > 0) cfg.mean2 = cfg.n2;
}

}  // namespace mqs
