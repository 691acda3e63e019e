#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "snails/experiments.hpp"
#include "snails/model.hpp"

namespace snails {

struct SimSection {
    double dt = 0.0;                 // 0 = model default rule
    double t_max = 0.0;
    std::string detector = "BRIDGE";
    double window = 0.0;             // 0 = AUTO
    double window_growth = kDefaultWindowGrowth;
    std::int64_t truncation = 0;     // 0 = none
    std::int64_t particle_cap = 8'000'000;
};

struct ExperimentSection {
    std::string name;
    std::vector<double> horizons;
    std::vector<double> t_grid;
    std::vector<double> dt_grid;
    std::vector<double> lambda_grid;
    std::vector<double> box_sizes;
    std::vector<double> occupation_thresholds;
    std::int64_t n_runs = 0;
    std::int64_t n_samples = 0;
    double subbox_len = 10.0;
    double margin = -1.0;            // < 0 = auto
    double t = 0.0;                  // stationarity elapsed time
    std::string statistic = "survival";
    double c1 = 0.0;
    double c2 = 0.0;
    double T = 0.0;
    double entry_range = 0.0;        // 0 = off
};

struct RunConfig {
    ModelParams model;
    SimSection sim;
    ExperimentSection experiment;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string output;
};

// Strict parse of the flat three-section JSON config: unknown keys anywhere
// are rejected with the offending name.
RunConfig parse_config_file(const std::string& path);
void apply_config_json(const nlohmann::json& j, RunConfig& cfg);

SimSettings to_sim_settings(const RunConfig& cfg);

// Resolved manifest (deterministic key order, no timestamps) from which the
// run is reproducible.
nlohmann::ordered_json manifest_json(const std::string& command, const RunConfig& cfg,
                                     double resolved_dt, double resolved_window_half);

}  // namespace snails
