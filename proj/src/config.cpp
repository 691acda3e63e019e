#include "snails/config.hpp"

#include <cmath>
#include <fstream>

#include "snails/errors.hpp"
#include "snails/version.hpp"

namespace snails {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed) {
            if (it.key() == key) {
                ok = true;
                break;
            }
        }
        if (!ok) throw InvalidParameter("unknown config key: " + where + it.key());
    }
}

double get_number(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw InvalidParameter(std::string("config field ") + key + " must be a number");
    return obj[key].get<double>();
}

std::int64_t get_int(const json& obj, const char* key, std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) {
        throw InvalidParameter(std::string("config field ") + key + " must be an integer");
    }
    return obj[key].get<std::int64_t>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) throw InvalidParameter(std::string("config field ") + key + " must be a string");
    return obj[key].get<std::string>();
}

std::vector<double> get_array(const json& obj, const char* key, std::vector<double> fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_array()) throw InvalidParameter(std::string("config field ") + key + " must be an array");
    std::vector<double> out;
    for (const auto& v : obj[key]) {
        if (!v.is_number()) throw InvalidParameter(std::string("config field ") + key + " must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

void apply_config_json(const json& j, RunConfig& cfg) {
    if (!j.is_object()) throw ParseError("config root must be a JSON object");
    require_keys(j, "", {"model", "sim", "experiment", "seed", "workers", "output"});

    if (j.contains("model")) {
        const json& m = j["model"];
        require_keys(m, "model.", {"lambda", "alpha", "d", "radius", "diffusion", "drift",
                                   "infection_rate"});
        cfg.model.lambda = get_number(m, "lambda", cfg.model.lambda);
        cfg.model.alpha = get_number(m, "alpha", cfg.model.alpha);
        cfg.model.d = static_cast<int>(get_int(m, "d", cfg.model.d));
        cfg.model.radius = get_number(m, "radius", cfg.model.radius);
        cfg.model.diffusion = get_number(m, "diffusion", cfg.model.diffusion);
        cfg.model.drift = get_array(m, "drift", cfg.model.drift);
        if (m.contains("infection_rate")) {
            if (m["infection_rate"].is_string()) {
                if (m["infection_rate"].get<std::string>() != "INSTANT") {
                    throw InvalidParameter("infection_rate must be a positive number or \"INSTANT\"");
                }
                cfg.model.infection_rate = kInstantRate;
            } else if (m["infection_rate"].is_number()) {
                cfg.model.infection_rate = m["infection_rate"].get<double>();
            } else {
                throw InvalidParameter("infection_rate must be a positive number or \"INSTANT\"");
            }
        }
    }

    if (j.contains("sim")) {
        const json& s = j["sim"];
        require_keys(s, "sim.", {"dt", "t_max", "detector", "window", "window_growth",
                                 "truncation", "particle_cap"});
        cfg.sim.dt = get_number(s, "dt", cfg.sim.dt);
        cfg.sim.t_max = get_number(s, "t_max", cfg.sim.t_max);
        cfg.sim.detector = get_string(s, "detector", cfg.sim.detector);
        if (s.contains("window")) {
            if (s["window"].is_string()) {
                if (s["window"].get<std::string>() != "AUTO") {
                    throw InvalidParameter("window must be a positive number or \"AUTO\"");
                }
                cfg.sim.window = 0.0;
            } else if (s["window"].is_number()) {
                cfg.sim.window = s["window"].get<double>();
            } else {
                throw InvalidParameter("window must be a positive number or \"AUTO\"");
            }
        }
        cfg.sim.window_growth = get_number(s, "window_growth", cfg.sim.window_growth);
        if (s.contains("truncation") && !s["truncation"].is_null()) {
            cfg.sim.truncation = get_int(s, "truncation", cfg.sim.truncation);
        }
        cfg.sim.particle_cap = get_int(s, "particle_cap", cfg.sim.particle_cap);
    }

    if (j.contains("experiment")) {
        const json& e = j["experiment"];
        require_keys(e, "experiment.",
                     {"name", "horizons", "t_grid", "dt_grid", "lambda_grid", "box_sizes",
                      "occupation_thresholds", "n_runs", "n_samples", "subbox_len", "margin",
                      "t", "statistic", "c1", "c2", "T", "entry_range"});
        cfg.experiment.name = get_string(e, "name", cfg.experiment.name);
        cfg.experiment.horizons = get_array(e, "horizons", cfg.experiment.horizons);
        cfg.experiment.t_grid = get_array(e, "t_grid", cfg.experiment.t_grid);
        cfg.experiment.dt_grid = get_array(e, "dt_grid", cfg.experiment.dt_grid);
        cfg.experiment.lambda_grid = get_array(e, "lambda_grid", cfg.experiment.lambda_grid);
        cfg.experiment.box_sizes = get_array(e, "box_sizes", cfg.experiment.box_sizes);
        cfg.experiment.occupation_thresholds =
            get_array(e, "occupation_thresholds", cfg.experiment.occupation_thresholds);
        cfg.experiment.n_runs = get_int(e, "n_runs", cfg.experiment.n_runs);
        cfg.experiment.n_samples = get_int(e, "n_samples", cfg.experiment.n_samples);
        cfg.experiment.subbox_len = get_number(e, "subbox_len", cfg.experiment.subbox_len);
        cfg.experiment.margin = get_number(e, "margin", cfg.experiment.margin);
        cfg.experiment.t = get_number(e, "t", cfg.experiment.t);
        cfg.experiment.statistic = get_string(e, "statistic", cfg.experiment.statistic);
        cfg.experiment.c1 = get_number(e, "c1", cfg.experiment.c1);
        cfg.experiment.c2 = get_number(e, "c2", cfg.experiment.c2);
        cfg.experiment.T = get_number(e, "T", cfg.experiment.T);
        cfg.experiment.entry_range = get_number(e, "entry_range", cfg.experiment.entry_range);
    }

    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() && !j["seed"].is_number_unsigned()) {
            throw InvalidParameter("config field seed must be an integer");
        }
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("workers")) cfg.workers = static_cast<int>(get_int(j, "workers", cfg.workers));
    cfg.output = get_string(j, "output", cfg.output);
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("config file not found: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config parse error: ") + e.what());
    }
    RunConfig cfg;
    apply_config_json(j, cfg);
    return cfg;
}

SimSettings to_sim_settings(const RunConfig& cfg) {
    SimSettings sim;
    sim.dt = cfg.sim.dt;
    sim.mode = detector_mode_from_string(cfg.sim.detector);
    sim.window_half = cfg.sim.window;
    sim.window_growth = cfg.sim.window_growth;
    sim.particle_cap = cfg.sim.particle_cap;
    if (cfg.sim.truncation > 0) sim.truncation = cfg.sim.truncation;
    sim.workers = cfg.workers;
    return sim;
}

nlohmann::ordered_json manifest_json(const std::string& command, const RunConfig& cfg,
                                     double resolved_dt, double resolved_window_half) {
    nlohmann::ordered_json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["seed"] = cfg.seed;
    m["workers"] = cfg.workers;

    nlohmann::ordered_json model;
    model["lambda"] = cfg.model.lambda;
    model["alpha"] = cfg.model.alpha;
    model["d"] = cfg.model.d;
    model["radius"] = cfg.model.radius;
    model["diffusion"] = cfg.model.diffusion;
    model["drift"] = cfg.model.drift;
    if (cfg.model.instant_infection()) {
        model["infection_rate"] = "INSTANT";
    } else {
        model["infection_rate"] = cfg.model.infection_rate;
    }
    m["model"] = model;

    nlohmann::ordered_json sim;
    sim["dt"] = resolved_dt;
    sim["t_max"] = cfg.sim.t_max;
    sim["detector"] = cfg.sim.detector;
    sim["window_half"] = resolved_window_half;
    sim["window_growth"] = cfg.sim.window_growth;
    if (cfg.sim.truncation > 0) {
        sim["truncation"] = cfg.sim.truncation;
    } else {
        sim["truncation"] = nullptr;
    }
    sim["particle_cap"] = cfg.sim.particle_cap;
    m["sim"] = sim;

    nlohmann::ordered_json exp;
    exp["name"] = cfg.experiment.name;
    if (!cfg.experiment.horizons.empty()) exp["horizons"] = cfg.experiment.horizons;
    if (!cfg.experiment.t_grid.empty()) exp["t_grid"] = cfg.experiment.t_grid;
    if (!cfg.experiment.dt_grid.empty()) exp["dt_grid"] = cfg.experiment.dt_grid;
    if (!cfg.experiment.lambda_grid.empty()) exp["lambda_grid"] = cfg.experiment.lambda_grid;
    if (!cfg.experiment.box_sizes.empty()) exp["box_sizes"] = cfg.experiment.box_sizes;
    if (!cfg.experiment.occupation_thresholds.empty()) {
        exp["occupation_thresholds"] = cfg.experiment.occupation_thresholds;
    }
    if (cfg.experiment.n_runs > 0) exp["n_runs"] = cfg.experiment.n_runs;
    if (cfg.experiment.n_samples > 0) exp["n_samples"] = cfg.experiment.n_samples;
    if (cfg.experiment.name == "stationarity") {
        exp["t"] = cfg.experiment.t;
        exp["subbox_len"] = cfg.experiment.subbox_len;
        exp["margin"] = cfg.experiment.margin;
    }
    if (cfg.experiment.name == "converge") exp["statistic"] = cfg.experiment.statistic;
    if (cfg.experiment.name == "constants") {
        exp["c1"] = cfg.experiment.c1;
        exp["c2"] = cfg.experiment.c2;
        exp["T"] = cfg.experiment.T;
    }
    if (cfg.experiment.entry_range > 0.0) exp["entry_range"] = cfg.experiment.entry_range;
    m["experiment"] = exp;
    m["output"] = cfg.output;
    return m;
}

}  // namespace snails
