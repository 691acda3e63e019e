// snails: Monte Carlo simulator and verification harness for a spatial SIR
// model of Brownian particles (instant radius-limited infection, exponential
// removal). Subcommands front one experiment each; every run writes a
// manifest from which it can be reproduced exactly.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "snails/config.hpp"
#include "snails/errors.hpp"
#include "snails/experiments.hpp"
#include "snails/io.hpp"
#include "snails/model.hpp"
#include "snails/version.hpp"

namespace {

using snails::RunConfig;

struct Overrides {
    std::optional<double> lambda, alpha, radius, diffusion, dt, t_max, window, window_growth,
        subbox_len, margin, t, c1, c2, T, entry_range;
    std::optional<int> d, workers;
    std::optional<std::int64_t> truncation, particle_cap, n_runs, n_samples;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> config_path, detector, output, statistic, infection_rate, window_str;
    std::vector<double> drift, horizons, t_grid, dt_grid, lambda_grid, box_sizes,
        occupation_thresholds;
};

void add_common_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "JSON config file (flags override file values)");
    cmd->add_option("--lambda", ov.lambda, "initial Poisson intensity (particles per unit volume)");
    cmd->add_option("--alpha", ov.alpha, "removal rate (0 = no removal)");
    cmd->add_option("--dim", ov.d, "spatial dimension");
    cmd->add_option("--radius", ov.radius, "infection range");
    cmd->add_option("--diffusion", ov.diffusion, "diffusion coefficient");
    cmd->add_option("--drift", ov.drift, "drift vector (d components)")->delimiter(',');
    cmd->add_option("--infection-rate", ov.infection_rate,
                    "pair infection rate, or INSTANT for immediate transmission");
    cmd->add_option("--dt", ov.dt, "step size (default: 0.01 radius^2 / diffusion)");
    cmd->add_option("--t-max", ov.t_max, "time horizon");
    cmd->add_option("--detector", ov.detector, "contact detector: NAIVE or BRIDGE");
    cmd->add_option("--window", ov.window_str,
                    "half-width of the simulated box, or AUTO for the growth rule");
    cmd->add_option("--window-growth", ov.window_growth,
                    "AUTO window growth constant (W = growth*t_max + 6 sqrt(2 D t_max))");
    cmd->add_option("--truncation", ov.truncation,
                    "cap on total infection events, 0 = none (applies at any alpha, including 0)");
    cmd->add_option("--particle-cap", ov.particle_cap, "hard cap on the particle count");
    cmd->add_option("--seed", ov.seed, "master seed (precedence: flag > SNAIL_SEED > file)");
    cmd->add_option("--workers", ov.workers, "parallel workers");
    cmd->add_option("--output", ov.output, "output directory");
}

RunConfig build_config(const Overrides& ov, const std::string& command) {
    RunConfig cfg;
    if (ov.config_path) cfg = snails::parse_config_file(*ov.config_path);
    if (const char* env = std::getenv("SNAIL_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (...) {
            throw snails::InvalidParameter("SNAIL_SEED must be an unsigned integer");
        }
    }
    if (ov.lambda) cfg.model.lambda = *ov.lambda;
    if (ov.alpha) cfg.model.alpha = *ov.alpha;
    if (ov.d) cfg.model.d = *ov.d;
    if (ov.radius) cfg.model.radius = *ov.radius;
    if (ov.diffusion) cfg.model.diffusion = *ov.diffusion;
    if (!ov.drift.empty()) cfg.model.drift = ov.drift;
    if (ov.infection_rate) {
        if (*ov.infection_rate == "INSTANT") {
            cfg.model.infection_rate = snails::kInstantRate;
        } else {
            try {
                cfg.model.infection_rate = std::stod(*ov.infection_rate);
            } catch (...) {
                throw snails::InvalidParameter("infection-rate must be a number or INSTANT");
            }
        }
    }
    if (ov.dt) cfg.sim.dt = *ov.dt;
    if (ov.t_max) cfg.sim.t_max = *ov.t_max;
    if (ov.detector) cfg.sim.detector = *ov.detector;
    if (ov.window_str) {
        if (*ov.window_str == "AUTO") {
            cfg.sim.window = 0.0;
        } else {
            try {
                cfg.sim.window = std::stod(*ov.window_str);
            } catch (...) {
                throw snails::InvalidParameter("window must be a number or AUTO");
            }
        }
    }
    if (ov.window_growth) cfg.sim.window_growth = *ov.window_growth;
    if (ov.truncation) cfg.sim.truncation = *ov.truncation;
    if (ov.particle_cap) cfg.sim.particle_cap = *ov.particle_cap;
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.workers) cfg.workers = *ov.workers;
    if (ov.output) cfg.output = *ov.output;

    if (!ov.horizons.empty()) cfg.experiment.horizons = ov.horizons;
    if (!ov.t_grid.empty()) cfg.experiment.t_grid = ov.t_grid;
    if (!ov.dt_grid.empty()) cfg.experiment.dt_grid = ov.dt_grid;
    if (!ov.lambda_grid.empty()) cfg.experiment.lambda_grid = ov.lambda_grid;
    if (!ov.box_sizes.empty()) cfg.experiment.box_sizes = ov.box_sizes;
    if (!ov.occupation_thresholds.empty()) {
        cfg.experiment.occupation_thresholds = ov.occupation_thresholds;
    }
    if (ov.n_runs) cfg.experiment.n_runs = *ov.n_runs;
    if (ov.n_samples) cfg.experiment.n_samples = *ov.n_samples;
    if (ov.subbox_len) cfg.experiment.subbox_len = *ov.subbox_len;
    if (ov.margin) cfg.experiment.margin = *ov.margin;
    if (ov.t) cfg.experiment.t = *ov.t;
    if (ov.statistic) cfg.experiment.statistic = *ov.statistic;
    if (ov.c1) cfg.experiment.c1 = *ov.c1;
    if (ov.c2) cfg.experiment.c2 = *ov.c2;
    if (ov.T) cfg.experiment.T = *ov.T;
    if (ov.entry_range) cfg.experiment.entry_range = *ov.entry_range;

    cfg.experiment.name = command;
    if (cfg.workers < 1) throw snails::InvalidParameter("workers must be >= 1");
    cfg.model.validate();
    return cfg;
}

void require_output(const RunConfig& cfg) {
    if (cfg.output.empty()) throw snails::InvalidParameter("output directory required (--output)");
}

std::string out_path(const RunConfig& cfg, const char* name) {
    return cfg.output + "/" + name;
}

int cmd_simulate(const Overrides& ov) {
    RunConfig cfg = build_config(ov, "simulate");
    require_output(cfg);
    if (!(cfg.sim.t_max > 0.0)) throw snails::InvalidParameter("t_max must be > 0 (--t-max)");
    const snails::SimSettings sim = snails::to_sim_settings(cfg);
    const double dt = snails::resolve_dt(cfg.model, sim);
    const double window_half = snails::resolve_window_half(cfg.model, cfg.sim.t_max, sim);

    snails::RunSpec spec;
    spec.dt = dt;
    spec.t_max = cfg.sim.t_max;
    spec.mode = sim.mode;
    spec.truncation = sim.truncation;
    spec.particle_cap = sim.particle_cap;
    if (cfg.experiment.entry_range > 0.0) spec.entry_range = cfg.experiment.entry_range;
    spec.occupation_thresholds = cfg.experiment.occupation_thresholds;

    const snails::Box window = snails::Box::centered(window_half, cfg.model.d);
    snails::RunOutput out = snails::run(cfg.model, window, snails::RngStream(cfg.seed, 0), spec);

    auto manifest = snails::manifest_json("simulate", cfg, dt, window_half);
    snails::atomic_write_file(out_path(cfg, "manifest.json"), manifest.dump(2) + "\n");
    snails::atomic_write_file(out_path(cfg, "events.csv"),
                              snails::event_log_to_csv(out.events, cfg.model.d));
    snails::atomic_write_file(out_path(cfg, "result.csv"),
                              snails::run_results_csv({out.result}, spec.occupation_thresholds));
    return 0;
}

int cmd_survival(const Overrides& ov) {
    RunConfig cfg = build_config(ov, "survival");
    require_output(cfg);
    if (cfg.experiment.horizons.empty()) {
        throw snails::InvalidParameter("horizons required (--horizons)");
    }
    if (cfg.experiment.n_runs < 1) throw snails::InvalidParameter("n_runs must be >= 1 (--n-runs)");
    const snails::SimSettings sim = snails::to_sim_settings(cfg);
    const snails::SurvivalReport report = snails::survival_experiment(
        cfg.model, cfg.experiment.horizons, cfg.experiment.n_runs,
        snails::RngStream(cfg.seed, 0), sim);

    cfg.sim.t_max = cfg.experiment.horizons.back();
    auto manifest = snails::manifest_json("survival", cfg, report.dt, report.window_half);
    nlohmann::ordered_json fit;
    fit["available"] = report.fit.available;
    fit["c_hat"] = report.fit.c_hat;
    fit["intercept"] = report.fit.intercept;
    fit["se_c"] = report.fit.se_c;
    fit["ci_low"] = report.fit.ci_low;
    fit["ci_high"] = report.fit.ci_high;
    fit["chi2"] = report.fit.chi2;
    fit["points_used"] = report.fit.points_used;
    manifest["experiment"]["fit"] = fit;
    snails::atomic_write_file(out_path(cfg, "manifest.json"), manifest.dump(2) + "\n");
    snails::atomic_write_file(out_path(cfg, "runs.csv"), snails::run_results_csv(report.runs, {}));
    snails::atomic_write_file(out_path(cfg, "curve.csv"), snails::survival_curve_csv(report.curve));
    snails::atomic_write_file(out_path(cfg, "survival.svg"),
                              snails::survival_svg(report.curve, report.fit));
    return 0;
}

int cmd_shape(const Overrides& ov) {
    RunConfig cfg = build_config(ov, "shape");
    require_output(cfg);
    if (cfg.experiment.t_grid.empty()) throw snails::InvalidParameter("t_grid required (--t-grid)");
    if (cfg.experiment.n_runs < 1) throw snails::InvalidParameter("n_runs must be >= 1 (--n-runs)");
    const snails::SimSettings sim = snails::to_sim_settings(cfg);
    std::optional<double> entry;
    if (cfg.experiment.entry_range > 0.0) entry = cfg.experiment.entry_range;
    const snails::ShapeReport report = snails::shape_experiment(
        cfg.model, cfg.experiment.t_grid, cfg.experiment.n_runs, snails::RngStream(cfg.seed, 0),
        sim, entry);

    cfg.sim.t_max = cfg.experiment.t_grid.back();
    auto manifest = snails::manifest_json("shape", cfg, report.dt, report.window_half);
    manifest["experiment"]["pilot_c1"] = report.pilot_c1;
    manifest["experiment"]["pilot_c1_quantile"] = 0.99;
    manifest["experiment"]["overflow_runs"] = report.overflow_runs;
    manifest["experiment"]["used_runs"] = report.used_runs;
    snails::atomic_write_file(out_path(cfg, "manifest.json"), manifest.dump(2) + "\n");
    snails::atomic_write_file(out_path(cfg, "runs.csv"), snails::run_results_csv(report.runs, {}));
    snails::atomic_write_file(out_path(cfg, "quantiles.csv"),
                              snails::shape_quantiles_csv(report));
    snails::atomic_write_file(out_path(cfg, "shape.svg"), snails::fan_chart_svg(report));
    return 0;
}

int cmd_coupling(const Overrides& ov) {
    RunConfig cfg = build_config(ov, "coupling");
    require_output(cfg);
    if (!(cfg.sim.t_max > 0.0)) throw snails::InvalidParameter("t_max must be > 0 (--t-max)");
    if (cfg.experiment.n_runs < 1) throw snails::InvalidParameter("n_runs must be >= 1 (--n-runs)");
    const snails::SimSettings sim = snails::to_sim_settings(cfg);
    const snails::CouplingReport report = snails::coupling_experiment(
        cfg.model, cfg.sim.t_max, cfg.experiment.n_runs, snails::RngStream(cfg.seed, 0), sim);

    auto manifest = snails::manifest_json("coupling", cfg, snails::resolve_dt(cfg.model, sim),
                                          snails::resolve_window_half(cfg.model, cfg.sim.t_max, sim));
    manifest["experiment"]["n_pairs"] = report.n_pairs;
    manifest["experiment"]["violating_pairs"] = report.violating_pairs;
    manifest["experiment"]["steps_checked"] = report.steps_checked;
    if (report.first_violation_pair) {
        manifest["experiment"]["first_violation_pair"] = *report.first_violation_pair;
        manifest["experiment"]["first_violation_step"] = *report.first_violation_step;
        manifest["experiment"]["first_violation_seed"] = report.first_violation_seed;
    }
    snails::atomic_write_file(out_path(cfg, "manifest.json"), manifest.dump(2) + "\n");
    snails::atomic_write_file(out_path(cfg, "coupling.csv"), snails::coupling_csv(report));
    return report.violating_pairs == 0 ? 0 : 1;
}

int cmd_converge(const Overrides& ov) {
    RunConfig cfg = build_config(ov, "converge");
    require_output(cfg);
    if (cfg.experiment.dt_grid.empty()) throw snails::InvalidParameter("dt_grid required (--dt-grid)");
    if (cfg.experiment.n_runs < 1) throw snails::InvalidParameter("n_runs must be >= 1 (--n-runs)");
    if (!(cfg.sim.t_max > 0.0)) throw snails::InvalidParameter("t_max must be > 0 (--t-max)");
    const snails::SimSettings sim = snails::to_sim_settings(cfg);
    const auto stat = snails::conv_statistic_from_string(cfg.experiment.statistic);
    const auto rows = snails::convergence_study(cfg.model, cfg.experiment.dt_grid,
                                                cfg.experiment.n_runs, cfg.sim.t_max, stat,
                                                snails::RngStream(cfg.seed, 0), sim);
    auto manifest = snails::manifest_json("converge", cfg, 0.0,
                                          snails::resolve_window_half(cfg.model, cfg.sim.t_max, sim));
    snails::atomic_write_file(out_path(cfg, "manifest.json"), manifest.dump(2) + "\n");
    snails::atomic_write_file(out_path(cfg, "convergence.csv"),
                              snails::convergence_csv(rows, cfg.experiment.statistic));
    return 0;
}

int cmd_percolation(const Overrides& ov) {
    RunConfig cfg = build_config(ov, "percolation");
    require_output(cfg);
    if (cfg.experiment.lambda_grid.empty()) {
        throw snails::InvalidParameter("lambda_grid required (--lambda-grid)");
    }
    if (cfg.experiment.box_sizes.empty()) {
        throw snails::InvalidParameter("box_sizes required (--box-sizes)");
    }
    if (cfg.experiment.n_samples < 1) {
        throw snails::InvalidParameter("n_samples must be >= 1 (--n-samples)");
    }
    const auto rows = snails::percolation_scan(cfg.experiment.lambda_grid,
                                               cfg.experiment.box_sizes, cfg.model.d,
                                               cfg.model.radius, cfg.experiment.n_samples,
                                               snails::RngStream(cfg.seed, 0), cfg.workers);
    auto manifest = snails::manifest_json("percolation", cfg, 0.0, 0.0);
    snails::atomic_write_file(out_path(cfg, "manifest.json"), manifest.dump(2) + "\n");
    snails::atomic_write_file(out_path(cfg, "percolation.csv"), snails::percolation_csv(rows));
    return 0;
}

int cmd_stationarity(const Overrides& ov) {
    RunConfig cfg = build_config(ov, "stationarity");
    require_output(cfg);
    if (!(cfg.sim.window > 0.0)) {
        throw snails::InvalidParameter("stationarity requires an explicit window (--window)");
    }
    if (cfg.experiment.n_runs < 1) throw snails::InvalidParameter("n_runs must be >= 1 (--n-runs)");
    if (!(cfg.experiment.t >= 0.0)) throw snails::InvalidParameter("t must be >= 0 (--t)");
    const snails::Box window = snails::Box::centered(cfg.sim.window, cfg.model.d);
    const auto rows = snails::stationarity_check(
        cfg.model.lambda, cfg.model.d, window, cfg.experiment.t, cfg.experiment.subbox_len,
        cfg.experiment.margin, cfg.experiment.n_runs, snails::RngStream(cfg.seed, 0),
        cfg.model.diffusion, cfg.workers);
    auto manifest = snails::manifest_json("stationarity", cfg, 0.0, cfg.sim.window);
    snails::atomic_write_file(out_path(cfg, "manifest.json"), manifest.dump(2) + "\n");
    snails::atomic_write_file(out_path(cfg, "stationarity.csv"), snails::stationarity_csv(rows));
    return 0;
}

int cmd_constants(const Overrides& ov) {
    RunConfig cfg = build_config(ov, "constants");
    if (!(cfg.experiment.c1 > 0.0) || !(cfg.experiment.c2 > 0.0)) {
        throw snails::InvalidParameter("constants requires --C1 > 0 and --C2 > 0");
    }
    if (!(cfg.experiment.T > 0.0)) throw snails::InvalidParameter("constants requires --T > 0");
    const snails::ProofConstants pc = snails::proof_constants(
        cfg.experiment.c1, cfg.experiment.c2, cfg.model.alpha, cfg.experiment.T);
    nlohmann::ordered_json j;
    j["C1"] = pc.C1;
    j["C2"] = pc.C2;
    j["alpha"] = pc.alpha;
    j["T"] = pc.T;
    j["epsilon"] = pc.epsilon;
    j["M"] = pc.M;
    j["p"] = pc.p;
    j["K_trunc"] = pc.K_trunc;
    std::cout << j.dump(2) << std::endl;
    if (!cfg.output.empty()) {
        auto manifest = snails::manifest_json("constants", cfg, 0.0, 0.0);
        snails::atomic_write_file(out_path(cfg, "manifest.json"), manifest.dump(2) + "\n");
        snails::atomic_write_file(out_path(cfg, "constants.json"), j.dump(2) + "\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo simulator for a spatial SIR model of diffusing particles"};
    app.set_version_flag("--version", snails::kVersion);
    app.require_subcommand(1);

    Overrides ov;
    auto* simulate = app.add_subcommand("simulate", "run one trajectory, emit the event log");
    auto* survival = app.add_subcommand("survival", "survival curve and decay-rate fit");
    auto* shape = app.add_subcommand("shape", "front-growth envelopes at alpha = 0");
    auto* coupling = app.add_subcommand("coupling", "containment of paired alpha vs 0 runs");
    auto* converge = app.add_subcommand("converge", "statistics across a dt grid, both detectors");
    auto* percolation = app.add_subcommand("percolation", "origin cluster statistics of the static field");
    auto* stationarity = app.add_subcommand("stationarity", "sub-box Poisson counts under pure motion");
    auto* constants = app.add_subcommand("constants", "derived constants calculator");

    for (auto* cmd : {simulate, survival, shape, coupling, converge, percolation, stationarity,
                      constants}) {
        add_common_flags(cmd, ov);
    }
    simulate->add_option("--entry-range", ov.entry_range, "track trajectories entering this ball");
    simulate->add_option("--occupation-thresholds", ov.occupation_thresholds,
                         "occupation-time thresholds")->delimiter(',');
    survival->add_option("--horizons", ov.horizons, "survival horizons")->delimiter(',');
    survival->add_option("--n-runs", ov.n_runs, "independent runs");
    shape->add_option("--t-grid", ov.t_grid, "front sample times")->delimiter(',');
    shape->add_option("--n-runs", ov.n_runs, "independent runs");
    shape->add_option("--entry-range", ov.entry_range, "track trajectories entering this ball");
    coupling->add_option("--n-runs", ov.n_runs, "paired runs");
    converge->add_option("--dt-grid", ov.dt_grid, "step sizes")->delimiter(',');
    converge->add_option("--n-runs", ov.n_runs, "runs per (dt, mode)");
    converge->add_option("--statistic", ov.statistic,
                         "survival | mean_total_infections | mean_front");
    percolation->add_option("--lambda-grid", ov.lambda_grid, "intensities")->delimiter(',');
    percolation->add_option("--box-sizes", ov.box_sizes, "box linear sizes")->delimiter(',');
    percolation->add_option("--n-samples", ov.n_samples, "fields per (lambda, box)");
    stationarity->add_option("--t", ov.t, "elapsed time");
    stationarity->add_option("--subbox-len", ov.subbox_len, "sub-box length on axis 0");
    stationarity->add_option("--margin", ov.margin, "window inset (default 6 sqrt(D t))");
    stationarity->add_option("--n-runs", ov.n_runs, "independent fields");
    constants->add_option("--C1", ov.c1, "front-speed constant");
    constants->add_option("--C2", ov.c2, "integral constant");
    constants->add_option("--T", ov.T, "horizon");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(ov);
        if (survival->parsed()) return cmd_survival(ov);
        if (shape->parsed()) return cmd_shape(ov);
        if (coupling->parsed()) return cmd_coupling(ov);
        if (converge->parsed()) return cmd_converge(ov);
        if (percolation->parsed()) return cmd_percolation(ov);
        if (stationarity->parsed()) return cmd_stationarity(ov);
        if (constants->parsed()) return cmd_constants(ov);
    } catch (const snails::InvalidParameter& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const snails::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const snails::ResourceLimit& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
