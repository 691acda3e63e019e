#include "snails/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "snails/errors.hpp"
#include "snails/parallel.hpp"

namespace snails {

namespace {

constexpr std::uint64_t kTagRun = 0x52554EULL;
constexpr std::uint64_t kTagPair = 0x50414952ULL;

void check_increasing(const std::vector<double>& grid, const char* what) {
    if (grid.empty()) throw InvalidParameter(std::string(what) + " must be non-empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) {
            throw InvalidParameter(std::string(what) + " entries must be positive and finite");
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw InvalidParameter(std::string(what) + " must be strictly increasing");
        }
    }
}

}  // namespace

double resolve_dt(const ModelParams& params, const SimSettings& sim) {
    return sim.dt > 0.0 ? sim.dt : params.default_dt();
}

double resolve_window_half(const ModelParams& params, double t_max, const SimSettings& sim) {
    if (sim.window_half > 0.0) return sim.window_half;
    if (!(sim.window_growth > 0.0)) throw InvalidParameter("window_growth must be > 0");
    const double w =
        sim.window_growth * t_max + 6.0 * std::sqrt(2.0 * params.diffusion * t_max);
    return std::max(w, 2.0 * params.radius);
}

SurvivalReport survival_experiment(const ModelParams& params, const std::vector<double>& horizons,
                                   std::int64_t n_runs, const RngStream& base,
                                   const SimSettings& sim) {
    check_increasing(horizons, "horizons");
    if (n_runs < 1) throw InvalidParameter("n_runs must be >= 1");
    const double t_max = horizons.back();

    SurvivalReport report;
    report.dt = resolve_dt(params, sim);
    report.window_half = resolve_window_half(params, t_max, sim);
    const Box window = Box::centered(report.window_half, params.d);

    RunSpec spec;
    spec.dt = report.dt;
    spec.t_max = t_max;
    spec.mode = sim.mode;
    spec.truncation = sim.truncation;
    spec.particle_cap = sim.particle_cap;

    report.runs.resize(n_runs);
    parallel_for(n_runs, sim.workers, [&](std::int64_t i) {
        RngStream rng = base.derived(kTagRun, static_cast<std::uint64_t>(i));
        RunOutput out = run(params, window, rng, spec);
        out.result.run_id = i;
        report.runs[i] = out.result;
    });

    std::vector<double> fit_x, fit_y, fit_w;
    for (double horizon : horizons) {
        SurvivalPoint pt;
        pt.horizon = horizon;
        pt.n_runs = n_runs;
        for (const RunResult& r : report.runs) {
            if (r.censored || r.extinction_time >= horizon) ++pt.survivors;
        }
        pt.p = static_cast<double>(pt.survivors) / static_cast<double>(n_runs);
        const WilsonInterval ci = wilson_interval(pt.survivors, n_runs);
        pt.ci_low = ci.low;
        pt.ci_high = ci.high;
        pt.used_in_fit = pt.survivors >= kMinSurvivorsForFit;
        if (pt.used_in_fit) {
            // Delta method: Var(log p_hat) ~ (1-p)/(n p); cap p away from 1 so
            // a saturated point keeps a finite weight.
            const double p_w = std::min(pt.p, 1.0 - 0.5 / static_cast<double>(n_runs));
            fit_x.push_back(horizon);
            fit_y.push_back(std::log(pt.p));
            fit_w.push_back(static_cast<double>(n_runs) * p_w / (1.0 - p_w));
        }
        report.curve.points.push_back(pt);
    }

    bool any_decay = false;
    for (double y : fit_y) {
        if (y < 0.0) any_decay = true;
    }
    if (fit_x.size() >= 2 && any_decay) {
        const WlsFit raw = weighted_least_squares(fit_x, fit_y, fit_w);
        report.fit.available = true;
        report.fit.raw = raw;
        report.fit.c_hat = -raw.slope;
        report.fit.intercept = raw.intercept;
        report.fit.se_c = std::sqrt(raw.var_slope);
        report.fit.ci_low = report.fit.c_hat - 1.959963984540054 * report.fit.se_c;
        report.fit.ci_high = report.fit.c_hat + 1.959963984540054 * report.fit.se_c;
        report.fit.chi2 = raw.chi2;
        report.fit.points_used = static_cast<int>(fit_x.size());
        report.fit.horizon_lo = fit_x.front();
        report.fit.horizon_hi = fit_x.back();
    }
    return report;
}

ShapeReport shape_experiment(const ModelParams& params, const std::vector<double>& t_grid,
                             std::int64_t n_runs, const RngStream& base, const SimSettings& sim,
                             std::optional<double> entry_range) {
    check_increasing(t_grid, "t_grid");
    if (n_runs < 1) throw InvalidParameter("n_runs must be >= 1");
    if (params.alpha != 0.0) {
        throw InvalidParameter("shape_experiment requires alpha == 0 (no removal)");
    }
    const double t_max = t_grid.back();

    ShapeReport report;
    report.dt = resolve_dt(params, sim);
    report.window_half = resolve_window_half(params, t_max, sim);
    const Box window = Box::centered(report.window_half, params.d);

    RunSpec spec;
    spec.dt = report.dt;
    spec.t_max = t_max;
    spec.mode = sim.mode;
    spec.truncation = sim.truncation;
    spec.particle_cap = sim.particle_cap;
    spec.front_grid = t_grid;
    spec.track_front = true;
    spec.entry_range = entry_range;

    report.runs.resize(n_runs);
    report.front_radius.resize(n_runs);
    report.sup_front.resize(n_runs);
    parallel_for(n_runs, sim.workers, [&](std::int64_t i) {
        RngStream rng = base.derived(kTagRun, static_cast<std::uint64_t>(i));
        RunOutput out = run(params, window, rng, spec);
        out.result.run_id = i;
        report.runs[i] = out.result;
        report.front_radius[i] = std::move(out.front_radius_at);
        report.sup_front[i] = std::move(out.sup_front_at);
    });

    std::vector<std::int64_t> used;
    for (std::int64_t i = 0; i < n_runs; ++i) {
        if (report.runs[i].window_overflow) {
            ++report.overflow_runs;
        } else {
            used.push_back(i);
        }
    }
    report.used_runs = static_cast<std::int64_t>(used.size());

    for (std::size_t g = 0; g < t_grid.size(); ++g) {
        ShapeRow row;
        row.t = t_grid[g];
        if (!used.empty()) {
            std::vector<double> radius_vals, sup_vals;
            radius_vals.reserve(used.size());
            sup_vals.reserve(used.size());
            for (std::int64_t i : used) {
                radius_vals.push_back(report.front_radius[i][g]);
                sup_vals.push_back(report.sup_front[i][g]);
            }
            for (std::size_t q = 0; q < kShapeQuantiles.size(); ++q) {
                row.front_radius_q[q] = quantile(radius_vals, kShapeQuantiles[q]);
                row.sup_front_q[q] = quantile(sup_vals, kShapeQuantiles[q]);
            }
        }
        report.rows.push_back(row);
    }

    if (!used.empty()) {
        std::vector<double> speeds;
        speeds.reserve(used.size());
        for (std::int64_t i : used) {
            speeds.push_back(report.sup_front[i].back() / t_grid.back());
        }
        report.pilot_c1 = quantile(speeds, 0.99);
    }
    return report;
}

CouplingReport coupling_experiment(const ModelParams& params, double t_max, std::int64_t n_pairs,
                                   const RngStream& base, const SimSettings& sim) {
    if (!(params.alpha > 0.0)) {
        throw InvalidParameter("coupling_experiment requires alpha > 0");
    }
    if (!(t_max > 0.0)) throw InvalidParameter("t_max must be > 0");
    if (n_pairs < 1) throw InvalidParameter("n_pairs must be >= 1");
    params.validate();

    const double dt = resolve_dt(params, sim);
    const double window_half = resolve_window_half(params, t_max, sim);
    const Box window = Box::centered(window_half, params.d);

    ModelParams params0 = params;
    params0.alpha = 0.0;

    CouplingReport report;
    report.n_pairs = n_pairs;
    report.per_pair.resize(n_pairs);

    parallel_for(n_pairs, sim.workers, [&](std::int64_t pair) {
        RngStream rng = base.derived(kTagPair, static_cast<std::uint64_t>(pair));
        // Identical streams: init consumes the same draws for both states, and
        // after that only motion consumes sequential randomness (removal
        // clocks and contact coins come from pure derived substreams), so the
        // two runs share Brownian motions and contact randomness exactly.
        SimState st_a = init_configuration(params, window, rng, std::nullopt, sim.particle_cap);
        SimState st_0 = init_configuration(params0, window, rng, std::nullopt, sim.particle_cap);

        CouplingPairRow row;
        row.pair = pair;
        row.seed = rng.stream_id();
        const std::int64_t n = st_a.n();
        const std::int64_t n_steps = std::max<std::int64_t>(
            1, static_cast<std::int64_t>(std::ceil(t_max / dt - 1e-12)));
        for (std::int64_t k = 1; k <= n_steps; ++k) {
            const double target = k == n_steps ? t_max : std::min(k * dt, t_max);
            const double dt_a = target - st_a.t;
            if (dt_a > 0.0) step(st_a, dt_a, sim.mode);
            const double dt_0 = target - st_0.t;
            if (dt_0 > 0.0) step(st_0, dt_0, sim.mode);
            // Ever-infected under removal must be contained in the infected
            // set without removal (which never shrinks).
            for (std::int64_t i = 0; i < n; ++i) {
                if (st_a.state[i] != SirState::S && st_0.state[i] == SirState::S) {
                    ++row.violations;
                    if (row.first_violation_step < 0) row.first_violation_step = k;
                    break;
                }
            }
            ++row.steps_checked;
        }
        report.per_pair[pair] = row;
    });

    for (const CouplingPairRow& row : report.per_pair) {
        report.steps_checked += row.steps_checked;
        if (row.violations > 0) {
            ++report.violating_pairs;
            if (!report.first_violation_pair) {
                report.first_violation_pair = row.pair;
                report.first_violation_step = row.first_violation_step;
                report.first_violation_seed = row.seed;
            }
        }
    }
    return report;
}

const char* to_string(ConvStatistic stat) {
    switch (stat) {
        case ConvStatistic::SurvivalAtT: return "survival";
        case ConvStatistic::MeanTotalInfections: return "mean_total_infections";
        case ConvStatistic::MeanFront: return "mean_front";
    }
    return "?";
}

ConvStatistic conv_statistic_from_string(const std::string& name) {
    if (name == "survival") return ConvStatistic::SurvivalAtT;
    if (name == "mean_total_infections") return ConvStatistic::MeanTotalInfections;
    if (name == "mean_front") return ConvStatistic::MeanFront;
    throw InvalidParameter(
        "statistic must be one of survival, mean_total_infections, mean_front");
}

std::vector<ConvergenceRow> convergence_study(const ModelParams& params,
                                              const std::vector<double>& dt_grid,
                                              std::int64_t n_runs, double T, ConvStatistic stat,
                                              const RngStream& base, const SimSettings& sim) {
    if (dt_grid.empty()) throw InvalidParameter("dt_grid must be non-empty");
    for (double dt : dt_grid) {
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw InvalidParameter("dt_grid entries must be positive and finite");
        }
    }
    if (n_runs < 1) throw InvalidParameter("n_runs must be >= 1");
    if (!(T > 0.0)) throw InvalidParameter("T must be > 0");

    const double window_half = resolve_window_half(params, T, sim);
    const Box window = Box::centered(window_half, params.d);

    std::vector<ConvergenceRow> rows;
    std::uint64_t batch = 0;
    for (double dt : dt_grid) {
        for (DetectorMode mode : {DetectorMode::Bridge, DetectorMode::Naive}) {
            RunSpec spec;
            spec.dt = dt;
            spec.t_max = T;
            spec.mode = mode;
            spec.truncation = sim.truncation;
            spec.particle_cap = sim.particle_cap;
            spec.track_front = stat == ConvStatistic::MeanFront;

            std::vector<double> values(n_runs, 0.0);
            parallel_for(n_runs, sim.workers, [&](std::int64_t i) {
                RngStream rng = base.derived(kTagRun, batch, static_cast<std::uint64_t>(i));
                RunOutput out = run(params, window, rng, spec);
                switch (stat) {
                    case ConvStatistic::SurvivalAtT:
                        values[i] = out.result.censored ? 1.0 : 0.0;
                        break;
                    case ConvStatistic::MeanTotalInfections:
                        values[i] = static_cast<double>(out.result.total_infections);
                        break;
                    case ConvStatistic::MeanFront:
                        values[i] = out.sup_front_final;
                        break;
                }
            });

            ConvergenceRow row;
            row.dt = dt;
            row.mode = mode;
            row.n_runs = n_runs;
            if (stat == ConvStatistic::SurvivalAtT) {
                std::int64_t survivors = 0;
                for (double v : values) survivors += v > 0.5 ? 1 : 0;
                const double p = static_cast<double>(survivors) / static_cast<double>(n_runs);
                row.estimate = p;
                row.se = std::sqrt(p * (1.0 - p) / static_cast<double>(n_runs));
            } else {
                MeanVar acc;
                for (double v : values) acc.add(v);
                row.estimate = acc.mean();
                row.se = acc.se_mean();
            }
            rows.push_back(row);
            ++batch;
        }
    }
    return rows;
}

std::vector<StationarityRow> stationarity_check(double lambda, int d, const Box& window, double t,
                                                double subbox_len, double margin,
                                                std::int64_t n_runs, const RngStream& base,
                                                double diffusion, int workers) {
    if (!(lambda > 0.0)) throw InvalidParameter("lambda must be > 0");
    if (d < 1) throw InvalidParameter("d must be >= 1");
    window.validate();
    if (window.dim() != d) throw InvalidParameter("window dimension must match d");
    if (!(t >= 0.0)) throw InvalidParameter("t must be >= 0");
    if (!(subbox_len > 0.0)) throw InvalidParameter("subbox_len must be > 0");
    if (n_runs < 1) throw InvalidParameter("n_runs must be >= 1");
    if (margin < 0.0) margin = 6.0 * std::sqrt(diffusion * t);

    // Sub-boxes tile axis 0 inside the margin-inset window; other axes take
    // the full inset cross-section.
    const double x_lo = window.lo[0] + margin;
    const double x_hi = window.hi[0] - margin;
    const int n_boxes = static_cast<int>(std::floor((x_hi - x_lo) / subbox_len));
    if (n_boxes < 1) {
        throw InvalidParameter("window too small for one sub-box at this margin");
    }
    double cross_volume = 1.0;
    std::vector<double> cross_lo(d, 0.0), cross_hi(d, 0.0);
    for (int k = 1; k < d; ++k) {
        cross_lo[k] = window.lo[k] + margin;
        cross_hi[k] = window.hi[k] - margin;
        if (!(cross_lo[k] < cross_hi[k])) {
            throw InvalidParameter("window too small for the margin on axis " + std::to_string(k));
        }
        cross_volume *= cross_hi[k] - cross_lo[k];
    }

    // counts[run][box][0/1]: box count at time 0 and at time t.
    std::vector<std::int32_t> counts(static_cast<std::size_t>(n_runs) * n_boxes * 2, 0);
    parallel_for(n_runs, workers, [&](std::int64_t run_idx) {
        RngStream rng = base.derived(kTagRun, static_cast<std::uint64_t>(run_idx));
        std::vector<double> pts = sample_poisson_points(rng, lambda, window);
        const std::int64_t n = static_cast<std::int64_t>(pts.size()) / d;
        auto tally = [&](int slot) {
            for (std::int64_t i = 0; i < n; ++i) {
                const double* x = &pts[i * d];
                bool inside_cross = true;
                for (int k = 1; k < d && inside_cross; ++k) {
                    inside_cross = x[k] >= cross_lo[k] && x[k] <= cross_hi[k];
                }
                if (!inside_cross) continue;
                const double rel = (x[0] - x_lo) / subbox_len;
                if (rel < 0.0) continue;
                const int b = static_cast<int>(rel);
                if (b >= n_boxes) continue;
                ++counts[(static_cast<std::size_t>(run_idx) * n_boxes + b) * 2 + slot];
            }
        };
        tally(0);
        if (t > 0.0) {
            const double sigma = std::sqrt(diffusion * t);
            for (double& coord : pts) coord += sigma * rng.normal();
        }
        tally(1);
    });

    const double R = static_cast<double>(n_runs);
    std::vector<StationarityRow> rows;
    for (int b = 0; b < n_boxes; ++b) {
        MeanVar acc0, acc_t;
        for (std::int64_t r = 0; r < n_runs; ++r) {
            acc0.add(counts[(static_cast<std::size_t>(r) * n_boxes + b) * 2 + 0]);
            acc_t.add(counts[(static_cast<std::size_t>(r) * n_boxes + b) * 2 + 1]);
        }
        StationarityRow row;
        row.index = b;
        row.x_lo = x_lo + b * subbox_len;
        row.x_hi = row.x_lo + subbox_len;
        row.expected = lambda * subbox_len * cross_volume;
        row.mean0 = acc0.mean();
        row.var0 = acc0.variance();
        row.mean_t = acc_t.mean();
        row.var_t = acc_t.variance();
        // Null (Poisson m): Var(mean_hat) = m/R, Var(var_hat) ~ (m + 2m^2)/R.
        const double m = row.expected;
        const double se_mean = std::sqrt(m / R);
        const double se_var = std::sqrt((m + 2.0 * m * m) / R);
        row.z_mean0 = (row.mean0 - m) / se_mean;
        row.z_var0 = (row.var0 - m) / se_var;
        row.z_mean_t = (row.mean_t - m) / se_mean;
        row.z_var_t = (row.var_t - m) / se_var;
        row.flagged = std::fabs(row.z_mean0) > 4.0 || std::fabs(row.z_var0) > 4.0 ||
                      std::fabs(row.z_mean_t) > 4.0 || std::fabs(row.z_var_t) > 4.0;
        rows.push_back(row);
    }
    return rows;
}

ProofConstants proof_constants(double C1, double C2, double alpha, double T) {
    if (!(C1 > 0.0) || !(C2 > 0.0) || !(alpha > 0.0) || !(T > 0.0)) {
        throw InvalidParameter("proof_constants: all inputs must be positive");
    }
    ProofConstants pc;
    pc.C1 = C1;
    pc.C2 = C2;
    pc.alpha = alpha;
    pc.T = T;
    pc.epsilon = 1.0 / (200.0 * C1);
    pc.M = 100.0 * C1 * T;
    pc.p = 1.0 - std::pow(-std::expm1(-alpha * pc.epsilon), 2.0 * C2) / 2.0;
    pc.K_trunc = 20.0 * C1 * T;
    return pc;
}

}  // namespace snails
