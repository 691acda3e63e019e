#pragma once
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snails/model.hpp"
#include "snails/stats.hpp"

namespace snails {

// Default window growth constant used by the AUTO window rule
// W = growth * t_max + 6 * sqrt(2 * diffusion * t_max); calibrated against a
// pilot no-removal shape run at lambda = 1, d = 1 (99th-percentile front speed
// ~2.4) with headroom. Override via sim.window_growth for denser fields.
inline constexpr double kDefaultWindowGrowth = 3.0;

struct SimSettings {
    double dt = 0.0;                     // <= 0 selects the model default
    DetectorMode mode = DetectorMode::Bridge;
    double window_half = 0.0;            // <= 0 selects the AUTO rule
    double window_growth = kDefaultWindowGrowth;
    std::int64_t particle_cap = 8'000'000;
    std::optional<std::int64_t> truncation;
    int workers = 1;
};

double resolve_window_half(const ModelParams& params, double t_max, const SimSettings& sim);
double resolve_dt(const ModelParams& params, const SimSettings& sim);

struct SurvivalPoint {
    double horizon = 0.0;
    std::int64_t n_runs = 0;
    std::int64_t survivors = 0;
    double p = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool used_in_fit = false;
};

struct SurvivalCurve {
    std::vector<SurvivalPoint> points;
};

// Weighted fit of log-survival against the horizon; c_hat is the decay rate.
// Only horizons with at least kMinSurvivorsForFit surviving runs enter.
struct FitResult {
    bool available = false;
    double c_hat = 0.0;
    double intercept = 0.0;
    double se_c = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double chi2 = 0.0;
    int points_used = 0;
    double horizon_lo = 0.0;
    double horizon_hi = 0.0;
    WlsFit raw;
};

inline constexpr std::int64_t kMinSurvivorsForFit = 10;

struct SurvivalReport {
    SurvivalCurve curve;
    FitResult fit;
    std::vector<RunResult> runs;
    double window_half = 0.0;
    double dt = 0.0;
};

// n_runs independent runs to the largest horizon; each run serves every
// smaller horizon, so the estimates are deterministically nonincreasing.
SurvivalReport survival_experiment(const ModelParams& params, const std::vector<double>& horizons,
                                   std::int64_t n_runs, const RngStream& base,
                                   const SimSettings& sim);

inline constexpr std::array<double, 6> kShapeQuantiles = {0.05, 0.25, 0.5, 0.75, 0.95, 0.99};

struct ShapeRow {
    double t = 0.0;
    std::array<double, 6> front_radius_q{};  // max ||z|| over infected at t
    std::array<double, 6> sup_front_q{};     // running sup of max(-L, R) up to t
};

struct ShapeReport {
    std::vector<ShapeRow> rows;
    double pilot_c1 = 0.0;          // 99th percentile of sup-front / t at the largest t
    std::int64_t overflow_runs = 0; // flagged and excluded from the quantiles
    std::int64_t used_runs = 0;
    std::vector<RunResult> runs;    // every run, including flagged ones
    std::vector<std::vector<double>> front_radius;  // [run][grid index]
    std::vector<std::vector<double>> sup_front;     // [run][grid index]
    double window_half = 0.0;
    double dt = 0.0;
};

// Front-growth envelopes of the no-removal model (requires alpha == 0).
ShapeReport shape_experiment(const ModelParams& params, const std::vector<double>& t_grid,
                             std::int64_t n_runs, const RngStream& base, const SimSettings& sim,
                             std::optional<double> entry_range = std::nullopt);

struct CouplingPairRow {
    std::int64_t pair = 0;
    std::uint64_t seed = 0;
    std::int64_t steps_checked = 0;
    std::int64_t violations = 0;
    std::int64_t first_violation_step = -1;
};

struct CouplingReport {
    std::int64_t n_pairs = 0;
    std::int64_t violating_pairs = 0;
    std::int64_t steps_checked = 0;
    std::optional<std::int64_t> first_violation_pair;
    std::optional<std::int64_t> first_violation_step;
    std::uint64_t first_violation_seed = 0;
    std::vector<CouplingPairRow> per_pair;
};

// Paired runs (alpha vs 0) on identical initial fields, motion increments and
// contact randomness; verifies at every step that the ever-infected set of
// the alpha run is contained in the infected set of the no-removal run.
CouplingReport coupling_experiment(const ModelParams& params, double t_max, std::int64_t n_pairs,
                                   const RngStream& base, const SimSettings& sim);

enum class ConvStatistic { SurvivalAtT, MeanTotalInfections, MeanFront };
const char* to_string(ConvStatistic stat);
ConvStatistic conv_statistic_from_string(const std::string& name);

struct ConvergenceRow {
    double dt = 0.0;
    DetectorMode mode = DetectorMode::Naive;
    double estimate = 0.0;
    double se = 0.0;
    std::int64_t n_runs = 0;
};

// The selected statistic at horizon T for every dt in the grid, in both
// detector modes.
std::vector<ConvergenceRow> convergence_study(const ModelParams& params,
                                              const std::vector<double>& dt_grid,
                                              std::int64_t n_runs, double T, ConvStatistic stat,
                                              const RngStream& base, const SimSettings& sim);

struct StationarityRow {
    int index = 0;
    double x_lo = 0.0;
    double x_hi = 0.0;
    double expected = 0.0;
    double mean0 = 0.0;
    double var0 = 0.0;
    double mean_t = 0.0;
    double var_t = 0.0;
    double z_mean0 = 0.0;
    double z_var0 = 0.0;
    double z_mean_t = 0.0;
    double z_var_t = 0.0;
    bool flagged = false;
};

// Pure-motion check that sub-box counts stay Poisson(lambda * volume) after
// time t. Sub-boxes tile axis 0 inside the window inset by `margin` on every
// axis (margin < 0 selects 6 * sqrt(diffusion * t)); a row is flagged when
// any mean/variance z-score exceeds 4.
std::vector<StationarityRow> stationarity_check(double lambda, int d, const Box& window, double t,
                                                double subbox_len, double margin,
                                                std::int64_t n_runs, const RngStream& base,
                                                double diffusion = 1.0, int workers = 1);

struct ProofConstants {
    double C1 = 0.0;
    double C2 = 0.0;
    double alpha = 0.0;
    double T = 0.0;
    double epsilon = 0.0;  // 1 / (200 C1)
    double M = 0.0;        // T / (2 epsilon) = 100 C1 T
    double p = 0.0;        // 1 - (1 - e^{-alpha epsilon})^{2 C2} / 2
    double K_trunc = 0.0;  // 20 C1 T
};

ProofConstants proof_constants(double C1, double C2, double alpha, double T);

}  // namespace snails
