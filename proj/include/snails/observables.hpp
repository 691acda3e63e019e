#pragma once
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "snails/events.hpp"

namespace snails {

struct TimeSeries {
    std::vector<double> times;   // strictly increasing
    std::vector<double> values;  // same length
};

// Full-state snapshot at one instant: positions of every particle (stride d)
// and a per-particle infected flag.
struct Snapshot {
    double t = 0.0;
    std::vector<double> positions;
    std::vector<std::uint8_t> infected;
};

// Per-run summary. extinction_time is meaningful only when !censored; censored
// runs survived to the horizon.
struct RunResult {
    std::int64_t run_id = 0;
    std::uint64_t seed = 0;
    double extinction_time = 0.0;
    bool censored = false;
    double t_horizon = 0.0;
    std::int64_t total_infections = 0;      // ever-infected count, origin included
    double integral_I = 0.0;                // exact integral of I(t) over [0, horizon]
    std::int64_t n_entry = -1;              // -1 when entry tracking was off
    double max_inf_radius = 0.0;            // max ||position|| over infection events
    bool truncated = false;                 // infection-event cap was reached
    bool window_overflow = false;           // infection reached the simulated window edge
    std::vector<std::pair<double, double>> occupation_below;  // (threshold, measure)
};

// Exact piecewise-constant reconstruction of the infected count at the grid
// times (events at t <= grid time are applied).
TimeSeries infected_count_series(const EventLog& log, const std::vector<double>& grid);

// Leftmost/rightmost infected positions at the grid times for d = 1 (with
// L = +inf, R = -inf when no particle is infected). For d >= 2 the max norm
// over infected particles is returned as R and its negation as L. Each grid
// time must match a snapshot time.
std::pair<TimeSeries, TimeSeries> front_series(const std::vector<Snapshot>& snapshots,
                                               const std::vector<double>& grid, int d);

// Number of particles whose sampled trajectory enters the closed ball of the
// given range about the origin at or before the horizon.
std::int64_t entry_count(const std::vector<Snapshot>& snapshots, double range, double horizon,
                         int d);

// Lebesgue measure of {t <= horizon : I(t) <= threshold}, exact from the log.
double occupation_time(const EventLog& log, double threshold, double horizon);

// Integral of I(t) over [0, horizon], exact from the log (route one).
double integral_infected(const EventLog& log, double horizon);

// Sum over ever-infected particles of (removal time ^ horizon) - infection
// time (route two; must agree with integral_infected).
double lifetime_sum(const EventLog& log, double horizon);

}  // namespace snails
