#include "snails/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "snails/errors.hpp"

namespace snails {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_grid(const std::vector<double>& grid) {
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw InvalidParameter("grid times must be strictly increasing");
        }
    }
}

void check_log(const EventLog& log) {
    double last = -kInf;
    for (const Event& e : log) {
        if (!std::isfinite(e.time) || e.time < 0.0) throw ParseError("event log: bad time");
        if (e.time < last) throw ParseError("event log: times must be nondecreasing");
        last = e.time;
    }
}

}  // namespace

TimeSeries infected_count_series(const EventLog& log, const std::vector<double>& grid) {
    check_grid(grid);
    check_log(log);
    TimeSeries out;
    out.times = grid;
    out.values.reserve(grid.size());
    std::size_t e = 0;
    std::int64_t count = 0;
    for (double t : grid) {
        while (e < log.size() && log[e].time <= t) {
            if (log[e].kind == EventKind::Infect) ++count;
            else if (log[e].kind == EventKind::Remove) --count;
            ++e;
        }
        if (count < 0) throw ParseError("event log: more removals than infections");
        out.values.push_back(static_cast<double>(count));
    }
    return out;
}

std::pair<TimeSeries, TimeSeries> front_series(const std::vector<Snapshot>& snapshots,
                                               const std::vector<double>& grid, int d) {
    check_grid(grid);
    TimeSeries left, right;
    left.times = grid;
    right.times = grid;
    for (double t : grid) {
        auto it = std::find_if(snapshots.begin(), snapshots.end(),
                               [&](const Snapshot& s) { return std::fabs(s.t - t) <= 1e-9; });
        if (it == snapshots.end()) {
            throw InvalidParameter("front_series: no snapshot at a requested grid time");
        }
        const Snapshot& snap = *it;
        const std::size_t n = snap.infected.size();
        bool any = false;
        double lo = kInf, hi = -kInf, max_norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!snap.infected[i]) continue;
            any = true;
            if (d == 1) {
                lo = std::min(lo, snap.positions[i]);
                hi = std::max(hi, snap.positions[i]);
            } else {
                double s = 0.0;
                for (int k = 0; k < d; ++k) {
                    const double x = snap.positions[i * d + k];
                    s += x * x;
                }
                max_norm = std::max(max_norm, std::sqrt(s));
            }
        }
        if (d == 1) {
            left.values.push_back(any ? lo : kInf);
            right.values.push_back(any ? hi : -kInf);
        } else {
            left.values.push_back(any ? -max_norm : kInf);
            right.values.push_back(any ? max_norm : -kInf);
        }
    }
    return {left, right};
}

std::int64_t entry_count(const std::vector<Snapshot>& snapshots, double range, double horizon,
                         int d) {
    if (snapshots.empty()) return 0;
    const std::size_t n = snapshots.front().positions.size() / d;
    std::int64_t count = 0;
    const double r2 = range * range;
    for (std::size_t i = 0; i < n; ++i) {
        bool entered = false;
        for (const Snapshot& snap : snapshots) {
            if (snap.t > horizon + 1e-12) break;
            double s = 0.0;
            for (int k = 0; k < d; ++k) {
                const double x = snap.positions[i * d + k];
                s += x * x;
            }
            if (s <= r2) {
                entered = true;
                break;
            }
        }
        if (entered) ++count;
    }
    return count;
}

double occupation_time(const EventLog& log, double threshold, double horizon) {
    if (!(threshold >= 0.0)) throw InvalidParameter("occupation_time: threshold must be >= 0");
    if (!(horizon > 0.0)) throw InvalidParameter("occupation_time: horizon must be > 0");
    check_log(log);
    double measure = 0.0;
    double t_prev = 0.0;
    std::int64_t count = 0;
    std::size_t e = 0;
    while (e < log.size() && log[e].time <= horizon) {
        const double t = log[e].time;
        if (t > t_prev && static_cast<double>(count) <= threshold) measure += t - t_prev;
        // Apply every event at this exact instant atomically.
        while (e < log.size() && log[e].time == t) {
            if (log[e].kind == EventKind::Infect) ++count;
            else if (log[e].kind == EventKind::Remove) --count;
            ++e;
        }
        t_prev = t;
    }
    if (horizon > t_prev && static_cast<double>(count) <= threshold) measure += horizon - t_prev;
    return measure;
}

double integral_infected(const EventLog& log, double horizon) {
    if (!(horizon > 0.0)) throw InvalidParameter("integral_infected: horizon must be > 0");
    check_log(log);
    double integral = 0.0;
    double t_prev = 0.0;
    std::int64_t count = 0;
    for (const Event& e : log) {
        if (e.time > horizon) break;
        if (e.time > t_prev) {
            integral += static_cast<double>(count) * (e.time - t_prev);
            t_prev = e.time;
        }
        if (e.kind == EventKind::Infect) ++count;
        else if (e.kind == EventKind::Remove) --count;
    }
    if (horizon > t_prev) integral += static_cast<double>(count) * (horizon - t_prev);
    return integral;
}

double lifetime_sum(const EventLog& log, double horizon) {
    if (!(horizon > 0.0)) throw InvalidParameter("lifetime_sum: horizon must be > 0");
    check_log(log);
    std::map<std::int64_t, double> infected_at;
    double total = 0.0;
    for (const Event& e : log) {
        if (e.time > horizon) break;
        if (e.kind == EventKind::Infect) {
            infected_at.emplace(e.particle_id, e.time);
        } else if (e.kind == EventKind::Remove) {
            auto it = infected_at.find(e.particle_id);
            if (it == infected_at.end()) throw ParseError("lifetime_sum: removal without infection");
            total += e.time - it->second;
            infected_at.erase(it);
        }
    }
    for (const auto& [id, t0] : infected_at) total += horizon - t0;
    return total;
}

}  // namespace snails
