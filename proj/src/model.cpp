#include "snails/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "snails/errors.hpp"
#include "snails/neighbor.hpp"

namespace snails {

namespace {

constexpr std::uint64_t kTagRemoval = 0x52454D4F56ULL;
constexpr std::uint64_t kTagContact = 0x434F4E54ULL;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
// Bridge flags with crossing probability below ~1e-16 are unreachable; this
// bounds the candidate search window.
constexpr double kBridgeLogCut = 36.85;

double dist2(const double* a, const double* b, int d) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
        const double diff = a[k] - b[k];
        s += diff * diff;
    }
    return s;
}

double norm2(const double* a, int d) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += a[k] * a[k];
    return s;
}

double removal_clock(const SimState& s, std::int64_t id, double t) {
    if (!(s.params.alpha > 0.0)) return kInf;
    RngStream sub = s.rng.derived(kTagRemoval, static_cast<std::uint64_t>(id));
    return t + sub.exponential(s.params.alpha);
}

double contact_uniform(const SimState& s, std::int64_t step_index, std::int64_t infector,
                       std::int64_t susceptible) {
    const std::uint64_t pair_key = (static_cast<std::uint64_t>(infector) << 32) |
                                   static_cast<std::uint64_t>(susceptible);
    RngStream sub = s.rng.derived(kTagContact, static_cast<std::uint64_t>(step_index), pair_key);
    return sub.uniform01();
}

// Keeps `order` sorted by (position, id) for d = 1. After a diffusion step the
// array is nearly sorted, so one insertion pass is close to linear.
void repair_order(const SimState& s) {
    const std::int64_t n = s.n();
    const auto& pos = s.pos;
    auto less = [&](std::int32_t a, std::int32_t b) {
        return pos[a] < pos[b] || (pos[a] == pos[b] && a < b);
    };
    if (!s.order_valid || static_cast<std::int64_t>(s.order.size()) != n) {
        s.order.resize(n);
        for (std::int64_t i = 0; i < n; ++i) s.order[i] = static_cast<std::int32_t>(i);
        std::sort(s.order.begin(), s.order.end(), less);
        s.order_valid = true;
        return;
    }
    for (std::int64_t k = 1; k < n; ++k) {
        const std::int32_t e = s.order[k];
        std::int64_t j = k;
        while (j > 0 && less(e, s.order[j - 1])) {
            s.order[j] = s.order[j - 1];
            --j;
        }
        s.order[j] = e;
    }
}

// Index of `id` inside the sorted order array.
std::int64_t order_rank(const SimState& s, std::int64_t id) {
    const auto& pos = s.pos;
    auto it = std::lower_bound(s.order.begin(), s.order.end(), static_cast<std::int32_t>(id),
                               [&](std::int32_t a, std::int32_t b) {
                                   return pos[a] < pos[b] || (pos[a] == pos[b] && a < b);
                               });
    return it - s.order.begin();
}

void reset_marks(const SimState& s) {
    const std::size_t n = static_cast<std::size_t>(s.n());
    if (s.scratch_mark.size() != n) {
        s.scratch_mark.assign(n, 0);
        s.scratch_infector.assign(n, -1);
        s.scratch_epoch = 0;
    }
    ++s.scratch_epoch;
}

// Contacts between eligible infectors and susceptibles over [t - dt, t], with
// prev giving the positions at the step start and max_move the largest
// single-particle displacement of the step.
std::vector<Contact> detect_core(const SimState& s, const std::vector<double>& prev, double dt,
                                 double max_move, DetectorMode mode,
                                 std::span<const std::int32_t> eligible) {
    const int d = s.params.d;
    const double r = s.params.radius;
    const bool instant = s.params.instant_infection();
    const bool bridge = instant && mode == DetectorMode::Bridge;
    const double p_pair = instant ? 1.0 : -std::expm1(-s.params.infection_rate * dt);

    double window = r;
    if (bridge) window += std::sqrt(s.params.diffusion * dt * kBridgeLogCut) + 2.0 * max_move;

    reset_marks(s);
    std::vector<std::int64_t> flagged;

    auto evaluate = [&](std::int64_t i, std::int64_t j) {
        const double* pi = &s.pos[i * d];
        const double* pj = &s.pos[j * d];
        const double d1_sq = dist2(pi, pj, d);
        bool contact = false;
        if (d1_sq <= r * r) {
            contact = instant ? true : (contact_uniform(s, s.step_index, i, j) < p_pair);
        } else if (bridge) {
            const double d1 = std::sqrt(d1_sq);
            const double d0 = std::sqrt(dist2(&prev[i * d], &prev[j * d], d));
            double p;
            if (d == 1 && (prev[j] - prev[i]) * (s.pos[j] - s.pos[i]) < 0.0) {
                // The signed difference changed sides: the path crossed the
                // whole contact band, so the contact is certain.
                p = 1.0;
            } else if (d0 <= r) {
                p = 1.0;  // unreachable after closure; kept as a safe fallback
            } else {
                p = bridge_crossing_probability(d0, d1, r, dt, 2.0 * s.params.diffusion);
            }
            contact = p >= 1.0 || contact_uniform(s, s.step_index, i, j) < p;
        }
        if (contact) {
            if (s.scratch_mark[j] != s.scratch_epoch) {
                s.scratch_mark[j] = s.scratch_epoch;
                s.scratch_infector[j] = i;
                flagged.push_back(j);
            } else if (i < s.scratch_infector[j]) {
                s.scratch_infector[j] = i;
            }
        }
    };

    if (d == 1) {
        repair_order(s);
        for (std::int32_t inf_id : eligible) {
            const double xi = s.pos[inf_id];
            const std::int64_t rank = order_rank(s, inf_id);
            for (std::int64_t k = rank + 1; k < s.n(); ++k) {
                const std::int32_t e = s.order[k];
                if (s.pos[e] > xi + window) break;
                if (s.state[e] == SirState::S) evaluate(inf_id, e);
            }
            for (std::int64_t k = rank - 1; k >= 0; --k) {
                const std::int32_t e = s.order[k];
                if (s.pos[e] < xi - window) break;
                if (s.state[e] == SirState::S) evaluate(inf_id, e);
            }
        }
    } else {
        const double w2 = window * window;
        for (std::int32_t inf_id : eligible) {
            const double* pi = &s.pos[static_cast<std::size_t>(inf_id) * d];
            for (std::int64_t j = 0; j < s.n(); ++j) {
                if (s.state[j] != SirState::S) continue;
                if (dist2(pi, &s.pos[j * d], d) <= w2) evaluate(inf_id, j);
            }
        }
    }

    std::sort(flagged.begin(), flagged.end());
    std::vector<Contact> contacts;
    contacts.reserve(flagged.size());
    for (std::int64_t j : flagged) {
        contacts.push_back(Contact{j, s.scratch_infector[j], s.t});
    }
    return contacts;
}

void append_infect_event(SimState& s, std::int64_t id, double t) {
    const int d = s.params.d;
    Event e;
    e.time = t;
    e.kind = EventKind::Infect;
    e.particle_id = id;
    e.position.assign(&s.pos[id * d], &s.pos[id * d] + d);
    s.events.push_back(std::move(e));
    ++s.infect_events;
    ++s.ever_infected;
    s.max_inf_radius = std::max(s.max_inf_radius, std::sqrt(norm2(&s.pos[id * d], d)));
    for (int k = 0; k < d; ++k) {
        const double x = s.pos[id * d + k];
        if (x - s.window.lo[k] <= s.params.radius || s.window.hi[k] - x <= s.params.radius) {
            s.window_overflow = true;
        }
    }
}

void mark_truncated(SimState& s, double t) {
    s.truncated = true;
    Event e;
    e.time = t;
    e.kind = EventKind::Truncate;
    e.particle_id = -1;
    e.position.assign(s.params.d, 0.0);
    s.events.push_back(std::move(e));
}

}  // namespace

bool ModelParams::has_drift() const {
    for (double v : drift) {
        if (v != 0.0) return true;
    }
    return false;
}

void ModelParams::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw InvalidParameter("lambda must be positive and finite");
    }
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw InvalidParameter("alpha must be nonnegative and finite");
    }
    if (d < 1) throw InvalidParameter("d must be >= 1");
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw InvalidParameter("radius must be positive and finite");
    }
    if (!(diffusion > 0.0) || !std::isfinite(diffusion)) {
        throw InvalidParameter("diffusion must be positive and finite");
    }
    if (!drift.empty() && drift.size() != static_cast<std::size_t>(d)) {
        throw InvalidParameter("drift must have d components");
    }
    for (double v : drift) {
        if (!std::isfinite(v)) throw InvalidParameter("drift components must be finite");
    }
    if (!(infection_rate > 0.0)) {
        throw InvalidParameter("infection_rate must be positive (or infinite for instant)");
    }
}

const char* to_string(DetectorMode mode) {
    return mode == DetectorMode::Naive ? "NAIVE" : "BRIDGE";
}

DetectorMode detector_mode_from_string(const std::string& name) {
    if (name == "NAIVE") return DetectorMode::Naive;
    if (name == "BRIDGE") return DetectorMode::Bridge;
    throw InvalidParameter("detector mode must be NAIVE or BRIDGE");
}

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Infect: return "INFECT";
        case EventKind::Remove: return "REMOVE";
        case EventKind::Truncate: return "TRUNCATE";
    }
    return "?";
}

Particle SimState::particle(std::int64_t id) const {
    if (id < 0 || id >= n()) throw InvalidParameter("particle: unknown id");
    const int d = params.d;
    Particle p;
    p.id = id;
    p.x0.assign(&x0[id * d], &x0[id * d] + d);
    p.x.assign(&pos[id * d], &pos[id * d] + d);
    p.state = state[id];
    if (!std::isnan(t_infect[id])) p.t_infect = t_infect[id];
    if (!std::isnan(t_remove[id])) p.t_remove = t_remove[id];
    return p;
}

Snapshot SimState::snapshot() const {
    Snapshot snap;
    snap.t = t;
    snap.positions = pos;
    snap.infected.resize(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) {
        snap.infected[i] = state[i] == SirState::I ? 1 : 0;
    }
    return snap;
}

SimState init_configuration(const ModelParams& params, const Box& window, RngStream rng,
                            std::optional<std::int64_t> truncation, std::int64_t particle_cap) {
    params.validate();
    window.validate();
    if (window.dim() != params.d) throw InvalidParameter("window dimension must match d");
    if (!window.contains_origin_with_margin(params.radius)) {
        throw InvalidParameter("window must contain the origin with margin >= radius");
    }
    if (truncation && *truncation < 1) throw InvalidParameter("truncation cap must be >= 1");

    SimState s;
    s.params = params;
    s.window = window;
    s.rng = rng;
    s.truncation = truncation;

    std::vector<double> points = sample_poisson_points(s.rng, params.lambda, window);
    const int d = params.d;
    const std::int64_t n = static_cast<std::int64_t>(points.size()) / d + 1;
    if (n > particle_cap) {
        throw ResourceLimit("initial particle count " + std::to_string(n) +
                            " exceeds the hard cap " + std::to_string(particle_cap));
    }

    s.pos.assign(n * d, 0.0);
    std::copy(points.begin(), points.end(), s.pos.begin() + d);  // id 0 stays at the origin
    s.x0 = s.pos;
    s.pos_prev = s.pos;
    s.state.assign(n, SirState::S);
    s.t_infect.assign(n, kNaN);
    s.t_remove.assign(n, kNaN);

    s.state[0] = SirState::I;
    s.t_infect[0] = 0.0;
    s.t_remove[0] = removal_clock(s, 0, 0.0);
    s.infected.push_back(0);
    append_infect_event(s, 0, 0.0);
    if (s.truncation && s.infect_events >= *s.truncation) mark_truncated(s, 0.0);

    if (params.instant_infection() && !s.truncated) {
        const std::int64_t origin[] = {0};
        infect_closure(s, origin, 0.0);
    }
    return s;
}

void advance_positions(SimState& s, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidParameter("advance_positions: dt must be positive and finite");
    }
    const int d = s.params.d;
    const std::int64_t n = s.n();
    const double sigma = std::sqrt(s.params.diffusion * dt);
    const bool drift = s.params.has_drift();
    std::swap(s.pos_prev, s.pos);
    double max_move2 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        double move2 = 0.0;
        for (int k = 0; k < d; ++k) {
            double inc = sigma * s.rng.normal();
            if (drift) inc += s.params.drift[k] * dt;
            s.pos[i * d + k] = s.pos_prev[i * d + k] + inc;
            move2 += inc * inc;
        }
        max_move2 = std::max(max_move2, move2);
    }
    s.max_step_move = std::sqrt(max_move2);
    s.t += dt;
    s.last_dt = dt;
    ++s.step_index;
}

void apply_removals(SimState& s, double t_step_end) {
    if (!(s.params.alpha > 0.0) || s.infected.empty()) return;
    std::vector<std::pair<double, std::int32_t>> due;
    for (std::int32_t id : s.infected) {
        if (s.t_remove[id] <= t_step_end) due.emplace_back(s.t_remove[id], id);
    }
    if (due.empty()) return;
    std::sort(due.begin(), due.end());
    const int d = s.params.d;
    for (const auto& [clock, id] : due) {
        s.state[id] = SirState::R;
        Event e;
        e.time = clock;
        e.kind = EventKind::Remove;
        e.particle_id = id;
        e.position.assign(&s.pos[id * d], &s.pos[id * d] + d);
        s.events.push_back(std::move(e));
        s.last_removal_time = clock;
    }
    s.infected.erase(std::remove_if(s.infected.begin(), s.infected.end(),
                                    [&](std::int32_t id) { return s.state[id] != SirState::I; }),
                     s.infected.end());
}

std::vector<Contact> detect_contacts(const SimState& before, const SimState& after,
                                     DetectorMode mode) {
    if (before.n() != after.n() || before.params.d != after.params.d ||
        before.x0 != after.x0) {
        throw InternalConsistency("detect_contacts: mismatched particle sets");
    }
    if (!(after.t > before.t)) {
        throw InternalConsistency("detect_contacts: states must be consecutive steps");
    }
    const double dt = after.t - before.t;
    const int d = after.params.d;
    double max_move = 0.0;
    for (std::int64_t i = 0; i < after.n(); ++i) {
        max_move = std::max(max_move, dist2(&before.pos[i * d], &after.pos[i * d], d));
    }
    max_move = std::sqrt(max_move);
    // Eligible: removal clock past the step start (still infected, or removed
    // inside the step).
    std::vector<std::int32_t> eligible;
    for (std::int64_t id = 0; id < after.n(); ++id) {
        if (after.state[id] == SirState::I) {
            eligible.push_back(static_cast<std::int32_t>(id));
        } else if (after.state[id] == SirState::R && after.t_remove[id] > before.t) {
            eligible.push_back(static_cast<std::int32_t>(id));
        }
    }
    return detect_core(after, before.pos, dt, max_move, mode, eligible);
}

void infect_closure(SimState& s, std::span<const std::int64_t> seeds, double t) {
    const int d = s.params.d;
    const double r = s.params.radius;
    for (std::int64_t seed : seeds) {
        if (seed < 0 || seed >= s.n()) throw InvalidParameter("infect_closure: unknown seed id");
        if (s.state[seed] == SirState::R) {
            throw InvalidParameter("infect_closure: seed must be infected or newly contacted");
        }
    }
    if (s.truncated) return;

    reset_marks(s);
    std::vector<std::int64_t> newly;
    auto join = [&](std::int64_t id) {
        if (s.scratch_mark[id] != s.scratch_epoch) {
            s.scratch_mark[id] = s.scratch_epoch;
            newly.push_back(id);
        }
    };

    if (!s.params.instant_infection()) {
        for (std::int64_t seed : seeds) {
            if (s.state[seed] == SirState::S) join(seed);
        }
    } else if (d == 1) {
        repair_order(s);
        for (std::int64_t seed : seeds) {
            if (s.state[seed] == SirState::S) join(seed);
            const std::int64_t rank = order_rank(s, seed);
            double frontier = s.pos[seed];
            for (std::int64_t k = rank + 1; k < s.n(); ++k) {
                const std::int32_t e = s.order[k];
                if (s.pos[e] > frontier + r) break;
                if (s.state[e] == SirState::S) {
                    frontier = s.pos[e];
                    join(e);
                }
            }
            frontier = s.pos[seed];
            for (std::int64_t k = rank - 1; k >= 0; --k) {
                const std::int32_t e = s.order[k];
                if (s.pos[e] < frontier - r) break;
                if (s.state[e] == SirState::S) {
                    frontier = s.pos[e];
                    join(e);
                }
            }
        }
    } else {
        std::vector<std::int64_t> sus_ids;
        std::vector<double> sus_pos;
        for (std::int64_t i = 0; i < s.n(); ++i) {
            if (s.state[i] != SirState::S) continue;
            sus_ids.push_back(i);
            sus_pos.insert(sus_pos.end(), &s.pos[i * d], &s.pos[i * d] + d);
        }
        NeighborIndex index(std::move(sus_ids), std::move(sus_pos), d, r);
        std::deque<std::int64_t> frontier;
        std::vector<std::int64_t> found;
        for (std::int64_t seed : seeds) {
            if (s.state[seed] == SirState::S && s.scratch_mark[seed] != s.scratch_epoch) {
                join(seed);
                frontier.push_back(seed);
            } else if (s.state[seed] == SirState::I) {
                frontier.push_back(seed);
            }
        }
        while (!frontier.empty()) {
            const std::int64_t cur = frontier.front();
            frontier.pop_front();
            index.query_into(&s.pos[cur * d], found);
            for (std::int64_t nb : found) {
                if (s.scratch_mark[nb] != s.scratch_epoch) {
                    join(nb);
                    frontier.push_back(nb);
                }
            }
        }
    }

    std::sort(newly.begin(), newly.end());
    bool cut = false;
    if (s.truncation) {
        const std::int64_t remaining = *s.truncation - s.infect_events;
        if (static_cast<std::int64_t>(newly.size()) > remaining) {
            newly.resize(remaining);
            cut = true;
        }
    }
    for (std::int64_t id : newly) {
        s.state[id] = SirState::I;
        s.t_infect[id] = t;
        s.t_remove[id] = removal_clock(s, id, t);
        s.infected.push_back(static_cast<std::int32_t>(id));
        append_infect_event(s, id, t);
    }
    if (!newly.empty()) std::sort(s.infected.begin(), s.infected.end());
    if (cut || (s.truncation && s.infect_events >= *s.truncation)) mark_truncated(s, t);
}

void step(SimState& s, double dt, DetectorMode mode) {
    if (!(dt > 0.0)) throw InvalidParameter("step: dt must be > 0");
    advance_positions(s, dt);
    apply_removals(s, s.t);
    if (s.truncated || s.infected.empty()) return;
    const std::vector<Contact> contacts =
        detect_core(s, s.pos_prev, s.last_dt, s.max_step_move, mode, s.infected);
    if (contacts.empty()) return;
    std::vector<std::int64_t> seeds;
    seeds.reserve(contacts.size());
    for (const Contact& c : contacts) seeds.push_back(c.susceptible_id);
    infect_closure(s, seeds, s.t);
}

RunOutput run(const ModelParams& params, const Box& window, RngStream rng, const RunSpec& spec) {
    params.validate();
    if (!(spec.t_max > 0.0) || !std::isfinite(spec.t_max)) {
        throw InvalidParameter("run: t_max must be positive and finite");
    }
    const double dt = spec.dt > 0.0 ? spec.dt : params.default_dt();
    const int d = params.d;

    SimState st = init_configuration(params, window, rng, spec.truncation, spec.particle_cap);
    const std::int64_t n = st.n();

    std::vector<double> min_dist2;
    if (spec.entry_range) {
        min_dist2.resize(n);
        for (std::int64_t i = 0; i < n; ++i) min_dist2[i] = norm2(&st.pos[i * d], d);
    }

    const bool want_front = spec.track_front || !spec.front_grid.empty();
    auto front_radius_now = [&]() {
        double best = 0.0;
        for (std::int32_t id : st.infected) {
            best = std::max(best, d == 1 ? std::fabs(st.pos[id]) : std::sqrt(norm2(&st.pos[id * d], d)));
        }
        return best;
    };
    double sup_front = want_front ? front_radius_now() : 0.0;

    RunOutput out;
    std::size_t front_cursor = 0, snap_cursor = 0;
    auto record_grids = [&]() {
        while (front_cursor < spec.front_grid.size() &&
               st.t >= spec.front_grid[front_cursor] - 1e-9) {
            out.front_radius_at.push_back(front_radius_now());
            out.sup_front_at.push_back(sup_front);
            ++front_cursor;
        }
        while (snap_cursor < spec.snapshot_grid.size() &&
               st.t >= spec.snapshot_grid[snap_cursor] - 1e-9) {
            out.snapshots.push_back(st.snapshot());
            ++snap_cursor;
        }
    };
    record_grids();

    const std::int64_t n_steps = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::ceil(spec.t_max / dt - 1e-12)));
    bool extinct = false;
    for (std::int64_t k = 1; k <= n_steps; ++k) {
        const double target = k == n_steps ? spec.t_max : std::min(k * dt, spec.t_max);
        const double dtk = target - st.t;
        if (!(dtk > 0.0)) continue;
        step(st, dtk, spec.mode);
        if (spec.entry_range) {
            for (std::int64_t i = 0; i < n; ++i) {
                min_dist2[i] = std::min(min_dist2[i], norm2(&st.pos[i * d], d));
            }
        }
        if (want_front) sup_front = std::max(sup_front, front_radius_now());
        record_grids();
        if (params.alpha > 0.0 && st.infected.empty()) {
            extinct = true;
            break;
        }
    }

    RunResult res;
    res.seed = st.rng.stream_id();
    res.censored = !extinct;
    res.extinction_time = extinct ? st.last_removal_time : spec.t_max;
    res.t_horizon = spec.t_max;
    res.total_infections = st.ever_infected;
    res.integral_I = integral_infected(st.events, spec.t_max);
    if (spec.entry_range) {
        const double r2 = *spec.entry_range * *spec.entry_range;
        std::int64_t count = 0;
        for (double m2 : min_dist2) {
            if (m2 <= r2) ++count;
        }
        res.n_entry = count;
    }
    res.max_inf_radius = st.max_inf_radius;
    res.truncated = st.truncated;
    res.window_overflow = st.window_overflow;
    for (double thr : spec.occupation_thresholds) {
        res.occupation_below.emplace_back(thr, occupation_time(st.events, thr, spec.t_max));
    }

    out.result = res;
    out.events = std::move(st.events);
    out.sup_front_final = sup_front;
    return out;
}

}  // namespace snails
