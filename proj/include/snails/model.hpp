#pragma once
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "snails/events.hpp"
#include "snails/observables.hpp"
#include "snails/rng.hpp"

namespace snails {

inline constexpr double kInstantRate = std::numeric_limits<double>::infinity();

// Full parameter set of the spatial SIR dynamics: a Poisson(lambda) field of
// diffusing particles, infection transmitted within `radius` (instantly by
// default, or at a finite pair rate), removal of infected particles at rate
// alpha (0 = no removal).
struct ModelParams {
    double lambda = 1.0;
    double alpha = 1.0;
    int d = 1;
    double radius = 1.0;
    double diffusion = 1.0;
    std::vector<double> drift;                 // empty = no drift
    double infection_rate = kInstantRate;

    bool instant_infection() const { return infection_rate == kInstantRate; }
    bool has_drift() const;
    // Step size giving an RMS per-step displacement of 10% of the radius.
    double default_dt() const { return 0.01 * radius * radius / diffusion; }
    void validate() const;
};

enum class SirState : std::uint8_t { S, I, R };
enum class DetectorMode { Naive, Bridge };

const char* to_string(DetectorMode mode);
DetectorMode detector_mode_from_string(const std::string& name);

// Materialized view of one particle (SoA storage lives in SimState).
struct Particle {
    std::int64_t id = 0;
    std::vector<double> x0;
    std::vector<double> x;
    SirState state = SirState::S;
    std::optional<double> t_infect;
    std::optional<double> t_remove;
};

struct Contact {
    std::int64_t susceptible_id = 0;
    std::int64_t infector_id = 0;
    double time = 0.0;
};

// Whole simulation state at one instant. Particle index == particle id;
// id 0 is the particle planted at the origin.
struct SimState {
    ModelParams params;
    Box window;
    double t = 0.0;
    std::int64_t step_index = 0;
    double last_dt = 0.0;
    RngStream rng;

    std::vector<double> pos;        // current positions, stride d
    std::vector<double> pos_prev;   // positions before the last advance
    std::vector<double> x0;         // initial positions
    std::vector<SirState> state;
    std::vector<double> t_infect;   // NaN = never infected
    std::vector<double> t_remove;   // NaN = no clock, +inf = never (alpha 0)
    std::vector<std::int32_t> infected;  // currently infected ids, ascending

    std::optional<std::int64_t> truncation;  // cap on total infection events
    bool truncated = false;
    std::int64_t infect_events = 0;          // infection events logged so far
    std::int64_t ever_infected = 0;
    double last_removal_time = 0.0;
    double max_step_move = 0.0;              // largest displacement in the last advance
    double max_inf_radius = 0.0;             // max ||position|| over infection events
    bool window_overflow = false;            // an infection landed within radius of a face

    EventLog events;

    // d = 1 cache: ids sorted by current position (repaired incrementally).
    mutable std::vector<std::int32_t> order;
    mutable bool order_valid = false;
    // Detection/closure scratch; contents are meaningless between calls.
    mutable std::vector<std::int64_t> scratch_mark;
    mutable std::vector<std::int64_t> scratch_infector;
    mutable std::int64_t scratch_epoch = 0;

    std::int64_t n() const { return static_cast<std::int64_t>(state.size()); }
    std::int64_t infected_count() const { return static_cast<std::int64_t>(infected.size()); }
    Particle particle(std::int64_t id) const;
    Snapshot snapshot() const;
};

// Poisson(lambda) field on the window plus one infected particle (id 0) at the
// origin, with the instant chain closure applied at t = 0. The window must
// contain the origin with margin >= radius. Throws ResourceLimit when the
// sampled particle count exceeds particle_cap.
SimState init_configuration(const ModelParams& params, const Box& window, RngStream rng,
                            std::optional<std::int64_t> truncation = std::nullopt,
                            std::int64_t particle_cap = 8'000'000);

// Moves every particle by drift*dt plus independent Gaussian increments
// (removed particles keep moving); advances the clock.
void advance_positions(SimState& state, double dt);

// Transitions every infected particle whose removal clock is <= t_step_end to
// removed, appending Remove events ordered by (clock, id). No-op at alpha 0.
void apply_removals(SimState& state, double t_step_end);

// Contacts over the step (before -> after), attributed to the step end.
// Naive: end-of-step distance <= radius. Bridge: additionally flags pairs
// whose straight-through or dipping difference path reached the radius, with
// the crossing probability of a Brownian bridge on the distance-to-radius
// gaps (difference process diffusion = 2*diffusion). Eligible infectors are
// those whose removal clock exceeds the step start; contacts from infectors
// removed inside the step are discarded by `step` before any infection.
std::vector<Contact> detect_contacts(const SimState& before, const SimState& after,
                                     DetectorMode mode);

// Chain infection at time t: every susceptible connected to a seed through a
// chain of susceptibles at pairwise distance <= radius becomes infected, with
// removal clocks sampled per particle. Infect events are appended in
// ascending id order; when the truncation cap bites, the lowest-id members
// are kept, a Truncate record is appended, and transmission stops for good.
// With a finite infection rate there is no chain: only the seeds themselves
// are infected.
void infect_closure(SimState& state, std::span<const std::int64_t> seeds, double t);

// One discrete step: advance -> removals (clocks <= step end) -> contact
// detection -> closure at the step end. Removals inside the step happen
// before step-end infections; ties break by ascending id.
void step(SimState& state, double dt, DetectorMode mode);

struct RunSpec {
    double dt = 0.0;    // <= 0 selects the model default rule
    double t_max = 0.0;
    DetectorMode mode = DetectorMode::Bridge;
    std::optional<std::int64_t> truncation;
    std::int64_t particle_cap = 8'000'000;
    std::optional<double> entry_range;       // track N = trajectories entering this ball
    std::vector<double> occupation_thresholds;
    std::vector<double> snapshot_grid;       // full-state snapshots at these times
    std::vector<double> front_grid;          // per-time front records at these times
    bool track_front = false;
};

struct RunOutput {
    RunResult result;
    EventLog events;
    std::vector<Snapshot> snapshots;
    // Per front_grid time: max ||z|| over currently infected, and the running
    // sup over s <= t of max(-L(s), R(s)) (max norm for d >= 2).
    std::vector<double> front_radius_at;
    std::vector<double> sup_front_at;
    double sup_front_final = 0.0;
};

// Steps until extinction (alpha > 0 and no infected left; extinction time is
// the last removal clock) or until t_max (censored).
RunOutput run(const ModelParams& params, const Box& window, RngStream rng, const RunSpec& spec);

}  // namespace snails
