#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace snails {

enum class EventKind : std::uint8_t { Infect, Remove, Truncate };

const char* to_string(EventKind kind);

// One record of the append-only run log. Times are exact: removal events carry
// the exponential clock value, infection events the step-end instant.
// Truncate records mark the step at which the infection-event cap bit; they
// carry particle_id -1 and a zero position.
struct Event {
    double time = 0.0;
    EventKind kind = EventKind::Infect;
    std::int64_t particle_id = 0;
    std::vector<double> position;  // d coordinates
};

using EventLog = std::vector<Event>;

// CSV with header "time,kind,particle_id,x0[,x1,...]", reals at 17
// significant digits.
std::string event_log_to_csv(const EventLog& log, int d);
EventLog event_log_from_csv(const std::string& csv, int* d_out = nullptr);

}  // namespace snails
