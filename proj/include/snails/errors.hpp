#pragma once
#include <stdexcept>

namespace snails {

// Bad user-supplied value (nonpositive rate, degenerate box, unknown id, ...).
struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Two pieces of state that must agree do not; indicates a bug, not bad input.
struct InternalConsistency : std::logic_error {
    using std::logic_error::logic_error;
};

// A run exceeded a configured hard cap.
struct ResourceLimit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed config file or event log.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace snails
