#pragma once

#include <stdexcept>
#include <string>

namespace lgh {

// Invalid configuration or construction input.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Violation of a protocol precondition (bad key, missing record, ...).
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem failure while exporting results.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A model iterate left the admissible region during a diffusion run.
struct DivergedError : std::runtime_error {
    DivergedError(int iteration_, int agent_)
        : std::runtime_error("diffusion diverged at iteration " + std::to_string(iteration_) +
                             " (agent " + std::to_string(agent_) + ")"),
          iteration(iteration_),
          agent(agent_) {}

    int iteration;
    int agent;
};

}  // namespace lgh
