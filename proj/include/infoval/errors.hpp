#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace infoval {

// Error taxonomy mirrors the CLI exit codes: parse (2), invariant (3),
// numeric (4).
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct parse_error : error {
    using error::error;
};

struct invariant_error : error {
    using error::error;
};

struct numeric_error : error {
    using error::error;
};

// Raised when a Bayes update is requested for an observation whose
// likelihood under the current belief is zero. Carries the offending
// belief and observation index so callers can report them.
struct impossible_observation : numeric_error {
    impossible_observation(std::vector<double> belief_probs, int observation,
                           const std::string& what_arg)
        : numeric_error(what_arg),
          belief(std::move(belief_probs)),
          obs(observation) {}

    std::vector<double> belief;
    int obs;
};

}  // namespace infoval
