#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "infoval/model.hpp"
#include "infoval/scenarios.hpp"

namespace infoval::testing {

// Deterministic generator for property-style sweeps.
struct TestRng {
    std::uint64_t state;

    explicit TestRng(std::uint64_t seed) : state(seed ^ 0xABCDEF1234567890ULL) {
        next();
        next();
    }

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(
                                                  hi - lo + 1));
    }

    numvec stochastic_row(int n) {
        numvec row(static_cast<size_t>(n));
        double sum = 0.0;
        for (auto& v : row) {
            v = -std::log(1.0 - uniform());  // exponential draws
            sum += v;
        }
        for (auto& v : row) v /= sum;
        return row;
    }

    Belief random_belief(int n) { return Belief(stochastic_row(n)); }
};

inline PomdpModel random_model(TestRng& rng) {
    PomdpModel m;
    m.n_states = rng.uniform_int(2, 5);
    m.n_actions = rng.uniform_int(1, 3);
    m.n_obs_background = rng.uniform_int(1, 4);
    m.n_obs_additional = rng.uniform_int(1, 4);
    m.discount = 0.9;
    for (int x = 0; x < m.n_states; ++x)
        for (int a = 0; a < m.n_actions; ++a) {
            const numvec t = rng.stochastic_row(m.n_states);
            m.transition.insert(m.transition.end(), t.begin(), t.end());
            const numvec e = rng.stochastic_row(m.n_obs_background);
            m.emission_background.insert(m.emission_background.end(),
                                         e.begin(), e.end());
        }
    for (int x = 0; x < m.n_states; ++x) {
        const numvec e = rng.stochastic_row(m.n_obs_additional);
        m.emission_additional.insert(m.emission_additional.end(), e.begin(),
                                     e.end());
    }
    for (int x = 0; x < m.n_states; ++x)
        for (int a = 0; a < m.n_actions; ++a) {
            m.cost_agent.push_back(rng.uniform());
            m.cost_society.push_back(rng.uniform());
        }
    validate_model(m);
    return m;
}

inline DeteriorationSpec basic_spec() { return DeteriorationSpec{}; }

// Single absorbing state, one action, trivial observations; unit cost.
inline PomdpModel single_state_model(double cost = 1.0,
                                     double discount = 0.95) {
    PomdpModel m;
    m.n_states = 1;
    m.n_actions = 1;
    m.n_obs_background = 1;
    m.n_obs_additional = 1;
    m.transition = {1.0};
    m.emission_background = {1.0};
    m.emission_additional = {1.0};
    m.cost_agent = {cost};
    m.cost_society = {cost};
    m.discount = discount;
    return m;
}

// Cheap solver settings for structural tests on the deterioration model.
inline SolverParams quick_params() {
    SolverParams p;
    p.n_grid = 101;
    p.n_iterations = 120;
    p.prune_tol = 1e-2;
    return p;
}

}  // namespace infoval::testing
