#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "infoval/exec.hpp"
#include "infoval/model.hpp"
#include "infoval/pbvi.hpp"

namespace infoval {

struct InnerState {
    Belief rep_belief;
    int action = 0;
};

/// Finite state controller: inner states with representative beliefs, an
/// action per inner state and an observation-driven updating map eta.
/// Region lookup maps an arbitrary belief to an inner state: by dominating
/// alpha-vector in the default construction, by nearest representative
/// belief under the grid method. When the controller realizes an imposed
/// policy, the dominant lookup is restricted to vectors carrying the
/// imposed action so the policy is honored between representative points.
struct Controller {
    std::vector<InnerState> states;
    std::vector<int> eta;  // [h * n_obs + obs]; -1 marks unreachable
    int n_obs = 0;
    ObsMode mode = ObsMode::background_only;
    AlphaSet regions;  // unused under the grid method
    bool grid_method = false;
    std::shared_ptr<const BeliefPolicyFn> imposed;

    int n_inner() const { return static_cast<int>(states.size()); }

    /// Next inner state; throws numeric_error when the entry is unreachable.
    int eta_at(int h, int obs) const;

    /// Inner state whose plan governs belief b.
    int region_of(const Belief& b) const;
};

/// Builds the controller for a solved alpha-set: one inner state per
/// surviving vector (its generating grid belief as representative), or one
/// per grid belief under the grid method. grid_policy supplies the action
/// per grid belief (as returned by the solvers).
Controller build_controller(const PomdpModel& model, const AlphaSet& set,
                            const std::vector<int>& grid_policy,
                            const BeliefGrid& grid, ObsMode mode,
                            bool grid_method = false,
                            BeliefPolicyFn imposed = nullptr);

/// Markov chain over joint states s = {x, h}, with s indexed as
/// h * n_states + x. Rows sum over realizable observations only and must
/// remain stochastic within 1e-9.
struct JointChain {
    int n_states = 0;
    int n_inner = 0;
    Eigen::MatrixXd transition;  // n_S x n_S
    Eigen::VectorXd cost;        // n_S
    Eigen::VectorXd value;       // n_S, filled by evaluate

    int n_joint() const { return n_states * n_inner; }
    int joint_index(int x, int h) const { return h * n_states + x; }
};

/// Transition and cost of the joint (physical, inner) chain under the
/// controller, for an arbitrary cost table (cross-cost evaluation).
JointChain build_joint_chain(const PomdpModel& model, const Controller& ctrl,
                             const CostTable& costs);

/// Solves v = c + gamma T v by dense LU; stores and returns the value
/// vector. The residual must stay below 1e-9 * (1 + |v|_inf).
Eigen::VectorXd evaluate(JointChain& chain, double discount);

/// Piecewise-linear controller value at a belief: the inner-state block of
/// vtilde dotted with b.
double value_at(const Controller& ctrl, const Eigen::VectorXd& vtilde,
                const Belief& b);

struct StationaryDistribution {
    Eigen::VectorXd joint;           // over joint states
    Eigen::VectorXd inner_marginal;  // summed over physical states
    bool ergodic = true;
    int iterations = 0;
    double residual = 0.0;  // |T' p - p|_inf at the returned distribution
};

/// Power iteration from the uniform vector until the successive max-norm
/// change drops below 1e-12 (cap 1e6 iterations).
StationaryDistribution stationary_distribution(const JointChain& chain);

struct SimulationOptions {
    std::uint64_t seed = 1;
    int n_steps = 300;
    int n_trajectories = 1000;
    int burn_in = 0;  // steps excluded from the occupancy census
    Exec exec = Exec::parallel;
};

struct SimulationResult {
    double mean = 0.0;
    double std_error = 0.0;
    Eigen::VectorXd occupancy;  // joint-state visit frequencies
    std::int64_t steps_counted = 0;
};

/// Seeded, reproducible rollouts of (x, h) under the controller. Each
/// trajectory runs on its own deterministic RNG stream, so serial and
/// parallel execution produce identical statistics.
SimulationResult simulate(const PomdpModel& model, const Controller& ctrl,
                          const CostTable& costs, const Belief& initial,
                          int initial_inner, const SimulationOptions& opts);

}  // namespace infoval
