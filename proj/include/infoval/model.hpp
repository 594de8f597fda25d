#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "infoval/errors.hpp"

namespace infoval {

using numvec = std::vector<double>;

/// Observation regime: background information only (y), or background plus
/// additional information as a joint observation w = {y, z}.
enum class ObsMode { background_only, joint };

// Tolerances shared by model validation and belief checks.
inline constexpr double kStochasticTol = 1e-9;
inline constexpr double kNegativeTol = -1e-12;

/// Probability distribution over hidden states. Entries are validated on
/// construction; use Belief::trusted for values produced by operators that
/// preserve validity by construction.
class Belief {
  public:
    explicit Belief(numvec probs);

    static Belief trusted(numvec probs) {
        Belief b;
        b.p_ = std::move(probs);
        return b;
    }

    int size() const { return static_cast<int>(p_.size()); }
    double operator[](int i) const { return p_[static_cast<size_t>(i)]; }
    const numvec& probs() const { return p_; }

  private:
    Belief() = default;
    numvec p_;
};

/// Validates non-negativity and unit sum; returns a human-readable message
/// per violation (empty when valid).
std::vector<std::string> belief_violations(const numvec& probs);

/// Joint observation w = {y, z}. Indices are 0-based internally; the
/// external encoding (files, CLI) is 1-based with w = (y-1)*n_z + z.
struct JointObservation {
    int y;
    int z;
};

/// Discrete-state POMDP instance: transition, emission and cost tables plus
/// the one-step discount factor. Tables are stored flat in row-major order
/// of the index lists given below. Immutable after construction in all
/// solver paths, hence safely shared across threads.
struct PomdpModel {
    int n_states = 0;
    int n_actions = 0;
    int n_obs_background = 0;
    int n_obs_additional = 0;

    numvec transition;           // [x][a][x']
    numvec emission_background;  // [x][a][y]
    numvec emission_additional;  // [x][z]
    numvec cost_agent;           // [x][a]
    numvec cost_society;         // [x][a]
    double discount = 0.0;

    int n_obs_joint() const { return n_obs_background * n_obs_additional; }
    int n_obs(ObsMode mode) const {
        return mode == ObsMode::background_only ? n_obs_background
                                                : n_obs_joint();
    }

    double trans(int x, int a, int xn) const {
        return transition[(static_cast<size_t>(x) * n_actions + a) * n_states +
                          xn];
    }
    double emit_y(int x, int a, int y) const {
        return emission_background[(static_cast<size_t>(x) * n_actions + a) *
                                       n_obs_background +
                                   y];
    }
    double emit_z(int x, int z) const {
        return emission_additional[static_cast<size_t>(x) * n_obs_additional +
                                   z];
    }

    int encode_joint(int y, int z) const { return y * n_obs_additional + z; }
    JointObservation decode_joint(int w) const {
        return {w / n_obs_additional, w % n_obs_additional};
    }

    /// Emission probability of observation `obs` from state x after action
    /// a, in the requested mode (E_Y or E_W).
    double emission(int x, int a, int obs, ObsMode mode) const;
};

/// Cost table view: 2-index table costs(x, a). Does not own the data.
struct CostTable {
    const double* data = nullptr;
    int n_states = 0;
    int n_actions = 0;

    double operator()(int x, int a) const {
        return data[static_cast<size_t>(x) * n_actions + a];
    }
    double max_cost() const;
};

CostTable agent_costs(const PomdpModel& model);
CostTable society_costs(const PomdpModel& model);

/// Every violated model invariant, with 1-based table coordinates. Empty
/// means the model is valid.
std::vector<std::string> model_violations(const PomdpModel& model);

/// Throws invariant_error listing all violations.
void validate_model(const PomdpModel& model);

// --- Elementary belief-space operators -----------------------------------

/// E_W(x, a, w) = E_Y(x, a, y) * E_Z(x, z) for w = {y, z}.
double joint_emission(const PomdpModel& model, int x, int a, int w);

/// Probability of observing z from belief b (mixture of emission columns).
double likelihood_additional(const PomdpModel& model, const Belief& b, int z);

/// Bayes update of b by additional observation z. Throws
/// impossible_observation when the likelihood is zero.
Belief bayes_update_additional(const PomdpModel& model, const Belief& b,
                               int z);

/// One-step-ahead prediction: entry i is sum_j T(j, a, i) b(j).
Belief predict(const PomdpModel& model, const Belief& b, int a);

/// Probability of observation `obs` from an already-predicted belief, in
/// the requested mode (the operators E_Y / E_W applied to a belief).
double obs_likelihood(const PomdpModel& model, const Belief& predicted, int a,
                      int obs, ObsMode mode);

/// Combined transition and update operator (Tau_Y or Tau_W): predicts under
/// action a, then conditions on the observation. Throws
/// impossible_observation for zero-likelihood observations.
Belief transition_update(const PomdpModel& model, const Belief& b, int a,
                         int obs, ObsMode mode);

/// Expected immediate cost sum_i costs(i, a) b(i).
double expected_cost(const CostTable& costs, const Belief& b, int a);

}  // namespace infoval
