#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "infoval/exec.hpp"
#include "infoval/model.hpp"

namespace infoval {

/// Linear value function over beliefs, together with the action of the
/// conditional plan it represents. `id` equals the vector's position in its
/// AlphaSet; `source_grid_index` is the representative belief that
/// generated it.
struct AlphaVector {
    numvec values;
    int action = 0;
    int id = 0;
    int source_grid_index = -1;
};

/// Ordered set of representative beliefs. For the 3-state deterioration
/// scenario the layout is a log-spaced damage-probability segment plus the
/// failure vertex; `pdam` holds the segment coordinate (NaN for the
/// vertex).
struct BeliefGrid {
    std::vector<Belief> beliefs;
    std::vector<double> pdam;  // same length; NaN where not on the segment
    int n_segment = 0;         // leading beliefs that lie on the segment

    int size() const { return static_cast<int>(beliefs.size()); }
};

/// Log-spaced segment grid [1-q, q, 0] with q from min_pdam to 1, plus the
/// failure vertex [0, 0, 1] as the last entry.
BeliefGrid build_belief_grid(int n_segment, double min_pdam);

/// Caller-supplied beliefs, passed through unchanged (duplicates rejected).
BeliefGrid build_belief_grid(std::vector<Belief> beliefs);

/// Value function as the lower envelope of a set of alpha-vectors.
struct AlphaSet {
    std::vector<AlphaVector> vectors;
    ObsMode mode = ObsMode::background_only;

    int size() const { return static_cast<int>(vectors.size()); }
    bool empty() const { return vectors.empty(); }
};

/// Initial set for value iteration from below: the all-zero vector (a valid
/// lower bound when costs are non-negative).
AlphaSet zero_alpha_set(int n_states, ObsMode mode);

/// Index of the dominating (minimizing) vector at b; ties break to the
/// lowest id.
int dominant_index(const AlphaSet& set, const Belief& b);

/// Dominating vector among those carrying `action`; -1 when none does.
int dominant_index_for_action(const AlphaSet& set, const Belief& b,
                              int action);

/// min_j alpha_j . b
double envelope_value(const AlphaSet& set, const Belief& b);

/// Expected discounted cost of taking `a` now and following the envelope's
/// policy afterwards. Zero-likelihood observations are skipped.
double quality(const PomdpModel& model, const CostTable& costs,
               const AlphaSet& set, ObsMode mode, const Belief& b, int a);

/// Policy as a function of the belief, used to impose an action during
/// restricted backups and region lookups.
using BeliefPolicyFn = std::function<int(const Belief&)>;

/// Policy induced by an alpha-set: the action of the dominating vector.
BeliefPolicyFn alpha_policy(AlphaSet set);

/// 3-state scenario rule: repair when the damage probability
/// b(2)/(1 - b(3)) exceeds chi, or when failure is more likely than not.
BeliefPolicyFn damage_threshold_policy(double chi, int do_nothing_action = 0,
                                       int repair_action = 1);

/// One point-based backup over the grid: per belief pick the best action
/// (or the imposed one), build the observation-to-vector map against the
/// previous set, and assemble the new alpha-vector; candidates are then
/// pruned sequentially in grid order, keeping one only if its Euclidean
/// distance to every vector already kept exceeds 3 * prune_tol.
AlphaSet pbvi_backup(const PomdpModel& model, const CostTable& costs,
                     const AlphaSet& set, const BeliefGrid& grid,
                     ObsMode mode, double prune_tol,
                     Exec exec = Exec::parallel,
                     const BeliefPolicyFn* imposed_policy = nullptr);

struct SolveResult {
    AlphaSet set;
    std::vector<int> policy;  // per grid belief
    numvec grid_values;       // envelope at grid beliefs after the last pass
    double last_residual = 0.0;  // max grid-value change in the final pass
};

/// Value iteration: n_iterations backups from the zero vector, then policy
/// extraction via argmin-a quality (ties to the lowest action index).
SolveResult solve_optimal(const PomdpModel& model, const CostTable& costs,
                          const BeliefGrid& grid, ObsMode mode,
                          int n_iterations, double prune_tol,
                          Exec exec = Exec::parallel);

/// Same iteration with the action imposed by `policy` at every belief;
/// yields the value vectors of the conditional plans that follow it.
SolveResult solve_restricted(const PomdpModel& model, const CostTable& costs,
                             const BeliefGrid& grid, ObsMode mode,
                             const BeliefPolicyFn& policy, int n_iterations,
                             double prune_tol, Exec exec = Exec::parallel);

struct ThresholdSummary {
    double chi = std::numeric_limits<double>::infinity();
    bool monotone = true;
    int first_repair_index = -1;
};

/// Smallest segment damage probability at which the policy repairs; +inf
/// when it never does. Non-monotone policies are flagged, not rejected.
ThresholdSummary extract_threshold(const BeliefGrid& grid,
                                   const std::vector<int>& policy,
                                   int repair_action = 1);

}  // namespace infoval
