#include "infoval/pbvi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace infoval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Flattened view of an alpha-set plus per-(action, observation) emission
// columns; shared by quality evaluation and the backup kernel so both
// compute identical floating-point values.
struct SetView {
    const PomdpModel* model;
    CostTable costs;
    ObsMode mode;
    int n_states;
    int n_obs;
    numvec alphas;      // [j][x]
    numvec alphas_soa;  // [x][j], for the vectorized envelope scan
    std::vector<int> state_min_j;  // argmin_j alpha_j(x), per state
    int n_vectors;
    numvec emission;    // [(a * n_obs + obs)][x]

    SetView(const PomdpModel& m, const CostTable& c, const AlphaSet& set,
            ObsMode md)
        : model(&m), costs(c), mode(md), n_states(m.n_states),
          n_obs(m.n_obs(md)), n_vectors(set.size()) {
        alphas.resize(static_cast<size_t>(n_vectors) * n_states);
        alphas_soa.resize(alphas.size());
        state_min_j.assign(static_cast<size_t>(n_states), 0);
        for (int j = 0; j < n_vectors; ++j)
            for (int x = 0; x < n_states; ++x) {
                const double v =
                    set.vectors[static_cast<size_t>(j)].values[
                        static_cast<size_t>(x)];
                alphas[static_cast<size_t>(j) * n_states + x] = v;
                alphas_soa[static_cast<size_t>(x) * n_vectors + j] = v;
            }
        for (int x = 0; x < n_states; ++x) {
            const double* col = &alphas_soa[static_cast<size_t>(x) *
                                            n_vectors];
            int best = 0;
            for (int j = 1; j < n_vectors; ++j)
                if (col[j] < col[best]) best = j;
            state_min_j[static_cast<size_t>(x)] = best;
        }
        emission.resize(static_cast<size_t>(m.n_actions) * n_obs * n_states);
        for (int a = 0; a < m.n_actions; ++a)
            for (int o = 0; o < n_obs; ++o)
                for (int x = 0; x < n_states; ++x)
                    emission[(static_cast<size_t>(a) * n_obs + o) * n_states +
                             x] = m.emission(x, a, o, md);
    }

    const double* emission_col(int a, int o) const {
        return &emission[(static_cast<size_t>(a) * n_obs + o) * n_states];
    }
    const double* alpha(int j) const {
        return &alphas[static_cast<size_t>(j) * n_states];
    }
};

// Per-thread scratch for the backup kernel.
struct Workspace {
    numvec pred;
    numvec weighted;  // e_obs ⊙ prediction
    numvec vals;      // per-vector dot products
    numvec macc;
    std::vector<int> eta;
    std::vector<int> trial;
};

// Quality of action a at belief b; optionally records the dominating
// vector per observation (-1 for zero-likelihood observations). The
// per-observation term E(t, obs) * envelope(posterior) is evaluated in its
// algebraically equal form min_j alpha_j . (e_obs ⊙ t), which avoids the
// Bayes normalization.
double action_value(const SetView& view, const double* b, int a,
                    std::vector<int>* eta_out, Workspace& ws) {
    const PomdpModel& m = *view.model;
    const int nx = view.n_states;
    const int n_j = view.n_vectors;

    double q = 0.0;
    for (int x = 0; x < nx; ++x) q += view.costs(x, a) * b[x];

    ws.pred.assign(static_cast<size_t>(nx), 0.0);
    ws.weighted.resize(static_cast<size_t>(nx));
    ws.vals.resize(static_cast<size_t>(n_j));
    double* pred = ws.pred.data();
    double* weighted = ws.weighted.data();
    double* vals = ws.vals.data();
    for (int x = 0; x < nx; ++x) {
        const double bx = b[x];
        if (bx == 0.0) continue;
        for (int xn = 0; xn < nx; ++xn)
            pred[xn] += m.trans(x, a, xn) * bx;
    }

    double disc = 0.0;
    for (int o = 0; o < view.n_obs; ++o) {
        const double* e = view.emission_col(a, o);
        double lik = 0.0;
        int support = -1;
        int support_size = 0;
        for (int x = 0; x < nx; ++x) {
            const double w = e[x] * pred[x];
            weighted[x] = w;
            lik += w;
            if (w != 0.0) {
                support = x;
                ++support_size;
            }
        }
        if (lik <= 0.0) {
            if (eta_out) (*eta_out)[static_cast<size_t>(o)] = -1;
            continue;
        }
        int best_j;
        double best_v;
        if (support_size == 1) {
            // point-mass posterior: the dominating vector only depends on
            // the supported state
            best_j = view.state_min_j[static_cast<size_t>(support)];
            best_v = view.alphas_soa[static_cast<size_t>(support) * n_j +
                                     best_j] *
                     weighted[support];
        } else {
            std::fill(vals, vals + n_j, 0.0);
            for (int x = 0; x < nx; ++x) {
                const double w = weighted[x];
                if (w == 0.0) continue;
                const double* col = &view.alphas_soa[static_cast<size_t>(x) *
                                                     n_j];
                for (int j = 0; j < n_j; ++j) vals[j] += col[j] * w;
            }
            best_j = 0;
            best_v = vals[0];
            for (int j = 1; j < n_j; ++j)
                if (vals[j] < best_v) {
                    best_v = vals[j];
                    best_j = j;
                }
        }
        disc += best_v;
        if (eta_out) (*eta_out)[static_cast<size_t>(o)] = best_j;
    }
    return q + m.discount * disc;
}

struct Candidate {
    numvec alpha;
    int action = 0;
};

// Eq.-style alpha-vector update: pick the action, map each observation to
// its dominating vector in the previous set, and assemble
//   alpha' = c_a + gamma * T_a * sum_obs Diag[e_obs] alpha_eta(obs)
// with zero-likelihood observations skipped.
Candidate backup_at(const SetView& view, const Belief& belief,
                    const BeliefPolicyFn* imposed, Workspace& ws) {
    const PomdpModel& m = *view.model;
    const int nx = view.n_states;
    const double* b = belief.probs().data();

    int best_a = -1;
    ws.eta.assign(static_cast<size_t>(view.n_obs), -1);
    ws.trial.assign(static_cast<size_t>(view.n_obs), -1);
    if (imposed) {
        best_a = (*imposed)(belief);
        if (best_a < 0 || best_a >= m.n_actions)
            throw invariant_error("imposed policy returned an invalid action");
        action_value(view, b, best_a, &ws.eta, ws);
    } else {
        double best_q = kInf;
        for (int a = 0; a < m.n_actions; ++a) {
            const double q = action_value(view, b, a, &ws.trial, ws);
            if (q < best_q) {
                best_q = q;
                best_a = a;
                std::swap(ws.eta, ws.trial);
            }
        }
    }

    // sum over realizable observations of e_obs ⊙ alpha_eta(obs)
    ws.macc.assign(static_cast<size_t>(nx), 0.0);
    for (int o = 0; o < view.n_obs; ++o) {
        const int j = ws.eta[static_cast<size_t>(o)];
        if (j < 0) continue;
        const double* e = view.emission_col(best_a, o);
        const double* al = view.alpha(j);
        for (int x = 0; x < nx; ++x)
            ws.macc[static_cast<size_t>(x)] += e[x] * al[x];
    }

    Candidate cand;
    cand.action = best_a;
    cand.alpha.resize(static_cast<size_t>(nx));
    for (int x = 0; x < nx; ++x) {
        double acc = 0.0;
        for (int xn = 0; xn < nx; ++xn)
            acc += m.trans(x, best_a, xn) * ws.macc[static_cast<size_t>(xn)];
        cand.alpha[static_cast<size_t>(x)] =
            view.costs(x, best_a) + m.discount * acc;
    }
    return cand;
}

double sq_distance(const numvec& a, const numvec& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

}  // namespace

BeliefGrid build_belief_grid(int n_segment, double min_pdam) {
    if (n_segment < 2)
        throw invariant_error("belief grid needs at least 2 segment points");
    if (!(min_pdam > 0.0) || !(min_pdam < 1.0))
        throw invariant_error("min_pdam must lie strictly in (0, 1)");
    BeliefGrid grid;
    grid.n_segment = n_segment;
    const double lo = std::log10(min_pdam);
    for (int i = 0; i < n_segment; ++i) {
        const double q =
            std::pow(10.0, lo + (0.0 - lo) * i / (n_segment - 1));
        grid.beliefs.push_back(Belief::trusted({1.0 - q, q, 0.0}));
        grid.pdam.push_back(q);
    }
    grid.beliefs.push_back(Belief::trusted({0.0, 0.0, 1.0}));
    grid.pdam.push_back(std::numeric_limits<double>::quiet_NaN());
    return grid;
}

BeliefGrid build_belief_grid(std::vector<Belief> beliefs) {
    if (beliefs.empty()) throw invariant_error("belief grid is empty");
    for (size_t i = 0; i < beliefs.size(); ++i)
        for (size_t j = i + 1; j < beliefs.size(); ++j) {
            double d = 0.0;
            for (int x = 0; x < beliefs[i].size(); ++x)
                d = std::max(d, std::abs(beliefs[i][static_cast<int>(x)] -
                                         beliefs[j][static_cast<int>(x)]));
            if (d <= 1e-12) {
                std::ostringstream os;
                os << "duplicate grid beliefs at positions " << i + 1
                   << " and " << j + 1;
                throw invariant_error(os.str());
            }
        }
    BeliefGrid grid;
    grid.beliefs = std::move(beliefs);
    grid.pdam.assign(grid.beliefs.size(),
                     std::numeric_limits<double>::quiet_NaN());
    grid.n_segment = 0;
    return grid;
}

AlphaSet zero_alpha_set(int n_states, ObsMode mode) {
    AlphaSet set;
    set.mode = mode;
    set.vectors.push_back(
        {numvec(static_cast<size_t>(n_states), 0.0), 0, 0, -1});
    return set;
}

int dominant_index(const AlphaSet& set, const Belief& b) {
    if (set.empty()) throw invariant_error("dominant_index on an empty set");
    int best = 0;
    double best_v = kInf;
    for (int j = 0; j < set.size(); ++j) {
        const auto& al = set.vectors[static_cast<size_t>(j)].values;
        double v = 0.0;
        for (int x = 0; x < b.size(); ++x)
            v += al[static_cast<size_t>(x)] * b[x];
        if (v < best_v) {
            best_v = v;
            best = j;
        }
    }
    return best;
}

int dominant_index_for_action(const AlphaSet& set, const Belief& b,
                              int action) {
    int best = -1;
    double best_v = kInf;
    for (int j = 0; j < set.size(); ++j) {
        if (set.vectors[static_cast<size_t>(j)].action != action) continue;
        const auto& al = set.vectors[static_cast<size_t>(j)].values;
        double v = 0.0;
        for (int x = 0; x < b.size(); ++x)
            v += al[static_cast<size_t>(x)] * b[x];
        if (v < best_v) {
            best_v = v;
            best = j;
        }
    }
    return best;
}

double envelope_value(const AlphaSet& set, const Belief& b) {
    const int j = dominant_index(set, b);
    const auto& al = set.vectors[static_cast<size_t>(j)].values;
    double v = 0.0;
    for (int x = 0; x < b.size(); ++x)
        v += al[static_cast<size_t>(x)] * b[x];
    return v;
}

double quality(const PomdpModel& model, const CostTable& costs,
               const AlphaSet& set, ObsMode mode, const Belief& b, int a) {
    if (set.empty()) throw invariant_error("quality on an empty set");
    SetView view(model, costs, set, mode);
    Workspace ws;
    return action_value(view, b.probs().data(), a, nullptr, ws);
}

BeliefPolicyFn alpha_policy(AlphaSet set) {
    return [set = std::move(set)](const Belief& b) {
        return set.vectors[static_cast<size_t>(dominant_index(set, b))]
            .action;
    };
}

BeliefPolicyFn damage_threshold_policy(double chi, int do_nothing_action,
                                       int repair_action) {
    return [=](const Belief& b) {
        if (b.size() != 3)
            throw invariant_error(
                "damage_threshold_policy expects a 3-state belief");
        const double fail = b[2];
        if (fail >= 0.5) return repair_action;
        const double pdam = b[1] / (1.0 - fail);
        return pdam > chi ? repair_action : do_nothing_action;
    };
}

AlphaSet pbvi_backup(const PomdpModel& model, const CostTable& costs,
                     const AlphaSet& set, const BeliefGrid& grid, ObsMode mode,
                     double prune_tol, Exec exec,
                     const BeliefPolicyFn* imposed_policy) {
    if (set.empty()) throw invariant_error("pbvi_backup on an empty set");
    const SetView view(model, costs, set, mode);
    const int n = grid.size();
    std::vector<Candidate> candidates(static_cast<size_t>(n));

    if (exec == Exec::parallel) {
#pragma omp parallel
        {
            Workspace ws;
#pragma omp for schedule(static)
            for (int i = 0; i < n; ++i)
                candidates[static_cast<size_t>(i)] =
                    backup_at(view, grid.beliefs[static_cast<size_t>(i)],
                              imposed_policy, ws);
        }
    } else {
        Workspace ws;
        for (int i = 0; i < n; ++i)
            candidates[static_cast<size_t>(i)] =
                backup_at(view, grid.beliefs[static_cast<size_t>(i)],
                          imposed_policy, ws);
    }

    // Sequential pruning pass in grid order keeps the result deterministic:
    // a candidate enters the new set only if its minimum Euclidean distance
    // to the vectors already accepted in this backup exceeds 3 * prune_tol.
    AlphaSet next;
    next.mode = mode;
    const double thresh_sq = 9.0 * prune_tol * prune_tol;
    for (int i = 0; i < n; ++i) {
        const auto& cand = candidates[static_cast<size_t>(i)];
        bool keep = true;
        for (const auto& kept : next.vectors) {
            if (sq_distance(cand.alpha, kept.values) <= thresh_sq) {
                keep = false;
                break;
            }
        }
        if (keep)
            next.vectors.push_back(
                {cand.alpha, cand.action, next.size(), i});
    }
    return next;
}

namespace {

SolveResult solve_impl(const PomdpModel& model, const CostTable& costs,
                       const BeliefGrid& grid, ObsMode mode,
                       const BeliefPolicyFn* imposed, int n_iterations,
                       double prune_tol, Exec exec) {
    if (n_iterations < 1)
        throw invariant_error("solver needs at least one iteration");
    AlphaSet set = zero_alpha_set(model.n_states, mode);
    const int n = grid.size();
    numvec values(static_cast<size_t>(n), 0.0);
    double residual = 0.0;
    for (int it = 0; it < n_iterations; ++it) {
        set = pbvi_backup(model, costs, set, grid, mode, prune_tol, exec,
                          imposed);
        residual = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v =
                envelope_value(set, grid.beliefs[static_cast<size_t>(i)]);
            residual = std::max(
                residual, std::abs(v - values[static_cast<size_t>(i)]));
            values[static_cast<size_t>(i)] = v;
        }
    }

    SolveResult result;
    result.policy.resize(static_cast<size_t>(n));
    if (imposed) {
        for (int i = 0; i < n; ++i)
            result.policy[static_cast<size_t>(i)] =
                (*imposed)(grid.beliefs[static_cast<size_t>(i)]);
    } else {
        const SetView view(model, costs, set, mode);
        Workspace ws;
        for (int i = 0; i < n; ++i) {
            const double* b =
                grid.beliefs[static_cast<size_t>(i)].probs().data();
            int best_a = 0;
            double best_q = kInf;
            for (int a = 0; a < model.n_actions; ++a) {
                const double q = action_value(view, b, a, nullptr, ws);
                if (q < best_q) {
                    best_q = q;
                    best_a = a;
                }
            }
            result.policy[static_cast<size_t>(i)] = best_a;
        }
    }
    result.set = std::move(set);
    result.grid_values = std::move(values);
    result.last_residual = residual;
    return result;
}

}  // namespace

SolveResult solve_optimal(const PomdpModel& model, const CostTable& costs,
                          const BeliefGrid& grid, ObsMode mode,
                          int n_iterations, double prune_tol, Exec exec) {
    return solve_impl(model, costs, grid, mode, nullptr, n_iterations,
                      prune_tol, exec);
}

SolveResult solve_restricted(const PomdpModel& model, const CostTable& costs,
                             const BeliefGrid& grid, ObsMode mode,
                             const BeliefPolicyFn& policy, int n_iterations,
                             double prune_tol, Exec exec) {
    return solve_impl(model, costs, grid, mode, &policy, n_iterations,
                      prune_tol, exec);
}

ThresholdSummary extract_threshold(const BeliefGrid& grid,
                                   const std::vector<int>& policy,
                                   int repair_action) {
    ThresholdSummary out;
    for (int i = 0; i < grid.n_segment; ++i) {
        if (policy[static_cast<size_t>(i)] == repair_action) {
            out.first_repair_index = i;
            out.chi = grid.pdam[static_cast<size_t>(i)];
            break;
        }
    }
    if (out.first_repair_index >= 0) {
        for (int i = out.first_repair_index; i < grid.n_segment; ++i)
            if (policy[static_cast<size_t>(i)] != repair_action) {
                out.monotone = false;
                break;
            }
    }
    return out;
}

}  // namespace infoval
