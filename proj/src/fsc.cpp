#include "infoval/fsc.hpp"

#include <Eigen/LU>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "rng.hpp"

namespace infoval {

namespace {

double sq_distance(const Belief& a, const Belief& b) {
    double d = 0.0;
    for (int x = 0; x < a.size(); ++x) {
        const double diff = a[x] - b[x];
        d += diff * diff;
    }
    return d;
}

}  // namespace

int Controller::eta_at(int h, int obs) const {
    const int next = eta[static_cast<size_t>(h) * n_obs + obs];
    if (next < 0) {
        std::ostringstream os;
        os << "controller updating map is unreachable at inner state "
           << h + 1 << ", observation " << obs + 1;
        throw numeric_error(os.str());
    }
    return next;
}

int Controller::region_of(const Belief& b) const {
    if (grid_method) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int h = 0; h < n_inner(); ++h) {
            const double d = sq_distance(states[static_cast<size_t>(h)]
                                             .rep_belief, b);
            if (d < best_d) {
                best_d = d;
                best = h;
            }
        }
        return best;
    }
    if (imposed) {
        const int a = (*imposed)(b);
        const int j = dominant_index_for_action(regions, b, a);
        if (j >= 0) return j;
    }
    return dominant_index(regions, b);
}

Controller build_controller(const PomdpModel& model, const AlphaSet& set,
                            const std::vector<int>& grid_policy,
                            const BeliefGrid& grid, ObsMode mode,
                            bool grid_method, BeliefPolicyFn imposed) {
    Controller ctrl;
    ctrl.mode = mode;
    ctrl.n_obs = model.n_obs(mode);
    ctrl.grid_method = grid_method;
    if (imposed)
        ctrl.imposed =
            std::make_shared<const BeliefPolicyFn>(std::move(imposed));

    if (grid_method) {
        for (int i = 0; i < grid.size(); ++i)
            ctrl.states.push_back({grid.beliefs[static_cast<size_t>(i)],
                                   grid_policy[static_cast<size_t>(i)]});
    } else {
        if (set.empty())
            throw invariant_error("build_controller on an empty alpha-set");
        for (const auto& vec : set.vectors) {
            if (vec.source_grid_index < 0 ||
                vec.source_grid_index >= grid.size())
                throw invariant_error(
                    "alpha-vector lacks a generating grid belief");
            ctrl.states.push_back(
                {grid.beliefs[static_cast<size_t>(vec.source_grid_index)],
                 vec.action});
        }
        ctrl.regions = set;
    }

    const int n_h = ctrl.n_inner();
    ctrl.eta.assign(static_cast<size_t>(n_h) * ctrl.n_obs, -1);
    for (int h = 0; h < n_h; ++h) {
        const auto& state = ctrl.states[static_cast<size_t>(h)];
        const Belief pred = predict(model, state.rep_belief, state.action);
        for (int obs = 0; obs < ctrl.n_obs; ++obs) {
            const double lik =
                obs_likelihood(model, pred, state.action, obs, mode);
            if (lik <= 0.0) continue;  // unreachable entry stays -1
            numvec post(static_cast<size_t>(model.n_states));
            for (int x = 0; x < model.n_states; ++x)
                post[static_cast<size_t>(x)] =
                    model.emission(x, state.action, obs, mode) * pred[x] /
                    lik;
            ctrl.eta[static_cast<size_t>(h) * ctrl.n_obs + obs] =
                ctrl.region_of(Belief::trusted(std::move(post)));
        }
    }
    return ctrl;
}

JointChain build_joint_chain(const PomdpModel& model, const Controller& ctrl,
                             const CostTable& costs) {
    JointChain chain;
    chain.n_states = model.n_states;
    chain.n_inner = ctrl.n_inner();
    const int n_s = chain.n_joint();
    chain.transition = Eigen::MatrixXd::Zero(n_s, n_s);
    chain.cost.resize(n_s);
    chain.value = Eigen::VectorXd::Zero(n_s);

    for (int h = 0; h < chain.n_inner; ++h) {
        const int a = ctrl.states[static_cast<size_t>(h)].action;
        for (int obs = 0; obs < ctrl.n_obs; ++obs) {
            const int hn = ctrl.eta[static_cast<size_t>(h) * ctrl.n_obs + obs];
            if (hn < 0) continue;
            for (int xn = 0; xn < model.n_states; ++xn) {
                const double e = model.emission(xn, a, obs, ctrl.mode);
                if (e == 0.0) continue;
                for (int x = 0; x < model.n_states; ++x) {
                    const double t = model.trans(x, a, xn);
                    if (t == 0.0) continue;
                    chain.transition(chain.joint_index(x, h),
                                     chain.joint_index(xn, hn)) += t * e;
                }
            }
        }
        for (int x = 0; x < model.n_states; ++x)
            chain.cost(chain.joint_index(x, h)) = costs(x, a);
    }

    for (int s = 0; s < n_s; ++s) {
        const double row_sum = chain.transition.row(s).sum();
        if (std::abs(row_sum - 1.0) > kStochasticTol) {
            std::ostringstream os;
            os << "joint chain row for state (x=" << s % chain.n_states + 1
               << ", h=" << s / chain.n_states + 1 << ") sums to " << row_sum
               << " over realizable observations";
            throw invariant_error(os.str());
        }
    }
    return chain;
}

Eigen::VectorXd evaluate(JointChain& chain, double discount) {
    if (!(discount > 0.0 && discount < 1.0))
        throw invariant_error("evaluate requires 0 < discount < 1");
    const int n_s = chain.n_joint();
    Eigen::MatrixXd system =
        Eigen::MatrixXd::Identity(n_s, n_s) - discount * chain.transition;
    Eigen::VectorXd v = system.partialPivLu().solve(chain.cost);
    const double residual =
        (v - chain.cost - discount * chain.transition * v)
            .lpNorm<Eigen::Infinity>();
    if (residual > 1e-9 * (1.0 + v.lpNorm<Eigen::Infinity>())) {
        std::ostringstream os;
        os << "policy evaluation residual " << residual
           << " exceeds tolerance";
        throw numeric_error(os.str());
    }
    chain.value = v;
    return v;
}

double value_at(const Controller& ctrl, const Eigen::VectorXd& vtilde,
                const Belief& b) {
    const int h = ctrl.region_of(b);
    const int nx = b.size();
    double v = 0.0;
    for (int x = 0; x < nx; ++x) v += vtilde(h * nx + x) * b[x];
    return v;
}

StationaryDistribution stationary_distribution(const JointChain& chain) {
    const int n_s = chain.n_joint();

    // The chains in scope are sparse; square matvec through a sparse copy
    // keeps long power iterations cheap.
    Eigen::SparseMatrix<double> t_transpose(n_s, n_s);
    {
        std::vector<Eigen::Triplet<double>> triplets;
        for (int r = 0; r < n_s; ++r)
            for (int c = 0; c < n_s; ++c) {
                const double v = chain.transition(r, c);
                if (v != 0.0) triplets.emplace_back(c, r, v);
            }
        t_transpose.setFromTriplets(triplets.begin(), triplets.end());
    }

    const auto iterate = [&](Eigen::VectorXd p, int& iters, double& change)
        -> Eigen::VectorXd {
        constexpr int kCap = 1000000;
        Eigen::VectorXd next(n_s);
        for (iters = 0; iters < kCap; ++iters) {
            next.noalias() = t_transpose * p;
            change = (next - p).lpNorm<Eigen::Infinity>();
            p.swap(next);
            if (change < 1e-12) return p;
        }
        std::ostringstream os;
        os << "power iteration did not converge in " << kCap
           << " iterations; last change " << change
           << " (chain may be periodic or reducible)";
        throw numeric_error(os.str());
    };

    StationaryDistribution out;
    int iters = 0;
    double change = 0.0;
    out.joint = iterate(Eigen::VectorXd::Constant(n_s, 1.0 / n_s), iters,
                        change);
    out.iterations = iters;
    out.residual =
        (t_transpose * out.joint - out.joint).lpNorm<Eigen::Infinity>();

    // Ergodicity probe: a second start converging elsewhere reveals
    // reducibility (e.g. the identity chain keeps any start unchanged).
    if (n_s > 1) {
        Eigen::VectorXd skew(n_s);
        for (int i = 0; i < n_s; ++i) skew(i) = i + 1.0;
        skew /= skew.sum();
        int alt_iters = 0;
        double alt_change = 0.0;
        const Eigen::VectorXd alt = iterate(skew, alt_iters, alt_change);
        if (0.5 * (alt - out.joint).lpNorm<1>() > 1e-8) out.ergodic = false;
    }

    out.inner_marginal = Eigen::VectorXd::Zero(chain.n_inner);
    for (int h = 0; h < chain.n_inner; ++h)
        for (int x = 0; x < chain.n_states; ++x)
            out.inner_marginal(h) += out.joint(chain.joint_index(x, h));
    return out;
}

namespace {

// Cumulative rows for inverse-CDF sampling; sampling y and z separately is
// valid because they are independent given the hidden state.
struct SamplingTables {
    int nx, na, ny, nz;
    numvec trans;  // [x][a] cumulative over x'
    numvec emit_y; // [x][a] cumulative over y
    numvec emit_z; // [x] cumulative over z

    explicit SamplingTables(const PomdpModel& m)
        : nx(m.n_states), na(m.n_actions), ny(m.n_obs_background),
          nz(m.n_obs_additional) {
        trans.resize(static_cast<size_t>(nx) * na * nx);
        emit_y.resize(static_cast<size_t>(nx) * na * ny);
        for (int x = 0; x < nx; ++x)
            for (int a = 0; a < na; ++a) {
                double acc = 0.0;
                for (int xn = 0; xn < nx; ++xn) {
                    acc += m.trans(x, a, xn);
                    trans[(static_cast<size_t>(x) * na + a) * nx + xn] = acc;
                }
                acc = 0.0;
                for (int y = 0; y < ny; ++y) {
                    acc += m.emit_y(x, a, y);
                    emit_y[(static_cast<size_t>(x) * na + a) * ny + y] = acc;
                }
            }
        emit_z.resize(static_cast<size_t>(nx) * nz);
        for (int x = 0; x < nx; ++x) {
            double acc = 0.0;
            for (int z = 0; z < nz; ++z) {
                acc += m.emit_z(x, z);
                emit_z[static_cast<size_t>(x) * nz + z] = acc;
            }
        }
    }

    static int pick(const double* cdf, int n, double u) {
        const double* end = cdf + n;
        const double* it = std::upper_bound(cdf, end, u);
        return it == end ? n - 1 : static_cast<int>(it - cdf);
    }

    int next_state(int x, int a, double u) const {
        return pick(&trans[(static_cast<size_t>(x) * na + a) * nx], nx, u);
    }
    int observe_y(int x, int a, double u) const {
        return pick(&emit_y[(static_cast<size_t>(x) * na + a) * ny], ny, u);
    }
    int observe_z(int x, double u) const {
        return pick(&emit_z[static_cast<size_t>(x) * nz], nz, u);
    }
};

}  // namespace

SimulationResult simulate(const PomdpModel& model, const Controller& ctrl,
                          const CostTable& costs, const Belief& initial,
                          int initial_inner, const SimulationOptions& opts) {
    if (opts.n_trajectories < 1 || opts.n_steps < 1)
        throw invariant_error("simulate needs positive steps/trajectories");
    const int h0 =
        initial_inner >= 0 ? initial_inner : ctrl.region_of(initial);
    const int nx = model.n_states;
    const int n_s = nx * ctrl.n_inner();
    const int n_traj = opts.n_trajectories;
    const SamplingTables tables(model);
    const bool joint = ctrl.mode == ObsMode::joint;

    std::vector<double> totals(static_cast<size_t>(n_traj), 0.0);
    std::vector<std::int64_t> counts(static_cast<size_t>(n_s), 0);

    const auto run_one = [&](int traj, std::vector<std::int64_t>& local) {
        detail::Rng rng(opts.seed * 0x2545F4914F6CDD1DULL +
                        static_cast<std::uint64_t>(traj) + 1);
        int x = rng.categorical(initial.probs().data(), nx);
        int h = h0;
        double total = 0.0;
        double disc = 1.0;
        for (int k = 0; k < opts.n_steps; ++k) {
            if (k >= opts.burn_in)
                local[static_cast<size_t>(h * nx + x)] += 1;
            const int a = ctrl.states[static_cast<size_t>(h)].action;
            total += disc * costs(x, a);
            disc *= model.discount;
            const int xn = tables.next_state(x, a, rng.uniform());
            const int y = tables.observe_y(xn, a, rng.uniform());
            const int obs =
                joint ? model.encode_joint(y, tables.observe_z(
                                                  xn, rng.uniform()))
                      : y;
            h = ctrl.eta_at(h, obs);
            x = xn;
        }
        totals[static_cast<size_t>(traj)] = total;
    };

    if (opts.exec == Exec::parallel) {
#pragma omp parallel
        {
            std::vector<std::int64_t> local(static_cast<size_t>(n_s), 0);
#pragma omp for schedule(static)
            for (int traj = 0; traj < n_traj; ++traj) run_one(traj, local);
#pragma omp critical
            for (int s = 0; s < n_s; ++s)
                counts[static_cast<size_t>(s)] +=
                    local[static_cast<size_t>(s)];
        }
    } else {
        for (int traj = 0; traj < n_traj; ++traj) run_one(traj, counts);
    }

    SimulationResult out;
    double mean = 0.0;
    for (double t : totals) mean += t;
    mean /= n_traj;
    double var = 0.0;
    for (double t : totals) var += (t - mean) * (t - mean);
    var = n_traj > 1 ? var / (n_traj - 1) : 0.0;
    out.mean = mean;
    out.std_error = std::sqrt(var / n_traj);

    std::int64_t total_counts = 0;
    for (auto c : counts) total_counts += c;
    out.steps_counted = total_counts;
    out.occupancy = Eigen::VectorXd::Zero(n_s);
    if (total_counts > 0)
        for (int s = 0; s < n_s; ++s)
            out.occupancy(s) = static_cast<double>(
                                   counts[static_cast<size_t>(s)]) /
                               static_cast<double>(total_counts);
    return out;
}

}  // namespace infoval
