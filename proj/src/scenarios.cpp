#include "infoval/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rng.hpp"

namespace infoval {

namespace {

double normal_cdf(double x, double mu, double sigma) {
    return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
}

}  // namespace

std::vector<std::string> spec_violations(const DeteriorationSpec& spec) {
    std::vector<std::string> out;
    if (!(spec.p12 > 0.0 && spec.p12 < 1.0))
        out.push_back("p12 must lie in (0, 1)");
    if (!(spec.p23 > 0.0 && spec.p23 < 1.0))
        out.push_back("p23 must lie in (0, 1)");
    if (!(spec.sigma > 0.0)) out.push_back("sigma must be positive");
    if (spec.n_z_bins < 2) out.push_back("n_z_bins must be at least 2");
    if (!(spec.z_half_range > 0.0))
        out.push_back("z_half_range must be positive");
    if (!(spec.discount > 0.0 && spec.discount < 1.0))
        out.push_back("discount must lie in (0, 1)");
    if (spec.repair_cost_agent < 0.0 || spec.repair_cost_society < 0.0)
        out.push_back("repair costs must be non-negative");
    return out;
}

numvec discretize_gaussian(double mu, double sigma, int n_bins,
                           double half_range) {
    const double lo = -0.5 - half_range * sigma;
    const double hi = 0.5 + half_range * sigma;
    const double width = (hi - lo) / n_bins;
    numvec row(static_cast<size_t>(n_bins));
    for (int k = 0; k < n_bins; ++k) {
        const double left = lo + k * width;
        const double right = lo + (k + 1) * width;
        row[static_cast<size_t>(k)] =
            normal_cdf(right, mu, sigma) - normal_cdf(left, mu, sigma);
    }
    // extreme bins absorb the tails
    row.front() += normal_cdf(lo, mu, sigma);
    row.back() += 1.0 - normal_cdf(hi, mu, sigma);
    return row;
}

PomdpModel build_deterioration_model(const DeteriorationSpec& spec) {
    const auto violations = spec_violations(spec);
    if (!violations.empty()) {
        std::string msg = "invalid deterioration spec:";
        for (const auto& v : violations) msg += " " + v + ";";
        throw invariant_error(msg);
    }

    PomdpModel m;
    m.n_states = 3;
    m.n_actions = 2;
    m.n_obs_background = 2;
    m.n_obs_additional = spec.n_z_bins;
    m.discount = spec.discount;

    const int kDoNothing = 0, kRepair = 1;
    m.transition.assign(3 * 2 * 3, 0.0);
    const auto t = [&m](int x, int a, int xn) -> double& {
        return m.transition[(static_cast<size_t>(x) * 2 + a) * 3 + xn];
    };
    t(0, kDoNothing, 0) = 1.0 - spec.p12;
    t(0, kDoNothing, 1) = spec.p12;
    if (spec.printed_middle_row) {
        t(1, kDoNothing, 1) = spec.p23;
        t(1, kDoNothing, 2) = 1.0 - spec.p23;
    } else {
        t(1, kDoNothing, 1) = 1.0 - spec.p23;
        t(1, kDoNothing, 2) = spec.p23;
    }
    t(2, kDoNothing, 2) = 1.0;
    for (int x = 0; x < 3; ++x) {
        t(x, kRepair, 0) = 1.0 - spec.p12;
        t(x, kRepair, 1) = spec.p12;
    }

    // Failure is immediately detectable: states 1 and 2 emit "silence",
    // state 3 emits "failure", for every action.
    m.emission_background.assign(3 * 2 * 2, 0.0);
    const auto ey = [&m](int x, int a, int y) -> double& {
        return m.emission_background[(static_cast<size_t>(x) * 2 + a) * 2 +
                                     y];
    };
    for (int a = 0; a < 2; ++a) {
        ey(0, a, 0) = 1.0;
        ey(1, a, 0) = 1.0;
        ey(2, a, 1) = 1.0;
    }

    const numvec intact =
        discretize_gaussian(-0.5, spec.sigma, spec.n_z_bins,
                            spec.z_half_range);
    const numvec damaged =
        discretize_gaussian(0.5, spec.sigma, spec.n_z_bins,
                            spec.z_half_range);
    m.emission_additional.reserve(3 * static_cast<size_t>(spec.n_z_bins));
    m.emission_additional.insert(m.emission_additional.end(), intact.begin(),
                                 intact.end());
    m.emission_additional.insert(m.emission_additional.end(),
                                 damaged.begin(), damaged.end());
    // The failed state is identified by the background observation, so its
    // indicator row is unobservable in any filtered belief; it copies the
    // damaged-state row.
    m.emission_additional.insert(m.emission_additional.end(),
                                 damaged.begin(), damaged.end());

    m.cost_agent = {0.0, spec.repair_cost_agent,
                    0.0, spec.repair_cost_agent,
                    1.0, 1.0 + spec.repair_cost_agent};
    m.cost_society = {0.0, spec.repair_cost_society,
                      0.0, spec.repair_cost_society,
                      1.0, 1.0 + spec.repair_cost_society};

    validate_model(m);
    return m;
}

RegulationSetting build_regulation(const PomdpModel& model, Setting setting,
                                   const BeliefGrid& grid,
                                   const SolverParams& params,
                                   double imposed_threshold) {
    RegulationSetting reg;
    reg.mode = setting;
    const CostTable society = society_costs(model);
    const bool imposed = std::isfinite(imposed_threshold);

    if (imposed) {
        reg.pi_a = damage_threshold_policy(imposed_threshold);
        reg.solve_y = solve_restricted(model, society, grid,
                                       ObsMode::background_only, reg.pi_a,
                                       params.n_iterations, params.prune_tol,
                                       params.exec);
    } else {
        reg.solve_y = solve_optimal(model, society, grid,
                                    ObsMode::background_only,
                                    params.n_iterations, params.prune_tol,
                                    params.exec);
        reg.pi_a = alpha_policy(reg.solve_y.set);
    }

    if (setting == Setting::flexible) {
        reg.solve_w =
            solve_optimal(model, society, grid, ObsMode::joint,
                          params.n_iterations, params.prune_tol, params.exec);
    } else {
        reg.solve_w = solve_restricted(model, society, grid, ObsMode::joint,
                                       reg.pi_a, params.n_iterations,
                                       params.prune_tol, params.exec);
    }

    reg.chi_y = extract_threshold(grid, reg.solve_y.policy);
    reg.chi_w = extract_threshold(grid, reg.solve_w.policy);
    return reg;
}

VoiCurve build_voi_curve(const ScenarioAnalysis& analysis, Exec exec) {
    const PomdpModel& model = analysis.model;
    const BeliefGrid& grid = analysis.grid;
    const bool fixed = analysis.regulation.mode == Setting::fixed;
    const CostTable agent = agent_costs(model);

    const ValueFn value_y = [&analysis](const Belief& b) {
        return analysis.agent_value_y(b);
    };
    const ValueFn value_w = [&analysis](const Belief& b) {
        return analysis.agent_value_w(b);
    };

    VoiCurve curve;
    curve.rows.resize(static_cast<size_t>(grid.size()));
    const auto fill_row = [&](int i) {
        const Belief& b = grid.beliefs[static_cast<size_t>(i)];
        VoiCurveRow row;
        row.p_dam = grid.pdam[static_cast<size_t>(i)];
        row.v_y = value_y(b);
        row.u_y = pre_posterior(model, value_y, b);
        row.v_w = value_w(b);
        row.u_w = pre_posterior(model, value_w, b);
        row.voi_current_pessimistic = row.v_y - row.u_y;
        row.voi_current_optimistic = row.v_w - row.u_w;
        row.voi_flow = row.v_y - row.u_w;
        if (fixed) {
            // pi_A = pi_B: the policy-change term vanishes identically and
            // the equivalent immediate cost reduces to the optimistic VoI.
            row.delta_v = 0.0;
            row.delta_c = row.voi_current_optimistic;
        } else {
            const double mixed = v_mixed(model, analysis.regulation.pi_a,
                                         agent, value_w, b);
            row.delta_v = mixed - row.v_w;
            row.delta_c = row.voi_current_optimistic + row.delta_v;
        }
        curve.rows[static_cast<size_t>(i)] = row;
    };

    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < grid.size(); ++i) fill_row(i);
    } else {
        for (int i = 0; i < grid.size(); ++i) fill_row(i);
    }
    return curve;
}

ScenarioAnalysis analyze_scenario(const DeteriorationSpec& spec,
                                  Setting setting, const SolverParams& params,
                                  double imposed_threshold) {
    return analyze_model(build_deterioration_model(spec), setting, params,
                         imposed_threshold);
}

ScenarioAnalysis analyze_model(PomdpModel input_model, Setting setting,
                               const SolverParams& params,
                               double imposed_threshold) {
    if (input_model.n_states != 3)
        throw invariant_error(
            "the scenario pipeline assumes the 3-state damage-segment "
            "belief layout");
    ScenarioAnalysis analysis;
    analysis.model = std::move(input_model);
    analysis.grid = build_belief_grid(params.n_grid, params.min_pdam);
    analysis.regulation = build_regulation(analysis.model, setting,
                                           analysis.grid, params,
                                           imposed_threshold);
    const PomdpModel& model = analysis.model;
    const RegulationSetting& reg = analysis.regulation;
    const CostTable agent = agent_costs(model);

    const bool restricted_y = std::isfinite(imposed_threshold);
    analysis.ctrl_y = build_controller(
        model, reg.solve_y.set, reg.solve_y.policy, analysis.grid,
        ObsMode::background_only, params.grid_method,
        restricted_y ? reg.pi_a : BeliefPolicyFn());
    const bool restricted_w = setting == Setting::fixed;
    analysis.ctrl_w = build_controller(
        model, reg.solve_w.set, reg.solve_w.policy, analysis.grid,
        ObsMode::joint, params.grid_method,
        restricted_w ? reg.pi_a : BeliefPolicyFn());

    analysis.chain_y_agent =
        build_joint_chain(model, analysis.ctrl_y, agent);
    evaluate(analysis.chain_y_agent, model.discount);
    analysis.chain_w_agent =
        build_joint_chain(model, analysis.ctrl_w, agent);
    evaluate(analysis.chain_w_agent, model.discount);

    // Belief census: the asymptotic distribution of the filtered belief
    // under pi_A with background information only, resolved on the grid.
    analysis.census_ctrl =
        build_controller(model, reg.solve_y.set, reg.solve_y.policy,
                         analysis.grid, ObsMode::background_only,
                         /*grid_method=*/true);
    analysis.census_chain =
        build_joint_chain(model, analysis.census_ctrl, agent);
    analysis.stationary = stationary_distribution(analysis.census_chain);

    analysis.curve = build_voi_curve(analysis, params.exec);

    numvec weights(static_cast<size_t>(analysis.grid.size()));
    numvec voi_co(weights.size()), delta_v(weights.size());
    for (size_t h = 0; h < weights.size(); ++h) {
        weights[h] = analysis.stationary.inner_marginal(
            static_cast<Eigen::Index>(h));
        voi_co[h] = analysis.curve.rows[h].voi_current_optimistic;
        delta_v[h] = analysis.curve.rows[h].delta_v;
    }
    analysis.expected =
        expected_voi(weights, voi_co, delta_v, model.discount);
    return analysis;
}

int nearest_grid_index(const BeliefGrid& grid, double pdam) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.n_segment; ++i) {
        const double d = std::abs(grid.pdam[static_cast<size_t>(i)] - pdam);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::vector<SweepPoint> sweep(SweepParameter parameter,
                              const std::vector<double>& values,
                              const DeteriorationSpec& base, Setting setting,
                              const SolverParams& params) {
    if (values.empty()) throw invariant_error("sweep needs at least one value");

    // The deterioration-rate sweep holds the repair threshold at the base
    // scenario's societal optimum while the process changes.
    double imposed = std::numeric_limits<double>::quiet_NaN();
    if (parameter == SweepParameter::p12) {
        const PomdpModel base_model = build_deterioration_model(base);
        const BeliefGrid grid =
            build_belief_grid(params.n_grid, params.min_pdam);
        const SolveResult solved = solve_optimal(
            base_model, society_costs(base_model), grid,
            ObsMode::background_only, params.n_iterations, params.prune_tol,
            params.exec);
        imposed = extract_threshold(grid, solved.policy).chi;
    }

    std::vector<SweepPoint> points;
    for (const double v : values) {
        SweepPoint point;
        point.value = v;
        DeteriorationSpec spec = base;
        switch (parameter) {
            case SweepParameter::sigma:
                spec.sigma = v;
                break;
            case SweepParameter::p12:
                spec.p12 = v;
                spec.p23 = 3.0 * v;
                break;
            case SweepParameter::repair_threshold:
                spec.repair_cost_society = v;
                break;
        }
        try {
            ScenarioAnalysis analysis =
                analyze_scenario(spec, setting, params, imposed);
            point.ok = true;
            point.chi_y = analysis.regulation.chi_y.chi;
            point.chi_w = analysis.regulation.chi_w.chi;
            point.expected = analysis.expected;
            const int i20 = nearest_grid_index(analysis.grid, 0.20);
            const int i40 = nearest_grid_index(analysis.grid, 0.40);
            const auto& r20 = analysis.curve.rows[static_cast<size_t>(i20)];
            const auto& r40 = analysis.curve.rows[static_cast<size_t>(i40)];
            point.voi_cp_20 = r20.voi_current_pessimistic;
            point.voi_co_20 = r20.voi_current_optimistic;
            point.voi_f_20 = r20.voi_flow;
            point.voi_cp_40 = r40.voi_current_pessimistic;
            point.voi_co_40 = r40.voi_current_optimistic;
            point.voi_f_40 = r40.voi_flow;
            point.curve = std::move(analysis.curve);
        } catch (const std::exception& e) {
            point.ok = false;
            point.error = e.what();
        }
        points.push_back(std::move(point));
    }
    return points;
}

double expected_functional_mc(const PomdpModel& model,
                              const BeliefPolicyFn& pi_a,
                              const ValueFn& functional, const Belief& start,
                              std::uint64_t seed, int n_steps, int burn_in) {
    detail::Rng rng(seed * 0x9E3779B97F4A7C15ULL + 17);
    const int nx = model.n_states;
    int x = rng.categorical(start.probs().data(), nx);
    Belief belief = start;
    numvec trans_row(static_cast<size_t>(nx));
    numvec obs_row(static_cast<size_t>(model.n_obs_background));
    double acc = 0.0;
    std::int64_t counted = 0;
    for (int k = 0; k < n_steps; ++k) {
        if (k >= burn_in) {
            acc += functional(belief);
            ++counted;
        }
        const int a = pi_a(belief);
        for (int xn = 0; xn < nx; ++xn)
            trans_row[static_cast<size_t>(xn)] = model.trans(x, a, xn);
        const int xn = rng.categorical(trans_row.data(), nx);
        for (int y = 0; y < model.n_obs_background; ++y)
            obs_row[static_cast<size_t>(y)] = model.emit_y(xn, a, y);
        const int y = rng.categorical(obs_row.data(),
                                      model.n_obs_background);
        belief = transition_update(model, belief, a, y,
                                   ObsMode::background_only);
        x = xn;
    }
    return counted > 0 ? acc / static_cast<double>(counted) : 0.0;
}

}  // namespace infoval
