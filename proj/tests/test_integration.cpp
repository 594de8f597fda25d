#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "infoval/fsc.hpp"
#include "infoval/scenarios.hpp"
#include "infoval/voi.hpp"

using namespace infoval;

TEST_CASE("grid-method controllers track the default construction") {
    DeteriorationSpec spec;
    spec.n_z_bins = 100;
    SolverParams params;
    params.n_grid = 301;
    params.n_iterations = 180;
    params.prune_tol = 1e-3;
    const ScenarioAnalysis base =
        analyze_scenario(spec, Setting::fixed, params);

    ScenarioAnalysis gm = base;
    gm.ctrl_y = build_controller(gm.model, gm.regulation.solve_y.set,
                                 gm.regulation.solve_y.policy, gm.grid,
                                 ObsMode::background_only,
                                 /*grid_method=*/true);
    gm.chain_y_agent =
        build_joint_chain(gm.model, gm.ctrl_y, agent_costs(gm.model));
    evaluate(gm.chain_y_agent, gm.model.discount);
    gm.ctrl_w = build_controller(gm.model, gm.regulation.solve_w.set,
                                 gm.regulation.solve_w.policy, gm.grid,
                                 ObsMode::joint, /*grid_method=*/true);
    gm.chain_w_agent =
        build_joint_chain(gm.model, gm.ctrl_w, agent_costs(gm.model));
    evaluate(gm.chain_w_agent, gm.model.discount);
    gm.curve = build_voi_curve(gm, params.exec);

    // the two constructions agree away from region borders; allow a few
    // border rows to differ and bound the bulk deviation by the median
    numvec diffs;
    int large = 0;
    for (size_t i = 0; i < base.curve.rows.size(); ++i) {
        const double d =
            std::abs(base.curve.rows[i].voi_current_pessimistic -
                     gm.curve.rows[i].voi_current_pessimistic);
        diffs.push_back(d);
        if (d > 0.01) ++large;
    }
    std::sort(diffs.begin(), diffs.end());
    const double median = diffs[diffs.size() / 2];
    CHECK(median < 2e-3);
    CHECK(large <= static_cast<int>(diffs.size()) / 50);

    // value functions agree at representative beliefs of the default
    // controller (both are exact plan values there)
    for (int h = 0; h < base.ctrl_y.n_inner(); ++h) {
        const Belief& rep =
            base.ctrl_y.states[static_cast<size_t>(h)].rep_belief;
        CHECK(std::abs(base.agent_value_y(rep) - gm.agent_value_y(rep)) <
              5e-3);
    }
}

TEST_CASE("indicator refinement leaves the curve stable") {
    // Doubling the indicator resolution barely moves the table: the value
    // of information is a functional of the continuous emission. The
    // pruning tolerance is tightened so plan-selection noise (of the order
    // of the pruning radius) does not mask the discretization effect, and
    // rows next to the repair threshold are allowed the first-order
    // jump-integration error ~2*jump/n_z.
    DeteriorationSpec coarse;
    coarse.n_z_bins = 300;
    DeteriorationSpec fine;
    fine.n_z_bins = 600;
    SolverParams params;
    params.prune_tol = 1e-4;
    const ScenarioAnalysis a =
        analyze_scenario(coarse, Setting::fixed, params);
    const ScenarioAnalysis b = analyze_scenario(fine, Setting::fixed,
                                                params);
    REQUIRE(a.curve.rows.size() == b.curve.rows.size());
    const double chi = a.regulation.chi_y.chi;
    double worst_bulk = 0.0, worst_near_jump = 0.0;
    for (size_t i = 0; i < a.curve.rows.size(); ++i) {
        const auto& ra = a.curve.rows[i];
        const auto& rb = b.curve.rows[i];
        double d = 0.0;
        d = std::max(d, std::abs(ra.v_y - rb.v_y));
        d = std::max(d, std::abs(ra.u_y - rb.u_y));
        d = std::max(d, std::abs(ra.v_w - rb.v_w));
        d = std::max(d, std::abs(ra.u_w - rb.u_w));
        d = std::max(d, std::abs(ra.voi_current_pessimistic -
                                 rb.voi_current_pessimistic));
        d = std::max(d, std::abs(ra.voi_current_optimistic -
                                 rb.voi_current_optimistic));
        d = std::max(d, std::abs(ra.voi_flow - rb.voi_flow));
        const double pdam = a.grid.pdam[i];
        if (!std::isnan(pdam) && std::abs(pdam - chi) < 0.05)
            worst_near_jump = std::max(worst_near_jump, d);
        else
            worst_bulk = std::max(worst_bulk, d);
    }
    CHECK(worst_bulk < 2e-3);
    CHECK(worst_near_jump < 3e-3);
}

TEST_CASE("exact-filter Monte-Carlo census agrees with the grid census") {
    DeteriorationSpec spec;
    SolverParams params;
    const ScenarioAnalysis a = analyze_scenario(spec, Setting::fixed, params);

    const ValueFn value_w = [&a](const Belief& b) {
        return a.agent_value_w(b);
    };
    const ValueFn voi_co = [&](const Belief& b) {
        return a.agent_value_w(b) - pre_posterior(a.model, value_w, b);
    };
    const double mc = expected_functional_mc(
        a.model, a.regulation.pi_a, voi_co, Belief({1.0, 0.0, 0.0}),
        20260809, 50000, 2000);
    const double census = a.expected.voi_current_optimistic;
    CHECK(std::abs(mc - census) < 0.5 * std::abs(census) + 0.002);
}
