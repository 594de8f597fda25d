#include <doctest.h>

#include <cmath>

#include <fstream>

#include "helpers.hpp"
#include "infoval/io.hpp"
#include "infoval/scenarios.hpp"

using namespace infoval;

TEST_CASE("deterioration model tables") {
    DeteriorationSpec spec;
    const PomdpModel m = build_deterioration_model(spec);
    REQUIRE(m.n_states == 3);
    REQUIRE(m.n_actions == 2);
    REQUIRE(m.n_obs_background == 2);
    REQUIRE(m.n_obs_additional == 300);

    // do-nothing rows
    CHECK(m.trans(0, 0, 0) == doctest::Approx(0.96));
    CHECK(m.trans(0, 0, 1) == doctest::Approx(0.04));
    CHECK(m.trans(0, 0, 2) == doctest::Approx(0.0));
    CHECK(m.trans(1, 0, 0) == doctest::Approx(0.0));
    CHECK(m.trans(1, 0, 1) == doctest::Approx(0.88));
    CHECK(m.trans(1, 0, 2) == doctest::Approx(0.12));
    CHECK(m.trans(2, 0, 2) == doctest::Approx(1.0));

    // repair rows are identical
    for (int x = 0; x < 3; ++x) {
        CHECK(m.trans(x, 1, 0) == doctest::Approx(0.96));
        CHECK(m.trans(x, 1, 1) == doctest::Approx(0.04));
        CHECK(m.trans(x, 1, 2) == doctest::Approx(0.0));
    }

    // failure detector
    for (int a = 0; a < 2; ++a) {
        CHECK(m.emit_y(0, a, 0) == doctest::Approx(1.0));
        CHECK(m.emit_y(1, a, 0) == doctest::Approx(1.0));
        CHECK(m.emit_y(2, a, 1) == doctest::Approx(1.0));
    }

    // normalized costs: unit failure, half-unit agent repair
    CHECK(m.cost_agent[0 * 2 + 1] == doctest::Approx(0.5));
    CHECK(m.cost_agent[2 * 2 + 0] == doctest::Approx(1.0));
    CHECK(m.cost_agent[2 * 2 + 1] == doctest::Approx(1.5));
    CHECK(m.cost_society[0 * 2 + 1] == doctest::Approx(0.246));

    // the failed state's indicator row copies the damaged-state row
    for (int z = 0; z < m.n_obs_additional; ++z)
        CHECK(m.emit_z(2, z) == m.emit_z(1, z));

    CHECK(model_violations(m).empty());
}

TEST_CASE("printed-table audit flag flips the damaged-state row") {
    DeteriorationSpec spec;
    spec.printed_middle_row = true;
    const PomdpModel m = build_deterioration_model(spec);
    CHECK(m.trans(1, 0, 1) == doctest::Approx(0.12));
    CHECK(m.trans(1, 0, 2) == doctest::Approx(0.88));
}

TEST_CASE("gaussian discretization") {
    // symmetric interval split at the mean
    const numvec half = discretize_gaussian(0.0, 1.0, 2, 5.0);
    CHECK(half[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(half[1] == doctest::Approx(0.5).epsilon(1e-12));

    for (double sigma : {0.3, 1.0, 3.0}) {
        const numvec row = discretize_gaussian(-0.5, sigma, 300, 5.0);
        double sum = 0.0;
        for (double v : row) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        for (double v : row) CHECK(v >= 0.0);
    }

    // wide noise makes the two emission rows overlap heavily
    const numvec intact = discretize_gaussian(-0.5, 3.0, 300, 5.0);
    const numvec damaged = discretize_gaussian(0.5, 3.0, 300, 5.0);
    double overlap = 0.0;
    for (size_t z = 0; z < intact.size(); ++z)
        overlap += std::min(intact[z], damaged[z]);
    CHECK(overlap > 0.8);

    // narrow noise separates them
    const numvec sharp_i = discretize_gaussian(-0.5, 0.3, 300, 5.0);
    const numvec sharp_d = discretize_gaussian(0.5, 0.3, 300, 5.0);
    overlap = 0.0;
    for (size_t z = 0; z < sharp_i.size(); ++z)
        overlap += std::min(sharp_i[z], sharp_d[z]);
    CHECK(overlap < 0.15);
}

TEST_CASE("spec validation") {
    DeteriorationSpec bad;
    bad.p12 = 0.0;
    CHECK(!spec_violations(bad).empty());
    bad = DeteriorationSpec{};
    bad.sigma = -1.0;
    CHECK(!spec_violations(bad).empty());
    bad = DeteriorationSpec{};
    bad.n_z_bins = 1;
    CHECK_THROWS_AS(build_deterioration_model(bad), invariant_error);
}

TEST_CASE("fixed regulation imposes the background policy in joint mode") {
    const PomdpModel m = build_deterioration_model([] {
        DeteriorationSpec s;
        s.n_z_bins = 24;
        return s;
    }());
    const SolverParams params = testing::quick_params();
    const BeliefGrid grid = build_belief_grid(params.n_grid, params.min_pdam);
    const RegulationSetting reg =
        build_regulation(m, Setting::fixed, grid, params);
    for (int i = 0; i < grid.size(); ++i) {
        CHECK(reg.solve_w.policy[static_cast<size_t>(i)] ==
              reg.pi_a(grid.beliefs[static_cast<size_t>(i)]));
        CHECK(reg.solve_w.policy[static_cast<size_t>(i)] ==
              reg.solve_y.policy[static_cast<size_t>(i)]);
    }
    CHECK(reg.chi_w.chi == doctest::Approx(reg.chi_y.chi));
}

TEST_CASE("flexible regulation repairs later with the indicator available") {
    const PomdpModel m = build_deterioration_model([] {
        DeteriorationSpec s;
        s.n_z_bins = 60;
        return s;
    }());
    SolverParams params;
    params.n_grid = 201;
    params.n_iterations = 180;
    params.prune_tol = 3e-3;
    const BeliefGrid grid = build_belief_grid(params.n_grid, params.min_pdam);
    const RegulationSetting reg =
        build_regulation(m, Setting::flexible, grid, params);
    CHECK(reg.chi_y.chi == doctest::Approx(0.35).epsilon(0.05));
    CHECK(reg.chi_w.chi > reg.chi_y.chi + 0.02);
    CHECK(reg.chi_w.monotone);
}

TEST_CASE("failed-state indicator row is unobservable") {
    // swapping the copied row for a uniform one leaves every value-of-
    // information output unchanged: the background signal already
    // identifies failure before the indicator is read
    DeteriorationSpec spec;
    spec.n_z_bins = 24;
    const SolverParams params = testing::quick_params();
    const ScenarioAnalysis base =
        analyze_scenario(spec, Setting::fixed, params);

    PomdpModel swapped = build_deterioration_model(spec);
    for (int z = 0; z < swapped.n_obs_additional; ++z)
        swapped.emission_additional[2 * static_cast<size_t>(
                                        swapped.n_obs_additional) +
                                    z] = 1.0 / swapped.n_obs_additional;
    validate_model(swapped);
    const ScenarioAnalysis alt =
        analyze_model(swapped, Setting::fixed, params);

    REQUIRE(base.curve.rows.size() == alt.curve.rows.size());
    for (size_t i = 0; i < base.curve.rows.size(); ++i) {
        const auto& r0 = base.curve.rows[i];
        const auto& r1 = alt.curve.rows[i];
        CHECK(r0.v_y == doctest::Approx(r1.v_y).epsilon(1e-9));
        CHECK(r0.u_y == doctest::Approx(r1.u_y).epsilon(1e-9));
        CHECK(r0.v_w == doctest::Approx(r1.v_w).epsilon(1e-9));
        CHECK(r0.u_w == doctest::Approx(r1.u_w).epsilon(1e-9));
        CHECK(r0.voi_flow ==
              doctest::Approx(r1.voi_flow).epsilon(1e-9).scale(1.0));
    }
    CHECK(base.expected.voi_flow ==
          doctest::Approx(alt.expected.voi_flow).epsilon(1e-9).scale(1.0));
}

TEST_CASE("degenerate sweep equals a direct run") {
    DeteriorationSpec spec;
    spec.n_z_bins = 24;
    const SolverParams params = testing::quick_params();
    const auto points =
        sweep(SweepParameter::sigma, {spec.sigma}, spec, Setting::fixed,
              params);
    REQUIRE(points.size() == 1);
    REQUIRE(points[0].ok);

    const ScenarioAnalysis direct =
        analyze_scenario(spec, Setting::fixed, params);
    REQUIRE(points[0].curve.rows.size() == direct.curve.rows.size());
    for (size_t i = 0; i < direct.curve.rows.size(); ++i) {
        CHECK(points[0].curve.rows[i].voi_current_pessimistic ==
              direct.curve.rows[i].voi_current_pessimistic);
        CHECK(points[0].curve.rows[i].voi_flow ==
              direct.curve.rows[i].voi_flow);
        CHECK(points[0].curve.rows[i].v_y == direct.curve.rows[i].v_y);
    }
    CHECK(points[0].expected.voi_flow == direct.expected.voi_flow);
}

TEST_CASE("deterioration-rate sweep pins the threshold") {
    DeteriorationSpec spec;
    spec.n_z_bins = 24;
    const SolverParams params = testing::quick_params();
    const auto points = sweep(SweepParameter::p12, {0.02, 0.04}, spec,
                              Setting::fixed, params);
    REQUIRE(points.size() == 2);
    for (const auto& p : points) {
        REQUIRE(p.ok);
        CHECK(p.chi_y == doctest::Approx(points[0].chi_y));
    }
}

TEST_CASE("sweep reports per-value failures and continues") {
    DeteriorationSpec spec;
    spec.n_z_bins = 24;
    const auto points = sweep(SweepParameter::sigma, {-1.0, 3.0}, spec,
                              Setting::fixed, testing::quick_params());
    REQUIRE(points.size() == 2);
    CHECK(!points[0].ok);
    CHECK(!points[0].error.empty());
    CHECK(points[1].ok);
}

TEST_CASE("scenario files round-trip") {
    DeteriorationSpec spec;
    spec.sigma = 0.75;
    spec.p12 = 0.08;
    spec.p23 = 0.24;
    spec.repair_cost_society = 0.3;
    spec.n_z_bins = 64;
    spec.printed_middle_row = true;
    const std::string path = "/tmp/infoval_spec_roundtrip.json";
    save_scenario_spec(path, spec);
    const DeteriorationSpec loaded = load_scenario_spec(path);
    CHECK(loaded.sigma == spec.sigma);
    CHECK(loaded.p12 == spec.p12);
    CHECK(loaded.p23 == spec.p23);
    CHECK(loaded.repair_cost_society == spec.repair_cost_society);
    CHECK(loaded.n_z_bins == spec.n_z_bins);
    CHECK(loaded.printed_middle_row == spec.printed_middle_row);

    std::ofstream(path) << "{\"sigma\": -2.0}";
    CHECK_THROWS_AS(load_scenario_spec(path), invariant_error);
    std::ofstream(path) << "{broken";
    CHECK_THROWS_AS(load_scenario_spec(path), parse_error);
}

TEST_CASE("model files round-trip") {
    DeteriorationSpec spec;
    spec.n_z_bins = 16;
    const PomdpModel m = build_deterioration_model(spec);
    const std::string path = "/tmp/infoval_model_roundtrip.json";
    save_model(path, m);
    const PomdpModel loaded = load_model(path);
    CHECK(loaded.n_obs_additional == 16);
    CHECK(loaded.transition == m.transition);
    CHECK(loaded.emission_additional == m.emission_additional);
    CHECK(loaded.cost_society == m.cost_society);
    CHECK(loaded.discount == m.discount);
}

TEST_CASE("alpha-set files round-trip") {
    AlphaSet set;
    set.mode = ObsMode::joint;
    set.vectors.push_back({{0.25, 0.5, 1.75}, 1, 0, 12});
    set.vectors.push_back({{1.0, 0.0, 2.0}, 0, 1, 40});
    const std::string path = "/tmp/infoval_alpha_roundtrip.json";
    save_alpha_set(path, set);
    const AlphaSet loaded = load_alpha_set(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded.mode == ObsMode::joint);
    CHECK(loaded.vectors[0].values == set.vectors[0].values);
    CHECK(loaded.vectors[0].action == 1);
    CHECK(loaded.vectors[1].id == 1);
}

TEST_CASE("nearest grid index") {
    const BeliefGrid grid = build_belief_grid(1001, 1e-6);
    const int i20 = nearest_grid_index(grid, 0.20);
    const int i40 = nearest_grid_index(grid, 0.40);
    CHECK(std::abs(grid.pdam[static_cast<size_t>(i20)] - 0.20) < 0.005);
    CHECK(std::abs(grid.pdam[static_cast<size_t>(i40)] - 0.40) < 0.01);
}
