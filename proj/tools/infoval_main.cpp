// Command-line driver: model validation, solving, policy evaluation, VoI
// curves, stationary analysis, parameter sweeps and the bundled
// reproduction runs. Every file-writing command also writes a manifest
// with the resolved parameters; rerunning with the same manifest produces
// byte-identical outputs. OMP_NUM_THREADS controls the worker count.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "infoval/fsc.hpp"
#include "infoval/io.hpp"
#include "infoval/model.hpp"
#include "infoval/pbvi.hpp"
#include "infoval/scenarios.hpp"
#include "infoval/voi.hpp"

using namespace infoval;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string model_file;
    std::string scenario_file;
    std::string out = "infoval_out";
    bool dry_run = false;

    // scenario overrides
    double sigma = -1.0;
    double p12 = -1.0;
    double p23 = -1.0;
    double repair_cost_agent = -1.0;
    double repair_cost_society = -1.0;
    int n_z_bins = -1;
    double discount = -1.0;

    // solver parameters
    int grid_size = 1001;
    double min_pdam = 1e-6;
    int iters = 180;
    double prune_tol = 1e-3;
    bool grid_method = false;
    bool serial = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_solver = true) {
    cmd->add_option("--model", opts.model_file, "POMDP model JSON file");
    cmd->add_option("--scenario", opts.scenario_file,
                    "deterioration scenario JSON file");
    cmd->add_option("--out", opts.out, "output file prefix");
    cmd->add_flag("--dry-run", opts.dry_run,
                  "print the resolved manifest and exit");
    cmd->add_option("--sigma", opts.sigma, "indicator noise override");
    cmd->add_option("--p12", opts.p12, "deterioration rate override");
    cmd->add_option("--p23", opts.p23, "damaged-to-failed rate override");
    cmd->add_option("--cr", opts.repair_cost_agent,
                    "agent repair cost override");
    cmd->add_option("--lr", opts.repair_cost_society,
                    "societal repair cost override");
    cmd->add_option("--nz", opts.n_z_bins, "indicator bins override");
    cmd->add_option("--discount", opts.discount, "discount override");
    if (with_solver) {
        cmd->add_option("--grid", opts.grid_size,
                        "number of damage-segment grid beliefs");
        cmd->add_option("--min-pdam", opts.min_pdam,
                        "smallest damage probability on the log grid");
        cmd->add_option("--iters", opts.iters, "value-iteration count");
        cmd->add_option("--prune-tol", opts.prune_tol,
                        "alpha-vector pruning tolerance");
        cmd->add_flag("--grid-method", opts.grid_method,
                      "grid-method controllers (one inner state per grid "
                      "belief)");
        cmd->add_flag("--serial", opts.serial,
                      "run the serial reference kernels");
    }
}

DeteriorationSpec resolve_spec(const CommonOpts& opts) {
    DeteriorationSpec spec;
    if (!opts.scenario_file.empty())
        spec = load_scenario_spec(opts.scenario_file);
    if (opts.sigma > 0) spec.sigma = opts.sigma;
    if (opts.p12 > 0) {
        spec.p12 = opts.p12;
        if (opts.p23 <= 0) spec.p23 = 3.0 * opts.p12;
    }
    if (opts.p23 > 0) spec.p23 = opts.p23;
    if (opts.repair_cost_agent >= 0)
        spec.repair_cost_agent = opts.repair_cost_agent;
    if (opts.repair_cost_society >= 0)
        spec.repair_cost_society = opts.repair_cost_society;
    if (opts.n_z_bins > 0) spec.n_z_bins = opts.n_z_bins;
    if (opts.discount > 0) spec.discount = opts.discount;
    return spec;
}

PomdpModel resolve_model(const CommonOpts& opts) {
    if (!opts.model_file.empty()) return load_model(opts.model_file);
    return build_deterioration_model(resolve_spec(opts));
}

SolverParams resolve_params(const CommonOpts& opts) {
    SolverParams params;
    params.n_grid = opts.grid_size;
    params.min_pdam = opts.min_pdam;
    params.n_iterations = opts.iters;
    params.prune_tol = opts.prune_tol;
    params.grid_method = opts.grid_method;
    params.exec = opts.serial ? Exec::serial : Exec::parallel;
    return params;
}

json base_manifest(const std::string& command, const CommonOpts& opts) {
    json manifest;
    manifest["command"] = command;
    manifest["tool_version"] = kToolVersion;
    json inputs = json::array();
    if (!opts.model_file.empty()) inputs.push_back(opts.model_file);
    if (!opts.scenario_file.empty()) inputs.push_back(opts.scenario_file);
    manifest["inputs"] = inputs;
    json params;
    params["grid"] = opts.grid_size;
    params["min_pdam"] = opts.min_pdam;
    params["iters"] = opts.iters;
    params["prune_tol"] = opts.prune_tol;
    params["grid_method"] = opts.grid_method;
    params["serial"] = opts.serial;
    if (opts.model_file.empty()) {
        const DeteriorationSpec spec = resolve_spec(opts);
        params["sigma"] = spec.sigma;
        params["p12"] = spec.p12;
        params["p23"] = spec.p23;
        params["repair_cost_agent"] = spec.repair_cost_agent;
        params["repair_cost_society"] = spec.repair_cost_society;
        params["n_z_bins"] = spec.n_z_bins;
        params["discount"] = spec.discount;
    }
    manifest["parameters"] = params;
    manifest["outputs"] = json::array();
    return manifest;
}

// Returns true when the command should stop (dry run): the manifest is
// printed instead of executed.
bool handle_dry_run(const CommonOpts& opts, const json& manifest) {
    if (!opts.dry_run) return false;
    std::printf("%s\n", manifest.dump(2).c_str());
    return true;
}

void write_manifest(const std::string& prefix, json manifest,
                    const std::vector<std::string>& outputs) {
    for (const auto& o : outputs) manifest["outputs"].push_back(o);
    std::ofstream out(prefix + "_manifest.json");
    if (!out) throw parse_error("cannot write manifest for " + prefix);
    out << manifest.dump(2) << "\n";
}

std::string pdam_cell(double pdam) {
    return std::isnan(pdam) ? "nan" : format_number(pdam);
}

// --- commands -------------------------------------------------------------

int cmd_validate(const std::string& model_file) {
    PomdpModel model;
    try {
        model = load_model(model_file);  // lists every violated invariant
    } catch (const invariant_error& e) {
        std::printf("%s\n", e.what());
        return 3;
    }
    std::printf("model ok: %d states, %d actions, %d background and %d "
                "additional observations\n",
                model.n_states, model.n_actions, model.n_obs_background,
                model.n_obs_additional);
    return 0;
}

ObsMode parse_mode(const std::string& mode) {
    if (mode == "background") return ObsMode::background_only;
    if (mode == "joint") return ObsMode::joint;
    throw parse_error("unknown mode: " + mode);
}

CostTable parse_costs(const PomdpModel& model, const std::string& name) {
    if (name == "agent") return agent_costs(model);
    if (name == "society") return society_costs(model);
    throw parse_error("unknown cost table: " + name);
}

BeliefGrid resolve_grid(const PomdpModel& model, const CommonOpts& opts,
                        const std::string& grid_file) {
    if (!grid_file.empty()) {
        std::ifstream in(grid_file);
        if (!in) throw parse_error("cannot open file: " + grid_file);
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw parse_error(grid_file + ": " + e.what());
        }
        std::vector<Belief> beliefs;
        for (const auto& row : doc) beliefs.push_back(Belief(row.get<numvec>()));
        return build_belief_grid(std::move(beliefs));
    }
    if (model.n_states != 3)
        throw invariant_error(
            "the built-in log grid assumes the 3-state scenario; pass "
            "--grid-file for other models");
    return build_belief_grid(opts.grid_size, opts.min_pdam);
}

int cmd_solve(const CommonOpts& opts, const std::string& mode_name,
              const std::string& costs_name, const std::string& grid_file) {
    json manifest = base_manifest("solve", opts);
    manifest["parameters"]["mode"] = mode_name;
    manifest["parameters"]["costs"] = costs_name;
    if (!grid_file.empty()) manifest["inputs"].push_back(grid_file);
    if (handle_dry_run(opts, manifest)) return 0;

    const PomdpModel model = resolve_model(opts);
    const ObsMode mode = parse_mode(mode_name);
    const CostTable costs = parse_costs(model, costs_name);
    const BeliefGrid grid = resolve_grid(model, opts, grid_file);
    const SolverParams params = resolve_params(opts);

    const SolveResult solved = solve_optimal(
        model, costs, grid, mode, params.n_iterations, params.prune_tol,
        params.exec);

    const std::string alpha_path = opts.out + "_alpha.json";
    save_alpha_set(alpha_path, solved.set);
    const std::string policy_path = opts.out + "_policy.csv";
    {
        CsvWriter csv(policy_path);
        csv.header({"p_dam", "action", "envelope_value"});
        for (int i = 0; i < grid.size(); ++i)
            csv.row({pdam_cell(grid.pdam[static_cast<size_t>(i)]),
                     std::to_string(solved.policy[static_cast<size_t>(i)] + 1),
                     format_number(
                         solved.grid_values[static_cast<size_t>(i)])});
    }
    write_manifest(opts.out, manifest, {alpha_path, policy_path});

    std::printf("alpha vectors: %d\n", solved.set.size());
    std::printf("final residual: %s\n",
                format_number(solved.last_residual).c_str());
    if (grid.n_segment > 0) {
        const ThresholdSummary chi = extract_threshold(grid, solved.policy);
        std::printf("repair threshold: %s\n", format_number(chi.chi).c_str());
        if (!chi.monotone)
            std::printf("warning: policy is not monotone along the damage "
                        "segment\n");
    }
    return 0;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& mode_name,
                 const std::string& costs_name,
                 const std::string& policy_costs_name) {
    json manifest = base_manifest("evaluate", opts);
    manifest["parameters"]["mode"] = mode_name;
    manifest["parameters"]["costs"] = costs_name;
    manifest["parameters"]["policy_costs"] = policy_costs_name;
    if (handle_dry_run(opts, manifest)) return 0;

    const PomdpModel model = resolve_model(opts);
    const ObsMode mode = parse_mode(mode_name);
    const CostTable costs = parse_costs(model, costs_name);
    const CostTable policy_costs = parse_costs(model, policy_costs_name);
    const BeliefGrid grid = resolve_grid(model, opts, "");
    const SolverParams params = resolve_params(opts);

    const SolveResult solved = solve_optimal(
        model, policy_costs, grid, mode, params.n_iterations,
        params.prune_tol, params.exec);
    const Controller ctrl =
        build_controller(model, solved.set, solved.policy, grid, mode,
                         params.grid_method);
    JointChain chain = build_joint_chain(model, ctrl, costs);
    evaluate(chain, model.discount);

    const std::string ctrl_path = opts.out + "_controller.json";
    save_controller(ctrl_path, ctrl);
    const std::string chain_path = opts.out + "_chain.csv";
    save_chain_csv(chain_path, chain);
    const std::string values_path = opts.out + "_values.csv";
    {
        CsvWriter csv(values_path);
        csv.header({"p_dam", "inner_state", "value"});
        for (int i = 0; i < grid.size(); ++i) {
            const Belief& b = grid.beliefs[static_cast<size_t>(i)];
            csv.row({pdam_cell(grid.pdam[static_cast<size_t>(i)]),
                     std::to_string(ctrl.region_of(b) + 1),
                     format_number(value_at(ctrl, chain.value, b))});
        }
    }
    write_manifest(opts.out, manifest, {ctrl_path, chain_path, values_path});
    std::printf("inner states: %d, joint states: %d\n", ctrl.n_inner(),
                chain.n_joint());
    return 0;
}

void write_voi_csv(const std::string& path, const VoiCurve& curve,
                   const std::string& assumption) {
    CsvWriter csv(path);
    std::vector<std::string> head = {"p_dam"};
    const bool pess = assumption == "pessimistic" || assumption == "all" ||
                      assumption == "flow";
    const bool opt = assumption == "optimistic" || assumption == "all" ||
                     assumption == "flow";
    if (pess) {
        head.push_back("v_y_piA");
        head.push_back("u_y_piA");
    }
    if (opt) {
        head.push_back("v_w_piB");
        head.push_back("u_w_piB");
    }
    if (pess) head.push_back("voi_c_p");
    if (opt) head.push_back("voi_c_o");
    if (assumption == "flow" || assumption == "all") {
        head.push_back("voi_f");
        head.push_back("delta_c");
        head.push_back("delta_v");
    }
    csv.header(head);
    for (const auto& row : curve.rows) {
        std::vector<std::string> cells = {pdam_cell(row.p_dam)};
        if (pess) {
            cells.push_back(format_number(row.v_y));
            cells.push_back(format_number(row.u_y));
        }
        if (opt) {
            cells.push_back(format_number(row.v_w));
            cells.push_back(format_number(row.u_w));
        }
        if (pess)
            cells.push_back(format_number(row.voi_current_pessimistic));
        if (opt) cells.push_back(format_number(row.voi_current_optimistic));
        if (assumption == "flow" || assumption == "all") {
            cells.push_back(format_number(row.voi_flow));
            cells.push_back(format_number(row.delta_c));
            cells.push_back(format_number(row.delta_v));
        }
        csv.row(cells);
    }
}

// Reduced pipeline when only the pessimistic assumption is requested: the
// joint-mode solve is not needed.
VoiCurve pessimistic_curve(const PomdpModel& model, const BeliefGrid& grid,
                           const SolverParams& params) {
    const SolveResult solve_y = solve_optimal(
        model, society_costs(model), grid, ObsMode::background_only,
        params.n_iterations, params.prune_tol, params.exec);
    const Controller ctrl =
        build_controller(model, solve_y.set, solve_y.policy, grid,
                         ObsMode::background_only, params.grid_method);
    JointChain chain = build_joint_chain(model, ctrl, agent_costs(model));
    evaluate(chain, model.discount);
    const ValueFn value_y = [&](const Belief& b) {
        return value_at(ctrl, chain.value, b);
    };
    VoiCurve curve;
    curve.rows.resize(static_cast<size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i) {
        const Belief& b = grid.beliefs[static_cast<size_t>(i)];
        VoiCurveRow row;
        row.p_dam = grid.pdam[static_cast<size_t>(i)];
        row.v_y = value_y(b);
        row.u_y = pre_posterior(model, value_y, b);
        row.voi_current_pessimistic = row.v_y - row.u_y;
        curve.rows[static_cast<size_t>(i)] = row;
    }
    return curve;
}

int cmd_voi(const CommonOpts& opts, const std::string& setting_name,
            const std::string& assumption) {
    json manifest = base_manifest("voi", opts);
    manifest["parameters"]["setting"] = setting_name;
    manifest["parameters"]["assumption"] = assumption;
    if (handle_dry_run(opts, manifest)) return 0;

    const Setting setting = setting_name == "fixed" ? Setting::fixed
                           : setting_name == "flexible"
                               ? Setting::flexible
                               : throw parse_error("unknown setting: " +
                                                   setting_name);
    const SolverParams params = resolve_params(opts);
    const std::string voi_path = opts.out + "_voi.csv";

    if (assumption == "pessimistic") {
        const PomdpModel model = resolve_model(opts);
        const BeliefGrid grid = resolve_grid(model, opts, "");
        const VoiCurve curve = pessimistic_curve(model, grid, params);
        write_voi_csv(voi_path, curve, assumption);
        write_manifest(opts.out, manifest, {voi_path});
        return 0;
    }

    const ScenarioAnalysis analysis =
        analyze_model(resolve_model(opts), setting, params);
    write_voi_csv(voi_path, analysis.curve, assumption);
    write_manifest(opts.out, manifest, {voi_path});

    std::printf("chi (background policy): %s\n",
                format_number(analysis.regulation.chi_y.chi).c_str());
    std::printf("chi (joint policy): %s\n",
                format_number(analysis.regulation.chi_w.chi).c_str());
    std::printf("expected optimistic current VoI: %s\n",
                format_number(analysis.expected.voi_current_optimistic)
                    .c_str());
    std::printf("expected policy-change term: %s\n",
                format_number(analysis.expected.delta_v).c_str());
    std::printf("expected flow VoI: %s\n",
                format_number(analysis.expected.voi_flow).c_str());
    return 0;
}

int cmd_stationary(const CommonOpts& opts) {
    json manifest = base_manifest("stationary", opts);
    if (handle_dry_run(opts, manifest)) return 0;

    const PomdpModel model = resolve_model(opts);
    const BeliefGrid grid = resolve_grid(model, opts, "");
    const SolverParams params = resolve_params(opts);
    const SolveResult solve_y = solve_optimal(
        model, society_costs(model), grid, ObsMode::background_only,
        params.n_iterations, params.prune_tol, params.exec);
    const Controller census =
        build_controller(model, solve_y.set, solve_y.policy, grid,
                         ObsMode::background_only, /*grid_method=*/true);
    const JointChain chain =
        build_joint_chain(model, census, agent_costs(model));
    const StationaryDistribution dist = stationary_distribution(chain);

    const std::string path = opts.out + "_stationary.csv";
    {
        CsvWriter csv(path);
        csv.header({"p_dam", "pinf", "cdf"});
        double cdf = 0.0;
        for (int h = 0; h < grid.size(); ++h) {
            cdf += dist.inner_marginal(h);
            csv.row({pdam_cell(grid.pdam[static_cast<size_t>(h)]),
                     format_number(dist.inner_marginal(h)),
                     format_number(cdf)});
        }
    }
    write_manifest(opts.out, manifest, {path});
    std::printf("fixed-point residual: %s\n",
                format_number(dist.residual).c_str());
    std::printf("power iterations: %d\n", dist.iterations);
    std::printf("ergodic: %s\n", dist.ergodic ? "yes" : "no");
    return 0;
}

int cmd_simulate(const CommonOpts& opts, const std::string& setting_name,
                 const std::string& mode_name, const std::string& costs_name,
                 std::uint64_t seed, int steps, int trajectories,
                 double start_pdam) {
    json manifest = base_manifest("simulate", opts);
    manifest["parameters"]["setting"] = setting_name;
    manifest["parameters"]["mode"] = mode_name;
    manifest["parameters"]["costs"] = costs_name;
    manifest["parameters"]["seed"] = seed;
    manifest["parameters"]["steps"] = steps;
    manifest["parameters"]["trajectories"] = trajectories;
    manifest["parameters"]["start_pdam"] = start_pdam;
    if (handle_dry_run(opts, manifest)) return 0;

    const Setting setting =
        setting_name == "fixed" ? Setting::fixed : Setting::flexible;
    const ObsMode mode = parse_mode(mode_name);
    const SolverParams params = resolve_params(opts);
    const ScenarioAnalysis analysis =
        analyze_model(resolve_model(opts), setting, params);
    const Controller& ctrl = mode == ObsMode::background_only
                                 ? analysis.ctrl_y
                                 : analysis.ctrl_w;
    const JointChain& chain = mode == ObsMode::background_only
                                  ? analysis.chain_y_agent
                                  : analysis.chain_w_agent;
    const CostTable costs = parse_costs(analysis.model, costs_name);

    const Belief start({1.0 - start_pdam, start_pdam, 0.0});
    SimulationOptions sim_opts;
    sim_opts.seed = seed;
    sim_opts.n_steps = steps;
    sim_opts.n_trajectories = trajectories;
    sim_opts.exec = params.exec;
    const SimulationResult sim =
        simulate(analysis.model, ctrl, costs, start, -1, sim_opts);

    const std::string path = opts.out + "_simulate.csv";
    {
        CsvWriter csv(path);
        csv.header({"x", "h", "occupancy"});
        for (int s = 0; s < chain.n_joint(); ++s)
            csv.row({std::to_string(s % chain.n_states + 1),
                     std::to_string(s / chain.n_states + 1),
                     format_number(sim.occupancy(s))});
    }
    write_manifest(opts.out, manifest, {path});

    const double exact = value_at(ctrl, chain.value, start);
    std::printf("simulated mean: %s\n", format_number(sim.mean).c_str());
    std::printf("standard error: %s\n",
                format_number(sim.std_error).c_str());
    std::printf("linear-solve value: %s\n", format_number(exact).c_str());
    return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& parameter_name,
              std::vector<double> values, const std::string& setting_name) {
    json manifest = base_manifest("sweep", opts);
    manifest["parameters"]["parameter"] = parameter_name;
    manifest["parameters"]["values"] = values;
    manifest["parameters"]["setting"] = setting_name;
    if (handle_dry_run(opts, manifest)) return 0;

    SweepParameter parameter;
    if (parameter_name == "sigma")
        parameter = SweepParameter::sigma;
    else if (parameter_name == "p12")
        parameter = SweepParameter::p12;
    else if (parameter_name == "threshold")
        parameter = SweepParameter::repair_threshold;
    else
        throw parse_error("unknown sweep parameter: " + parameter_name);

    const Setting setting =
        setting_name == "fixed" ? Setting::fixed : Setting::flexible;
    const auto points = sweep(parameter, values, resolve_spec(opts), setting,
                              resolve_params(opts));

    const std::string summary_path = opts.out + "_summary.csv";
    {
        CsvWriter csv(summary_path);
        csv.header({"value", "ok", "chi_y", "chi_w", "e_voi_c_o",
                    "e_delta_v", "e_voi_f", "voi_cp_20", "voi_co_20",
                    "voi_f_20", "voi_cp_40", "voi_co_40", "voi_f_40"});
        for (const auto& p : points) {
            if (!p.ok) {
                csv.row({format_number(p.value), "0", "nan", "nan", "nan",
                         "nan", "nan", "nan", "nan", "nan", "nan", "nan",
                         "nan"});
                continue;
            }
            csv.row_numeric({p.value, 1.0, p.chi_y, p.chi_w,
                             p.expected.voi_current_optimistic,
                             p.expected.delta_v, p.expected.voi_flow,
                             p.voi_cp_20, p.voi_co_20, p.voi_f_20,
                             p.voi_cp_40, p.voi_co_40, p.voi_f_40});
        }
    }
    const std::string curves_path = opts.out + "_curves.csv";
    {
        CsvWriter csv(curves_path);
        csv.header({"value", "p_dam", "v_y_piA", "u_y_piA", "v_w_piB",
                    "u_w_piB", "voi_c_p", "voi_c_o", "voi_f", "delta_c",
                    "delta_v"});
        for (const auto& p : points) {
            if (!p.ok) continue;
            for (const auto& row : p.curve.rows)
                csv.row({format_number(p.value), pdam_cell(row.p_dam),
                         format_number(row.v_y), format_number(row.u_y),
                         format_number(row.v_w), format_number(row.u_w),
                         format_number(row.voi_current_pessimistic),
                         format_number(row.voi_current_optimistic),
                         format_number(row.voi_flow),
                         format_number(row.delta_c),
                         format_number(row.delta_v)});
        }
    }
    write_manifest(opts.out, manifest, {summary_path, curves_path});

    for (const auto& p : points) {
        if (p.ok)
            std::printf("value %s: chi_y=%s chi_w=%s E[VoI_F]=%s\n",
                        format_number(p.value).c_str(),
                        format_number(p.chi_y).c_str(),
                        format_number(p.chi_w).c_str(),
                        format_number(p.expected.voi_flow).c_str());
        else
            std::printf("value %s: FAILED (%s)\n",
                        format_number(p.value).c_str(), p.error.c_str());
    }
    return 0;
}

// --- reproduction bundles -------------------------------------------------

void reproduce_fixed_summary(const ScenarioAnalysis& analysis) {
    std::printf("chi (societal, background): %s\n",
                format_number(analysis.regulation.chi_y.chi).c_str());
    std::printf("E[VoI_C^O] = %s\n",
                format_number(analysis.expected.voi_current_optimistic)
                    .c_str());
    std::printf("E[VoI_F] = %s\n",
                format_number(analysis.expected.voi_flow).c_str());
}

int reproduce_fig4(const CommonOpts& opts, json manifest) {
    const ScenarioAnalysis analysis = analyze_model(
        resolve_model(opts), Setting::fixed, resolve_params(opts));
    const std::string path = opts.out + "_fig4.csv";
    CsvWriter csv(path);
    csv.header({"p_dam", "v_y", "u_y", "v_w", "u_w", "voi_c_p", "voi_c_o",
                "voi_f", "pinf_cdf"});
    double cdf = 0.0;
    for (size_t i = 0; i < analysis.curve.rows.size(); ++i) {
        const auto& row = analysis.curve.rows[i];
        cdf += analysis.stationary.inner_marginal(
            static_cast<Eigen::Index>(i));
        csv.row({pdam_cell(row.p_dam), format_number(row.v_y),
                 format_number(row.u_y), format_number(row.v_w),
                 format_number(row.u_w),
                 format_number(row.voi_current_pessimistic),
                 format_number(row.voi_current_optimistic),
                 format_number(row.voi_flow), format_number(cdf)});
    }
    write_manifest(opts.out, std::move(manifest), {path});
    reproduce_fixed_summary(analysis);
    const int below = analysis.regulation.chi_y.first_repair_index - 1;
    if (below >= 0)
        std::printf("peak pessimistic VoI just below chi: %s\n",
                    format_number(analysis.curve.rows[static_cast<size_t>(
                                      below)]
                                      .voi_current_pessimistic)
                        .c_str());
    return 0;
}

int reproduce_fig5(const CommonOpts& opts, json manifest) {
    const PomdpModel model = resolve_model(opts);
    const BeliefGrid grid = resolve_grid(model, opts, "");
    const SolverParams params = resolve_params(opts);
    const SolveResult agent = solve_optimal(
        model, agent_costs(model), grid, ObsMode::background_only,
        params.n_iterations, params.prune_tol, params.exec);
    const SolveResult society = solve_optimal(
        model, society_costs(model), grid, ObsMode::background_only,
        params.n_iterations, params.prune_tol, params.exec);
    const std::string path = opts.out + "_fig5.csv";
    CsvWriter csv(path);
    csv.header({"p_dam", "v_agent_optimal", "action_agent",
                "v_society_optimal", "action_society"});
    for (int i = 0; i < grid.size(); ++i)
        csv.row({pdam_cell(grid.pdam[static_cast<size_t>(i)]),
                 format_number(agent.grid_values[static_cast<size_t>(i)]),
                 std::to_string(agent.policy[static_cast<size_t>(i)] + 1),
                 format_number(society.grid_values[static_cast<size_t>(i)]),
                 std::to_string(society.policy[static_cast<size_t>(i)] + 1)});
    write_manifest(opts.out, std::move(manifest), {path});
    std::printf("agent-optimal threshold: %s\n",
                format_number(extract_threshold(grid, agent.policy).chi)
                    .c_str());
    std::printf("society-optimal threshold: %s\n",
                format_number(extract_threshold(grid, society.policy).chi)
                    .c_str());
    return 0;
}

int reproduce_fig6(const CommonOpts& opts, json manifest) {
    const PomdpModel model = resolve_model(opts);
    const BeliefGrid grid = resolve_grid(model, opts, "");
    const SolverParams params = resolve_params(opts);

    const auto optimal_voi = [&](const CostTable& costs) {
        const SolveResult sy =
            solve_optimal(model, costs, grid, ObsMode::background_only,
                          params.n_iterations, params.prune_tol, params.exec);
        const SolveResult sw =
            solve_optimal(model, costs, grid, ObsMode::joint,
                          params.n_iterations, params.prune_tol, params.exec);
        struct Out {
            numvec cp, co, f;
        } out;
        const ValueFn vy = [&sy](const Belief& b) {
            return envelope_value(sy.set, b);
        };
        const ValueFn vw = [&sw](const Belief& b) {
            return envelope_value(sw.set, b);
        };
        for (int i = 0; i < grid.size(); ++i) {
            const Belief& b = grid.beliefs[static_cast<size_t>(i)];
            const double uy = pre_posterior(model, vy, b);
            const double uw = pre_posterior(model, vw, b);
            out.cp.push_back(vy(b) - uy);
            out.co.push_back(vw(b) - uw);
            out.f.push_back(vy(b) - uw);
        }
        return out;
    };

    const auto agent = optimal_voi(agent_costs(model));
    const auto society = optimal_voi(society_costs(model));
    const std::string path = opts.out + "_fig6.csv";
    CsvWriter csv(path);
    csv.header({"p_dam", "agent_voi_c_p", "agent_voi_c_o", "agent_voi_f",
                "society_voi_c_p", "society_voi_c_o", "society_voi_f"});
    for (int i = 0; i < grid.size(); ++i)
        csv.row({pdam_cell(grid.pdam[static_cast<size_t>(i)]),
                 format_number(agent.cp[static_cast<size_t>(i)]),
                 format_number(agent.co[static_cast<size_t>(i)]),
                 format_number(agent.f[static_cast<size_t>(i)]),
                 format_number(society.cp[static_cast<size_t>(i)]),
                 format_number(society.co[static_cast<size_t>(i)]),
                 format_number(society.f[static_cast<size_t>(i)])});
    write_manifest(opts.out, std::move(manifest), {path});
    return 0;
}

int reproduce_flexible(const CommonOpts& opts, json manifest, double sigma,
                       const std::string& tag) {
    CommonOpts adjusted = opts;
    adjusted.sigma = sigma;
    const ScenarioAnalysis analysis = analyze_model(
        resolve_model(adjusted), Setting::flexible, resolve_params(opts));
    const std::string path = opts.out + "_" + tag + ".csv";
    write_voi_csv(path, analysis.curve, "all");
    write_manifest(opts.out, std::move(manifest), {path});
    std::printf("sigma=%s: chi_y=%s chi_w=%s\n",
                format_number(sigma).c_str(),
                format_number(analysis.regulation.chi_y.chi).c_str(),
                format_number(analysis.regulation.chi_w.chi).c_str());
    return 0;
}

int reproduce_sweep(const CommonOpts& opts, json manifest,
                    SweepParameter parameter,
                    const std::vector<double>& values,
                    const std::string& tag) {
    const auto points = sweep(parameter, values, resolve_spec(opts),
                              Setting::fixed, resolve_params(opts));
    const std::string summary_path = opts.out + "_" + tag + "_summary.csv";
    {
        CsvWriter csv(summary_path);
        csv.header({"value", "chi_y", "chi_w", "e_voi_c_o", "e_voi_f",
                    "voi_cp_20", "voi_co_20", "voi_f_20", "voi_cp_40",
                    "voi_co_40", "voi_f_40"});
        for (const auto& p : points) {
            if (!p.ok) {
                std::printf("value %s failed: %s\n",
                            format_number(p.value).c_str(), p.error.c_str());
                continue;
            }
            csv.row_numeric({p.value, p.chi_y, p.chi_w,
                             p.expected.voi_current_optimistic,
                             p.expected.voi_flow, p.voi_cp_20, p.voi_co_20,
                             p.voi_f_20, p.voi_cp_40, p.voi_co_40,
                             p.voi_f_40});
        }
    }
    const std::string curves_path = opts.out + "_" + tag + "_curves.csv";
    {
        CsvWriter csv(curves_path);
        csv.header({"value", "p_dam", "voi_c_p", "voi_c_o", "voi_f"});
        for (const auto& p : points) {
            if (!p.ok) continue;
            for (const auto& row : p.curve.rows)
                csv.row({format_number(p.value), pdam_cell(row.p_dam),
                         format_number(row.voi_current_pessimistic),
                         format_number(row.voi_current_optimistic),
                         format_number(row.voi_flow)});
        }
    }
    write_manifest(opts.out, std::move(manifest),
                   {summary_path, curves_path});
    return 0;
}

int cmd_reproduce(const CommonOpts& opts, const std::string& figure) {
    json manifest = base_manifest("reproduce", opts);
    manifest["parameters"]["figure"] = figure;
    if (handle_dry_run(opts, manifest)) return 0;

    if (figure == "fig4") return reproduce_fig4(opts, std::move(manifest));
    if (figure == "fig5") return reproduce_fig5(opts, std::move(manifest));
    if (figure == "fig6") return reproduce_fig6(opts, std::move(manifest));
    if (figure == "fig7")
        return reproduce_flexible(opts, std::move(manifest), 3.0, "fig7");
    if (figure == "fig8")
        return reproduce_flexible(opts, std::move(manifest), 1.0, "fig8");
    if (figure == "fig9")
        return reproduce_sweep(opts, std::move(manifest),
                               SweepParameter::sigma, {0.3, 0.75, 1.5, 3.0},
                               "fig9");
    if (figure == "fig10")
        return reproduce_sweep(opts, std::move(manifest),
                               SweepParameter::p12, {0.02, 0.04, 0.08, 0.16},
                               "fig10");
    if (figure == "fig11")
        return reproduce_sweep(opts, std::move(manifest),
                               SweepParameter::repair_threshold,
                               {0.15, 0.2, 0.246, 0.3, 0.35, 0.4}, "fig11");
    throw parse_error("unknown figure id: " + figure);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"POMDP solving, finite-state-controller policy evaluation "
                 "and value-of-information analysis"};
    app.require_subcommand(1);

    // validate
    std::string validate_model_file;
    CLI::App* validate_cmd =
        app.add_subcommand("validate", "check a model file's invariants");
    validate_cmd->add_option("--model", validate_model_file, "model JSON")
        ->required();

    // solve
    CommonOpts solve_opts;
    std::string solve_mode = "background", solve_costs = "society";
    std::string solve_grid_file;
    CLI::App* solve_cmd =
        app.add_subcommand("solve", "point-based value iteration");
    add_common(solve_cmd, solve_opts);
    solve_cmd->add_option("--mode", solve_mode, "background|joint");
    solve_cmd->add_option("--costs", solve_costs, "agent|society");
    solve_cmd->add_option("--grid-file", solve_grid_file,
                          "JSON list of grid beliefs (generic models)");

    // evaluate
    CommonOpts eval_opts;
    std::string eval_mode = "background", eval_costs = "agent";
    std::string eval_policy_costs = "society";
    CLI::App* eval_cmd = app.add_subcommand(
        "evaluate", "evaluate a cost table under a solved policy");
    add_common(eval_cmd, eval_opts);
    eval_cmd->add_option("--mode", eval_mode, "background|joint");
    eval_cmd->add_option("--costs", eval_costs,
                         "cost table to evaluate: agent|society");
    eval_cmd->add_option("--policy-costs", eval_policy_costs,
                         "cost table defining the policy: agent|society");

    // voi
    CommonOpts voi_opts;
    std::string voi_setting = "fixed", voi_assumption = "all";
    CLI::App* voi_cmd =
        app.add_subcommand("voi", "value-of-information curve");
    add_common(voi_cmd, voi_opts);
    voi_cmd->add_option("--setting", voi_setting, "fixed|flexible");
    voi_cmd->add_option("--assumption", voi_assumption,
                        "pessimistic|optimistic|flow|all");

    // stationary
    CommonOpts stat_opts;
    CLI::App* stat_cmd = app.add_subcommand(
        "stationary", "asymptotic belief distribution under the background "
                      "policy");
    add_common(stat_cmd, stat_opts);

    // simulate
    CommonOpts sim_opts;
    std::string sim_setting = "fixed", sim_mode = "background";
    std::string sim_costs = "agent";
    std::uint64_t sim_seed = 1;
    int sim_steps = 280, sim_traj = 10000;
    double sim_start = 0.2;
    CLI::App* sim_cmd =
        app.add_subcommand("simulate", "Monte-Carlo rollouts of a "
                           "controller");
    add_common(sim_cmd, sim_opts);
    sim_cmd->add_option("--setting", sim_setting, "fixed|flexible");
    sim_cmd->add_option("--mode", sim_mode, "background|joint");
    sim_cmd->add_option("--costs", sim_costs, "agent|society");
    sim_cmd->add_option("--seed", sim_seed, "RNG seed");
    sim_cmd->add_option("--steps", sim_steps, "steps per trajectory");
    sim_cmd->add_option("--trajectories", sim_traj, "trajectory count");
    sim_cmd->add_option("--start-pdam", sim_start,
                        "initial damage probability");

    // sweep
    CommonOpts sweep_opts;
    std::string sweep_parameter = "sigma", sweep_setting = "fixed";
    std::vector<double> sweep_values;
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "parametric study over a scenario "
                           "parameter");
    add_common(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--parameter", sweep_parameter,
                          "sigma|p12|threshold");
    sweep_cmd
        ->add_option("--values", sweep_values, "comma-separated values")
        ->delimiter(',')
        ->required();
    sweep_cmd->add_option("--setting", sweep_setting, "fixed|flexible");

    // reproduce
    CommonOpts repr_opts;
    std::string figure;
    CLI::App* repr_cmd = app.add_subcommand(
        "reproduce", "emit the data behind a study figure (fig4..fig11)");
    add_common(repr_cmd, repr_opts);
    repr_cmd->add_option("--figure", figure, "figure id")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate_cmd->parsed()) return cmd_validate(validate_model_file);
        if (solve_cmd->parsed())
            return cmd_solve(solve_opts, solve_mode, solve_costs,
                             solve_grid_file);
        if (eval_cmd->parsed())
            return cmd_evaluate(eval_opts, eval_mode, eval_costs,
                                eval_policy_costs);
        if (voi_cmd->parsed())
            return cmd_voi(voi_opts, voi_setting, voi_assumption);
        if (stat_cmd->parsed()) return cmd_stationary(stat_opts);
        if (sim_cmd->parsed())
            return cmd_simulate(sim_opts, sim_setting, sim_mode, sim_costs,
                                sim_seed, sim_steps, sim_traj, sim_start);
        if (sweep_cmd->parsed())
            return cmd_sweep(sweep_opts, sweep_parameter, sweep_values,
                             sweep_setting);
        if (repr_cmd->parsed()) return cmd_reproduce(repr_opts, figure);
    } catch (const parse_error& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 2;
    } catch (const invariant_error& e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return 3;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
