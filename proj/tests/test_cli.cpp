#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "infoval/io.hpp"
#include "infoval/scenarios.hpp"

using namespace infoval;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int code = -1;
    std::string output;  // stdout followed by stderr
};

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("infoval_cli_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

CmdResult run(const std::string& args) {
    const fs::path out = work_dir() / "stdout.txt";
    const fs::path err = work_dir() / "stderr.txt";
    const std::string cmd = "cd " + work_dir().string() + " && " +
                            INFOVAL_BIN + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int raw = std::system(cmd.c_str());
    CmdResult result;
    result.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    result.output = slurp(out) + slurp(err);
    return result;
}

// small model files shared by the cases
const std::string& good_model_file() {
    static const std::string path = [] {
        DeteriorationSpec spec;
        spec.n_z_bins = 24;
        const std::string p = (work_dir() / "model.json").string();
        save_model(p, build_deterioration_model(spec));
        return p;
    }();
    return path;
}

constexpr const char* kQuick =
    " --nz 24 --grid 51 --iters 40 --prune-tol 1e-2 ";

}  // namespace

TEST_CASE("validate accepts a well-formed model") {
    const CmdResult r = run("validate --model " + good_model_file());
    CHECK(r.code == 0);
    CHECK(r.output.find("model ok") != std::string::npos);
}

TEST_CASE("validate names the offending table row") {
    DeteriorationSpec spec;
    spec.n_z_bins = 24;
    PomdpModel bad = build_deterioration_model(spec);
    bad.transition[(1 * 2 + 0) * 3 + 1] += 1e-6;
    const std::string path = (work_dir() / "bad_row.json").string();
    save_model(path, bad);
    const CmdResult r = run("validate --model " + path);
    CHECK(r.code == 3);
    CHECK(r.output.find("(x=2, a=1)") != std::string::npos);
}

TEST_CASE("validate rejects an out-of-range discount") {
    DeteriorationSpec spec;
    spec.n_z_bins = 24;
    PomdpModel bad = build_deterioration_model(spec);
    bad.discount = 1.0;
    const std::string path = (work_dir() / "bad_discount.json").string();
    save_model(path, bad);
    const CmdResult r = run("validate --model " + path);
    CHECK(r.code == 3);
    CHECK(r.output.find("discount") != std::string::npos);
}

TEST_CASE("validate distinguishes parse failures") {
    const std::string path = (work_dir() / "garbage.json").string();
    std::ofstream(path) << "{ not json";
    CHECK(run("validate --model " + path).code == 2);
    CHECK(run("validate --model " + (work_dir() / "missing.json").string())
              .code == 2);
}

TEST_CASE("solve writes the alpha set, the policy table and a manifest") {
    const CmdResult r = run(std::string("solve") + kQuick + "--out s1");
    REQUIRE(r.code == 0);
    CHECK(r.output.find("repair threshold") != std::string::npos);

    const AlphaSet set =
        load_alpha_set((work_dir() / "s1_alpha.json").string());
    CHECK(set.size() >= 1);

    const std::string policy = slurp(work_dir() / "s1_policy.csv");
    CHECK(policy.rfind("p_dam,action,envelope_value\n", 0) == 0);
    CHECK(fs::exists(work_dir() / "s1_manifest.json"));
}

TEST_CASE("dry run prints the manifest and writes nothing") {
    const CmdResult r =
        run(std::string("solve") + kQuick + "--out dry1 --dry-run");
    CHECK(r.code == 0);
    CHECK(r.output.find("\"command\": \"solve\"") != std::string::npos);
    CHECK(!fs::exists(work_dir() / "dry1_policy.csv"));
    CHECK(!fs::exists(work_dir() / "dry1_manifest.json"));
}

TEST_CASE("identical runs produce byte-identical tables") {
    REQUIRE(run(std::string("voi") + kQuick +
                "--setting fixed --out det1").code == 0);
    REQUIRE(run(std::string("voi") + kQuick +
                "--setting fixed --out det2").code == 0);
    const std::string a = slurp(work_dir() / "det1_voi.csv");
    const std::string b = slurp(work_dir() / "det2_voi.csv");
    REQUIRE(!a.empty());
    CHECK(a == b);
}

TEST_CASE("pessimistic-only runs skip the joint solve and keep the "
          "identities") {
    const CmdResult r = run(std::string("voi") + kQuick +
                            "--assumption pessimistic --out pess");
    REQUIRE(r.code == 0);
    std::ifstream in(work_dir() / "pess_voi.csv");
    std::string header, line;
    REQUIRE(std::getline(in, header));
    CHECK(header == "p_dam,v_y_piA,u_y_piA,voi_c_p");
    REQUIRE(std::getline(in, line));
    double p, v, u, cp;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &p, &v, &u, &cp) ==
            4);
    CHECK(cp == doctest::Approx(v - u).epsilon(1e-9));
}

TEST_CASE("stationary prints the fixed-point residual") {
    const CmdResult r =
        run(std::string("stationary") + kQuick + "--out st1");
    REQUIRE(r.code == 0);
    CHECK(r.output.find("fixed-point residual") != std::string::npos);
    CHECK(fs::exists(work_dir() / "st1_stationary.csv"));
}

TEST_CASE("simulate reports the rollout estimate and the solve value") {
    const CmdResult r = run(std::string("simulate") + kQuick +
                            "--seed 7 --steps 120 --trajectories 200 "
                            "--out sim1");
    REQUIRE(r.code == 0);
    CHECK(r.output.find("simulated mean") != std::string::npos);
    CHECK(r.output.find("linear-solve value") != std::string::npos);
}

TEST_CASE("sweep writes a summary row per value") {
    const CmdResult r = run(std::string("sweep") + kQuick +
                            "--parameter sigma --values 3.0 --out sw1");
    REQUIRE(r.code == 0);
    const std::string summary = slurp(work_dir() / "sw1_summary.csv");
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 2);
    CHECK(fs::exists(work_dir() / "sw1_curves.csv"));
}

TEST_CASE("evaluate exports the controller, the chain and the values") {
    const CmdResult r = run(std::string("evaluate") + kQuick + "--out ev1");
    REQUIRE(r.code == 0);
    CHECK(r.output.find("inner states") != std::string::npos);
    CHECK(fs::exists(work_dir() / "ev1_controller.json"));
    CHECK(fs::exists(work_dir() / "ev1_values.csv"));
    const std::string chain = slurp(work_dir() / "ev1_chain.csv");
    CHECK(chain.rfind("x,h,cost,value", 0) == 0);
}

TEST_CASE("scenario files feed every command") {
    DeteriorationSpec spec;
    spec.sigma = 1.5;
    spec.n_z_bins = 24;
    const std::string path = (work_dir() / "scenario.json").string();
    save_scenario_spec(path, spec);
    const CmdResult r = run("solve --scenario " + path +
                            " --grid 51 --iters 40 --prune-tol 1e-2 "
                            "--out sc1");
    REQUIRE(r.code == 0);
    const std::string manifest = slurp(work_dir() / "sc1_manifest.json");
    CHECK(manifest.find("\"sigma\": 1.5") != std::string::npos);
}

TEST_CASE("figure bundles run end to end") {
    const CmdResult r = run(std::string("reproduce --figure fig5") + kQuick +
                            "--out r5");
    REQUIRE(r.code == 0);
    CHECK(r.output.find("agent-optimal threshold") != std::string::npos);
    const std::string csv = slurp(work_dir() / "r5_fig5.csv");
    CHECK(csv.rfind("p_dam,v_agent_optimal", 0) == 0);
}

TEST_CASE("unknown figure ids are parse errors") {
    CHECK(run("reproduce --figure fig99 --out r99").code == 2);
}

TEST_CASE("unknown flags are parse errors") {
    CHECK(run("solve --no-such-flag").code == 2);
}
