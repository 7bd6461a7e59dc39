#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "akin/errors.hpp"
#include "akin/experiments.hpp"

using namespace akin;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("akin_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json small_doc(const std::string& experiment) {
    return json{{"experiment", experiment},
                {"params", {{"rho", 1}, {"alpha", 0.5}, {"gamma", 0}, {"delta", 1}}},
                {"drift", {{"kind", "exact-power-law"}}},
                {"grid", {{"t_end", 100}, {"step", 0.1}, {"per_decade", 8}}},
                {"n_paths", 3},
                {"master_seed", 11}};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(AKIN_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::ostringstream sink;

}  // namespace

TEST_CASE("experiment names") {
    for (const auto kind : all_experiments()) {
        CHECK(parse_experiment_name(experiment_name(kind)) == kind);
    }
    CHECK(all_experiments().size() == 8);
    CHECK_FALSE(parse_experiment_name("figure-1").has_value());
}

TEST_CASE("config parsing") {
    SUBCASE("defaults") {
        const auto cfg = parse_config(json::object());
        CHECK(cfg.experiment == ExperimentKind::Simulate);
        CHECK(cfg.params.alpha == 0.5);
        CHECK(cfg.grid.t_end == 1e5);
        CHECK(cfg.grid.step == 0.1);
        CHECK(cfg.n_paths == 1);
        CHECK(cfg.tolerances.ks_threshold == 0.06);
        CHECK_FALSE(cfg.tolerances.exponent_window.has_value());
    }
    SUBCASE("fields are read") {
        auto doc = small_doc("limit-law");
        doc["tolerances"] = {{"exponent_window", {10, 100}}, {"ks_threshold", 0.1}};
        doc["master_seed"] = 18446744073709551615ull;
        const auto cfg = parse_config(doc);
        CHECK(cfg.experiment == ExperimentKind::LimitLaw);
        CHECK(cfg.grid.t_end == 100.0);
        CHECK(cfg.n_paths == 3);
        CHECK(cfg.master_seed == std::numeric_limits<std::uint64_t>::max());
        CHECK(cfg.tolerances.exponent_window == Window{10.0, 100.0});
        CHECK(cfg.tolerances.ks_threshold == 0.1);
    }
    SUBCASE("closed schema") {
        for (const char* level : {"", "params", "grid", "drift", "tolerances"}) {
            CAPTURE(level);
            auto doc = small_doc("simulate");
            if (*level == '\0') {
                doc["colour"] = 1;
            } else {
                doc[level]["colour"] = 1;
            }
            CHECK_THROWS_AS(parse_config(doc), ConfigError);
        }
    }
    SUBCASE("type errors") {
        auto doc = small_doc("simulate");
        doc["params"]["rho"] = "one";
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
        doc = small_doc("simulate");
        doc["n_paths"] = 2.5;
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
        doc = small_doc("simulate");
        doc["n_paths"] = -1;
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
        doc = small_doc("simulate");
        doc["experiment"] = "figure-1";
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
        doc = small_doc("simulate");
        doc["drift"]["kind"] = "cubic";
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
        CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
    }
    SUBCASE("invariants") {
        auto doc = small_doc("simulate");
        doc["params"]["rho"] = -1;
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
        doc = small_doc("simulate");
        doc["grid"]["step"] = 0.3;
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
        doc = small_doc("simulate");
        doc["n_paths"] = 0;
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
        doc = small_doc("simulate");
        doc["params"]["gamma"] = -0.25;
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
        doc["drift"]["kind"] = "smoothed-power-law";
        CHECK_NOTHROW(parse_config(doc));
    }
    SUBCASE("experiment-specific rules") {
        auto doc = small_doc("excursions");
        doc["params"]["delta"] = 2.5;
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
        doc = small_doc("hitting-tail");
        doc["params"]["y0"] = 0;
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
        doc["params"]["y0"] = 1;
        CHECK_NOTHROW(parse_config(doc));
        doc = small_doc("scaling-exponent");
        doc["tolerances"] = {{"exponent_window", {10, 1000}}};
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
        doc = small_doc("martingale-bounds");
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
    }
    SUBCASE("round trip and hash") {
        auto doc = small_doc("hitting-tail");
        doc["params"]["y0"] = 2;
        doc["tolerances"] = {{"hitting_times", {0.25, 4}}, {"tail_window", {5, 50}}};
        const auto cfg = parse_config(doc);
        const auto again = parse_config(config_to_json(cfg));
        CHECK(config_to_json(again) == config_to_json(cfg));
        CHECK(config_hash(again) == config_hash(cfg));
        CHECK(config_hash(cfg).size() == 16);

        auto moved = cfg;
        moved.output_dir = "elsewhere";
        CHECK(config_hash(moved) == config_hash(cfg));
        auto reseeded = cfg;
        reseeded.master_seed += 1;
        CHECK(config_hash(reseeded) != config_hash(cfg));
    }
    SUBCASE("shipped figure-1 profile") {
        const auto cfg = load_config(std::string(AKIN_SOURCE_DIR) + "/configs/figure1.json");
        CHECK(cfg.experiment == ExperimentKind::Simulate);
        CHECK(cfg.params.delta == 1.0);
        CHECK(cfg.params.alpha == 0.5);
        CHECK(cfg.params.gamma == 0.0);
        CHECK(cfg.params.rho == 1.0);
        CHECK(cfg.grid.step == 0.1);
        CHECK(cfg.grid.t_end == 1e5);
    }
    SUBCASE("unreadable files") {
        CHECK_THROWS_AS(load_config("/nonexistent/akin.json"), ConfigError);
        const auto dir = scratch("badjson");
        std::ofstream(dir / "bad.json") << "{ \"n_paths\": ";
        CHECK_THROWS_AS(load_config((dir / "bad.json").string()), ConfigError);
    }
}

TEST_CASE("CSV output is shortest round trip") {
    PathBundle p;
    p.t = {0.0, 0.1};
    p.S = {0.0, 1e300};
    p.X = {0.0, 5e-324};
    p.Y = {0.0, 1.0 / 3.0};
    p.U = {0.0, -0.0};
    p.M = {0.0, 123456789.125};
    p.A = {0.0, 2.0};
    const auto csv = trajectory_csv(p);
    CHECK(csv == "t,S,X,Y,U,M,A\n0,0,0,0,0,0,0\n0.1,1e+300,5e-324,0.3333333333333333,-0,123456789.125,2\n");

    // every field parses back to the same double
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line);
    std::getline(lines, line);
    std::vector<double> parsed;
    std::istringstream fields(line);
    std::string f;
    while (std::getline(fields, f, ',')) {
        double v = 0.0;
        std::from_chars(f.data(), f.data() + f.size(), v);
        parsed.push_back(v);
    }
    CHECK(parsed == std::vector<double>{0.1, 1e300, 5e-324, 1.0 / 3.0, -0.0, 123456789.125, 2.0});

    const std::vector<double> s{1.5, 0.1};
    CHECK(samples_csv(s) == "value\n1.5\n0.1\n");
}

TEST_CASE("checks and report") {
    CHECK(check_range("a", 1.0, 0.0, 2.0).pass);
    CHECK_FALSE(check_range("a", 3.0, 0.0, 2.0).pass);
    CHECK_FALSE(check_range("a", std::nan(""), std::nullopt, std::nullopt).pass);
    CHECK(check_range("a", -1e9, std::nullopt, 0.0).pass);

    Report r;
    r.experiment = "simulate";
    r.master_seed = 9;
    r.config_hash = "00000000000000ff";
    r.checks.push_back(check_range("good", 1.0, 0.0, std::nullopt));
    r.checks.push_back(check_range("bad", std::numeric_limits<double>::infinity(), std::nullopt, 1.0));
    CHECK_FALSE(r.passed());
    const auto j = r.to_json();
    CHECK(j["experiment"] == "simulate");
    CHECK(j["master_seed"] == 9);
    CHECK(j["config_hash"] == "00000000000000ff");
    CHECK(j["pass"] == false);
    REQUIRE(j["checks"].size() == 2);
    CHECK(j["checks"][0]["name"] == "good");
    CHECK(j["checks"][0]["tolerance"]["lower"] == 0.0);
    CHECK(j["checks"][0]["tolerance"]["upper"].is_null());
    CHECK(j["checks"][1]["measured"].is_null());
    REQUIRE(j["failures"].size() == 1);
    CHECK(j["failures"][0]["name"] == "bad");
}

TEST_CASE("run_experiment exit codes and artifacts") {
    SUBCASE("simulate passes and writes every file") {
        auto cfg = parse_config(small_doc("simulate"));
        cfg.output_dir = scratch("simulate").string();
        CHECK(run_experiment(cfg, 2, sink) == kExitPass);
        for (const char* name : {"trajectory_0.csv", "trajectory_1.csv", "trajectory_2.csv", "samples_final_X.csv",
                                 "report.json"}) {
            CAPTURE(name);
            CHECK(fs::exists(fs::path(cfg.output_dir) / name));
        }
        const auto report = json::parse(slurp(fs::path(cfg.output_dir) / "report.json"));
        CHECK(report["pass"] == true);
        CHECK(report["config_hash"] == config_hash(cfg));
        const auto traj = slurp(fs::path(cfg.output_dir) / "trajectory_0.csv");
        CHECK(traj.rfind("t,S,X,Y,U,M,A\n", 0) == 0);
    }
    SUBCASE("a failing check exits 1 and lists it") {
        auto doc = small_doc("scaling-exponent");
        doc["tolerances"] = {{"exponent_tolerance", 1e-9}};
        auto cfg = parse_config(doc);
        cfg.output_dir = scratch("tight").string();
        CHECK(run_experiment(cfg, 1, sink) == kExitCheckFailed);
        const auto report = json::parse(slurp(fs::path(cfg.output_dir) / "report.json"));
        CHECK(report["pass"] == false);
        CHECK(report["failures"][0]["name"] == "median_slope");
    }
    SUBCASE("numerical blowup exits 3") {
        auto doc = small_doc("simulate");
        doc["params"]["rho"] = 1e300;
        auto cfg = parse_config(doc);
        cfg.output_dir = scratch("blowup").string();
        CHECK(run_experiment(cfg, 1, sink) == kExitBlowup);
        CHECK(fs::exists(fs::path(cfg.output_dir) / "report.json"));
    }
    SUBCASE("an invalid config exits 2") {
        auto cfg = parse_config(small_doc("simulate"));
        cfg.n_paths = 0;
        CHECK(run_experiment(cfg, 1, sink) == kExitUsage);
    }
}

TEST_CASE("outputs are a pure function of config and seed") {
    auto doc = small_doc("comparison");
    doc["n_paths"] = 6;
    auto cfg = parse_config(doc);
    std::vector<std::string> reports;
    for (const int threads : {1, 3, 3}) {
        cfg.output_dir = scratch("det" + std::to_string(reports.size())).string();
        REQUIRE(run_experiment(cfg, threads, sink) == kExitPass);
        std::string all;
        for (const auto& entry : fs::directory_iterator(cfg.output_dir)) {
            all += entry.path().filename().string() + "\n" + slurp(entry.path());
        }
        reports.push_back(all);
    }
    CHECK(reports[0] == reports[1]);
    CHECK(reports[1] == reports[2]);
}

TEST_CASE("assumption (A_Y) verifier") {
    Tolerances tol;
    tol.ay_t_end = 65536.0;
    tol.ay_ratio_paths = 500;
    SUBCASE("clause (a) for delta 2, alpha 1") {
        const auto r = verify_assumption_ay(ModelParams{1.0, 1.0, 0.0, 2.0, 0.0, 0.0, 1.0}, 4, 21, tol);
        CHECK(std::fabs(r.clause_a_estimate - 1.0) < 3.0 * r.clause_a_stderr);
        CHECK(r.clause_a_pass);
        CHECK(r.clause_c_min_log_ratio.size() == 4);
        CHECK(r.clause_d_ratios.size() == tol.ay_ratio_times.size());
    }
    SUBCASE("alpha 0 is degenerate") {
        const auto r = verify_assumption_ay(ModelParams{1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0}, 4, 22, tol);
        CHECK(r.clause_b_degenerate);
        CHECK(r.clause_b_pass);
        CHECK(r.clause_a_estimate == doctest::Approx(1.0));
        CHECK(r.clause_d_pass);
        CHECK(r.clause_c_pass);
    }
}

TEST_CASE("command line") {
    const std::string cfg = std::string(AKIN_SOURCE_DIR) + "/configs/figure1.json";
    const auto dir = scratch("cli");
    const auto small = dir / "small.json";
    std::ofstream(small) << small_doc("simulate").dump();

    CHECK(run_cli("validate-config " + cfg) == 0);
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("no-such-experiment --config " + cfg) == 2);
    CHECK(run_cli("simulate") == 2);
    CHECK(run_cli("simulate --config " + (dir / "missing.json").string()) == 2);
    CHECK(run_cli("simulate --config " + small.string() + " --threads -1") == 2);
    // the config names simulate, so another experiment is refused
    CHECK(run_cli("comparison --config " + small.string() + " --out " + (dir / "x").string()) == 2);
    CHECK(run_cli("simulate --config " + small.string() + " --seed 5 --threads 2 --out " + (dir / "a").string()) ==
          0);
    CHECK(run_cli("simulate --config " + small.string() + " --seed 5 --out " + (dir / "b").string()) == 0);
    CHECK(slurp(dir / "a" / "trajectory_1.csv") == slurp(dir / "b" / "trajectory_1.csv"));
    CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
    const auto report = json::parse(slurp(dir / "a" / "report.json"));
    CHECK(report["master_seed"] == 5);

    ::setenv("AKIN_THREADS", "2", 1);
    CHECK(run_cli("simulate --config " + small.string() + " --seed 5 --out " + (dir / "c").string()) == 0);
    ::unsetenv("AKIN_THREADS");
    CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "c" / "report.json"));
}
