#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "akin/ensemble.hpp"
#include "akin/kinetic.hpp"
#include "akin/stats.hpp"

namespace akin {

enum class ExperimentKind {
    Simulate,
    ScalingExponent,
    LimitLaw,
    AssumptionAy,
    Excursions,
    HittingTail,
    MartingaleBounds,
    Comparison,
};

std::string_view experiment_name(ExperimentKind kind) noexcept;
std::optional<ExperimentKind> parse_experiment_name(std::string_view name) noexcept;
const std::vector<ExperimentKind>& all_experiments() noexcept;

struct DriftSpec {
    enum class Kind { ExactPowerLaw, SmoothedPowerLaw, Zero };
    Kind kind = Kind::ExactPowerLaw;
};

/// Power-law drifts take (rho, gamma, alpha) from the model parameters.
DriftField make_drift(const DriftSpec& spec, const ModelParams& params);

struct GridSpec {
    double t_end = 1e5;
    double step = 0.1;
    int per_decade = 32;
};

using Window = std::pair<double, double>;

/// Every threshold a recipe checks against. All have defaults; a config may
/// override any of them under "tolerances".
struct Tolerances {
    // scaling-exponent; window defaults to the top two decades of the run
    std::optional<Window> exponent_window;
    double exponent_tolerance = 0.05;

    // limit-law
    double ks_threshold = 0.06;
    int limit_n_steps = 2048;
    double degenerate_mean_tolerance = 0.05;
    double degenerate_sd_max = 0.05;

    // assumption-ay
    double ay_epsilon = 0.15;
    double ay_min_checkpoint = 1e4;
    double ay_path_fraction = 0.95;
    double ay_t_end = 1048576.0;
    double ay_step = 1.0;
    double ay_ratio_spread = 2.0;
    std::vector<double> ay_ratio_times = {10.0, 100.0, 1000.0, 10000.0};
    std::size_t ay_ratio_paths = 2000;
    double ay_ks_time = 1000.0;
    std::size_t ay_clause_a_points = 64;
    std::size_t ay_clause_a_draws = 4000;

    // excursions
    std::size_t excursion_count = 100000;
    double excursion_step = 1e-3;
    double excursion_cap = 100.0;
    Window integral_window = {1.0, 10.0};
    double integral_slope_slack = 0.1;
    Window duration_window = {10.0, 100.0};

    // hitting-tail
    std::size_t hitting_draws = 1000000;
    std::size_t tail_draws = 100000;
    std::vector<double> hitting_times = {0.5, 1.0, 5.0};
    std::vector<double> bound_times = {1.0, 10.0, 100.0, 1000.0};
    Window tail_window = {10.0, 100.0};
    double tail_slope_tolerance = 0.05;
    double closed_form_tolerance = 0.002;
    double ode_residual_max = 1e-4;

    // martingale-bounds
    std::vector<double> martingale_times = {100.0, 1000.0, 10000.0};
    double martingale_slope_slack = 0.15;
    std::vector<double> negligibility_times = {1000.0, 10000.0, 100000.0};
    std::size_t negligibility_paths = 200;
    double negligibility_epsilon = 0.1;
    double negligibility_fraction = 0.9;

    // comparison
    double comparison_tolerance = 1e-6;

    // shared
    double sigma_multiplier = 3.0;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Simulate;
    ModelParams params;
    DriftSpec drift;
    GridSpec grid;
    std::size_t n_paths = 1;
    std::uint64_t master_seed = 0;
    std::string output_dir = "out";
    Tolerances tolerances;

    void validate() const;
};

/// Parses the closed config schema; unknown keys and invalid values throw ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
/// Reads a JSON document; I/O and syntax errors throw ConfigError.
nlohmann::json read_json_file(const std::string& path);
/// Canonical JSON form with every default filled in.
nlohmann::json config_to_json(const ExperimentConfig& config);
/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// One named check with its measured value and admissible range.
struct Check {
    std::string name;
    double measured = 0.0;
    std::optional<double> lower;
    std::optional<double> upper;
    bool pass = false;
};

Check check_range(std::string name, double measured, std::optional<double> lower, std::optional<double> upper);

struct Report {
    std::string experiment;
    std::uint64_t master_seed = 0;
    std::string config_hash;
    std::vector<Check> checks;
    nlohmann::json summary = nlohmann::json::object();

    bool passed() const;
    nlohmann::json to_json() const;
};

/// Assumption (A_Y) diagnostics for standalone BESQ(delta, y0).
struct AyReport {
    // (a) int_0^1 E Y_t^alpha dt
    double clause_a_estimate = 0.0;
    double clause_a_stderr = 0.0;
    bool clause_a_pass = false;
    // (b) A_T / T^(1+beta) against draws of A~; degenerate when alpha = 0
    KsReport clause_b_ks;
    bool clause_b_degenerate = false;
    double clause_b_max_deviation = 0.0;
    bool clause_b_pass = false;
    std::vector<double> clause_b_ratios;     // A_T / T^(1+beta), one per path
    std::vector<double> clause_b_reference;  // draws of A~
    // (c) per path, the minimum of log A_t / log t at late dyadic checkpoints
    std::vector<double> clause_c_min_log_ratio;
    double clause_c_fraction = 0.0;
    bool clause_c_pass = false;
    // (d) Monte Carlo E A_t / t^(1+beta) over a t grid
    std::vector<double> clause_d_times;
    std::vector<double> clause_d_ratios;
    double clause_d_spread = 0.0;
    bool clause_d_pass = false;

    bool passed() const { return clause_a_pass && clause_b_pass && clause_c_pass && clause_d_pass; }
};

AyReport verify_assumption_ay(const ModelParams& params, std::size_t n_paths, std::uint64_t seed,
                              const Tolerances& tol = {}, const RunOptions& opt = {});

/// A named column of scalar samples, written as samples_<name>.csv.
struct SampleSet {
    std::string name;
    std::vector<double> values;
};

struct ExperimentResult {
    Report report;
    std::vector<PathBundle> trajectories;
    std::vector<SampleSet> samples;
};

/// Runs a recipe in memory. Throws NumericalBlowup, ConfigError, ParameterError.
ExperimentResult execute_experiment(const ExperimentConfig& config, int threads = 0);

/// CSV bodies with a header row; doubles in shortest round-trip form.
std::string trajectory_csv(const PathBundle& path);
std::string samples_csv(std::span<const double> values);

/// Writes trajectory_<id>.csv, samples_<name>.csv and report.json under `dir`.
void write_artifacts(const ExperimentResult& result, const std::string& dir);

/// Exit status contract of the CLI.
enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitUsage = 2, kExitBlowup = 3 };

/// execute_experiment + write_artifacts, mapping outcomes onto exit codes.
/// Diagnostics go to `log` (stderr in the CLI).
int run_experiment(const ExperimentConfig& config, int threads, std::ostream& log);

}  // namespace akin
