#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "akin/bessel.hpp"
#include "akin/errors.hpp"
#include "akin/experiments.hpp"

namespace akin {

using nlohmann::json;

static_assert(std::is_same_v<std::uint64_t, std::size_t>, "master_seed is read through the size_t overload");

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 8> kNames{{
    {ExperimentKind::Simulate, "simulate"},
    {ExperimentKind::ScalingExponent, "scaling-exponent"},
    {ExperimentKind::LimitLaw, "limit-law"},
    {ExperimentKind::AssumptionAy, "assumption-ay"},
    {ExperimentKind::Excursions, "excursions"},
    {ExperimentKind::HittingTail, "hitting-tail"},
    {ExperimentKind::MartingaleBounds, "martingale-bounds"},
    {ExperimentKind::Comparison, "comparison"},
}};

constexpr std::array<std::pair<DriftSpec::Kind, std::string_view>, 3> kDriftNames{{
    {DriftSpec::Kind::ExactPowerLaw, "exact-power-law"},
    {DriftSpec::Kind::SmoothedPowerLaw, "smoothed-power-law"},
    {DriftSpec::Kind::Zero, "zero"},
}};

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw ConfigError(where + ": " + msg);
}

// Reads the members of one JSON object and rejects any key nobody asked for.
class Reader {
public:
    Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) {
            fail(where_, "expected an object");
        }
    }

    void operator()(const char* key, double& v) {
        if (const json* j = take(key)) {
            if (!j->is_number()) fail(path(key), "expected a number");
            v = j->get<double>();
            if (!std::isfinite(v)) fail(path(key), "must be finite");
        }
    }
    void operator()(const char* key, int& v) {
        if (const json* j = take(key)) {
            if (!j->is_number_integer()) fail(path(key), "expected an integer");
            v = j->get<int>();
        }
    }
    void operator()(const char* key, std::size_t& v) {
        if (const json* j = take(key)) {
            // documents built in code hold small integers as signed
            const bool ok = j->is_number_unsigned() || (j->is_number_integer() && j->get<std::int64_t>() >= 0);
            if (!ok) fail(path(key), "expected a nonnegative integer");
            v = j->get<std::size_t>();
        }
    }
    void operator()(const char* key, std::string& v) {
        if (const json* j = take(key)) {
            if (!j->is_string()) fail(path(key), "expected a string");
            v = j->get<std::string>();
        }
    }
    void operator()(const char* key, std::vector<double>& v) {
        if (const json* j = take(key)) {
            if (!j->is_array() || j->empty()) fail(path(key), "expected a nonempty array of numbers");
            v.clear();
            for (const auto& e : *j) {
                if (!e.is_number()) fail(path(key), "expected a nonempty array of numbers");
                v.push_back(e.get<double>());
            }
        }
    }
    void operator()(const char* key, Window& v) {
        if (const json* j = take(key)) {
            v = window(*j, key);
        }
    }
    void operator()(const char* key, std::optional<Window>& v) {
        if (const json* j = take(key)) {
            if (j->is_null()) {
                v.reset();
            } else {
                v = window(*j, key);
            }
        }
    }

    const json* take(const char* key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (const auto& item : obj_.items()) {
            if (!seen_.count(item.key())) {
                fail(where_, "unknown key \"" + item.key() + "\"");
            }
        }
    }

private:
    std::string path(const char* key) const { return where_ + "." + key; }

    Window window(const json& j, const char* key) const {
        if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
            fail(path(key), "expected [lo, hi]");
        }
        return {j[0].get<double>(), j[1].get<double>()};
    }

    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

// Writes the same members Reader reads, in the same vocabulary.
struct Writer {
    json& obj;
    template <class T>
    void operator()(const char* key, const T& v) {
        obj[key] = v;
    }
    void operator()(const char* key, const Window& v) { obj[key] = json::array({v.first, v.second}); }
    void operator()(const char* key, const std::optional<Window>& v) {
        obj[key] = v ? json::array({v->first, v->second}) : json(nullptr);
    }
};

template <class P, class F>
void params_fields(P& p, F&& f) {
    f("rho", p.rho);
    f("alpha", p.alpha);
    f("gamma", p.gamma);
    f("delta", p.delta);
    f("s0", p.s0);
    f("y0", p.y0);
    f("correlation", p.correlation);
}

template <class G, class F>
void grid_fields(G& g, F&& f) {
    f("t_end", g.t_end);
    f("step", g.step);
    f("per_decade", g.per_decade);
}

template <class T, class F>
void tolerance_fields(T& t, F&& f) {
    f("exponent_window", t.exponent_window);
    f("exponent_tolerance", t.exponent_tolerance);
    f("ks_threshold", t.ks_threshold);
    f("limit_n_steps", t.limit_n_steps);
    f("degenerate_mean_tolerance", t.degenerate_mean_tolerance);
    f("degenerate_sd_max", t.degenerate_sd_max);
    f("ay_epsilon", t.ay_epsilon);
    f("ay_min_checkpoint", t.ay_min_checkpoint);
    f("ay_path_fraction", t.ay_path_fraction);
    f("ay_t_end", t.ay_t_end);
    f("ay_step", t.ay_step);
    f("ay_ratio_spread", t.ay_ratio_spread);
    f("ay_ratio_times", t.ay_ratio_times);
    f("ay_ratio_paths", t.ay_ratio_paths);
    f("ay_ks_time", t.ay_ks_time);
    f("ay_clause_a_points", t.ay_clause_a_points);
    f("ay_clause_a_draws", t.ay_clause_a_draws);
    f("excursion_count", t.excursion_count);
    f("excursion_step", t.excursion_step);
    f("excursion_cap", t.excursion_cap);
    f("integral_window", t.integral_window);
    f("integral_slope_slack", t.integral_slope_slack);
    f("duration_window", t.duration_window);
    f("hitting_draws", t.hitting_draws);
    f("tail_draws", t.tail_draws);
    f("hitting_times", t.hitting_times);
    f("bound_times", t.bound_times);
    f("tail_window", t.tail_window);
    f("tail_slope_tolerance", t.tail_slope_tolerance);
    f("closed_form_tolerance", t.closed_form_tolerance);
    f("ode_residual_max", t.ode_residual_max);
    f("martingale_times", t.martingale_times);
    f("martingale_slope_slack", t.martingale_slope_slack);
    f("negligibility_times", t.negligibility_times);
    f("negligibility_paths", t.negligibility_paths);
    f("negligibility_epsilon", t.negligibility_epsilon);
    f("negligibility_fraction", t.negligibility_fraction);
    f("comparison_tolerance", t.comparison_tolerance);
    f("sigma_multiplier", t.sigma_multiplier);
}

void check(bool ok, const std::string& where, const std::string& msg) {
    if (!ok) {
        fail(where, msg);
    }
}

void check_window(const Window& w, const std::string& where) {
    check(w.first > 0.0 && w.second > w.first, where, "window needs 0 < lo < hi");
}

void check_times(const std::vector<double>& times, const std::string& where) {
    check(!times.empty(), where, "must not be empty");
    for (std::size_t i = 0; i < times.size(); ++i) {
        check(times[i] > 0.0 && std::isfinite(times[i]), where, "times must be positive");
        check(i == 0 || times[i] > times[i - 1], where, "times must be strictly increasing");
    }
}

void check_fraction(double v, const std::string& where) { check(v > 0.0 && v <= 1.0, where, "must lie in (0, 1]"); }

void validate_tolerances(const Tolerances& t) {
    if (t.exponent_window) {
        check_window(*t.exponent_window, "tolerances.exponent_window");
    }
    check(t.exponent_tolerance > 0.0, "tolerances.exponent_tolerance", "must be positive");
    check(t.ks_threshold > 0.0 && t.ks_threshold <= 1.0, "tolerances.ks_threshold", "must lie in (0, 1]");
    check(t.limit_n_steps >= 2, "tolerances.limit_n_steps", "must be at least 2");
    check(t.degenerate_mean_tolerance > 0.0, "tolerances.degenerate_mean_tolerance", "must be positive");
    check(t.degenerate_sd_max > 0.0, "tolerances.degenerate_sd_max", "must be positive");
    check(t.ay_epsilon > 0.0, "tolerances.ay_epsilon", "must be positive");
    check(t.ay_min_checkpoint > 1.0, "tolerances.ay_min_checkpoint", "must exceed 1");
    check_fraction(t.ay_path_fraction, "tolerances.ay_path_fraction");
    check(t.ay_t_end >= t.ay_min_checkpoint, "tolerances.ay_t_end", "must be at least ay_min_checkpoint");
    check(t.ay_step > 0.0 && t.ay_step <= 1.0 &&
              std::fabs(1.0 / t.ay_step - std::round(1.0 / t.ay_step)) < 1e-9 / t.ay_step,
          "tolerances.ay_step", "must divide 1");
    check(t.ay_ratio_spread >= 1.0, "tolerances.ay_ratio_spread", "must be at least 1");
    check_times(t.ay_ratio_times, "tolerances.ay_ratio_times");
    check(t.ay_ratio_times.front() > 1.0, "tolerances.ay_ratio_times", "times must exceed 1");
    check(t.ay_ratio_paths >= 2, "tolerances.ay_ratio_paths", "must be at least 2");
    check(t.ay_ks_time > 1.0, "tolerances.ay_ks_time", "must exceed 1");
    check(t.ay_clause_a_points >= 1, "tolerances.ay_clause_a_points", "must be positive");
    check(t.ay_clause_a_draws >= 2, "tolerances.ay_clause_a_draws", "must be at least 2");
    check(t.excursion_count >= 2, "tolerances.excursion_count", "must be at least 2");
    check(t.excursion_step > 0.0, "tolerances.excursion_step", "must be positive");
    check(t.excursion_cap > t.excursion_step, "tolerances.excursion_cap", "must exceed the step");
    check_window(t.integral_window, "tolerances.integral_window");
    check_window(t.duration_window, "tolerances.duration_window");
    check(t.duration_window.second <= t.excursion_cap, "tolerances.duration_window",
          "upper end must not exceed excursion_cap");
    check(t.integral_slope_slack >= 0.0, "tolerances.integral_slope_slack", "must be nonnegative");
    check(t.hitting_draws >= 2 && t.tail_draws >= 2, "tolerances.hitting_draws", "draw counts must be at least 2");
    check_times(t.hitting_times, "tolerances.hitting_times");
    check_times(t.bound_times, "tolerances.bound_times");
    check_window(t.tail_window, "tolerances.tail_window");
    check(t.tail_slope_tolerance > 0.0, "tolerances.tail_slope_tolerance", "must be positive");
    check(t.closed_form_tolerance > 0.0, "tolerances.closed_form_tolerance", "must be positive");
    check(t.ode_residual_max > 0.0, "tolerances.ode_residual_max", "must be positive");
    check_times(t.martingale_times, "tolerances.martingale_times");
    check(t.martingale_times.size() >= 2, "tolerances.martingale_times", "need at least two times");
    check(t.martingale_slope_slack >= 0.0, "tolerances.martingale_slope_slack", "must be nonnegative");
    check_times(t.negligibility_times, "tolerances.negligibility_times");
    check(t.negligibility_times.size() >= 2, "tolerances.negligibility_times", "need at least two times");
    check(t.negligibility_paths >= 1, "tolerances.negligibility_paths", "must be positive");
    check(t.negligibility_epsilon > 0.0, "tolerances.negligibility_epsilon", "must be positive");
    check_fraction(t.negligibility_fraction, "tolerances.negligibility_fraction");
    check(t.comparison_tolerance >= 0.0, "tolerances.comparison_tolerance", "must be nonnegative");
    check(t.sigma_multiplier > 0.0, "tolerances.sigma_multiplier", "must be positive");
}

}  // namespace

std::string_view experiment_name(ExperimentKind kind) noexcept {
    for (const auto& [k, name] : kNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

std::optional<ExperimentKind> parse_experiment_name(std::string_view name) noexcept {
    for (const auto& [k, n] : kNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

const std::vector<ExperimentKind>& all_experiments() noexcept {
    static const std::vector<ExperimentKind> all = [] {
        std::vector<ExperimentKind> v;
        for (const auto& entry : kNames) v.push_back(entry.first);
        return v;
    }();
    return all;
}

DriftField make_drift(const DriftSpec& spec, const ModelParams& p) {
    switch (spec.kind) {
        case DriftSpec::Kind::ExactPowerLaw: return DriftField::exact_power_law(p.rho, p.gamma, p.alpha);
        case DriftSpec::Kind::SmoothedPowerLaw: return DriftField::smoothed_power_law(p.rho, p.gamma, p.alpha);
        case DriftSpec::Kind::Zero: return DriftField::zero();
    }
    throw ConfigError("unknown drift kind");
}

void ExperimentConfig::validate() const {
    try {
        params.validate();
    } catch (const ParameterError& e) {
        fail("params", e.what());
    }
    check(n_paths >= 1, "n_paths", "must be at least 1");
    check(!output_dir.empty(), "output_dir", "must not be empty");
    check(grid.per_decade > 0, "grid.per_decade", "must be positive");
    try {
        (void)TimeGrid::geometric(grid.t_end, grid.step, grid.per_decade);
    } catch (const ParameterError& e) {
        fail("grid", e.what());
    }
    validate_tolerances(tolerances);
    if (drift.kind == DriftSpec::Kind::ExactPowerLaw && params.gamma < 0.0) {
        fail("drift.kind", "exact-power-law is infinite at t = 0 when gamma < 0; use smoothed-power-law");
    }

    const double t_end = grid.t_end;
    switch (experiment) {
        case ExperimentKind::ScalingExponent: {
            const Window w = tolerances.exponent_window.value_or(Window{t_end / 100.0, t_end});
            check(w.second <= t_end * (1.0 + 1e-12), "tolerances.exponent_window", "must end by grid.t_end");
            break;
        }
        case ExperimentKind::Excursions:
            check(params.delta < 2.0, "params.delta", "excursions need 0 < delta < 2 (Y must return to 0)");
            break;
        case ExperimentKind::HittingTail:
            check(params.delta < 2.0, "params.delta", "hitting times need 0 < delta < 2");
            check(params.y0 > 0.0, "params.y0", "hitting times need y0 > 0");
            break;
        case ExperimentKind::MartingaleBounds:
            check(tolerances.martingale_times.back() <= t_end && tolerances.negligibility_times.back() <= t_end,
                  "grid.t_end", "must cover martingale_times and negligibility_times");
            break;
        case ExperimentKind::AssumptionAy:
            check(tolerances.ay_ks_time <= tolerances.ay_t_end &&
                      tolerances.ay_ratio_times.back() <= tolerances.ay_t_end,
                  "tolerances.ay_t_end", "must cover ay_ks_time and ay_ratio_times");
            break;
        default: break;
    }
}

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig cfg;
    Reader top(doc, "config");
    if (const json* j = top.take("experiment")) {
        if (!j->is_string()) fail("config.experiment", "expected a string");
        const auto kind = parse_experiment_name(j->get<std::string>());
        if (!kind) fail("config.experiment", "unknown experiment \"" + j->get<std::string>() + "\"");
        cfg.experiment = *kind;
    }
    if (const json* j = top.take("params")) {
        Reader r(*j, "params");
        params_fields(cfg.params, r);
        r.finish();
    }
    if (const json* j = top.take("drift")) {
        Reader r(*j, "drift");
        std::string kind = "exact-power-law";
        r("kind", kind);
        r.finish();
        bool found = false;
        for (const auto& [k, name] : kDriftNames) {
            if (name == kind) {
                cfg.drift.kind = k;
                found = true;
            }
        }
        if (!found) fail("drift.kind", "unknown drift \"" + kind + "\"");
    }
    if (const json* j = top.take("grid")) {
        Reader r(*j, "grid");
        grid_fields(cfg.grid, r);
        r.finish();
    }
    top("n_paths", cfg.n_paths);
    top("master_seed", cfg.master_seed);
    top("output_dir", cfg.output_dir);
    if (const json* j = top.take("tolerances")) {
        Reader r(*j, "tolerances");
        tolerance_fields(cfg.tolerances, r);
        r.finish();
    }
    top.finish();
    cfg.validate();
    return cfg;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

json config_to_json(const ExperimentConfig& cfg) {
    json out = json::object();
    out["experiment"] = std::string(experiment_name(cfg.experiment));
    json params = json::object();
    Writer pw{params};
    params_fields(cfg.params, pw);
    out["params"] = params;
    for (const auto& [k, name] : kDriftNames) {
        if (k == cfg.drift.kind) out["drift"] = json{{"kind", std::string(name)}};
    }
    json grid = json::object();
    Writer gw{grid};
    grid_fields(cfg.grid, gw);
    out["grid"] = grid;
    out["n_paths"] = cfg.n_paths;
    out["master_seed"] = cfg.master_seed;
    out["output_dir"] = cfg.output_dir;
    json tol = json::object();
    Writer tw{tol};
    tolerance_fields(cfg.tolerances, tw);
    out["tolerances"] = tol;
    return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
    // where the artifacts land does not change them
    json doc = config_to_json(cfg);
    doc.erase("output_dir");
    const std::string text = doc.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace akin
