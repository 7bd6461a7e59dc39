#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "akin/bessel.hpp"
#include "akin/errors.hpp"
#include "akin/experiments.hpp"
#include "akin/functionals.hpp"

namespace akin {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const KsReport& ks) {
    return {{"statistic", ks.statistic},
            {"n", ks.n},
            {"m", ks.m},
            {"critical_value_1pct", ks.critical_value_1pct},
            {"pass_1pct", ks.pass}};
}

json to_json(const TailFit& fit) {
    return {{"slope", finite_or_null(fit.slope)}, {"stderr", finite_or_null(fit.stderr_slope)}, {"points", fit.points}};
}

struct Context {
    const ExperimentConfig& cfg;
    RunOptions opt;
    DriftField drift;
    ExperimentResult result;

    const Tolerances& tol() const { return cfg.tolerances; }
    const ModelParams& params() const { return cfg.params; }
    void add(Check c) { result.report.checks.push_back(std::move(c)); }
    json& summary() { return result.report.summary; }
    void samples(std::string name, std::vector<double> values) {
        result.samples.push_back({std::move(name), std::move(values)});
    }
};

// Slope over [lo, hi]; on a nonpositive value the window restarts just past
// the offending checkpoint. NaN when fewer than 4 usable checkpoints remain.
double fit_shrinking(const std::vector<double>& t, const std::vector<double>& v, double lo, double hi) {
    for (;;) {
        try {
            return estimate_exponent(t, v, lo, hi).slope;
        } catch (const ShrinkWindowError& e) {
            lo = std::nextafter(e.where(), std::numeric_limits<double>::infinity());
        } catch (const InsufficientData&) {
            return kNaN;
        }
    }
}

std::vector<double> finite_only(const std::vector<double>& v) {
    std::vector<double> out;
    for (const double x : v) {
        if (std::isfinite(x)) out.push_back(x);
    }
    return out;
}

// Fit of a survival curve; NaN slope if the window has too little mass.
TailFit safe_tail(const std::vector<double>& samples, const Window& w) {
    const auto points = log_space(w.first, w.second, 16);
    const auto curve = survival_curve(samples, points);
    try {
        return tail_slope(curve, w.first, w.second);
    } catch (const std::domain_error&) {
    } catch (const std::invalid_argument&) {
    }
    return {kNaN, kNaN, 0};
}

void run_simulate(Context& ctx) {
    const auto& g = ctx.cfg.grid;
    const auto grid = TimeGrid::geometric(g.t_end, g.step, g.per_decade);
    auto paths = simulate_ensemble(ctx.params(), ctx.drift, grid, ctx.cfg.n_paths, ctx.opt);

    double min_s = std::numeric_limits<double>::infinity();
    double min_y = min_s;
    double min_x = min_s;
    double worst_identity = 0.0;
    double worst_root = 0.0;
    double monotone_breaks = 0.0;
    std::vector<double> final_x;
    for (const auto& p : paths) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            min_s = std::min(min_s, p.S[i]);
            min_y = std::min(min_y, p.Y[i]);
            min_x = std::min(min_x, p.X[i]);
            const double scale = std::max(1.0, std::fabs(p.S[i]));
            worst_identity = std::max(
                worst_identity, std::fabs(p.M[i] - (p.S[i] - ctx.params().s0 - p.U[i] - p.t[i])) / scale);
            worst_root = std::max(worst_root, std::fabs(p.X[i] * p.X[i] - p.S[i]) / scale);
            if (i > 0 && (p.U[i] < p.U[i - 1] || p.A[i] < p.A[i - 1])) {
                monotone_breaks += 1.0;
            }
        }
        final_x.push_back(p.X.back());
    }
    ctx.add(check_range("min_S", min_s, 0.0, std::nullopt));
    ctx.add(check_range("min_Y", min_y, 0.0, std::nullopt));
    ctx.add(check_range("min_X", min_x, 0.0, std::nullopt));
    ctx.add(check_range("max_root_error", worst_root, std::nullopt, 1e-12));
    ctx.add(check_range("max_decomposition_residual", worst_identity, std::nullopt, 1e-9));
    ctx.add(check_range("U_A_monotonicity_breaks", monotone_breaks, std::nullopt, 0.0));
    ctx.summary()["paths"] = paths.size();
    ctx.summary()["record_times"] = paths.front().size();
    ctx.samples("final_X", std::move(final_x));
    ctx.result.trajectories = std::move(paths);
}

void run_scaling(Context& ctx) {
    const auto& g = ctx.cfg.grid;
    const auto grid = TimeGrid::geometric(g.t_end, g.step, g.per_decade);
    const Window w = ctx.tol().exponent_window.value_or(Window{grid.t_end() / 100.0, grid.t_end()});
    auto paths = simulate_ensemble(ctx.params(), ctx.drift, grid, ctx.cfg.n_paths, ctx.opt);

    std::vector<double> slopes;
    slopes.reserve(paths.size());
    for (const auto& p : paths) {
        slopes.push_back(fit_shrinking(p.t, p.X, w.first, w.second));
    }
    const auto usable = finite_only(slopes);
    const double target = ctx.params().exponent();
    const double med = usable.empty() ? kNaN : median(usable);
    ctx.add(check_range("median_slope", med, target - ctx.tol().exponent_tolerance,
                        target + ctx.tol().exponent_tolerance));
    ctx.add(check_range("failed_fits", static_cast<double>(slopes.size() - usable.size()), std::nullopt, 0.0));
    ctx.summary()["target"] = target;
    ctx.summary()["window"] = {w.first, w.second};
    ctx.summary()["paths"] = paths.size();
    if (usable.size() >= 2) {
        ctx.summary()["slope_mean"] = mean(usable);
        ctx.summary()["slope_sd"] = std::sqrt(variance(usable));
        ctx.summary()["slope_q10"] = quantile(usable, 0.1);
        ctx.summary()["slope_q90"] = quantile(usable, 0.9);
    }
    ctx.samples("slopes", std::move(usable));
    ctx.result.trajectories = std::move(paths);
}

void run_limit_law(Context& ctx) {
    const auto& p = ctx.params();
    const double T = ctx.cfg.grid.t_end;
    const auto grid = TimeGrid::at(T, ctx.cfg.grid.step, {T});
    const double scale = std::pow(grid.t_end(), -p.exponent());
    const auto paths = simulate_ensemble(p, ctx.drift, grid, ctx.cfg.n_paths, ctx.opt);
    std::vector<double> scaled;
    scaled.reserve(paths.size());
    for (const auto& path : paths) {
        scaled.push_back(scale * path.X.back());
    }
    const auto spec = LimitLawSpec::from(p, ctx.tol().limit_n_steps);
    auto reference = scaled_X_limit_draws(p.rho, spec, ctx.cfg.n_paths, ctx.opt);

    ctx.summary()["T"] = grid.t_end();
    ctx.summary()["scale_exponent"] = p.exponent();
    if (p.alpha == 0.0) {
        // the limit is the point sqrt(2 rho / (1 + gamma)); KS against a point mass says nothing
        const double target = std::sqrt(2.0 * p.rho / (1.0 + p.gamma));
        const double m = mean(scaled);
        const double sd = scaled.size() > 1 ? std::sqrt(variance(scaled)) : 0.0;
        const double tol = ctx.tol().degenerate_mean_tolerance;
        ctx.add(check_range("scaled_mean", m, target - tol, target + tol));
        ctx.add(check_range("scaled_sd", sd, std::nullopt, ctx.tol().degenerate_sd_max));
        ctx.summary()["degenerate_target"] = target;
    } else {
        const auto ks = ks_two_sample(scaled, reference);
        ctx.add(check_range("ks_statistic", ks.statistic, std::nullopt, ctx.tol().ks_threshold));
        ctx.summary()["ks"] = to_json(ks);
        ctx.summary()["scaled_mean"] = mean(scaled);
        ctx.summary()["reference_mean"] = mean(reference);
    }
    ctx.samples("scaled_X", std::move(scaled));
    ctx.samples("limit_draws", std::move(reference));
}

void run_assumption_ay(Context& ctx) {
    const auto r = verify_assumption_ay(ctx.params(), ctx.cfg.n_paths, ctx.cfg.master_seed, ctx.tol(), ctx.opt);
    const double beta = ctx.params().beta();
    ctx.add(check_range("clause_a_integral", r.clause_a_estimate, std::numeric_limits<double>::min(),
                        std::numeric_limits<double>::max()));
    if (r.clause_b_degenerate) {
        ctx.add(check_range("clause_b_max_relative_deviation", r.clause_b_max_deviation, std::nullopt, 1e-3));
    } else {
        ctx.add(check_range("clause_b_ks_statistic", r.clause_b_ks.statistic, std::nullopt,
                            r.clause_b_ks.critical_value_1pct));
    }
    ctx.add(check_range("clause_c_path_fraction", r.clause_c_fraction, ctx.tol().ay_path_fraction, std::nullopt));
    ctx.add(check_range("clause_d_ratio_spread", r.clause_d_spread, std::nullopt, ctx.tol().ay_ratio_spread));

    auto& s = ctx.summary();
    s["clause_a"] = {{"estimate", r.clause_a_estimate}, {"stderr", r.clause_a_stderr}};
    s["clause_b"] = r.clause_b_degenerate ? json{{"degenerate", true}, {"max_relative_deviation", r.clause_b_max_deviation}}
                                          : json{{"degenerate", false}, {"ks", to_json(r.clause_b_ks)}};
    s["clause_c"] = {{"threshold", 1.0 + beta - ctx.tol().ay_epsilon},
                     {"fraction", r.clause_c_fraction},
                     {"paths", r.clause_c_min_log_ratio.size()}};
    json d = json::array();
    for (std::size_t i = 0; i < r.clause_d_times.size(); ++i) {
        d.push_back({{"t", r.clause_d_times[i]}, {"mean_ratio", finite_or_null(r.clause_d_ratios[i])}});
    }
    s["clause_d"] = {{"ratios", d}, {"spread", finite_or_null(r.clause_d_spread)}};
    ctx.samples("A_ratio", r.clause_b_ratios);
    ctx.samples("limit_A", r.clause_b_reference);
    ctx.samples("min_log_ratio", r.clause_c_min_log_ratio);
}

struct Cycle {
    ExcursionRecord record;
    bool censored = false;
};

// One renewal cycle of BESQ(delta, 0) by full-truncation Euler: climb to 1,
// then fall back to 0. A fall still open after `cap` is cut off and returned
// censored, with nu = cap and the integral accumulated so far (a lower bound).
Cycle run_cycle(RngStream& stream, double delta, double alpha, double h, double cap) {
    ExcursionScanner scanner(h, alpha);
    const double sqrt_h = std::sqrt(h);
    double y = 0.0;
    scanner.push(y);
    double t = 0.0;
    double upsilon = kNaN;
    for (;;) {
        y += delta * h + 2.0 * std::sqrt(y) * sqrt_h * sample_normal(stream);
        y = y > 0.0 ? y : 0.0;
        t += h;
        scanner.push(y);
        if (!scanner.records().empty()) {
            return {scanner.records().front(), false};
        }
        if (scanner.in_fall()) {
            if (std::isnan(upsilon)) upsilon = t;
            if (scanner.open_duration() >= cap) {
                return {{upsilon, std::max(cap, scanner.open_duration()), scanner.open_integral()}, true};
            }
        } else if (t >= cap) {
            // never reached 1: nothing of the fall has been observed
            return {{t, 0.0, 0.0}, true};
        }
    }
}

void run_excursions(Context& ctx) {
    const auto& p = ctx.params();
    const auto& tol = ctx.tol();
    const std::size_t n = tol.excursion_count;
    const auto cycles = map_streams<Cycle>(
        ctx.opt.exec, ctx.opt.seed, streams::kExcursions, n,
        [&](RngStream& s, std::size_t) { return run_cycle(s, p.delta, p.alpha, tol.excursion_step, tol.excursion_cap); },
        ctx.opt.threads);

    std::vector<double> nu;
    std::vector<double> integral;
    std::vector<double> upsilon;
    std::size_t censored = 0;
    std::size_t censored_low = 0;
    for (const auto& c : cycles) {
        nu.push_back(c.record.nu);
        integral.push_back(c.record.integral);
        upsilon.push_back(c.record.upsilon);
        if (c.censored) {
            ++censored;
            if (c.record.integral < tol.integral_window.second) ++censored_low;
        }
    }

    const double nu_target = p.delta / 2.0 - 1.0;
    const double i_exponent = -(2.0 - p.delta) / (2.0 + 2.0 * p.alpha);
    const auto nu_fit = safe_tail(nu, tol.duration_window);
    const auto i_fit = safe_tail(integral, tol.integral_window);

    auto exact = tau0_draws(BesqParams{p.delta, 1.0}, n, ctx.opt);
    const auto exact_fit = safe_tail(exact, tol.duration_window);

    // lower bound P(I >= z) >= 0.5 c z^q with c calibrated at the left end
    const auto zs = log_space(tol.integral_window.first, tol.integral_window.second, 16);
    const auto surv = survival_curve(integral, zs);
    const double c_hat = surv.front().survival * std::pow(zs.front(), -i_exponent);
    double worst_ratio = std::numeric_limits<double>::infinity();
    for (const auto& pt : surv) {
        worst_ratio = std::min(worst_ratio, pt.survival / (c_hat * std::pow(pt.t, i_exponent)));
    }

    const std::size_t half = n / 2;
    const std::span<const double> nu_all(nu);
    const std::span<const double> i_all(integral);
    const auto nu_halves = ks_two_sample(nu_all.first(half), nu_all.subspan(half));
    const auto i_halves = ks_two_sample(i_all.first(half), i_all.subspan(half));

    const double slack = tol.tail_slope_tolerance;
    ctx.add(check_range("nu_tail_slope", nu_fit.slope, nu_target - slack, nu_target + slack));
    ctx.add(check_range("nu_exact_tail_slope", exact_fit.slope, nu_target - slack, nu_target + slack));
    ctx.add(check_range("integral_tail_slope", i_fit.slope, i_exponent - tol.integral_slope_slack, std::nullopt));
    ctx.add(check_range("integral_tail_lower_bound_ratio", worst_ratio, 0.5, std::nullopt));
    ctx.add(check_range("censored_below_integral_window", static_cast<double>(censored_low), std::nullopt, 0.0));
    ctx.add(check_range("nu_halves_ks_statistic", nu_halves.statistic, std::nullopt, nu_halves.critical_value_1pct));
    ctx.add(check_range("integral_halves_ks_statistic", i_halves.statistic, std::nullopt,
                        i_halves.critical_value_1pct));

    auto& s = ctx.summary();
    s["excursions"] = n;
    s["censored"] = censored;
    s["nu_target"] = nu_target;
    s["integral_exponent"] = i_exponent;
    s["nu_fit"] = to_json(nu_fit);
    s["nu_exact_fit"] = to_json(exact_fit);
    s["integral_fit"] = to_json(i_fit);
    s["upsilon_mean"] = mean(upsilon);
    ctx.samples("nu", std::move(nu));
    ctx.samples("integral", std::move(integral));
    ctx.samples("nu_exact", std::move(exact));
}

void run_hitting(Context& ctx) {
    const auto& p = ctx.params();
    const auto& tol = ctx.tol();
    const double y = p.y0;
    const double delta = p.delta;
    auto draws = tau0_draws(BesqParams{delta, y}, tol.hitting_draws, ctx.opt);
    const auto n = static_cast<double>(draws.size());
    const double k = tol.sigma_multiplier;

    const auto surv = survival_curve(draws, tol.hitting_times);
    json agreement = json::array();
    for (const auto& pt : surv) {
        const double expect = gbar(y / pt.t, delta);
        const double se = std::sqrt(std::max(expect * (1.0 - expect), 1e-300) / n);
        ctx.add(check_range("survival_deviation_t=" + json(pt.t).dump(), std::fabs(pt.survival - expect),
                            std::nullopt, k * se));
        agreement.push_back({{"t", pt.t}, {"empirical", pt.survival}, {"gbar", expect}, {"se", se}});
        if (delta == 1.0 && pt.t == y) {
            // reflection principle: P(B has no zero on [0, y] | B_0 = sqrt y) = erf(1/sqrt 2)
            const double closed = std::erf(1.0 / std::sqrt(2.0));
            ctx.add(check_range("survival_closed_form_deviation", std::fabs(pt.survival - closed), std::nullopt,
                                tol.closed_form_tolerance));
        }
    }

    const double c = tau0_tail_constant(delta);
    const auto bound_surv = survival_curve(draws, tol.bound_times);
    json bounds = json::array();
    for (const auto& pt : bound_surv) {
        const double bound = c * std::pow(pt.t / y, delta / 2.0 - 1.0);
        const double se = std::sqrt(std::max(pt.survival * (1.0 - pt.survival), 1e-300) / n);
        ctx.add(check_range("tail_bound_excess_t=" + json(pt.t).dump(), pt.survival - bound, std::nullopt, k * se));
        bounds.push_back({{"t", pt.t}, {"empirical", pt.survival}, {"bound", bound}});
    }

    const std::size_t m = std::min(tol.tail_draws, draws.size());
    std::vector<double> tail(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(m));
    const Window w{tol.tail_window.first * y, tol.tail_window.second * y};
    const auto fit = safe_tail(tail, w);
    const double target = delta / 2.0 - 1.0;
    ctx.add(check_range("tail_slope", fit.slope, target - tol.tail_slope_tolerance, target + tol.tail_slope_tolerance));

    const auto ode_grid = log_space(0.1, 10.0, 100);
    const double residual = check_gbar_ode(delta, ode_grid);
    ctx.add(check_range("gbar_ode_residual", residual, std::nullopt, tol.ode_residual_max));

    auto& s = ctx.summary();
    s["draws"] = draws.size();
    s["survival"] = agreement;
    s["tail_bound_constant"] = c;
    s["tail_bound"] = bounds;
    s["tail_fit"] = to_json(fit);
    s["tail_target"] = target;
    ctx.samples("tau0", std::move(tail));
}

void run_martingale(Context& ctx) {
    const auto& p = ctx.params();
    const auto& tol = ctx.tol();
    const double m_lo = tol.martingale_times.front();
    const double m_hi = tol.martingale_times.back();
    // four fit points per decade across the moment window, plus the named times
    const auto decades = std::log10(m_hi / m_lo);
    const auto count = static_cast<std::size_t>(std::max(4.0, std::round(4.0 * decades) + 1.0));
    auto fit_times = log_space(m_lo, m_hi, count);
    std::vector<double> times = fit_times;
    times.insert(times.end(), tol.martingale_times.begin(), tol.martingale_times.end());
    times.insert(times.end(), tol.negligibility_times.begin(), tol.negligibility_times.end());
    const auto grid = TimeGrid::at(ctx.cfg.grid.t_end, ctx.cfg.grid.step, times);
    const auto rec = grid.record_times();
    const auto paths = simulate_ensemble(p, ctx.drift, grid, ctx.cfg.n_paths, ctx.opt);

    auto index_of = [&](double t) {
        const auto step = static_cast<std::uint64_t>(std::llround(t / grid.step()));
        const auto& steps = grid.record_steps();
        return static_cast<std::size_t>(std::lower_bound(steps.begin(), steps.end(), step) - steps.begin());
    };

    std::vector<double> ts;
    std::vector<double> second_moment;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (rec[i] < m_lo * (1 - 1e-12) || rec[i] > m_hi * (1 + 1e-12)) continue;
        double acc = 0.0;
        for (const auto& path : paths) acc += path.M[i] * path.M[i];
        ts.push_back(rec[i]);
        second_moment.push_back(acc / static_cast<double>(paths.size()));
    }
    const double slope_target = 2.0 + p.beta();
    double slope = kNaN;
    try {
        slope = estimate_exponent(ts, second_moment, m_lo * (1 - 1e-12), m_hi * (1 + 1e-12), slope_target).slope;
    } catch (const std::exception&) {
    }
    ctx.add(check_range("second_moment_slope", slope, std::nullopt, slope_target + tol.martingale_slope_slack));

    const double power = 1.0 + p.beta() / 2.0 + tol.negligibility_epsilon;
    const std::size_t n_neg = std::min(paths.size(), tol.negligibility_paths);
    std::size_t decreasing = 0;
    std::vector<std::size_t> idx;
    for (const double t : tol.negligibility_times) idx.push_back(index_of(t));
    for (std::size_t k = 0; k < n_neg; ++k) {
        bool ok = true;
        double prev = std::numeric_limits<double>::infinity();
        for (const auto i : idx) {
            const double r = paths[k].M_sup[i] / std::pow(rec[i], power);
            ok = ok && r < prev;
            prev = r;
        }
        if (ok) ++decreasing;
    }
    const double fraction = static_cast<double>(decreasing) / static_cast<double>(n_neg);
    ctx.add(check_range("negligibility_decreasing_fraction", fraction, tol.negligibility_fraction, std::nullopt));

    double cross = 0.0;
    for (const auto& path : paths) {
        const auto i = path.size() - 1;
        cross = std::max(cross, std::fabs(path.M[i] - path.M_accumulated[i]) / std::max(1.0, std::fabs(path.S[i])));
    }

    auto& s = ctx.summary();
    json moments = json::array();
    for (std::size_t i = 0; i < ts.size(); ++i) moments.push_back({{"t", ts[i]}, {"mean_M2", second_moment[i]}});
    s["second_moment"] = moments;
    s["second_moment_target"] = slope_target;
    s["negligibility_power"] = power;
    s["negligibility_paths"] = n_neg;
    s["residual_vs_accumulated_M"] = cross;
    ctx.samples("mean_M2", second_moment);
}

void run_comparison(Context& ctx) {
    const auto& g = ctx.cfg.grid;
    const auto grid = TimeGrid::geometric(g.t_end, g.step, g.per_decade);
    const auto pairs = comparison_ensemble(ctx.params(), ctx.drift, grid, ctx.cfg.n_paths, ctx.opt);
    double worst = std::numeric_limits<double>::infinity();
    double violating = 0.0;
    std::vector<double> per_path;
    const double tol = ctx.tol().comparison_tolerance;
    for (const auto& cp : pairs) {
        double path_worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cp.path.size(); ++i) {
            const double gap = (cp.path.S[i] - cp.Z[i]) / std::max(1.0, cp.path.S[i]);
            path_worst = std::min(path_worst, gap);
        }
        if (path_worst < -tol) violating += 1.0;
        worst = std::min(worst, path_worst);
        per_path.push_back(path_worst);
    }
    ctx.add(check_range("worst_normalized_gap", worst, -tol, std::nullopt));
    ctx.add(check_range("violating_paths", violating, std::nullopt, 0.0));
    ctx.summary()["paths"] = pairs.size();
    ctx.summary()["initial_gap"] = pairs.front().path.S.front() - pairs.front().Z.front();
    ctx.samples("min_gap", std::move(per_path));
}

}  // namespace

AyReport verify_assumption_ay(const ModelParams& params, std::size_t n_paths, std::uint64_t seed,
                              const Tolerances& tol, const RunOptions& opt_in) {
    params.validate();
    if (n_paths < 1) {
        throw ParameterError("verify_assumption_ay: n_paths must be positive");
    }
    RunOptions opt = opt_in;
    opt.seed = seed;
    const BesqParams besq{params.delta, params.y0};
    const double growth = 1.0 + params.beta();
    const Power space_pow(params.alpha);
    AyReport r;

    // (a) midpoint rule in t, exact draws of Y_t at each node
    const std::size_t K = tol.ay_clause_a_points;
    const std::size_t D = tol.ay_clause_a_draws;
    struct Node {
        double mean, var;
    };
    const auto nodes = map_streams<Node>(
        opt.exec, seed, streams::kAux, K,
        [&](RngStream& s, std::size_t k) {
            const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(K);
            std::vector<double> v(D);
            for (auto& x : v) x = space_pow(besq_transition(s, besq, params.y0, t));
            return Node{mean(v), variance(v)};
        },
        opt.threads);
    double est = 0.0;
    double var = 0.0;
    for (const auto& nd : nodes) {
        est += nd.mean;
        var += nd.var / static_cast<double>(D);
    }
    r.clause_a_estimate = est / static_cast<double>(K);
    r.clause_a_stderr = std::sqrt(var) / static_cast<double>(K);
    r.clause_a_pass = std::isfinite(r.clause_a_estimate) && r.clause_a_estimate > 0.0;

    // (b) and (d) share one ensemble of exact paths
    std::vector<double> checkpoints = tol.ay_ratio_times;
    checkpoints.push_back(tol.ay_ks_time);
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
    const auto ensemble = map_streams<std::vector<double>>(
        opt.exec, seed, streams::kBesq, tol.ay_ratio_paths,
        [&](RngStream& s, std::size_t) {
            return besq_additive_functional(s, besq, params.alpha, params.gamma, tol.ay_step, checkpoints);
        },
        opt.threads);
    auto slot = [&](double t) {
        return static_cast<std::size_t>(std::lower_bound(checkpoints.begin(), checkpoints.end(), t) -
                                        checkpoints.begin());
    };

    const std::size_t ks_slot = slot(tol.ay_ks_time);
    const double ks_norm = std::pow(tol.ay_ks_time, growth);
    for (const auto& a : ensemble) r.clause_b_ratios.push_back(a[ks_slot] / ks_norm);
    if (params.alpha == 0.0) {
        r.clause_b_degenerate = true;
        const double target = 1.0 / (1.0 + params.gamma);
        for (const double v : r.clause_b_ratios) {
            r.clause_b_max_deviation = std::max(r.clause_b_max_deviation, std::fabs(v - target) / target);
        }
        r.clause_b_reference.assign(r.clause_b_ratios.size(), target);
        r.clause_b_ks = ks_two_sample(r.clause_b_ratios, r.clause_b_reference);
        r.clause_b_pass = r.clause_b_max_deviation <= 1e-3;
    } else {
        r.clause_b_reference = limit_A_draws(LimitLawSpec::from(params, tol.limit_n_steps), tol.ay_ratio_paths, opt);
        r.clause_b_ks = ks_two_sample(r.clause_b_ratios, r.clause_b_reference);
        r.clause_b_pass = r.clause_b_ks.pass;
    }

    r.clause_d_times = tol.ay_ratio_times;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const double t : tol.ay_ratio_times) {
        const auto i = slot(t);
        double acc = 0.0;
        for (const auto& a : ensemble) acc += a[i];
        const double ratio = acc / static_cast<double>(ensemble.size()) / std::pow(t, growth);
        r.clause_d_ratios.push_back(ratio);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    r.clause_d_spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    r.clause_d_pass = std::isfinite(hi) && r.clause_d_spread < tol.ay_ratio_spread;

    // (c) long paths checked at dyadic times past the threshold
    std::vector<double> dyadic;
    for (double t = 1.0; t <= tol.ay_t_end * (1 + 1e-12); t *= 2.0) {
        if (t >= tol.ay_min_checkpoint) dyadic.push_back(t);
    }
    if (dyadic.empty()) {
        throw ParameterError("verify_assumption_ay: no dyadic checkpoint in [ay_min_checkpoint, ay_t_end]");
    }
    const double threshold = growth - tol.ay_epsilon;
    r.clause_c_min_log_ratio = map_streams<double>(
        opt.exec, seed, streams::kBesq + (1ull << 32), n_paths,
        [&](RngStream& s, std::size_t) {
            const auto a = besq_additive_functional(s, besq, params.alpha, params.gamma, tol.ay_step, dyadic);
            double worst = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double v = a[i] > 0.0 ? std::log(a[i]) / std::log(dyadic[i]) : -std::numeric_limits<double>::infinity();
                worst = std::min(worst, v);
            }
            return worst;
        },
        opt.threads);
    std::size_t good = 0;
    for (const double v : r.clause_c_min_log_ratio) {
        if (v >= threshold) ++good;
    }
    r.clause_c_fraction = static_cast<double>(good) / static_cast<double>(n_paths);
    r.clause_c_pass = r.clause_c_fraction >= tol.ay_path_fraction;
    return r;
}

ExperimentResult execute_experiment(const ExperimentConfig& config, int threads) {
    config.validate();
    Context ctx{config, RunOptions{config.master_seed, Execution::Parallel, threads},
                make_drift(config.drift, config.params), {}};
    auto& report = ctx.result.report;
    report.experiment = std::string(experiment_name(config.experiment));
    report.master_seed = config.master_seed;
    report.config_hash = config_hash(config);

    switch (config.experiment) {
        case ExperimentKind::Simulate: run_simulate(ctx); break;
        case ExperimentKind::ScalingExponent: run_scaling(ctx); break;
        case ExperimentKind::LimitLaw: run_limit_law(ctx); break;
        case ExperimentKind::AssumptionAy: run_assumption_ay(ctx); break;
        case ExperimentKind::Excursions: run_excursions(ctx); break;
        case ExperimentKind::HittingTail: run_hitting(ctx); break;
        case ExperimentKind::MartingaleBounds: run_martingale(ctx); break;
        case ExperimentKind::Comparison: run_comparison(ctx); break;
    }
    return std::move(ctx.result);
}

int run_experiment(const ExperimentConfig& config, int threads, std::ostream& log) {
    const std::string name(experiment_name(config.experiment));
    try {
        auto result = execute_experiment(config, threads);
        write_artifacts(result, config.output_dir);
        for (const auto& c : result.report.checks) {
            log << (c.pass ? "ok    " : "FAIL  ") << c.name << " = " << json(c.measured).dump() << '\n';
        }
        log << name << ": " << (result.report.passed() ? "pass" : "check failure") << " (" << config.output_dir
            << "/report.json)\n";
        return result.report.passed() ? kExitPass : kExitCheckFailed;
    } catch (const NumericalBlowup& e) {
        Report report;
        report.experiment = name;
        report.master_seed = config.master_seed;
        report.config_hash = config_hash(config);
        report.checks.push_back(check_range("numerical_blowup_time", e.time(), std::nullopt, std::nullopt));
        report.checks.back().pass = false;
        report.summary["blowup"] = {{"message", e.what()}, {"time", e.time()}};
        try {
            write_artifacts(ExperimentResult{report, {}, {}}, config.output_dir);
        } catch (const std::exception& w) {
            log << "akin: could not write the blowup report: " << w.what() << '\n';
        }
        log << "akin: numerical blowup: " << e.what() << '\n';
        return kExitBlowup;
    } catch (const DriftContractError& e) {
        log << "akin: drift contract violated: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        log << "akin: config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParameterError& e) {
        log << "akin: invalid parameters: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UnsupportedRegime& e) {
        log << "akin: unsupported regime: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace akin
