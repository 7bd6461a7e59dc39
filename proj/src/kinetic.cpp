#include "akin/kinetic.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "akin/errors.hpp"

namespace akin {

namespace {

constexpr double kBlowup = 1e300;

inline bool sane_drift(double f) noexcept {
    return f >= 0.0 && f <= std::numeric_limits<double>::max();
}

[[noreturn]] void drift_violation(double f, double t, double y) {
    throw DriftContractError("drift returned " + std::to_string(f) + " at t=" + std::to_string(t) +
                                 ", y=" + std::to_string(y),
                             t, y);
}

// Evaluator with exponents precomputed, one per drift variant.
struct ExactEval {
    double rho;
    Power pt, py;
    double operator()(double t, double y) const noexcept { return rho * pt(t) * py(y); }
};

struct SmoothedEval {
    double rho;
    Power pt, py;
    double operator()(double t, double y) const noexcept { return rho * pt(1.0 + t) * py(1.0 + y); }
};

struct CustomEval {
    const std::function<double(double, double)>* fn;
    double operator()(double t, double y) const { return (*fn)(t, y); }
};

// One step of X = sqrt(S) for dS = a dt + 2 sqrt(S) dB with a >= 1, given the
// Brownian increment c and the minimum m <= min(0, c) of B over the step:
// an exact Skorokhod reflection at 0, then the drift-implicit Bessel step
// X' = (u + sqrt(u^2 + 2 (a - 1) h)) / 2. Nondecreasing in both x and a, so
// two roots driven by the same (c, m) never cross.
inline double advance_root(double x, double a, double c, double m, double h) noexcept {
    const double u = std::max(x + c, c - m);
    return 0.5 * (u + std::sqrt(u * u + 2.0 * (a - 1.0) * h));
}

// Minimum of the Brownian bridge from 0 to c over a step of length h,
// sampled only when reflection at 0 is possible with probability above e^-40.
inline double bridge_minimum(double x, double c, double h, double uniform) noexcept {
    if (x + c > 0.0 && x * (x + c) > 20.0 * h) {
        return std::min(0.0, c);
    }
    return 0.5 * (c - std::sqrt(c * c - 2.0 * h * std::log(uniform)));
}

template <bool WithComparison, class Eval>
void integrate(RngStream& stream, const ModelParams& params, const Eval& f, const TimeGrid& grid,
               PathBundle& out, std::vector<double>* z_out) {
    const double h = grid.step();
    const double sqrt_h = std::sqrt(h);
    const double corr = params.correlation;
    const double perp = std::sqrt(std::max(0.0, 1.0 - corr * corr));
    const Power a_time(params.gamma);
    const Power a_space(params.alpha);
    const std::uint64_t unit = grid.unit_step();
    const auto& records = grid.record_steps();

    const std::size_t n_rec = records.size();
    out.t.resize(n_rec);
    out.S.resize(n_rec);
    out.X.resize(n_rec);
    out.Y.resize(n_rec);
    out.U.resize(n_rec);
    out.M.resize(n_rec);
    out.A.resize(n_rec);
    out.M_accumulated.resize(n_rec);
    out.M_sup.resize(n_rec);
    if constexpr (WithComparison) {
        z_out->resize(n_rec);
    }

    double x = std::sqrt(params.s0);
    double y = params.y0;
    double xz = 0.0;  // root of the comparison process
    double u = 0.0;
    double a = 0.0;
    double m_acc = 0.0;
    double m_sup = 0.0;
    double g_prev = 0.0;  // s^gamma Y^alpha at the left end of the current step

    std::size_t next = 0;
    const std::uint64_t n_steps = grid.n_steps();
    for (std::uint64_t i = 0;; ++i) {
        const double t = static_cast<double>(i) * h;
        const double s = x * x;
        const double yp = y > 0.0 ? y : 0.0;
        const double m_now = s - params.s0 - u - t;
        m_sup = std::max(m_sup, std::fabs(m_now));

        if (i >= unit) {
            const double g = a_time(t) * a_space(yp);
            if (i > unit) {
                a += 0.5 * h * (g_prev + g);
            }
            g_prev = g;
        }

        if (next < n_rec && records[next] == i) {
            out.t[next] = t;
            out.S[next] = s;
            out.X[next] = x;
            out.Y[next] = yp;
            out.U[next] = u;
            out.M[next] = m_now;
            out.A[next] = a;
            out.M_accumulated[next] = m_acc;
            out.M_sup[next] = m_sup;
            if constexpr (WithComparison) {
                (*z_out)[next] = xz * xz;
            }
            ++next;
        }
        if (i == n_steps) {
            break;
        }

        const double fv = f(t, yp);
        if (!sane_drift(fv)) {
            drift_violation(fv, t, yp);
        }
        const double dw = sample_normal(stream);
        const double db = perp > 0.0 ? corr * dw + perp * sample_normal(stream) : corr * dw;
        const double reflect_u = stream.uniform();

        const double c = sqrt_h * db;
        u += 2.0 * fv * h;
        m_acc += 2.0 * x * c;
        y += params.delta * h + 2.0 * std::sqrt(yp) * sqrt_h * dw;
        if constexpr (WithComparison) {
            const double lo = std::min(x, xz);
            const double m = bridge_minimum(lo, c, h, reflect_u);
            x = advance_root(x, 2.0 * fv + 1.0, c, m, h);
            xz = advance_root(xz, 1.0, c, m, h);
        } else {
            x = advance_root(x, 2.0 * fv + 1.0, c, bridge_minimum(x, c, h, reflect_u), h);
        }
        if (!(x * x <= kBlowup) || !(std::fabs(y) <= kBlowup)) {
            throw NumericalBlowup("state left the finite range (S=" + std::to_string(x * x) +
                                      ", Y=" + std::to_string(y) + ") at t=" +
                                      std::to_string(t + h),
                                  t + h);
        }
    }
}

template <bool WithComparison>
void dispatch(RngStream& stream, const ModelParams& params, const DriftField& drift, const TimeGrid& grid,
              PathBundle& out, std::vector<double>* z_out) {
    params.validate();
    out.stream_id = stream.stream_id();
    std::visit(
        [&](const auto& d) {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, ExactPowerLaw>) {
                integrate<WithComparison>(stream, params, ExactEval{d.rho, Power(d.gamma), Power(d.alpha)},
                                          grid, out, z_out);
            } else if constexpr (std::is_same_v<D, SmoothedPowerLaw>) {
                integrate<WithComparison>(stream, params, SmoothedEval{d.rho, Power(d.gamma), Power(d.alpha)},
                                          grid, out, z_out);
            } else {
                integrate<WithComparison>(stream, params, CustomEval{&d.fn}, grid, out, z_out);
            }
        },
        drift.variant());
}

void require(bool ok, const std::string& msg) {
    if (!ok) {
        throw ParameterError(msg);
    }
}

}  // namespace

void ModelParams::validate() const {
    require(rho > 0.0 && std::isfinite(rho), "ModelParams: rho must be positive");
    require(alpha >= 0.0 && std::isfinite(alpha), "ModelParams: alpha must be nonnegative");
    require(std::isfinite(gamma) && alpha + gamma > 0.0, "ModelParams: need alpha + gamma > 0");
    require(delta > 0.0 && std::isfinite(delta), "ModelParams: delta must be positive");
    require(s0 >= 0.0 && std::isfinite(s0), "ModelParams: s0 must be nonnegative");
    require(y0 >= 0.0 && std::isfinite(y0), "ModelParams: y0 must be nonnegative");
    require(correlation >= -1.0 && correlation <= 1.0, "ModelParams: correlation must lie in [-1, 1]");
}

Power::Power(double exponent) noexcept : e_(exponent), kind_(Kind::General) {
    if (exponent == 0.0) {
        kind_ = Kind::Zero;
    } else if (exponent == 0.5) {
        kind_ = Kind::Half;
    } else if (exponent == 1.0) {
        kind_ = Kind::One;
    } else if (exponent == 2.0) {
        kind_ = Kind::Two;
    }
}

DriftField DriftField::exact_power_law(double rho, double gamma, double alpha) {
    require(rho > 0.0 && alpha >= 0.0 && alpha + gamma > 0.0,
            "exact_power_law: need rho > 0, alpha >= 0, alpha + gamma > 0");
    return DriftField(ExactPowerLaw{rho, gamma, alpha});
}

DriftField DriftField::smoothed_power_law(double rho, double gamma, double alpha) {
    require(rho > 0.0 && alpha >= 0.0 && alpha + gamma > 0.0,
            "smoothed_power_law: need rho > 0, alpha >= 0, alpha + gamma > 0");
    return DriftField(SmoothedPowerLaw{rho, gamma, alpha});
}

DriftField DriftField::custom(CustomDrift drift) {
    require(static_cast<bool>(drift.fn), "custom drift: callback is empty");
    return DriftField(std::move(drift));
}

DriftField DriftField::zero() {
    return custom(CustomDrift{[](double, double) { return 0.0; }, 1.0, 0.0, 0.0, "zero"});
}

double DriftField::rho() const noexcept {
    return std::visit([](const auto& d) { return d.rho; }, impl_);
}
double DriftField::gamma() const noexcept {
    return std::visit([](const auto& d) { return d.gamma; }, impl_);
}
double DriftField::alpha() const noexcept {
    return std::visit([](const auto& d) { return d.alpha; }, impl_);
}

double DriftField::raw(double t, double y) const {
    return std::visit(
        [t, y](const auto& d) -> double {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, ExactPowerLaw>) {
                return ExactEval{d.rho, Power(d.gamma), Power(d.alpha)}(t, y);
            } else if constexpr (std::is_same_v<D, SmoothedPowerLaw>) {
                return SmoothedEval{d.rho, Power(d.gamma), Power(d.alpha)}(t, y);
            } else {
                return d.fn(t, y);
            }
        },
        impl_);
}

double evaluate_drift(const DriftField& drift, double t, double y) {
    if (!(t >= 0.0) || !(y >= 0.0)) {
        throw ParameterError("evaluate_drift: t and y must be nonnegative");
    }
    const double f = drift.raw(t, y);
    if (!sane_drift(f)) {
        drift_violation(f, t, y);
    }
    return f;
}

AfReport check_af(const DriftField& drift, double epsilon, double probe_radius) {
    require(epsilon > 0.0, "check_af: epsilon must be positive");
    require(probe_radius > 0.0, "check_af: probe_radius must be positive");
    const double rho = drift.rho();
    const Power pt(-drift.gamma());
    const Power py(-drift.alpha());
    AfReport report;
    for (int k = 0; k <= 16; ++k) {
        const double total = probe_radius * std::pow(10.0, k / 4.0);
        for (int j = -2; j <= 2; ++j) {
            const double ratio = std::pow(10.0, j / 4.0);
            const double t = total * ratio / (1.0 + ratio);
            const double y = total - t;
            const double dev = std::fabs(drift.raw(t, y) * pt(1.0 + t) * py(1.0 + y) - rho);
            ++report.probes;
            if (!(dev <= report.worst_deviation)) {
                report.worst_deviation = dev;
                report.worst_t = t;
                report.worst_y = y;
            }
        }
    }
    report.pass = report.worst_deviation <= epsilon;
    return report;
}

TimeGrid::TimeGrid(double t_end, double step) : step_(step), n_steps_(0) {
    require(step > 0.0 && std::isfinite(step), "TimeGrid: step must be positive");
    require(t_end > 0.0 && std::isfinite(t_end), "TimeGrid: t_end must be positive");
    n_steps_ = static_cast<std::uint64_t>(std::ceil(t_end / step - 1e-9));
    if (t_end >= 1.0) {
        const double per_unit = 1.0 / step;
        require(std::fabs(per_unit - std::round(per_unit)) < 1e-9 * per_unit,
                "TimeGrid: step must divide 1 so that t = 1 lies on the grid");
    }
}

void TimeGrid::finish(std::vector<std::uint64_t> steps) {
    steps.push_back(0);
    steps.push_back(n_steps_);
    if (n_steps_ >= unit_step()) {
        steps.push_back(unit_step());
    }
    for (auto& s : steps) {
        s = std::min(s, n_steps_);
    }
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    record_steps_ = std::move(steps);
}

TimeGrid TimeGrid::geometric(double t_end, double step, int per_decade) {
    require(per_decade > 0, "TimeGrid: per_decade must be positive");
    TimeGrid grid(t_end, step);
    std::vector<std::uint64_t> steps;
    const double lo = std::log10(step);
    const double hi = std::log10(grid.t_end());
    const auto first = static_cast<long>(std::ceil(lo * per_decade - 1e-9));
    const auto last = static_cast<long>(std::floor(hi * per_decade + 1e-9));
    for (long k = first; k <= last; ++k) {
        const double t = std::pow(10.0, static_cast<double>(k) / per_decade);
        steps.push_back(static_cast<std::uint64_t>(std::llround(t / step)));
    }
    grid.finish(std::move(steps));
    return grid;
}

TimeGrid TimeGrid::at(double t_end, double step, const std::vector<double>& times) {
    TimeGrid grid(t_end, step);
    std::vector<std::uint64_t> steps;
    steps.reserve(times.size());
    for (const double t : times) {
        require(t >= 0.0, "TimeGrid: record times must be nonnegative");
        steps.push_back(static_cast<std::uint64_t>(std::llround(t / step)));
    }
    grid.finish(std::move(steps));
    return grid;
}

std::vector<double> TimeGrid::record_times() const {
    std::vector<double> out;
    out.reserve(record_steps_.size());
    for (const auto s : record_steps_) {
        out.push_back(static_cast<double>(s) * step_);
    }
    return out;
}

std::uint64_t TimeGrid::unit_step() const noexcept {
    const auto unit = static_cast<std::uint64_t>(std::llround(1.0 / step_));
    const bool on_grid = std::fabs(static_cast<double>(unit) * step_ - 1.0) < 1e-9;
    return on_grid && unit <= n_steps_ ? unit : n_steps_ + 1;
}

PathBundle simulate_kinetic(RngStream& stream, const ModelParams& params, const DriftField& drift,
                            const TimeGrid& grid) {
    PathBundle out;
    dispatch<false>(stream, params, drift, grid, out, nullptr);
    return out;
}

ComparisonPaths lower_bound_comparison(RngStream& stream, const ModelParams& params, const DriftField& drift,
                                       const TimeGrid& grid) {
    ComparisonPaths out;
    dispatch<true>(stream, params, drift, grid, out.path, &out.Z);
    return out;
}

}  // namespace akin
