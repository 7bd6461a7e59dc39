#include "akin/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "akin/errors.hpp"

namespace akin {

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEpsilon = 1e-16;
constexpr double kTiny = 1e-300;

inline double log_gamma(double x) noexcept {
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

double lower_gamma_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < kMaxIterations; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEpsilon) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Q(a, x) by the modified Lentz continued fraction.
double upper_gamma_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEpsilon) {
            break;
        }
    }
    return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

void require_recurrent(double delta, const char* who) {
    if (!(delta > 0.0 && delta < 2.0)) {
        throw ParameterError(std::string(who) + ": delta must lie in (0, 2) (delta=" +
                             std::to_string(delta) + ")");
    }
}

}  // namespace

void BesqParams::validate() const {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw ParameterError("BesqParams: delta must be positive (delta=" + std::to_string(delta) + ")");
    }
    if (!(y0 >= 0.0) || !std::isfinite(y0)) {
        throw ParameterError("BesqParams: y0 must be nonnegative (y0=" + std::to_string(y0) + ")");
    }
}

double besq_transition(RngStream& stream, const BesqParams& p, double from_value, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ParameterError("besq_transition: dt must be positive (dt=" + std::to_string(dt) + ")");
    }
    if (!(from_value >= 0.0)) {
        throw ParameterError("besq_transition: from_value must be nonnegative");
    }
    return dt * sample_noncentral_chisq(stream, p.delta, from_value / dt);
}

double sample_tau0(RngStream& stream, const BesqParams& p) {
    p.validate();
    if (p.delta >= 2.0) {
        throw UnsupportedRegime("sample_tau0: BESQ with delta >= 2 never reaches 0 (delta=" +
                                std::to_string(p.delta) + ")");
    }
    if (p.y0 == 0.0) {
        return 0.0;
    }
    const double g = sample_gamma(stream, 1.0 - 0.5 * p.delta, 1.0);
    return p.y0 / (2.0 * g);
}

double regularized_lower_gamma(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0)) {
        throw ParameterError("regularized_lower_gamma: need a > 0 and x >= 0");
    }
    if (x == 0.0) {
        return 0.0;
    }
    if (std::isinf(x)) {
        return 1.0;
    }
    if (x < a + 1.0) {
        return lower_gamma_series(a, x);
    }
    return 1.0 - upper_gamma_fraction(a, x);
}

double gbar(double x, double delta) {
    require_recurrent(delta, "gbar");
    if (!(x >= 0.0)) {
        throw ParameterError("gbar: x must be nonnegative");
    }
    return regularized_lower_gamma(1.0 - 0.5 * delta, 0.5 * x);
}

double tau0_tail_constant(double delta) {
    require_recurrent(delta, "tau0_tail_constant");
    const double a = 1.0 - 0.5 * delta;
    return std::pow(2.0, -a) / (a * std::tgamma(a));
}

double check_gbar_ode(double delta, std::span<const double> grid, double h,
                      const std::function<double(double)>& fn) {
    const std::function<double(double)> g = fn ? fn : [delta](double x) { return gbar(x, delta); };
    double worst = 0.0;
    for (const double x : grid) {
        const double gp = g(x + h);
        const double g0 = g(x);
        const double gm = g(x - h);
        const double d1 = (gp - gm) / (2.0 * h);
        const double d2 = (gp - 2.0 * g0 + gm) / (h * h);
        worst = std::max(worst, std::fabs(2.0 * d2 + (1.0 + delta / x) * d1));
    }
    return worst;
}

SampledPath besq_rescale(const SampledPath& path, double T) {
    if (!(T > 0.0)) {
        throw ParameterError("besq_rescale: T must be positive");
    }
    SampledPath out;
    for (std::size_t i = 0; i < path.t.size(); ++i) {
        if (path.t[i] > T * (1.0 + 1e-12)) {
            break;
        }
        out.t.push_back(path.t[i] / T);
        out.value.push_back(path.value[i] / T);
    }
    return out;
}

SampledPath simulate_besq_exact(RngStream& stream, const BesqParams& p, std::span<const double> times) {
    p.validate();
    SampledPath out;
    out.t.reserve(times.size());
    out.value.reserve(times.size());
    double t = 0.0;
    double y = p.y0;
    for (const double target : times) {
        if (target < t) {
            throw ParameterError("simulate_besq_exact: times must be sorted and nonnegative");
        }
        if (target > t) {
            y = besq_transition(stream, p, y, target - t);
            t = target;
        }
        out.t.push_back(t);
        out.value.push_back(y);
    }
    return out;
}

SampledPath simulate_besq_euler(RngStream& stream, const BesqParams& p, double h, std::size_t n_steps) {
    p.validate();
    if (!(h > 0.0)) {
        throw ParameterError("simulate_besq_euler: step must be positive");
    }
    const double sqrt_h = std::sqrt(h);
    SampledPath out;
    out.t.resize(n_steps + 1);
    out.value.resize(n_steps + 1);
    double y = p.y0;
    out.t[0] = 0.0;
    out.value[0] = y;
    for (std::size_t i = 1; i <= n_steps; ++i) {
        const double yp = y > 0.0 ? y : 0.0;
        y += p.delta * h + 2.0 * std::sqrt(yp) * sqrt_h * sample_normal(stream);
        out.t[i] = static_cast<double>(i) * h;
        out.value[i] = y > 0.0 ? y : 0.0;
    }
    return out;
}

std::optional<double> besq_euler_passage_below(RngStream& stream, const BesqParams& p, double level,
                                               double h, double horizon) {
    p.validate();
    if (!(h > 0.0)) {
        throw ParameterError("besq_euler_passage_below: step must be positive");
    }
    if (p.y0 <= level) {
        return 0.0;
    }
    const double sqrt_h = std::sqrt(h);
    const auto n_steps = static_cast<std::size_t>(std::ceil(horizon / h - 1e-9));
    double y = p.y0;
    for (std::size_t i = 1; i <= n_steps; ++i) {
        const double yp = y > 0.0 ? y : 0.0;
        y += p.delta * h + 2.0 * std::sqrt(yp) * sqrt_h * sample_normal(stream);
        if (y <= level) {
            return static_cast<double>(i) * h;
        }
    }
    return std::nullopt;
}

}  // namespace akin
