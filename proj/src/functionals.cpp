#include "akin/functionals.hpp"

#include <cmath>
#include <string>

#include "akin/errors.hpp"

namespace akin {

void LimitLawSpec::validate() const {
    if (!(delta > 0.0) || !(alpha >= 0.0) || !(alpha + gamma > 0.0) || n_steps < 2) {
        throw ParameterError("LimitLawSpec: need delta > 0, alpha >= 0, alpha + gamma > 0, n_steps >= 2");
    }
}

double sample_limit_A(RngStream& stream, const LimitLawSpec& spec) {
    spec.validate();
    if (spec.alpha == 0.0) {
        return 1.0 / (1.0 + spec.gamma);
    }
    const BesqParams besq{spec.delta, 0.0};
    const Power time_pow(spec.gamma);
    const Power space_pow(spec.alpha);
    const int n = spec.n_steps;

    double sum = 0.0;
    if (spec.gamma >= 0.0) {
        const double h = 1.0 / n;
        double y = 0.0;
        double g_prev = time_pow(0.0) * space_pow(0.0);
        for (int k = 1; k <= n; ++k) {
            y = besq_transition(stream, besq, y, h);
            const double g = time_pow(k * h) * space_pow(y);
            sum += 0.5 * h * (g_prev + g);
            g_prev = g;
        }
        return sum;
    }

    // s^gamma blows up at 0: integrate over [s_min, 1] on a geometric grid
    const double s_min = 1.0 / (static_cast<double>(n) * n);
    const double log_ratio = -std::log(s_min) / (n - 1);
    double s = s_min;
    double y = besq_transition(stream, besq, 0.0, s_min);
    double g_prev = time_pow(s) * space_pow(y);
    for (int k = 1; k < n; ++k) {
        const double s_next = k == n - 1 ? 1.0 : s_min * std::exp(log_ratio * k);
        y = besq_transition(stream, besq, y, s_next - s);
        const double g = time_pow(s_next) * space_pow(y);
        sum += 0.5 * (s_next - s) * (g_prev + g);
        g_prev = g;
        s = s_next;
    }
    return sum;
}

double sample_scaled_X_limit(RngStream& stream, double rho, const LimitLawSpec& spec) {
    if (!(rho > 0.0)) {
        throw ParameterError("sample_scaled_X_limit: rho must be positive");
    }
    return std::sqrt(2.0 * rho * sample_limit_A(stream, spec));
}

std::vector<double> limit_A_draws(const LimitLawSpec& spec, std::size_t n, const RunOptions& opt) {
    spec.validate();
    return map_streams<double>(
        opt.exec, opt.seed, streams::kLimitLaw, n,
        [&](RngStream& stream, std::size_t) { return sample_limit_A(stream, spec); }, opt.threads);
}

std::vector<double> scaled_X_limit_draws(double rho, const LimitLawSpec& spec, std::size_t n,
                                         const RunOptions& opt) {
    spec.validate();
    return map_streams<double>(
        opt.exec, opt.seed, streams::kLimitLaw, n,
        [&](RngStream& stream, std::size_t) { return sample_scaled_X_limit(stream, rho, spec); }, opt.threads);
}

std::vector<DiscrepancyPoint> discrepancy_D(const PathBundle& path, double rho) {
    std::vector<DiscrepancyPoint> out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (path.t[i] >= 1.0 - 1e-12) {
            out.push_back({path.t[i], 0.5 * path.U[i] - rho * path.A[i]});
        }
    }
    return out;
}

std::vector<double> besq_additive_functional(RngStream& stream, const BesqParams& p, double alpha, double gamma,
                                             double step, const std::vector<double>& checkpoints) {
    p.validate();
    if (!(step > 0.0) || std::fabs(1.0 / step - std::round(1.0 / step)) > 1e-9 / step) {
        throw ParameterError("besq_additive_functional: step must be positive and divide 1");
    }
    const Power time_pow(gamma);
    const Power space_pow(alpha);
    const auto unit = static_cast<std::uint64_t>(std::llround(1.0 / step));

    std::vector<double> out;
    out.reserve(checkpoints.size());
    double y = p.y0;
    double a = 0.0;
    double g_prev = 0.0;
    std::uint64_t i = 0;
    for (const double c : checkpoints) {
        if (!(c >= 1.0)) {
            throw ParameterError("besq_additive_functional: checkpoints must be >= 1");
        }
        const auto target = static_cast<std::uint64_t>(std::llround(c / step));
        if (target < i) {
            throw ParameterError("besq_additive_functional: checkpoints must be sorted");
        }
        for (; i < target; ++i) {
            y = besq_transition(stream, p, y, step);
            const std::uint64_t next = i + 1;
            if (next >= unit) {
                const double g = time_pow(static_cast<double>(next) * step) * space_pow(y);
                if (next > unit) {
                    a += 0.5 * step * (g_prev + g);
                }
                g_prev = g;
            }
        }
        out.push_back(a);
    }
    return out;
}

}  // namespace akin
