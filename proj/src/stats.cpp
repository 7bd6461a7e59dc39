#include "akin/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "akin/errors.hpp"

namespace akin {

namespace {

struct LineFit {
    double slope;
    double intercept;
    double stderr_slope;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw InsufficientData("least squares: abscissae are all equal");
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - intercept - slope * x[i];
        ssr += r * r;
    }
    const double se = x.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
    return {slope, intercept, se};
}

}  // namespace

ScalingReport estimate_exponent(std::span<const double> t, std::span<const double> values, double t_lo,
                                double t_hi, double target) {
    if (t.size() != values.size()) {
        throw ParameterError("estimate_exponent: t and values differ in length");
    }
    std::vector<double> lx;
    std::vector<double> ly;
    ScalingReport report;
    report.target = target;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) {
            continue;
        }
        if (!(t[i] > 0.0)) {
            throw ShrinkWindowError("estimate_exponent: nonpositive time in window", t[i]);
        }
        if (!(values[i] > 0.0)) {
            throw ShrinkWindowError("estimate_exponent: nonpositive value at t=" + std::to_string(t[i]), t[i]);
        }
        lx.push_back(std::log(t[i]));
        ly.push_back(std::log(values[i]));
        report.checkpoints_used.push_back(t[i]);
    }
    if (lx.size() < 4) {
        throw InsufficientData("estimate_exponent: need at least 4 checkpoints in [" + std::to_string(t_lo) + ", " +
                               std::to_string(t_hi) + "], found " + std::to_string(lx.size()));
    }
    const auto fit = least_squares(lx, ly);
    report.slope = fit.slope;
    report.intercept = fit.intercept;
    report.stderr_slope = fit.stderr_slope;
    return report;
}

double ks_critical_value_1pct(std::size_t n, std::size_t m) {
    const auto dn = static_cast<double>(n);
    const auto dm = static_cast<double>(m);
    return 1.628 * std::sqrt((dn + dm) / (dn * dm));
}

KsReport ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw ParameterError("ks_two_sample: both samples must be nonempty");
    }
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const auto n = static_cast<double>(x.size());
    const auto m = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    KsReport report;
    report.statistic = d;
    report.n = x.size();
    report.m = y.size();
    report.critical_value_1pct = ks_critical_value_1pct(x.size(), y.size());
    report.pass = d < report.critical_value_1pct;
    return report;
}

ExcursionScanner::ExcursionScanner(double step, double alpha, double start_time)
    : step_(step), alpha_(alpha), time_(start_time), theta_(start_time) {
    if (!(step > 0.0) || !(alpha >= 0.0)) {
        throw ParameterError("ExcursionScanner: need step > 0 and alpha >= 0");
    }
}

void ExcursionScanner::push(double y) {
    const double yp = y > 0.0 ? y : 0.0;
    const double w = alpha_ == 0.0 ? 1.0 : std::pow(yp, alpha_);
    if (started_) {
        time_ += step_;
    }
    started_ = true;
    if (falling_) {
        integral_ += 0.5 * step_ * (prev_pow_ + w);
        prev_pow_ = w;
        if (yp <= 0.0) {
            records_.push_back({phi_ - theta_, time_ - phi_, integral_});
            theta_ = time_;
            falling_ = false;
        }
    } else if (yp >= 1.0) {
        phi_ = time_;
        falling_ = true;
        integral_ = 0.0;
        prev_pow_ = w;
    }
}

std::vector<ExcursionRecord> extract_excursions(std::span<const double> t, std::span<const double> y,
                                                double alpha) {
    if (t.size() != y.size()) {
        throw ParameterError("extract_excursions: t and y differ in length");
    }
    if (t.size() < 2) {
        return {};
    }
    const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (std::fabs((t[i] - t[i - 1]) - h) > 1e-6 * h) {
            throw ParameterError("extract_excursions: grid is not uniform near t=" + std::to_string(t[i]));
        }
    }
    ExcursionScanner scanner(h, alpha, t.front());
    for (const double v : y) {
        scanner.push(v);
    }
    return scanner.take_records();
}

std::vector<SurvivalPoint> survival_curve(std::span<const double> samples, std::span<const double> eval_points) {
    if (samples.empty()) {
        throw ParameterError("survival_curve: samples must be nonempty");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    std::vector<SurvivalPoint> out;
    out.reserve(eval_points.size());
    for (const double z : eval_points) {
        const auto below = std::lower_bound(sorted.begin(), sorted.end(), z) - sorted.begin();
        out.push_back({z, (n - static_cast<double>(below)) / n});
    }
    return out;
}

TailFit tail_slope(std::span<const SurvivalPoint> survival, double z_lo, double z_hi) {
    std::vector<double> lx;
    std::vector<double> ly;
    for (const auto& p : survival) {
        if (p.t < z_lo || p.t > z_hi) {
            continue;
        }
        if (!(p.survival > 0.0) || !(p.t > 0.0)) {
            throw ShrinkWindowError("tail_slope: zero survival inside the window at z=" + std::to_string(p.t), p.t);
        }
        lx.push_back(std::log(p.t));
        ly.push_back(std::log(p.survival));
    }
    if (lx.size() < 4) {
        throw InsufficientData("tail_slope: need at least 4 survival points in the window");
    }
    const auto fit = least_squares(lx, ly);
    return {fit.slope, fit.stderr_slope, lx.size()};
}

std::vector<double> log_space(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) {
        throw ParameterError("log_space: need 0 < lo < hi and count >= 2");
    }
    std::vector<double> out(count);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

double mean(std::span<const double> x) {
    if (x.empty()) {
        throw InsufficientData("mean: empty sample");
    }
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) {
        throw InsufficientData("variance: need at least two values");
    }
    const double m = mean(x);
    double ss = 0.0;
    for (const double v : x) {
        ss += (v - m) * (v - m);
    }
    return ss / static_cast<double>(x.size() - 1);
}

double quantile(std::vector<double> x, double q) {
    if (x.empty()) {
        throw InsufficientData("quantile: empty sample");
    }
    std::sort(x.begin(), x.end());
    const double pos = q * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, x.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return x[lo] + frac * (x[hi] - x[lo]);
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

}  // namespace akin
