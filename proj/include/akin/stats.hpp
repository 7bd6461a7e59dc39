#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace akin {

/// OLS fit of log value against log t.
struct ScalingReport {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    std::vector<double> checkpoints_used;
    // theoretical exponent the caller compares against; NaN when unset
    double target = std::numeric_limits<double>::quiet_NaN();
};

/// Fits over the checkpoints with t in [t_lo, t_hi]. Needs at least 4 of them.
/// Throws ShrinkWindowError naming the first nonpositive value in the window.
ScalingReport estimate_exponent(std::span<const double> t, std::span<const double> values, double t_lo,
                                double t_hi, double target = std::numeric_limits<double>::quiet_NaN());

/// Two-sample Kolmogorov-Smirnov.
struct KsReport {
    double statistic = 0.0;
    std::size_t n = 0;
    std::size_t m = 0;
    double critical_value_1pct = 0.0;
    bool pass = false;
};

/// 1.628 * sqrt((n + m) / (n m)), the asymptotic 1% two-sample critical value.
double ks_critical_value_1pct(std::size_t n, std::size_t m);

KsReport ks_two_sample(std::span<const double> a, std::span<const double> b);

/// One excursion of Y: climb from 0 to 1 (upsilon), fall from 1 back to 0 (nu),
/// and the integral of Y^alpha over the fall.
struct ExcursionRecord {
    double upsilon = 0.0;
    double nu = 0.0;
    double integral = 0.0;
};

/// Streaming excursion detector over a uniform grid. Feed values in time
/// order; completed records accumulate in records().
class ExcursionScanner {
public:
    ExcursionScanner(double step, double alpha, double start_time = 0.0);

    void push(double y);
    /// True while a fall from 1 to 0 is in progress.
    bool in_fall() const noexcept { return falling_; }
    /// Elapsed time and integral of the fall in progress.
    double open_duration() const noexcept { return time_ - phi_; }
    double open_integral() const noexcept { return integral_; }

    const std::vector<ExcursionRecord>& records() const noexcept { return records_; }
    std::vector<ExcursionRecord> take_records() { return std::move(records_); }

private:
    double step_;
    double alpha_;
    double time_;
    bool started_ = false;
    bool falling_ = false;
    double theta_;  // end of the previous excursion
    double phi_ = 0.0;
    double integral_ = 0.0;
    double prev_pow_ = 0.0;
    std::vector<ExcursionRecord> records_;
};

/// Scans a recorded path on a uniform grid (ParameterError otherwise).
/// The incomplete final excursion is discarded.
std::vector<ExcursionRecord> extract_excursions(std::span<const double> t, std::span<const double> y,
                                                double alpha);

struct SurvivalPoint {
    double t;
    double survival;  // empirical P(sample >= t)
};

std::vector<SurvivalPoint> survival_curve(std::span<const double> samples, std::span<const double> eval_points);

struct TailFit {
    double slope = 0.0;
    double stderr_slope = 0.0;
    std::size_t points = 0;
};

/// OLS of log survival against log z over points with z in [z_lo, z_hi].
TailFit tail_slope(std::span<const SurvivalPoint> survival, double z_lo, double z_hi);

/// `count` log-spaced points from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, std::size_t count);

double mean(std::span<const double> x);
/// Unbiased sample variance.
double variance(std::span<const double> x);
double median(std::vector<double> x);
double quantile(std::vector<double> x, double q);

}  // namespace akin
