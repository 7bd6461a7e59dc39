#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "akin/rng.hpp"

namespace akin {

/// Scalar parameters of the coupled system
///   dS = (2 f(t, Y) + 1) dt + 2 sqrt(S) dB,   dY = delta dt + 2 sqrt(Y) dW,
/// with d<W, B> = correlation dt.
struct ModelParams {
    double rho = 1.0;
    double alpha = 0.5;
    double gamma = 0.0;
    double delta = 1.0;
    double s0 = 0.0;
    double y0 = 0.0;
    double correlation = 1.0;

    double beta() const noexcept { return alpha + gamma; }
    /// Growth exponent of X, (1 + gamma + alpha) / 2.
    double exponent() const noexcept { return 0.5 * (1.0 + beta()); }

    void validate() const;
};

/// x^e with the convention 0^0 = 1 and fast paths for common exponents.
class Power {
public:
    explicit Power(double exponent = 0.0) noexcept;
    double operator()(double x) const noexcept {
        switch (kind_) {
            case Kind::Zero: return 1.0;
            case Kind::Half: return std::sqrt(x);
            case Kind::One: return x;
            case Kind::Two: return x * x;
            case Kind::General: break;
        }
        return std::pow(x, e_);
    }
    double exponent() const noexcept { return e_; }

private:
    enum class Kind { Zero, Half, One, Two, General };
    double e_;
    Kind kind_;
};

/// f(t, y) = rho t^gamma y^alpha. Singular at t = 0 when gamma < 0.
struct ExactPowerLaw {
    double rho, gamma, alpha;
};

/// f(t, y) = rho (1 + t)^gamma (1 + y)^alpha.
struct SmoothedPowerLaw {
    double rho, gamma, alpha;
};

/// Caller-supplied f(t, y) >= 0. The declared (rho, gamma, alpha) are the
/// constants the caller claims in the asymptotic drift condition; check_af
/// tests that claim.
struct CustomDrift {
    std::function<double(double, double)> fn;
    double rho = 1.0;
    double gamma = 0.0;
    double alpha = 0.0;
    std::string name = "custom";
};

class DriftField {
public:
    enum class Kind { ExactPowerLaw, SmoothedPowerLaw, Custom };

    static DriftField exact_power_law(double rho, double gamma, double alpha);
    static DriftField smoothed_power_law(double rho, double gamma, double alpha);
    static DriftField custom(CustomDrift drift);
    /// f = 0; a Custom drift used to isolate the noise terms in tests.
    static DriftField zero();

    Kind kind() const noexcept { return static_cast<Kind>(impl_.index()); }
    double rho() const noexcept;
    double gamma() const noexcept;
    double alpha() const noexcept;

    /// Unchecked evaluation.
    double raw(double t, double y) const;

    using Variant = std::variant<ExactPowerLaw, SmoothedPowerLaw, CustomDrift>;
    const Variant& variant() const noexcept { return impl_; }

private:
    explicit DriftField(Variant v) : impl_(std::move(v)) {}
    Variant impl_;
};

/// f(t, y); throws DriftContractError if the value is negative or non-finite.
double evaluate_drift(const DriftField& drift, double t, double y);

struct AfReport {
    double worst_deviation = 0.0;
    double worst_t = 0.0;
    double worst_y = 0.0;
    std::size_t probes = 0;
    bool pass = false;
};

/// Probes sup |f(t,y)(1+t)^-gamma (1+y)^-alpha - rho| over a deterministic
/// log-spaced set: totals t + y = radius * 10^(k/4), k = 0..16, split with
/// ratios t / y = 10^(j/4), j = -2..2. Diagnostic only.
AfReport check_af(const DriftField& drift, double epsilon, double probe_radius);

/// Fine Euler grid plus the step indices at which state is recorded.
class TimeGrid {
public:
    /// Geometric record times, `per_decade` per decade from `step` to t_end,
    /// plus t = 0, t = 1 and t_end.
    static TimeGrid geometric(double t_end, double step, int per_decade = 32);
    /// Record exactly at `times` (snapped to the fine grid) plus t = 0 and t_end.
    static TimeGrid at(double t_end, double step, const std::vector<double>& times);

    double t_end() const noexcept { return step_ * static_cast<double>(n_steps_); }
    double step() const noexcept { return step_; }
    std::uint64_t n_steps() const noexcept { return n_steps_; }
    const std::vector<std::uint64_t>& record_steps() const noexcept { return record_steps_; }
    std::vector<double> record_times() const;
    /// Step index of t = 1, or n_steps + 1 when the run ends before t = 1.
    std::uint64_t unit_step() const noexcept;

private:
    TimeGrid(double t_end, double step);
    void finish(std::vector<std::uint64_t> steps);

    double step_;
    std::uint64_t n_steps_;
    std::vector<std::uint64_t> record_steps_;
};

/// Recorded trajectories, aligned over the grid's record times.
struct PathBundle {
    std::uint64_t stream_id = 0;
    std::vector<double> t;
    std::vector<double> S;
    std::vector<double> X;
    std::vector<double> Y;
    std::vector<double> U;
    std::vector<double> M;
    std::vector<double> A;
    /// Accumulated sum of 2 sqrt(S+) dB, the cross-check for the residual M.
    std::vector<double> M_accumulated;
    /// sup of |M| over every fine-grid time up to the record time.
    std::vector<double> M_sup;

    std::size_t size() const noexcept { return t.size(); }
};

/// Full-truncation Euler co-integration of (S, Y) with correlated increments.
PathBundle simulate_kinetic(RngStream& stream, const ModelParams& params, const DriftField& drift,
                            const TimeGrid& grid);

struct ComparisonPaths {
    PathBundle path;
    /// BESQ(1) from 0 driven by the same dB increments, recorded as positive parts.
    std::vector<double> Z;
};

/// simulate_kinetic plus the co-simulated lower comparison process Z.
ComparisonPaths lower_bound_comparison(RngStream& stream, const ModelParams& params,
                                       const DriftField& drift, const TimeGrid& grid);

}  // namespace akin
