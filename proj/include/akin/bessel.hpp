#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "akin/rng.hpp"

namespace akin {

/// Parameters of a squared-Bessel process BESQ(delta, y0):
/// dY = delta dt + 2 sqrt(Y) dW, Y_0 = y0.
struct BesqParams {
    double delta = 1.0;
    double y0 = 0.0;

    /// Throws ParameterError unless delta > 0 and y0 >= 0.
    void validate() const;
};

/// Exact draw of Y_{t+dt} given Y_t = from_value:
/// dt times a noncentral chi-square with dof delta and noncentrality from_value / dt.
double besq_transition(RngStream& stream, const BesqParams& p, double from_value, double dt);

/// Exact draw of the first hitting time of 0, tau0 = y0 / (2G), G ~ Gamma(1 - delta/2, 1).
/// Only 0 < delta < 2 reaches zero; delta >= 2 throws UnsupportedRegime.
double sample_tau0(RngStream& stream, const BesqParams& p);

/// Regularized lower incomplete gamma P(a, x).
/// Series below x = a + 1, Lentz continued fraction for the complement above.
double regularized_lower_gamma(double a, double x);

/// Survival function of tau0 in the scaling variable x = y / t:
/// P_y(tau0 > t) = P(1 - delta/2, x/2).
double gbar(double x, double delta);

/// Constant c of the tail bound P_1(tau0 >= t) <= c t^(delta/2 - 1):
/// c = 2^(delta/2 - 1) / ((1 - delta/2) Gamma(1 - delta/2)).
double tau0_tail_constant(double delta);

/// Max over `grid` of |2G''(x) + (1 + delta/x) G'(x)| by central differences with step h.
/// `fn` defaults to gbar at this delta.
double check_gbar_ode(double delta, std::span<const double> grid, double h = 1e-4,
                      const std::function<double(double)>& fn = {});

/// A sampled path of a scalar process on an explicit time grid.
struct SampledPath {
    std::vector<double> t;
    std::vector<double> value;
};

/// s -> Y_{T s} / T for every recorded time t <= T (s = t / T).
SampledPath besq_rescale(const SampledPath& path, double T);

/// Exact BESQ path recorded at the given sorted times (first time may be 0).
SampledPath simulate_besq_exact(RngStream& stream, const BesqParams& p, std::span<const double> times);

/// Full-truncation Euler path of BESQ on a uniform grid of n_steps steps of size h.
/// Recorded values are positive parts.
SampledPath simulate_besq_euler(RngStream& stream, const BesqParams& p, double h, std::size_t n_steps);

/// Full-truncation Euler run from y0 until the recorded value drops to `level` or below.
/// Returns the passage time, or nullopt if it has not happened by `horizon`.
std::optional<double> besq_euler_passage_below(RngStream& stream, const BesqParams& p, double level,
                                               double h, double horizon);

}  // namespace akin
