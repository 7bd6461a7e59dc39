#pragma once

#include <vector>

#include "akin/bessel.hpp"
#include "akin/ensemble.hpp"
#include "akin/kinetic.hpp"
#include "akin/rng.hpp"

namespace akin {

/// The limit variable A~ = int_0^1 s^gamma Y~_s^alpha ds with Y~ ~ BESQ(delta, 0).
struct LimitLawSpec {
    double delta = 1.0;
    double alpha = 0.5;
    double gamma = 0.0;
    // quadrature resolution on [0, 1]
    int n_steps = 2048;

    void validate() const;
    static LimitLawSpec from(const ModelParams& p, int n_steps = 2048) {
        return LimitLawSpec{p.delta, p.alpha, p.gamma, n_steps};
    }
};

/// One draw of A~. Y~ is sampled by exact transitions; the integral is a
/// trapezoid rule on a uniform grid (gamma >= 0) or on a geometric grid over
/// [1/n_steps^2, 1] (gamma < 0). With alpha = 0 the integrand is
/// deterministic and the closed form 1/(1+gamma) is returned.
double sample_limit_A(RngStream& stream, const LimitLawSpec& spec);

/// sqrt(2 rho A~), the weak limit of t^{-(1+gamma+alpha)/2} X_t.
double sample_scaled_X_limit(RngStream& stream, double rho, const LimitLawSpec& spec);

std::vector<double> limit_A_draws(const LimitLawSpec& spec, std::size_t n, const RunOptions& opt);
std::vector<double> scaled_X_limit_draws(double rho, const LimitLawSpec& spec, std::size_t n,
                                         const RunOptions& opt);

struct DiscrepancyPoint {
    double t;
    double D;
};

/// D_t = U_t / 2 - rho A_t at every recorded t >= 1.
std::vector<DiscrepancyPoint> discrepancy_D(const PathBundle& path, double rho);

/// A_t = int_1^t s^gamma Y_s^alpha ds for standalone BESQ(p) at the given
/// checkpoints (sorted, each >= 1). Y is advanced by exact transitions on a
/// uniform grid of the given step (which must divide 1); trapezoid rule.
std::vector<double> besq_additive_functional(RngStream& stream, const BesqParams& p, double alpha, double gamma,
                                             double step, const std::vector<double>& checkpoints);

}  // namespace akin
