#include "akin/rng.hpp"

#include <cmath>
#include <string>

#include "akin/errors.hpp"

namespace akin {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// log Gamma without touching the global signgam.
inline double log_gamma(double x) noexcept {
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

std::uint64_t poisson_small(RngStream& stream, double mean) noexcept {
    // multiplication method; mean < 10 keeps the loop short
    const double limit = std::exp(-mean);
    double prod = stream.uniform();
    std::uint64_t k = 0;
    while (prod > limit) {
        prod *= stream.uniform();
        ++k;
    }
    return k;
}

// Hormann's transformed rejection with squeeze (PTRS), mean >= 10.
std::uint64_t poisson_ptrs(RngStream& stream, double mean) noexcept {
    const double log_mean = std::log(mean);
    const double smu = std::sqrt(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);

    for (;;) {
        const double u = stream.uniform() - 0.5;
        const double v = stream.uniform();
        const double us = 0.5 - std::fabs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) {
            return static_cast<std::uint64_t>(k);
        }
        if (k < 0.0 || (us < 0.013 && v > us)) {
            continue;
        }
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + k * log_mean - log_gamma(k + 1.0)) {
            return static_cast<std::uint64_t>(k);
        }
    }
}

// Marsaglia-Tsang for shape >= 1, unit scale.
double gamma_mt(RngStream& stream, double shape) noexcept {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = sample_normal(stream);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = stream.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) {
            return d * v;
        }
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

void RngStream::refill(std::uint64_t block) noexcept {
    const auto out = philox4x32(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
         static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
}

std::uint64_t RngStream::next_u64() noexcept {
    const std::uint64_t slot = position_ & 1u;
    if (slot == 0) {
        refill(position_ >> 1);
    }
    ++position_;
    return buffer_[slot];
}

double sample_normal(RngStream& stream) noexcept {
    if (stream.has_spare_) {
        stream.has_spare_ = false;
        return stream.spare_normal_;
    }
    // Marsaglia polar method
    double u, v, s;
    do {
        u = 2.0 * stream.uniform() - 1.0;
        v = 2.0 * stream.uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    stream.spare_normal_ = v * factor;
    stream.has_spare_ = true;
    return u * factor;
}

double sample_gamma(RngStream& stream, double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
        throw ParameterError("sample_gamma: shape and scale must be positive and finite (shape=" +
                             std::to_string(shape) + ", scale=" + std::to_string(scale) + ")");
    }
    if (shape >= 1.0) {
        return scale * gamma_mt(stream, shape);
    }
    // Gamma(a) = Gamma(a + 1) * U^(1/a); done in log space so tiny shapes
    // underflow to 0 instead of producing NaN.
    const double g = gamma_mt(stream, shape + 1.0);
    const double log_u = std::log(stream.uniform());
    return scale * std::exp(std::log(g) + log_u / shape);
}

std::uint64_t sample_poisson(RngStream& stream, double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw ParameterError("sample_poisson: mean must be nonnegative and finite (mean=" +
                             std::to_string(mean) + ")");
    }
    if (mean == 0.0) {
        return 0;
    }
    return mean < 10.0 ? poisson_small(stream, mean) : poisson_ptrs(stream, mean);
}

double sample_noncentral_chisq(RngStream& stream, double dof, double noncentrality) {
    if (!(dof > 0.0) || !std::isfinite(dof)) {
        throw ParameterError("sample_noncentral_chisq: dof must be positive (dof=" +
                             std::to_string(dof) + ")");
    }
    if (!(noncentrality >= 0.0) || !std::isfinite(noncentrality)) {
        throw ParameterError("sample_noncentral_chisq: noncentrality must be nonnegative (got " +
                             std::to_string(noncentrality) + ")");
    }
    const auto n = sample_poisson(stream, 0.5 * noncentrality);
    return sample_gamma(stream, 0.5 * dof + static_cast<double>(n), 2.0);
}

}  // namespace akin
