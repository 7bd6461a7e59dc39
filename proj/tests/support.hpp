#pragma once

#include <cmath>
#include <vector>

#include "akin/rng.hpp"

namespace akin::test {

struct Moments {
    double mean = 0.0;
    double var = 0.0;
    double se_mean = 0.0;
    double se_var = 0.0;  // from the sample fourth central moment
};

inline Moments moments(const std::vector<double>& x) {
    const auto n = static_cast<double>(x.size());
    double m = 0.0;
    for (const double v : x) m += v;
    m /= n;
    double m2 = 0.0;
    double m4 = 0.0;
    for (const double v : x) {
        const double d = (v - m) * (v - m);
        m2 += d;
        m4 += d * d;
    }
    m4 /= n;
    const double var = m2 / (n - 1.0);
    return {m, var, std::sqrt(var / n), std::sqrt(std::max(m4 - var * var, 0.0) / n)};
}

template <class Fn>
std::vector<double> draws(std::size_t n, std::uint64_t seed, std::uint64_t stream, Fn&& fn) {
    RngStream s(seed, stream);
    std::vector<double> out(n);
    for (auto& v : out) v = fn(s);
    return out;
}

}  // namespace akin::test
