#pragma once

// Path-level Monte Carlo fan-out.
//
// Every kernel comes in two flavours: an OpenMP-parallel one and a plain
// serial reference. Path i always draws from RngStream(seed, base + i) and
// writes slot i of the result, so both flavours produce bit-identical output
// for any thread count. Tests compare them; bench/ times them.

#include <cstdint>
#include <exception>
#include <vector>

#include "akin/bessel.hpp"
#include "akin/kinetic.hpp"
#include "akin/rng.hpp"

namespace akin {

enum class Execution { Serial, Parallel };

/// Worker count: `requested` if positive, else AKIN_THREADS, else all cores.
int resolve_threads(int requested);

/// Stream-id bases that keep independent families of draws apart inside one run.
namespace streams {
inline constexpr std::uint64_t kPaths = 0;
inline constexpr std::uint64_t kLimitLaw = 1ull << 40;
inline constexpr std::uint64_t kHitting = 2ull << 40;
inline constexpr std::uint64_t kExcursions = 3ull << 40;
inline constexpr std::uint64_t kBesq = 4ull << 40;
inline constexpr std::uint64_t kAux = 5ull << 40;
}  // namespace streams

namespace detail {

inline void rethrow_first(const std::vector<std::exception_ptr>& errors) {
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace detail

/// Serial reference: out[i] = fn(RngStream(seed, base + i), i).
template <class Result, class Fn>
std::vector<Result> map_streams_serial(std::uint64_t seed, std::uint64_t base, std::size_t n, Fn&& fn) {
    std::vector<Result> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        RngStream stream(seed, base + i);
        out[i] = fn(stream, i);
    }
    return out;
}

/// OpenMP kernel with the same contract as map_streams_serial. An exception
/// thrown by any path is rethrown after the loop; the lowest index wins.
template <class Result, class Fn>
std::vector<Result> map_streams_parallel(std::uint64_t seed, std::uint64_t base, std::size_t n, Fn&& fn,
                                         int threads = 0) {
    std::vector<Result> out(n);
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(threads))
    for (long long i = 0; i < count; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
            RngStream stream(seed, base + idx);
            out[idx] = fn(stream, idx);
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    }
    detail::rethrow_first(errors);
    return out;
}

template <class Result, class Fn>
std::vector<Result> map_streams(Execution exec, std::uint64_t seed, std::uint64_t base, std::size_t n, Fn&& fn,
                                int threads = 0) {
    if (exec == Execution::Serial) {
        return map_streams_serial<Result>(seed, base, n, std::forward<Fn>(fn));
    }
    return map_streams_parallel<Result>(seed, base, n, std::forward<Fn>(fn), threads);
}

struct RunOptions {
    std::uint64_t seed = 0;
    Execution exec = Execution::Parallel;
    int threads = 0;
};

/// n independent kinetic paths, stream ids streams::kPaths + i.
std::vector<PathBundle> simulate_ensemble(const ModelParams& params, const DriftField& drift,
                                          const TimeGrid& grid, std::size_t n, const RunOptions& opt);

std::vector<ComparisonPaths> comparison_ensemble(const ModelParams& params, const DriftField& drift,
                                                 const TimeGrid& grid, std::size_t n, const RunOptions& opt);

/// n exact tau0 draws, one stream each.
std::vector<double> tau0_draws(const BesqParams& p, std::size_t n, const RunOptions& opt);

/// n exact BESQ transitions from the same starting value.
std::vector<double> transition_draws(const BesqParams& p, double from_value, double dt, std::size_t n,
                                     const RunOptions& opt);

}  // namespace akin
