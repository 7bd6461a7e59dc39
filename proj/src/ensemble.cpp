#include "akin/ensemble.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace akin {

int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("AKIN_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) {
                return n;
            }
        } catch (const std::exception&) {
            // fall through to the core count
        }
    }
#ifdef _OPENMP
    return omp_get_num_procs();
#else
    return 1;
#endif
}

std::vector<PathBundle> simulate_ensemble(const ModelParams& params, const DriftField& drift,
                                          const TimeGrid& grid, std::size_t n, const RunOptions& opt) {
    params.validate();
    return map_streams<PathBundle>(
        opt.exec, opt.seed, streams::kPaths, n,
        [&](RngStream& stream, std::size_t) { return simulate_kinetic(stream, params, drift, grid); },
        opt.threads);
}

std::vector<ComparisonPaths> comparison_ensemble(const ModelParams& params, const DriftField& drift,
                                                 const TimeGrid& grid, std::size_t n, const RunOptions& opt) {
    params.validate();
    return map_streams<ComparisonPaths>(
        opt.exec, opt.seed, streams::kPaths, n,
        [&](RngStream& stream, std::size_t) { return lower_bound_comparison(stream, params, drift, grid); },
        opt.threads);
}

std::vector<double> tau0_draws(const BesqParams& p, std::size_t n, const RunOptions& opt) {
    p.validate();
    return map_streams<double>(
        opt.exec, opt.seed, streams::kHitting, n, [&](RngStream& stream, std::size_t) { return sample_tau0(stream, p); },
        opt.threads);
}

std::vector<double> transition_draws(const BesqParams& p, double from_value, double dt, std::size_t n,
                                     const RunOptions& opt) {
    p.validate();
    return map_streams<double>(
        opt.exec, opt.seed, streams::kBesq, n,
        [&](RngStream& stream, std::size_t) { return besq_transition(stream, p, from_value, dt); }, opt.threads);
}

}  // namespace akin
