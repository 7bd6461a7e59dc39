// Times the serial reference against the OpenMP kernels on the same work and
// confirms the outputs are identical.

#include <chrono>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "akin/ensemble.hpp"
#include "akin/functionals.hpp"

using namespace akin;

namespace {

template <class Fn>
double seconds(Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}


}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs parallel ensemble kernels"};
    int threads = 0;
    std::size_t paths = 64;
    double t_end = 1e4;
    std::size_t draws = 1000000;
    app.add_option("--threads", threads, "worker threads for the parallel runs (default: AKIN_THREADS, else all cores)");
    app.add_option("--paths", paths, "kinetic paths per run");
    app.add_option("--t-end", t_end, "kinetic horizon");
    app.add_option("--draws", draws, "tau0 and limit-law draws per run");
    CLI11_PARSE(app, argc, argv);

    const ModelParams params{1.0, 0.5, 0.0, 1.0, 0.0, 0.0, 1.0};
    const auto drift = DriftField::exact_power_law(1.0, 0.0, 0.5);
    const auto grid = TimeGrid::geometric(t_end, 0.1, 8);
    const RunOptions serial{1, Execution::Serial, 1};
    const RunOptions parallel{1, Execution::Parallel, threads};

    std::printf("%-22s %12s %12s %9s %s\n", "kernel", "serial [s]", "parallel [s]", "speedup", "identical");
    bool all_same = true;
    auto report = [&](const char* name, double ts, double tp, bool same) {
        std::printf("%-22s %12.3f %12.3f %9.2f %s\n", name, ts, tp, ts / tp, same ? "yes" : "NO");
        all_same = all_same && same;
    };

    {
        std::vector<PathBundle> a;
        std::vector<PathBundle> b;
        const double ts = seconds([&] { a = simulate_ensemble(params, drift, grid, paths, serial); });
        const double tp = seconds([&] { b = simulate_ensemble(params, drift, grid, paths, parallel); });
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i].S == b[i].S && a[i].Y == b[i].Y;
        report("simulate_ensemble", ts, tp, same);
    }
    {
        std::vector<ComparisonPaths> a;
        std::vector<ComparisonPaths> b;
        const double ts = seconds([&] { a = comparison_ensemble(params, drift, grid, paths, serial); });
        const double tp = seconds([&] { b = comparison_ensemble(params, drift, grid, paths, parallel); });
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i].Z == b[i].Z && a[i].path.S == b[i].path.S;
        report("comparison_ensemble", ts, tp, same);
    }
    {
        std::vector<double> a;
        std::vector<double> b;
        const BesqParams p{1.0, 1.0};
        const double ts = seconds([&] { a = tau0_draws(p, draws, serial); });
        const double tp = seconds([&] { b = tau0_draws(p, draws, parallel); });
        report("tau0_draws", ts, tp, a == b);
    }
    {
        std::vector<double> a;
        std::vector<double> b;
        const LimitLawSpec spec{1.0, 0.5, 0.0, 256};
        const std::size_t n = draws / 100;
        const double ts = seconds([&] { a = limit_A_draws(spec, n, serial); });
        const double tp = seconds([&] { b = limit_A_draws(spec, n, parallel); });
        report("limit_A_draws", ts, tp, a == b);
    }
    std::printf("parallel runs used %d thread(s)\n", resolve_threads(threads));
    return all_same ? 0 : 1;
}
