#include "illiquid/montecarlo.hpp"
#include "illiquid/solver.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

using namespace illiquid;

namespace {

Problem vg_problem(double rho, int n_half) {
    MarketParams m;
    m.rho = rho;
    return make_problem(m, levy::LevyModel::variance_gamma(-0.33, 0.12, 0.16), make_grid(1.0, 0.01, 0.005, n_half),
                        SchemeOptions{});
}

void BM_MarchReference(benchmark::State& state) {
    const Problem p = vg_problem(0.2, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(march_reference(p).u.data());
}

void BM_March(benchmark::State& state) {
    const Problem p = vg_problem(0.2, static_cast<int>(state.range(0)));
    omp_set_num_threads(static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(march(p).u.data());
}

void BM_MonteCarlo(benchmark::State& state) {
    const auto model = levy::LevyModel::variance_gamma(-0.33, 0.12, 0.16);
    omp_set_num_threads(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(mc::price_put_mc(model, 0.12, 0.0, 1.0, 100.0, 100.0, {200000, 1, 42, true}).price);
}

}  // namespace

BENCHMARK(BM_MarchReference)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_March)->ArgsProduct({{400, 800}, {1, 2, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
