// Microbenchmarks for the hot paths: the quantile-coupling distance merge
// and one Euler step of the interacting particle system.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mvjump/catalog.hpp"
#include "mvjump/engine.hpp"
#include "mvjump/measure.hpp"

namespace {

mvj::EmpiricalMeasure random_cloud(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> xs(n);
    for (auto& v : xs) v = nd(gen);
    return mvj::EmpiricalMeasure::from_samples(xs);
}

void bm_w1(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_cloud(n, 1);
    const auto b = random_cloud(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(mvj::w1(a, b));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_w1)->Range(64, 65536)->Complexity();

void bm_w2(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_cloud(n, 3);
    const auto b = random_cloud(n, 4);
    for (auto _ : state) benchmark::DoNotOptimize(mvj::w2(a, b));
}
BENCHMARK(bm_w2)->Range(64, 65536);

void bm_particle_step(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const mvj::ModelSpec& spec = mvj::catalog_model("lin-lip");
    const mvj::TimeGrid grid = mvj::TimeGrid::uniform(0.1, 0.01);  // 10 steps per run
    const mvj::NoiseBundle bundle =
        mvj::build_bundle(7, n, grid, mvj::dominating_rate(spec), spec.mark_law);
    for (auto _ : state) {
        auto ens = mvj::simulate_particle_system(spec, n, mvj::split_for_limit(bundle));
        benchmark::DoNotOptimize(ens.states.back()[0]);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 10 *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(bm_particle_step)->Range(16, 4096);

} // namespace

BENCHMARK_MAIN();
