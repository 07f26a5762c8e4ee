#include <benchmark/benchmark.h>

#include "snictorus/atlas.hpp"
#include "snictorus/curves.hpp"
#include "snictorus/separatrix.hpp"
#include "snictorus/transit.hpp"

using namespace snic;

namespace {

void BM_FieldEval(benchmark::State& state) {
    const Field f = Family::sine_box(0.1, 0.1).at(-0.01, 0.02);
    Vec2 p{0.3, 1.2};
    for (auto _ : state) {
        p.x1 += 1e-9;
        benchmark::DoNotOptimize(f(p));
    }
}
BENCHMARK(BM_FieldEval);

void BM_FindEquilibria(benchmark::State& state) {
    const Field f = Family::reduced_box(0.5, 0.3).at(-0.15, -0.12);
    for (auto _ : state) benchmark::DoNotOptimize(find_equilibria(f));
}
BENCHMARK(BM_FindEquilibria);

void BM_ContinueSne(benchmark::State& state) {
    const SneCurveSample s = sne_analytic(0.5, 0.3, 1, -0.5);
    ContinuationOptions opts;
    opts.n_steps = 500;
    for (auto _ : state)
        benchmark::DoNotOptimize(continue_sne(Family::reduced_box(0.5, 0.3), {s.x, s.mu}, opts));
}
BENCHMARK(BM_ContinueSne);

void BM_CountScan(benchmark::State& state) {
    ScanConfig c = preset("box-counts");
    c.grid.nx = c.grid.ny = static_cast<int>(state.range(0));
    c.threads = static_cast<unsigned>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(scan(c));
    state.SetItemsProcessed(state.iterations() * c.grid.nx * c.grid.ny);
}
BENCHMARK(BM_CountScan)->Args({101, 1})->Args({101, 8})->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_ClassifyRegime(benchmark::State& state) {
    const Field f = Family::explicit_family(0.01, 0.006).at(0.08, 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(classify_regime(f));
}
BENCHMARK(BM_ClassifyRegime)->Unit(benchmark::kMillisecond);

void BM_Transit(benchmark::State& state) {
    TransitScanConfig cfg;
    const Field f = transit_model(TransitCase::cubic, cfg);
    for (auto _ : state) benchmark::DoNotOptimize(transit_numeric(f, 0.01, 0.05));
}
BENCHMARK(BM_Transit)->Unit(benchmark::kMicrosecond);

void BM_BasicTartan(benchmark::State& state) {
    const Field f = Family::explicit_family(0.01, 0.006).at(-0.05, -0.05);
    for (auto _ : state) benchmark::DoNotOptimize(verify_basic_tartan(f, {}, 1));
}
BENCHMARK(BM_BasicTartan)->Unit(benchmark::kMillisecond);

void BM_HeteroclinicRoot(benchmark::State& state) {
    const Family fam = Family::sine_box(0.1, 0.1);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            find_heteroclinic(fam, {{-0.012, 0.0}, {0.0, 1.0}}, GapKind::D_A01, two_pi / 2, -0.015, -0.0105));
}
BENCHMARK(BM_HeteroclinicRoot)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
