#include <metaqed/coupling.hpp>
#include <metaqed/hamiltonian.hpp>
#include <metaqed/metamaterial.hpp>
#include <metaqed/purcell.hpp>

#include <benchmark/benchmark.h>

#include "devices.hpp"

using namespace metaqed;

static void BM_HybridSpectrum(benchmark::State& state) {
    const auto spec = devices::paper_resonator();
    const auto load = qubit_tap_load(devices::paper_qubit(), std::nullopt);
    const auto grid = FrequencyGrid::linear_ghz(4.0, 10.0, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(spectrum(spec, grid, load));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HybridSpectrum)->Arg(2001)->Arg(20001)->Unit(benchmark::kMillisecond);

static void BM_Table2Spectrum(benchmark::State& state) {
    const auto spec = devices::table2_resonator();
    const auto grid = FrequencyGrid::linear_ghz(7.0, 9.0, 20001);
    for (auto _ : state) benchmark::DoNotOptimize(spectrum(spec, grid));
}
BENCHMARK(BM_Table2Spectrum)->Unit(benchmark::kMillisecond);

static void BM_BareModeCatalog(benchmark::State& state) {
    const auto spec = devices::paper_resonator();
    const auto q = devices::paper_qubit();
    const auto grid = FrequencyGrid::linear_ghz(4.0, 9.25, 20001);
    for (auto _ : state) benchmark::DoNotOptimize(bare_mode_catalog(spec, q, grid));
}
BENCHMARK(BM_BareModeCatalog)->Unit(benchmark::kMillisecond);

static void BM_SemiclassicalCoupling(benchmark::State& state) {
    const auto spec = devices::paper_resonator();
    const auto q = devices::paper_qubit();
    const auto cat = bare_mode_catalog(spec, q, FrequencyGrid::linear_ghz(7.0, 8.6, 8001));
    for (auto _ : state) benchmark::DoNotOptimize(extract_g_semiclassical(spec, q, cat, 2));
}
BENCHMARK(BM_SemiclassicalCoupling)->Unit(benchmark::kMillisecond);

static void BM_Diagonalize(benchmark::State& state) {
    CoupledSystemSpec spec;
    for (int k = 0; k < state.range(0); ++k) spec.modes.push_back(ModeSpec::from_ghz(7.8 + 0.13 * k, 16.0, 3));
    const double phi = flux_for_f01(spec.transmon, 7.9);
    for (auto _ : state) benchmark::DoNotOptimize(diagonalize(spec, phi, 6));
    state.counters["dimension"] = static_cast<double>(spec.dimension());
}
BENCHMARK(BM_Diagonalize)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

static void BM_T1Curve(benchmark::State& state) {
    const auto env = devices::paper_environment();
    const auto grid = FrequencyGrid::linear_ghz(1.0, 10.0, 20001);
    for (auto _ : state)
        benchmark::DoNotOptimize(t1_curve(env, QubitCapacitances{}, default_floor_constant(), grid));
}
BENCHMARK(BM_T1Curve)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
