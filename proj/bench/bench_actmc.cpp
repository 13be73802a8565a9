#include "actmc/benchmarks.hpp"
#include "actmc/intpoly.hpp"
#include "actmc/sim.hpp"
#include "actmc/synth.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace actmc;

namespace {

IntPoly random_poly(size_t n) {
    std::mt19937_64 rng(5);
    IntPoly p(n);
    for (auto& c : p) c = Integer(static_cast<long>(rng() % 2000001) - 1000000);
    return p;
}

void BM_TaylorShift(benchmark::State& state) {
    IntPoly p = random_poly(static_cast<size_t>(state.range(0)));
    for (auto _ : state) {
        IntPoly q = p;
        taylor_shift1(q);
        benchmark::DoNotOptimize(q.data());
    }
}

void BM_TaylorShiftSerial(benchmark::State& state) {
    IntPoly p = random_poly(static_cast<size_t>(state.range(0)));
    for (auto _ : state) {
        IntPoly q = p;
        taylor_shift1_serial(q);
        benchmark::DoNotOptimize(q.data());
    }
}

SimConfig disk_drive_config() {
    SimConfig cfg;
    cfg.seed = 3;
    cfg.horizon = 2e4;
    cfg.replications = 8;
    cfg.d = {frac(1, 10), frac(18, 5)};
    return cfg;
}

void BM_Simulate(benchmark::State& state) {
    Model m = disk_drive(8);
    SimConfig cfg = disk_drive_config();
    for (auto _ : state) benchmark::DoNotOptimize(simulate(m, cfg).mean);
}

void BM_SimulateSerial(benchmark::State& state) {
    Model m = disk_drive(8);
    SimConfig cfg = disk_drive_config();
    for (auto _ : state) benchmark::DoNotOptimize(simulate_serial(m, cfg).mean);
}

void BM_SynthesizeDiskDrive(benchmark::State& state) {
    Model m = disk_drive(static_cast<unsigned>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(synthesize(m, frac(1, 100)).gain.g);
}

}  // namespace

BENCHMARK(BM_TaylorShift)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TaylorShiftSerial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SynthesizeDiskDrive)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
