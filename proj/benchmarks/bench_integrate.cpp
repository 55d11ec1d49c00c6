#include <nhlab/nhlab.hpp>

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

using namespace nhlab;

void BM_IntegrateTurntable(benchmark::State &state) {
    TurntableParams p;
    const auto sys = build_turntable(p);
    const auto init = turntable_state(p, 1.0, 0.0, Vec3::Zero());
    IntegratorOptions o;
    o.rtol = std::pow(10.0, -static_cast<double>(state.range(0)));
    o.atol = o.rtol * 1e-2;
    o.record_multipliers = false;
    long steps = 0;
    for (auto _ : state) {
        const auto traj = integrate(sys, init, 70.0, o);
        steps = static_cast<long>(traj.size());
        benchmark::DoNotOptimize(traj.states.back());
    }
    state.counters["steps"] = static_cast<double>(steps);
}
BENCHMARK(BM_IntegrateTurntable)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_IntegrateBowlRk4(benchmark::State &state) {
    SurfaceParams p;
    p.a = 0.2;
    p.Omega = 0.1;
    const auto sys = build_rotating_surface(p);
    const auto init = surface_state(p, 0.8, 0.0, 0.1, 0.5, 0.2);
    IntegratorOptions o;
    o.method = Method::FixedRK4;
    o.step = 1e-2;
    o.record_multipliers = false;
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrate(sys, init, 20.0, o).states.back());
    }
}
BENCHMARK(BM_IntegrateBowlRk4)->Unit(benchmark::kMillisecond);

void BM_DetectPeriodBowl(benchmark::State &state) {
    SurfaceParams p;
    p.a = 0.2;
    p.Omega = 0.1;
    const auto init = surface_state(p, 0.8, 0.0, 0.1, 0.5, 0.2);
    IntegratorOptions o;
    o.rtol = 1e-12;
    o.atol = 1e-14;
    SectionSpec spec;
    spec.horizon = 20.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect_period(Preset{p}, init, spec, o).period);
    }
}
BENCHMARK(BM_DetectPeriodBowl)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
