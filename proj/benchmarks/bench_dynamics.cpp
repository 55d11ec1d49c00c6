#include <nhlab/nhlab.hpp>

#include <benchmark/benchmark.h>

namespace {

using namespace nhlab;

void BM_EvalTurntable(benchmark::State &state) {
    TurntableParams p;
    const auto sys = build_turntable(p);
    const auto s = turntable_state(p, 0.4, -0.2, Vec3(0.3, 0.1, 0.7));
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval_dynamics(sys, s));
    }
}
BENCHMARK(BM_EvalTurntable);

void BM_EvalParaboloid(benchmark::State &state) {
    SurfaceParams p;
    p.a = 0.2;
    p.Omega = 0.3;
    const auto sys = build_rotating_surface(p);
    const auto s = surface_state(p, 0.8, 0.0, 0.1, 0.5, 0.2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval_dynamics(sys, s));
    }
}
BENCHMARK(BM_EvalParaboloid);

// Finite-difference fallback: the same system with analytic derivatives removed.
void BM_EvalParaboloidFiniteDifference(benchmark::State &state) {
    SurfaceParams p;
    p.a = 0.2;
    p.Omega = 0.3;
    auto sys = build_rotating_surface(p);
    sys.lagrangian.mass_matrix_dq = nullptr;
    sys.lagrangian.linear_term_dq = nullptr;
    sys.lagrangian.potential_gradient = nullptr;
    sys.constraint.matrix_dq = nullptr;
    sys.constraint.offset_dq = nullptr;
    const auto s = surface_state(p, 0.8, 0.0, 0.1, 0.5, 0.2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval_dynamics(sys, s));
    }
}
BENCHMARK(BM_EvalParaboloidFiniteDifference);

// Dense constant system of size n with n/2 constraint rows: full KKT factorization
// against the Schur-complement route.
void BM_SaddlePoint(benchmark::State &state, bool schur) {
    const int n = static_cast<int>(state.range(0));
    const int k = n / 2;
    Mat A = Mat::Random(n, n);
    const Mat M = A * A.transpose() + n * Mat::Identity(n, n);
    const Mat S = Mat::Random(k, n);
    MechanicalLagrangian L;
    L.n = n;
    L.mass_matrix = [M](const Vec &, double) { return M; };
    AffineConstraint K;
    K.n = n;
    K.k = k;
    K.matrix = [S](const Vec &, double) { return S; };
    NonholonomicSystem sys;
    sys.lagrangian = L;
    sys.constraint = K;
    const Mat N = S.fullPivLu().kernel();
    VelocityState s{Vec::Random(n), N * Vec::Random(N.cols()), 0.0};
    DynamicsOptions opt;
    opt.schur_threshold = schur ? 0 : 1 << 20;
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval_dynamics(sys, s, opt));
    }
}
BENCHMARK_CAPTURE(BM_SaddlePoint, kkt, false)->Arg(8)->Arg(32)->Arg(96);
BENCHMARK_CAPTURE(BM_SaddlePoint, schur, true)->Arg(8)->Arg(32)->Arg(96);

} // namespace
