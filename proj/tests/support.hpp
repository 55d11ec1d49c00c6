// Shared helpers and independent oracles for the unit tests.
#pragma once

#include <nhlab/nhlab.hpp>

#include <cmath>
#include <random>

namespace nhlab::test {

inline constexpr double kPi = 3.141592653589793;

/// Closed-form turntable motion from the integrals C1 = aω_x − νx,
/// C2 = aω_y − νy: (x, y) turns at rate κ = Ω − ν about (C1, C2)/κ.
/// Derived by hand, independent of the library's vector fields.
inline Vec turntable_exact(const TurntableParams &p, const Vec &z0, double t) {
    const double nu = p.Omega / (1.0 + p.c);
    const double kappa = p.Omega - nu;
    const double C1 = p.a * z0[2] - nu * z0[0];
    const double C2 = p.a * z0[3] - nu * z0[1];
    double x = 0.0;
    double y = 0.0;
    if (kappa == 0.0) {
        x = z0[0] + C2 * t;
        y = z0[1] - C1 * t;
    } else {
        const double cx = C1 / kappa;
        const double cy = C2 / kappa;
        const double X = z0[0] - cx;
        const double Y = z0[1] - cy;
        x = cx + std::cos(kappa * t) * X - std::sin(kappa * t) * Y;
        y = cy + std::sin(kappa * t) * X + std::cos(kappa * t) * Y;
    }
    Vec z(5);
    z << x, y, (C1 + nu * x) / p.a, (C2 + nu * y) / p.a, z0[4];
    return z;
}

/// True reduced period of the turntable, 2π(1 + c)/(cΩ).
inline double turntable_true_period(const TurntableParams &p) {
    return 2.0 * kPi * (1.0 + p.c) / (p.c * p.Omega);
}

inline Vec turntable_z(const VelocityState &s) {
    Vec z(5);
    z << s.q[0], s.q[1], s.qdot.segment<3>(2);
    return z;
}

/// Uniform random vector in [lo, hi]^n from a std::mt19937_64.
inline Vec random_vec(std::mt19937_64 &rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    Vec v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = d(rng);
    }
    return v;
}

/// Random on-fiber turntable state.
inline VelocityState random_turntable_state(std::mt19937_64 &rng, const TurntableParams &p) {
    const Vec r = random_vec(rng, 8, -2.0, 2.0);
    VelocityState s = turntable_state(p, r[0], r[1], Vec3(r[2], r[3], r[4]));
    s.q.segment<3>(2) = r.segment<3>(5);
    return s;
}

/// A constant-coefficient system: L = ½ q̇ᵀ M q̇, S q̇ + s = 0. Assembled
/// field by field so that small examples with r = 1 can be built too.
inline NonholonomicSystem constant_system(const Mat &M, const Mat &S, const Vec &s) {
    MechanicalLagrangian L;
    L.n = static_cast<int>(M.rows());
    L.mass_matrix = [M](const Vec &, double) { return M; };
    AffineConstraint K;
    K.n = L.n;
    K.k = static_cast<int>(S.rows());
    K.matrix = [S](const Vec &, double) { return S; };
    if (!s.isZero(0.0)) {
        K.offset = [s](const Vec &, double) { return s; };
    }
    NonholonomicSystem sys;
    sys.name = "constant";
    sys.lagrangian = L;
    sys.constraint = K;
    return sys;
}

/// Strips analytic derivatives so the solver falls back to finite differences.
inline NonholonomicSystem without_derivatives(NonholonomicSystem sys) {
    sys.lagrangian.mass_matrix_dq = nullptr;
    sys.lagrangian.mass_matrix_dt = nullptr;
    sys.lagrangian.linear_term_dq = nullptr;
    sys.lagrangian.linear_term_dt = nullptr;
    sys.lagrangian.potential_gradient = nullptr;
    sys.constraint.matrix_dq = nullptr;
    sys.constraint.matrix_dt = nullptr;
    sys.constraint.offset_dq = nullptr;
    sys.constraint.offset_dt = nullptr;
    return sys;
}

inline SurfaceParams paraboloid_params(double Omega) {
    SurfaceParams p;
    p.profile = paraboloid_profile(1.0);
    p.a = 0.2;
    p.c = 0.4;
    p.Omega = Omega;
    p.g = 1.0;
    return p;
}

} // namespace nhlab::test
