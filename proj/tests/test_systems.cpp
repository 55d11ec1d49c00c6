#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

namespace nhlab {
namespace {

TurntableParams turntable(double Omega) {
    TurntableParams p;
    p.Omega = Omega;
    return p;
}

Vec z5(double x, double y, double wx, double wy, double wz) {
    Vec z(5);
    z << x, y, wx, wy, wz;
    return z;
}

// ---- turntable ------------------------------------------------------------------

TEST(Turntable, Structure) {
    const auto p = turntable(1.5);
    const auto sys = build_turntable(p);
    const Vec q = z5(0.3, -0.7, 1, 2, 3);
    Vec m(5);
    m << 1, 1, 0.4, 0.4, 0.4;
    EXPECT_EQ(sys.lagrangian.M(q, 0.0), Mat(m.asDiagonal()));
    EXPECT_EQ(sys.lagrangian.V(q, 0.0), 0.0);
    EXPECT_EQ(sys.lagrangian.b(q, 0.0), Vec::Zero(5));
    Mat S(2, 5);
    S << 1, 0, 0, -1, 0, 0, 1, 1, 0, 0;
    EXPECT_EQ(sys.constraint.S(q, 0.0), S);
    EXPECT_LT((sys.constraint.s(q, 0.0) - Eigen::Vector2d(1.5 * -0.7, -1.5 * 0.3)).norm(), 1e-15);
    for (const char *name : {"omega_z", "transverse_x", "transverse_y", "frame_energy", "moving_energy", "energy"}) {
        EXPECT_NE(sys.find_integral(name), nullptr) << name;
    }
}

TEST(Turntable, Nu) { EXPECT_NEAR(turntable(1.0).nu(), 5.0 / 7.0, 1e-16); }

TEST(Turntable, RestingTableIsLinear) {
    EXPECT_TRUE(build_turntable(turntable(0.0)).constraint.is_linear());
    EXPECT_FALSE(build_turntable(turntable(1.0)).constraint.is_linear());
}

TEST(Turntable, InvalidParamsThrow) {
    TurntableParams p;
    p.a = 0.0;
    EXPECT_THROW(build_turntable(p), ContractViolation);
    p.a = 1.0;
    p.c = -1.0;
    EXPECT_THROW(build_turntable(p), ContractViolation);
}

TEST(TurntableReducedRhs, AtRestOnAxis) {
    const Vec d = turntable_reduced_rhs(turntable(1.0), z5(1, 0, 0, 0, 0));
    EXPECT_LT((d - z5(0, 1, 0, 5.0 / 7.0, 0)).norm(), 1e-15);
}

TEST(TurntableReducedRhs, RestingTableKeepsSpin) {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 20; ++i) {
        const Vec z = test::random_vec(rng, 5, -2, 2);
        EXPECT_EQ(turntable_reduced_rhs(turntable(0.0), z).tail<3>(), Vec3::Zero());
    }
}

TEST(TurntableReducedRhs, Substitution) {
    const Vec d = turntable_reduced_rhs(turntable(1.0), z5(0, 1, 1, 0, 0));
    EXPECT_LT((d - z5(-1, -1, -5.0 / 7.0, -5.0 / 7.0, 0)).norm(), 1e-15);
}

TEST(TurntableReducedRhs, GenericSolverAgreesAtRandomFiberStates) {
    std::mt19937_64 rng(42);
    const auto p = turntable(1.0);
    const auto sys = build_turntable(p);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const auto s = test::random_turntable_state(rng, p);
        const Vec z = test::turntable_z(s);
        const Vec d = turntable_reduced_rhs(p, z);
        const Vec qddot = eval_dynamics(sys, s).qddot;
        Vec generic(5);
        generic << s.qdot[0], s.qdot[1], qddot.tail<3>();
        worst = std::max(worst, (generic - d).lpNorm<Eigen::Infinity>());
        // Second derivatives of (x, y) from differentiating the constraint rows.
        const double xdd = p.a * d[3] - p.Omega * d[1];
        const double ydd = -p.a * d[2] + p.Omega * d[0];
        worst = std::max({worst, std::abs(qddot[0] - xdd), std::abs(qddot[1] - ydd)});
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(TurntableReducedRhs, MatchesClosedFormSolution) {
    // d/dt of the hand-derived solution at t = 0, by central differences.
    std::mt19937_64 rng(43);
    const auto p = turntable(1.3);
    for (int i = 0; i < 50; ++i) {
        const Vec z = test::random_vec(rng, 5, -2, 2);
        const double h = 1e-4;
        const Vec fd = (test::turntable_exact(p, z, h) - test::turntable_exact(p, z, -h)) / (2 * h);
        EXPECT_LT((fd - turntable_reduced_rhs(p, z)).norm(), 1e-7);
    }
}

TEST(TurntableEnergyRate, PrintedFormulaExamples) {
    const auto p = turntable(1.0);
    EXPECT_EQ(turntable_energy_rate(p, turntable_state(p, 0, 1, Vec3(0, 1, 0))), 0.0);
    EXPECT_NEAR(turntable_energy_rate(p, turntable_state(p, 1, 0, Vec3(0, 1, 0))), 2.0 / 7.0, 1e-15);
}

TEST(TurntableEnergyRate, EqualsReactionPower) {
    std::mt19937_64 rng(44);
    const auto p = turntable(0.9);
    const auto sys = build_turntable(p);
    for (int i = 0; i < 200; ++i) {
        const auto s = test::random_turntable_state(rng, p);
        const auto out = eval_dynamics(sys, s);
        // dE/dt = q̇ᵀ M q̈ for the turntable (M constant, V = 0).
        const double rate = s.qdot.dot(sys.lagrangian.M(s.q, 0.0) * out.qddot);
        EXPECT_NEAR(rate, turntable_energy_rate(p, s), 1e-12);
        EXPECT_NEAR(rate, out.reaction.dot(representative_xi(sys.constraint, s.q, 0.0)), 1e-12);
    }
}

TEST(TurntableIntegrals, ConstantAlongReducedField) {
    std::mt19937_64 rng(45);
    const auto p = turntable(1.0);
    const auto sys = build_turntable(p);
    for (const char *name : {"omega_z", "transverse_x", "transverse_y", "frame_energy", "moving_energy"}) {
        const auto *I = sys.find_integral(name);
        for (int i = 0; i < 50; ++i) {
            const auto s = test::random_turntable_state(rng, p);
            const Vec z = test::turntable_z(s);
            const double h = 1e-4;
            auto at = [&](double t) {
                const Vec zt = test::turntable_exact(p, z, t);
                return I->value(turntable_state(p, zt[0], zt[1], zt.tail<3>()));
            };
            EXPECT_NEAR(at(h), at(-h), 1e-10) << name;
            EXPECT_NEAR(at(5.0), at(0.0), 1e-10) << name;
        }
    }
}

// ---- profiles and geometry ---------------------------------------------------------

TEST(SurfaceGeometry, FlatProfile) {
    const auto prof = plane_profile(0.5);
    for (double u : {0.1, 1.0, 3.0}) {
        const auto g = surface_geometry(prof, u, 0.8);
        EXPECT_LT((g.n - Vec3(0, 0, -1)).norm(), 1e-15);
        EXPECT_LT((g.metric - Eigen::Vector2d(1, u * u).asDiagonal().toDenseMatrix()).norm(), 1e-14);
        EXPECT_DOUBLE_EQ(g.r.z(), 0.5);
    }
}

TEST(SurfaceGeometry, ParaboloidNearAxis) {
    const auto g = surface_geometry(paraboloid_profile(1.0), 1e-3, 0.3);
    EXPECT_LT((g.n - Vec3(0, 0, -1)).norm(), 2e-3);
}

TEST(SurfaceGeometry, NormalIsUnitAndOrthogonal) {
    std::mt19937_64 rng(46);
    const std::vector<SurfaceProfile> profiles{plane_profile(), paraboloid_profile(0.7), sphere_bowl_profile(2.0)};
    for (const auto &prof : profiles) {
        for (int i = 0; i < 50; ++i) {
            const double u = prof.u_min() + (std::min(prof.u_max(), 1.2) - prof.u_min()) * test::random_vec(rng, 1, 0, 1)[0];
            const double phi = test::random_vec(rng, 1, -4, 4)[0];
            const auto g = surface_geometry(prof, u, phi);
            EXPECT_NEAR(g.n.norm(), 1.0, 1e-14);
            EXPECT_LT(std::abs(g.n.dot(g.r_u)), 1e-12 * g.r_u.norm());
            EXPECT_LT(std::abs(g.n.dot(g.r_phi)), 1e-12 * std::max(1.0, g.r_phi.norm()));
        }
    }
}

TEST(SurfaceGeometry, SphereBowlNormalPointsOutward) {
    const auto g = surface_geometry(sphere_bowl_profile(2.0), 0.6, 1.1);
    EXPECT_LT((g.n - g.r / 2.0).norm(), 1e-14);
}

TEST(SurfaceGeometry, DerivativesMatchFiniteDifferences) {
    const auto prof = sphere_bowl_profile(1.5);
    const double u = 0.7, phi = 0.4, h = 1e-6;
    const auto g = surface_geometry(prof, u, phi);
    const auto gu = [&](double du) { return surface_geometry(prof, u + du, phi); };
    const auto gp = [&](double dp) { return surface_geometry(prof, u, phi + dp); };
    EXPECT_LT((g.r_u - (gu(h).r - gu(-h).r) / (2 * h)).norm(), 1e-8);
    EXPECT_LT((g.r_uu - (gu(h).r_u - gu(-h).r_u) / (2 * h)).norm(), 1e-8);
    EXPECT_LT((g.r_uphi - (gp(h).r_u - gp(-h).r_u) / (2 * h)).norm(), 1e-8);
    EXPECT_LT((g.r_phiphi - (gp(h).r_phi - gp(-h).r_phi) / (2 * h)).norm(), 1e-8);
    EXPECT_LT((g.n_u - (gu(h).n - gu(-h).n) / (2 * h)).norm(), 1e-8);
    EXPECT_LT((g.n_phi - (gp(h).n - gp(-h).n) / (2 * h)).norm(), 1e-8);
}

TEST(SurfaceGeometry, OutsideDomainThrows) {
    EXPECT_THROW(surface_geometry(paraboloid_profile(), 0.0, 0.0), DomainError);
    EXPECT_THROW(surface_geometry(paraboloid_profile(), -1.0, 0.0), DomainError);
    EXPECT_THROW(sphere_bowl_profile(1.0).at(4.0), DomainError);
}

TEST(Profile, TabulatedSplineFollowsParaboloid) {
    std::vector<ProfileKnot> knots;
    for (int i = 0; i <= 60; ++i) {
        const double u = 0.05 + 0.05 * i;
        knots.push_back({u, u, 0.5 * u * u});
    }
    const auto prof = tabulated_profile(knots);
    // Interior points only; natural end conditions bias the curvature near the first knot.
    for (double u : {0.5, 0.77, 1.5, 2.5}) {
        const auto pt = prof.at(u);
        EXPECT_NEAR(pt.rho, u, 1e-6);
        EXPECT_NEAR(pt.zeta, 0.5 * u * u, 1e-6);
        EXPECT_NEAR(pt.dzeta, u, 1e-4);
        EXPECT_NEAR(pt.ddzeta, 1.0, 1e-2);
    }
    EXPECT_THROW(prof.at(0.01), DomainError);
}

TEST(Profile, KnotParsing) {
    std::istringstream in("# bowl\n\n0.1 0.1 0.005\n  0.2 0.2 0.02\n# tail\n0.3 0.3 0.045\n");
    const auto knots = read_profile_knots(in);
    ASSERT_EQ(knots.size(), 3u);
    EXPECT_DOUBLE_EQ(knots[1].zeta, 0.02);
    std::istringstream bad("0.1 0.1\n");
    EXPECT_THROW(read_profile_knots(bad), ContractViolation);
    std::istringstream junk("0.1 0.1 0.1 extra\n");
    EXPECT_THROW(read_profile_knots(junk), ContractViolation);
}

TEST(Profile, KnotValidation) {
    EXPECT_THROW(tabulated_profile({{0.2, 0.2, 0.0}, {0.1, 0.1, 0.0}}), ContractViolation);
    EXPECT_THROW(tabulated_profile({{0.0, 0.0, 0.0}, {0.1, 0.1, 0.0}}), ContractViolation);
}

TEST(Profile, LoadFromFile) {
    const auto prof = load_tabulated_profile(std::string(NHLAB_TEST_DATA_DIR) + "/paraboloid.knots");
    EXPECT_NEAR(prof.at(1.0).zeta, 0.5, 1e-4);
    EXPECT_THROW(load_tabulated_profile("/nonexistent/profile.knots"), ContractViolation);
}

// ---- rotating surface --------------------------------------------------------------

SurfaceParams plane_params(double Omega) {
    SurfaceParams p;
    p.profile = plane_profile();
    p.a = 1.0;
    p.c = 0.4;
    p.Omega = Omega;
    return p;
}

VelocityState random_surface_state(std::mt19937_64 &rng, const SurfaceParams &p, double u_lo, double u_hi) {
    const Vec r = test::random_vec(rng, 5, -1, 1);
    const double u = u_lo + (u_hi - u_lo) * 0.5 * (r[0] + 1.0);
    auto s = surface_state(p, u, 3.0 * r[1], r[2], r[3], r[4]);
    s.q.tail<3>() = test::random_vec(rng, 3, -2, 2);
    return s;
}

TEST(RotatingSurface, PlaneLimitMatchesTurntable) {
    std::mt19937_64 rng(47);
    for (double Omega : {0.0, 1.0, -0.6}) {
        const auto sp = plane_params(Omega);
        TurntableParams tp;
        tp.a = sp.a;
        tp.c = sp.c;
        tp.Omega = Omega;
        const auto surf = build_rotating_surface(sp);
        const auto table = build_turntable(tp);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const auto s = random_surface_state(rng, sp, 0.2, 3.0);
            const double u = s.q[0], phi = s.q[1], ud = s.qdot[0], pd = s.qdot[1];
            const double c = std::cos(phi), sn = std::sin(phi);
            VelocityState ts;
            ts.q = z5(u * c, u * sn, s.q[2], s.q[3], s.q[4]);
            ts.qdot = z5(ud * c - u * pd * sn, ud * sn + u * pd * c, s.qdot[2], s.qdot[3], s.qdot[4]);
            ASSERT_LT(constraint_residual(table.constraint, ts).norm(), 1e-12);
            const Vec a = eval_dynamics(surf, s).qddot;
            const Vec b = eval_dynamics(table, ts).qddot;
            const double xdd = a[0] * c - 2 * ud * pd * sn - u * a[1] * sn - u * pd * pd * c;
            const double ydd = a[0] * sn + 2 * ud * pd * c + u * a[1] * c - u * pd * pd * sn;
            worst = std::max({worst, std::abs(xdd - b[0]), std::abs(ydd - b[1]),
                              (a.tail<3>() - b.tail<3>()).lpNorm<Eigen::Infinity>()});
        }
        EXPECT_LT(worst, 1e-10) << "Omega = " << Omega;
    }
}

TEST(RotatingSurface, FlatRestIsEquilibrium) {
    const auto p = plane_params(0.0);
    const auto out = eval_dynamics(build_rotating_surface(p), surface_state(p, 0.7, 0.3, 0, 0, 0));
    EXPECT_LT(out.qddot.norm(), 1e-15);
}

TEST(RotatingSurface, OnFiberStatesDoNotSlip) {
    std::mt19937_64 rng(48);
    for (const auto &p : {test::paraboloid_params(0.7), plane_params(1.0)}) {
        const auto sys = build_rotating_surface(p);
        for (int i = 0; i < 200; ++i) {
            const auto s = random_surface_state(rng, p, 0.05, 2.0);
            EXPECT_LT(constraint_residual(sys.constraint, s).norm(), 1e-12);
            const auto g = surface_geometry(p.profile, s.q[0], s.q[1]);
            const Vec3 slip = surface_slip_velocity(p, s);
            EXPECT_LT(std::abs(slip.dot(g.n)), 1e-12);
            EXPECT_LT(slip.norm(), 1e-12);
        }
    }
}

TEST(RotatingSurface, SpinNormalIsRespected) {
    const auto p = test::paraboloid_params(0.5);
    const auto s = surface_state(p, 0.9, 0.4, 0.3, -0.2, 0.77);
    const auto g = surface_geometry(p.profile, 0.9, 0.4);
    EXPECT_NEAR(g.n.dot(Vec3(s.qdot.tail<3>())), 0.77, 1e-14);
}

TEST(RotatingSurface, MovingEnergyDefinition) {
    std::mt19937_64 rng(49);
    const auto p = test::paraboloid_params(0.3);
    const auto sys = build_rotating_surface(p);
    const double ca2 = p.c * p.a * p.a;
    for (int i = 0; i < 50; ++i) {
        const auto s = random_surface_state(rng, p, 0.1, 1.5);
        const double rho = p.profile.at(s.q[0]).rho;
        const double expected = energy(sys.lagrangian, s) - p.Omega * (rho * rho * s.qdot[1] + ca2 * s.qdot[4]);
        EXPECT_NEAR(sys.find_integral("moving_energy")->value(s), expected, 1e-13);
        EXPECT_NEAR(moving_energy(sys.lagrangian, rotating_frame_map(p, p.Omega))(s), expected, 1e-13);
    }
}

TEST(RotatingSurface, AnalyticDerivativesMatchFiniteDifferences) {
    std::mt19937_64 rng(50);
    const auto p = test::paraboloid_params(0.6);
    const auto sys = build_rotating_surface(p);
    const auto &L = sys.lagrangian;
    const auto &K = sys.constraint;
    for (int i = 0; i < 20; ++i) {
        const Vec q = random_surface_state(rng, p, 0.2, 1.5).q;
        const double h = 1e-6;
        const auto dM = L.mass_matrix_dq(q, 0.0);
        const auto dS = K.matrix_dq(q, 0.0);
        const Mat ds = K.offset_dq(q, 0.0);
        const Vec dV = L.potential_gradient(q, 0.0);
        for (int j = 0; j < 5; ++j) {
            Vec qp = q, qm = q;
            qp[j] += h;
            qm[j] -= h;
            EXPECT_LT((dM[j] - (L.M(qp, 0) - L.M(qm, 0)) / (2 * h)).norm(), 1e-7);
            EXPECT_LT((dS[j] - (K.S(qp, 0) - K.S(qm, 0)) / (2 * h)).norm(), 1e-7);
            EXPECT_LT((ds.col(j) - (K.s(qp, 0) - K.s(qm, 0)) / (2 * h)).norm(), 1e-7);
            EXPECT_NEAR(dV[j], (L.V(qp, 0) - L.V(qm, 0)) / (2 * h), 1e-7);
        }
    }
}

TEST(RotatingSurface, RestingBowlConservesEnergy) {
    const auto p = test::paraboloid_params(0.0);
    const auto sys = build_rotating_surface(p);
    IntegratorOptions opts;
    opts.rtol = 1e-12;
    opts.atol = 1e-14;
    const auto traj = integrate(sys, surface_state(p, 0.8, 0.0, 0.1, 0.9, 0.5), 1000.0, opts);
    const double e0 = energy(sys.lagrangian, traj.states.front());
    double worst = 0.0;
    for (const auto &s : traj.states) {
        worst = std::max(worst, std::abs(energy(sys.lagrangian, s) - e0));
    }
    EXPECT_LT(worst, 1e-9);
}

TEST(RotatingSurface, SphereBowlPresetBuilds) {
    SurfaceParams p;
    p.profile = sphere_bowl_profile(3.0);
    p.a = 0.5;
    p.Omega = 0.2;
    const auto sys = build_rotating_surface(p);
    const auto s = surface_state(p, 0.4, 0.0, 0.0, 0.5, 0.0);
    EXPECT_NO_THROW(eval_dynamics(sys, s));
}

// ---- rotating-frame twins ------------------------------------------------------------

void expect_same_system(const NonholonomicSystem &a, const NonholonomicSystem &b, const std::vector<Vec> &qs,
                        double tol) {
    for (const auto &q : qs) {
        for (double t : {0.0, 1.3, 7.0}) {
            EXPECT_LT((a.lagrangian.M(q, t) - b.lagrangian.M(q, t)).norm(), tol);
            EXPECT_LT((a.lagrangian.b(q, t) - b.lagrangian.b(q, t)).norm(), tol);
            EXPECT_NEAR(a.lagrangian.V(q, t), b.lagrangian.V(q, t), tol);
            // Same affine fiber: equal row-space projectors and equal minimum-norm solutions.
            const Mat Sa = a.constraint.S(q, t), Sb = b.constraint.S(q, t);
            const auto pa = Sa.completeOrthogonalDecomposition().pseudoInverse();
            const auto pb = Sb.completeOrthogonalDecomposition().pseudoInverse();
            EXPECT_LT((pa * Sa - pb * Sb).norm(), tol);
            EXPECT_LT((pa * a.constraint.s(q, t) - pb * b.constraint.s(q, t)).norm(), tol);
        }
    }
}

TEST(RotatingFrameTwin, TurntableMatchesGenericPullback) {
    std::mt19937_64 rng(51);
    const auto p = turntable(1.1);
    const auto closed = build_rotating_frame_twin(p);
    const auto generic = build_rotating_frame_twin(build_turntable(p), preset_axial_rotation(p), p.Omega);
    std::vector<Vec> qs;
    for (int i = 0; i < 20; ++i) {
        qs.push_back(test::random_vec(rng, 5, -2, 2));
    }
    expect_same_system(closed, generic, qs, 1e-12);
    EXPECT_TRUE(closed.constraint.is_linear() || closed.constraint.s(qs[0], 0.0).norm() == 0.0);
}

TEST(RotatingFrameTwin, SurfaceMatchesGenericPullback) {
    std::mt19937_64 rng(52);
    const auto p = test::paraboloid_params(0.4);
    const auto closed = build_rotating_frame_twin(p);
    const Vec probe = (Vec(5) << 0.5, 0, 0, 0, 0).finished();
    const auto generic = build_rotating_frame_twin(build_rotating_surface(p), preset_axial_rotation(p), p.Omega, probe);
    std::vector<Vec> qs;
    for (int i = 0; i < 20; ++i) {
        qs.push_back(random_surface_state(rng, p, 0.1, 1.5).q);
    }
    expect_same_system(closed, generic, qs, 1e-12);
}

TEST(RotatingFrameTwin, TurntableHomogeneousPieces) {
    std::mt19937_64 rng(53);
    const auto p = turntable(1.0);
    const auto twin = build_rotating_frame_twin(p);
    const auto Y = axial_generator(preset_axial_rotation(p), 1.0);
    for (int i = 0; i < 50; ++i) {
        const Vec u = test::random_vec(rng, 5, -2, 2);
        const Vec v = test::random_vec(rng, 5, -2, 2);
        const double lp = lagrangian_value(twin.lagrangian, {u, v, 0.0});
        const double lm = lagrangian_value(twin.lagrangian, {u, -v, 0.0});
        const double l0 = lagrangian_value(twin.lagrangian, {u, Vec::Zero(5), 0.0});
        const Mat M = build_turntable(p).lagrangian.M(u, 0.0);
        EXPECT_NEAR(0.5 * (lp + lm) - l0, 0.5 * v.dot(M * v), 1e-12);
        EXPECT_NEAR(0.5 * (lp - lm), v.dot(M * Y.field(u)), 1e-12);
        EXPECT_NEAR(l0, 0.5 * Y.field(u).dot(M * Y.field(u)), 1e-12);
    }
}

TEST(RotatingFrameTwin, SurfaceCentrifugalPotential) {
    const auto p = test::paraboloid_params(0.7);
    const auto twin = build_rotating_frame_twin(p);
    const double ca2 = p.c * p.a * p.a;
    for (double u : {0.2, 0.9, 1.7}) {
        const Vec q = (Vec(5) << u, 0.3, 0, 0, 0).finished();
        const auto pt = p.profile.at(u);
        const double expected = p.g * pt.zeta - 0.5 * p.Omega * p.Omega * (pt.rho * pt.rho + ca2);
        EXPECT_NEAR(twin.lagrangian.V(q, 0.0), expected, 1e-14);
    }
}

TEST(RotatingFrameTwin, SurfaceMatchesRotatingFrameFormula) {
    std::mt19937_64 rng(54);
    const auto p = test::paraboloid_params(0.45);
    const auto twin = build_rotating_frame_twin(p);
    const double ca2 = p.c * p.a * p.a;
    const Vec3 w = p.Omega * Vec3::UnitZ();
    for (int i = 0; i < 100; ++i) {
        const auto s = random_surface_state(rng, p, 0.1, 1.5);
        const Vec v = test::random_vec(rng, 5, -2, 2);
        const auto g = surface_geometry(p.profile, s.q[0], s.q[1]);
        const Vec3 sdot = g.r_u * v[0] + g.r_phi * v[1];
        const double expected = 0.5 * (sdot + w.cross(g.r)).squaredNorm() +
                                0.5 * ca2 * (Vec3(v.tail<3>()) + w).squaredNorm() - p.g * g.r.z();
        EXPECT_NEAR(lagrangian_value(twin.lagrangian, {s.q, v, 0.0}), expected, 1e-12);
    }
}

TEST(RotatingFrameTwin, RestingFrameEqualsOriginal) {
    std::mt19937_64 rng(55);
    const auto p = test::paraboloid_params(0.0);
    const auto twin = build_rotating_frame_twin(p);
    const auto sys = build_rotating_surface(p);
    std::vector<Vec> qs;
    for (int i = 0; i < 10; ++i) {
        qs.push_back(random_surface_state(rng, p, 0.1, 1.5).q);
    }
    expect_same_system(twin, sys, qs, 1e-15);
    const auto tt = build_rotating_frame_twin(turntable(0.0));
    const auto ts = build_turntable(turntable(0.0));
    qs.clear();
    for (int i = 0; i < 10; ++i) {
        qs.push_back(test::random_vec(rng, 5, -2, 2));
    }
    expect_same_system(tt, ts, qs, 1e-15);
}

TEST(RotatingFrameTwin, TwinEnergyIsConserved) {
    const auto p = test::paraboloid_params(0.3);
    const auto twin = build_rotating_frame_twin(p);
    IntegratorOptions opts;
    opts.rtol = 1e-12;
    opts.atol = 1e-14;
    const auto C = rotating_frame_map(p, p.Omega);
    const auto init = unlift(C, surface_state(p, 0.8, 0.0, 0.2, 0.6, 0.4));
    const auto traj = integrate(twin, init, 100.0, opts);
    const auto drift = drift_report(traj, twin.integrals);
    EXPECT_LT(drift["energy"].max_abs_drift, 1e-10);
}

TEST(Presets, NamesAndReducedState) {
    const Preset t = turntable(1.0);
    const Preset s = test::paraboloid_params(0.2);
    EXPECT_EQ(preset_name(t), "turntable");
    EXPECT_NE(preset_name(s).find("rotating_surface"), std::string::npos);
    EXPECT_EQ(preset_omega(s), 0.2);
    EXPECT_EQ(reduced_state(t, turntable_state(turntable(1.0), 1, 2, Vec3(3, 4, 5))).size(), 5);
    const auto ss = surface_state(test::paraboloid_params(0.2), 0.5, 1.0, 0.1, 0.2, 0.3);
    const Vec z = reduced_state(s, ss);
    ASSERT_EQ(z.size(), 6);
    // The reduced spin is invariant under a rotation of the whole state.
    const auto action = preset_axial_rotation(s);
    VelocityState rs{action.act(0.9, ss.q), action.tangent(0.9) * ss.qdot, 0.0};
    EXPECT_LT((reduced_state(s, rs) - z).norm(), 1e-14);
}

} // namespace
} // namespace nhlab
