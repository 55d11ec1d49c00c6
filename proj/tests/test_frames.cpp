#include "support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <array>

namespace nhlab {
namespace {

using test::kPi;

TurntableParams turntable(double Omega) {
    TurntableParams p;
    p.Omega = Omega;
    return p;
}

AxialRotation planar_action() {
    AxialRotation a;
    a.n = 2;
    a.cartesian = std::array<int, 2>{0, 1};
    return a;
}

// ---- lift ------------------------------------------------------------------------

TEST(Lift, IdentityMap) {
    const auto C = identity_map(3);
    const Vec u = Vec3(1, 2, 3);
    const Vec v = Vec3(-1, 0.5, 4);
    const auto [q, qdot] = lift(C, u, v, 0.7);
    EXPECT_EQ(q, u);
    EXPECT_EQ(qdot, v);
}

TEST(Lift, PlanarRotationQuarterTurn) {
    const auto C = rotating_map(planar_action(), 1.0);
    const auto [q, qdot] = lift(C, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0), kPi / 2);
    EXPECT_LT((q - Eigen::Vector2d(0, 1)).norm(), 1e-15);
    EXPECT_LT((qdot - Eigen::Vector2d(-1, 0)).norm(), 1e-15);
}

TEST(Lift, PlanarRotationAtTimeZero) {
    const auto C = rotating_map(planar_action(), 1.0);
    const Eigen::Vector2d u(0.3, -1.2);
    const Eigen::Vector2d v(2.0, 0.5);
    const auto [q, qdot] = lift(C, u, v, 0.0);
    EXPECT_EQ(q, Vec(u));
    // u̇ + Ω e_z × u.
    EXPECT_LT((qdot - Eigen::Vector2d(v.x() - u.y(), v.y() + u.x())).norm(), 1e-15);
}

TEST(Lift, UnliftRoundTrip) {
    const TurntableParams p = turntable(1.0);
    const auto C = rotating_frame_map(p, 1.0);
    std::mt19937_64 rng(21);
    for (int i = 0; i < 50; ++i) {
        const VelocityState s{test::random_vec(rng, 5, -2, 2), test::random_vec(rng, 5, -2, 2),
                              test::random_vec(rng, 1, 0, 10)[0]};
        const auto back = unlift(C, lift(C, s));
        EXPECT_LT((back.q - s.q).norm(), 1e-12);
        EXPECT_LT((back.qdot - s.qdot).norm(), 1e-12);
    }
}

TEST(Lift, MapConsistency) {
    const auto spec = default_sample_spec(5);
    EXPECT_LT(map_consistency_residual(rotating_frame_map(turntable(1.3), 1.3), spec), 1e-8);
    SampleSpec s = spec;
    s.box_lo[0] = 0.2;
    s.box_hi[0] = 2.0;
    EXPECT_LT(map_consistency_residual(rotating_frame_map(test::paraboloid_params(0.5), 0.5), s), 1e-8);
}

// ---- pullback_constraint ------------------------------------------------------------

TEST(PullbackConstraint, IdentityUnchanged) {
    const auto sys = build_turntable(turntable(1.0));
    const auto K = pullback_constraint(identity_map(5), sys.constraint);
    std::mt19937_64 rng(22);
    for (int i = 0; i < 20; ++i) {
        const Vec q = test::random_vec(rng, 5, -2, 2);
        EXPECT_EQ(K.S(q, 0.3), sys.constraint.S(q, 0.3));
        EXPECT_EQ(K.s(q, 0.3), sys.constraint.s(q, 0.3));
    }
}

TEST(PullbackConstraint, TurntableRotatingFrameIsLinear) {
    const auto p = turntable(1.0);
    const auto sys = build_turntable(p);
    const auto K = pullback_constraint(rotating_frame_map(p, p.Omega), sys.constraint);
    std::mt19937_64 rng(23);
    for (int i = 0; i < 100; ++i) {
        const Vec u = test::random_vec(rng, 5, -3, 3);
        const double t = test::random_vec(rng, 1, -20, 20)[0];
        EXPECT_LT(K.s(u, t).norm(), 1e-12);
    }
}

TEST(PullbackConstraint, TimeZeroSubstitution) {
    const auto p = turntable(0.7);
    const auto sys = build_turntable(p);
    const auto C = rotating_frame_map(p, 2.0);
    const auto K = pullback_constraint(C, sys.constraint);
    std::mt19937_64 rng(24);
    for (int i = 0; i < 20; ++i) {
        const Vec u = test::random_vec(rng, 5, -2, 2);
        const Mat S = sys.constraint.S(u, 0.0);
        EXPECT_LT((K.S(u, 0.0) - S).norm(), 1e-15);
        const Vec expected = sys.constraint.s(u, 0.0) + S * C.time_derivative(u, 0.0);
        EXPECT_LT((K.s(u, 0.0) - expected).norm(), 1e-15);
    }
}

// ---- pullback_lagrangian ------------------------------------------------------------

TEST(PullbackLagrangian, IdentityUnchanged) {
    const auto sys = build_turntable(turntable(1.0));
    const auto L = pullback_lagrangian(identity_map(5), sys.lagrangian);
    std::mt19937_64 rng(25);
    for (int i = 0; i < 20; ++i) {
        const VelocityState s{test::random_vec(rng, 5, -2, 2), test::random_vec(rng, 5, -2, 2), 0.4};
        EXPECT_DOUBLE_EQ(lagrangian_value(L, s), lagrangian_value(sys.lagrangian, s));
    }
}

TEST(PullbackLagrangian, AgreesWithCompositionAtRandomStates) {
    const auto p = test::paraboloid_params(0.8);
    const auto sys = build_rotating_surface(p);
    const auto C = rotating_frame_map(p, 0.8);
    const auto L = pullback_lagrangian(C, sys.lagrangian);
    std::mt19937_64 rng(26);
    for (int i = 0; i < 1000; ++i) {
        Vec u = test::random_vec(rng, 5, -2, 2);
        u[0] = 0.1 + std::abs(u[0]);
        const VelocityState s{u, test::random_vec(rng, 5, -2, 2), test::random_vec(rng, 1, -5, 5)[0]};
        const double direct = lagrangian_value(sys.lagrangian, lift(C, s));
        EXPECT_NEAR(lagrangian_value(L, s), direct, 1e-12 * std::max(1.0, std::abs(direct)));
    }
}

TEST(PullbackLagrangian, TurntableIsShiftedByGenerator) {
    const auto p = turntable(1.0);
    const auto sys = build_turntable(p);
    const auto C = rotating_frame_map(p, p.Omega);
    const auto L = pullback_lagrangian(C, sys.lagrangian);
    const auto Y = axial_generator(preset_axial_rotation(p), p.Omega);
    std::mt19937_64 rng(27);
    for (int i = 0; i < 200; ++i) {
        const Vec u = test::random_vec(rng, 5, -2, 2);
        const Vec v = test::random_vec(rng, 5, -2, 2);
        const double l0 = lagrangian_value(L, {u, v, 0.0});
        const double lt = lagrangian_value(L, {u, v, 3.7});
        const double shifted = lagrangian_value(sys.lagrangian, {u, v + Y.field(u), 0.0});
        EXPECT_NEAR(l0, lt, 1e-12 * std::max(1.0, std::abs(l0)));
        EXPECT_NEAR(l0, shifted, 1e-12 * std::max(1.0, std::abs(l0)));
    }
}

TEST(PullbackLagrangian, SurfaceMatchesRotatingFrameFormula) {
    const auto p = test::paraboloid_params(0.6);
    const auto sys = build_rotating_surface(p);
    const auto L = pullback_lagrangian(rotating_frame_map(p, p.Omega), sys.lagrangian);
    const double ca2 = p.c * p.a * p.a;
    std::mt19937_64 rng(28);
    for (int i = 0; i < 200; ++i) {
        Vec u = test::random_vec(rng, 5, -2, 2);
        u[0] = 0.1 + std::abs(u[0]);
        const Vec v = test::random_vec(rng, 5, -2, 2);
        const double t = test::random_vec(rng, 1, 0, 10)[0];
        const auto geo = surface_geometry(p.profile, u[0], u[1]);
        const Vec3 sdot = geo.r_u * v[0] + geo.r_phi * v[1];
        const Vec3 spin = v.segment<3>(2);
        const Vec3 w = p.Omega * Vec3::UnitZ();
        const double expected =
            0.5 * (sdot + w.cross(geo.r)).squaredNorm() + 0.5 * ca2 * (spin + w).squaredNorm() - p.g * geo.r.z();
        EXPECT_NEAR(lagrangian_value(L, {u, v, t}), expected, 1e-12 * std::max(1.0, std::abs(expected)));
    }
}

// ---- moving energy / momentum map ------------------------------------------------

TEST(MovingEnergy, StaticMapGivesEnergy) {
    const auto sys = build_turntable(turntable(1.0));
    const auto e_star = moving_energy(sys.lagrangian, identity_map(5));
    std::mt19937_64 rng(29);
    for (int i = 0; i < 20; ++i) {
        const VelocityState s{test::random_vec(rng, 5, -2, 2), test::random_vec(rng, 5, -2, 2), 1.0};
        EXPECT_DOUBLE_EQ(e_star(s), energy(sys.lagrangian, s));
    }
}

TEST(MovingEnergy, TurntableAtOrigin) {
    const auto p = turntable(1.0);
    const auto sys = build_turntable(p);
    const auto s = turntable_state(p, 0.0, 0.0, Vec3(0, 0, 1));
    EXPECT_NEAR(energy(sys.lagrangian, s), 0.2, 1e-15);
    EXPECT_NEAR(moving_energy(sys.lagrangian, rotating_frame_map(p, 1.0))(s), -0.2, 1e-15);
}

TEST(MovingEnergy, DiffersFromFrameEnergyBySpinTerm) {
    const auto p = turntable(1.0);
    const auto sys = build_turntable(p);
    const auto s = turntable_state(p, 1.0, 0.0, Vec3(0, 0, 2));
    const double e_star = moving_energy(sys.lagrangian, rotating_frame_map(p, 1.0))(s);
    const double frame = sys.find_integral("frame_energy")->value(s);
    EXPECT_NEAR(e_star, -0.5, 1e-14);
    EXPECT_NEAR(frame, 0.3, 1e-14);
    EXPECT_NEAR(e_star - frame, -0.8, 1e-14);
    EXPECT_NEAR(sys.find_integral("moving_energy")->value(s), e_star, 1e-14);
}

TEST(MovingEnergy, FrameEnergyDifferenceOnRandomFiberStates) {
    const auto p = turntable(1.7);
    const auto sys = build_turntable(p);
    const double ca2 = p.c * p.a * p.a;
    std::mt19937_64 rng(30);
    for (int i = 0; i < 200; ++i) {
        const auto s = test::random_turntable_state(rng, p);
        const double diff = sys.find_integral("moving_energy")->value(s) - sys.find_integral("frame_energy")->value(s);
        EXPECT_NEAR(diff, -ca2 * p.Omega * s.qdot[4], 1e-12);
    }
}

TEST(MomentumMap, ZeroGenerator) {
    const auto sys = build_turntable(turntable(1.0));
    GroupGenerator Y;
    Y.field = [](const Vec &q) { return Vec(Vec::Zero(q.size())); };
    const VelocityState s{Vec::Ones(5), Vec::Ones(5), 0.0};
    EXPECT_EQ(momentum_map_component(sys.lagrangian, Y)(s), 0.0);
}

TEST(MomentumMap, TurntableExample) {
    const auto p = turntable(1.0);
    const auto sys = build_turntable(p);
    const auto Y = axial_generator(preset_axial_rotation(p), 1.0);
    VelocityState s{Vec::Zero(5), Vec::Zero(5), 0.0};
    s.q[0] = 1.0;
    s.qdot[1] = 1.0;
    s.qdot[4] = 2.0;
    EXPECT_NEAR(momentum_map_component(sys.lagrangian, Y)(s), 1.8, 1e-15);
}

TEST(MomentumMap, SurfaceExample) {
    SurfaceParams p;
    p.profile = plane_profile();
    p.a = 1.0;
    p.c = 0.4;
    p.Omega = 1.0;
    const auto sys = build_rotating_surface(p);
    const auto Y = axial_generator(preset_axial_rotation(p), p.Omega);
    VelocityState s{Vec::Zero(5), Vec::Zero(5), 0.0};
    s.q[0] = 1.0;
    s.qdot[1] = 2.0;
    s.qdot[4] = 1.0;
    EXPECT_NEAR(momentum_map_component(sys.lagrangian, Y)(s), 2.4, 1e-14);
}

TEST(MomentumMap, FlowMapMovingEnergyIsEnergyMinusMomentum) {
    for (double eta : {0.5, 1.0, -2.0}) {
        const auto p = turntable(1.0);
        const auto sys = build_turntable(p);
        const auto Y = axial_generator(preset_axial_rotation(p), eta);
        const auto e_star = moving_energy(sys.lagrangian, *Y.flow);
        const auto J = momentum_map_component(sys.lagrangian, Y);
        std::mt19937_64 rng(31);
        for (int i = 0; i < 200; ++i) {
            const VelocityState s{test::random_vec(rng, 5, -2, 2), test::random_vec(rng, 5, -2, 2),
                                  test::random_vec(rng, 1, -10, 10)[0]};
            const double lhs = e_star(s);
            EXPECT_NEAR(lhs, energy(sys.lagrangian, s) - J(s), 1e-12 * std::max(1.0, std::abs(lhs)));
        }
    }
}

// ---- moving-energy checker -----------------------------------------------------------

TEST(MovingEnergyChecker, TurntableRotatingFramePasses) {
    const auto p = turntable(1.0);
    const auto report = check_theorem1(build_turntable(p), rotating_frame_map(p, p.Omega), default_sample_spec(5));
    EXPECT_TRUE(report.all_passed());
    for (const auto &r : report.results) {
        EXPECT_LT(r.worst_residual, 1e-10) << r.name;
    }
}

TEST(MovingEnergyChecker, TurntableIdentityFailsLinearity) {
    const auto p = turntable(1.0);
    const auto report = check_theorem1(build_turntable(p), identity_map(5), default_sample_spec(5));
    EXPECT_FALSE(report["pulled_back_constraint_linear_static"].passed);
    EXPECT_GT(report["pulled_back_constraint_linear_static"].worst_residual, 1e-3);
    EXPECT_TRUE(report["L_pullback_time_independent"].passed);
    EXPECT_TRUE(report["moving_energy_time_independent"].passed);
}

TEST(MovingEnergyChecker, LinearConstraintIdentityPasses) {
    const auto report = check_theorem1(build_turntable(turntable(0.0)), identity_map(5), default_sample_spec(5));
    EXPECT_TRUE(report.all_passed());
}

TEST(MovingEnergyChecker, NonFlowMapBreaksMovingEnergy) {
    const auto p = turntable(1.0);
    const auto C = rotation_map(
        preset_axial_rotation(p), [](double t) { return t * t; }, [](double t) { return 2.0 * t; });
    const auto report = check_theorem1(build_turntable(p), C, default_sample_spec(5));
    EXPECT_FALSE(report["moving_energy_time_independent"].passed);
    EXPECT_GT(report["moving_energy_time_independent"].worst_residual, 1e-3);
}

TEST(MovingEnergyChecker, FiberOnlyModeRuns) {
    const auto p = turntable(1.0);
    SampleSpec spec = default_sample_spec(5);
    spec.fiber_only = true;
    EXPECT_TRUE(check_theorem1(build_turntable(p), rotating_frame_map(p, 1.0), spec).all_passed());
}

TEST(MovingEnergyChecker, SurfaceRotatingFramePasses) {
    const auto p = test::paraboloid_params(0.3);
    SampleSpec spec = default_sample_spec(5);
    spec.box_lo[0] = 0.1;
    spec.box_hi[0] = 2.0;
    spec.points = 50;
    const auto report = check_theorem1(build_rotating_surface(p), rotating_frame_map(p, p.Omega), spec);
    EXPECT_TRUE(report.all_passed()) << nlohmann::json(report).dump(2);
}

TEST(MovingEnergyChecker, JsonShape) {
    const auto p = turntable(1.0);
    SampleSpec spec = default_sample_spec(5);
    spec.points = 5;
    const nlohmann::json j = check_theorem1(build_turntable(p), identity_map(5), spec);
    ASSERT_EQ(j["hypotheses"].size(), 3u);
    EXPECT_FALSE(j["all_passed"].get<bool>());
    EXPECT_EQ(j["hypotheses"][2]["worst_sample"]["q"].size(), 5u);
}

// ---- symmetry hypotheses ----------------------------------------------------------------

HypothesisReport symmetry_report(const TurntableParams &p, double eta) {
    const auto action = preset_axial_rotation(p);
    const std::array<double, 4> angles{0.3, 1.0, 2.5, -4.0};
    return check_symmetry_hypotheses(build_turntable(p), sample_axial_elements(action, angles),
                                     axial_generator(action, eta), default_sample_spec(5));
}

TEST(SymmetryHypotheses, TurntableEtaOmegaPasses) {
    const auto report = symmetry_report(turntable(1.0), 1.0);
    EXPECT_TRUE(report.all_passed());
}

TEST(SymmetryHypotheses, TurntableTwiceOmegaFailsH3) {
    const auto report = symmetry_report(turntable(1.0), 2.0);
    EXPECT_TRUE(report["H1_lagrangian_invariant"].passed);
    EXPECT_TRUE(report["H2_distribution_invariant"].passed);
    const auto &h3 = report["H3_generator_in_fiber"];
    EXPECT_FALSE(h3.passed);
    // Residual (−Ωy, Ωx) has norm Ω‖(x, y)‖ at the worst sample.
    EXPECT_NEAR(h3.worst_residual, h3.worst_q.head<2>().norm(), 1e-12);
}

TEST(SymmetryHypotheses, TurntableGeneratorMinusXiIsSpin) {
    const auto p = turntable(1.0);
    const auto sys = build_turntable(p);
    const auto Y = axial_generator(preset_axial_rotation(p), p.Omega);
    std::mt19937_64 rng(32);
    for (int i = 0; i < 20; ++i) {
        const Vec q = test::random_vec(rng, 5, -2, 2);
        const Vec d = Y.field(q) - representative_xi(sys.constraint, q, 0.0);
        // Y_Ω − ξ₀ lies in ker S, and the minimum-norm ξ₀ is its complement.
        EXPECT_LT((sys.constraint.S(q, 0.0) * d).norm(), 1e-12);
    }
    EXPECT_LT((Y.field(Vec::Zero(5)) - (Vec(5) << 0, 0, 0, 0, 1).finished()).norm(), 1e-15);
}

TEST(SymmetryHypotheses, RestingTablePasses) {
    EXPECT_TRUE(symmetry_report(turntable(0.0), 0.0).all_passed());
}

TEST(SymmetryHypotheses, GeneratorFlowCondition) {
    const auto p = turntable(1.0);
    const auto spec = default_sample_spec(5);
    EXPECT_LT(flow_condition_residual(axial_generator(preset_axial_rotation(p), 1.0), spec), 1e-12);
    GroupGenerator bad = axial_generator(preset_axial_rotation(p), 1.0);
    bad.flow = rotation_map(
        preset_axial_rotation(p), [](double t) { return t * t; }, [](double t) { return 2.0 * t; });
    EXPECT_GT(flow_condition_residual(bad, spec), 1e-3);
}

TEST(SymmetryHypotheses, SurfacePassesForEtaOmega) {
    const auto p = test::paraboloid_params(0.4);
    const auto action = preset_axial_rotation(p);
    const std::array<double, 3> angles{0.3, 1.0, 2.5};
    SampleSpec spec = default_sample_spec(5);
    spec.box_lo[0] = 0.1;
    spec.box_hi[0] = 2.0;
    const auto report = check_symmetry_hypotheses(build_rotating_surface(p), sample_axial_elements(action, angles),
                                                  axial_generator(action, p.Omega), spec);
    EXPECT_TRUE(report.all_passed()) << nlohmann::json(report).dump(2);
}

// ---- conjugation -----------------------------------------------------------------------

TEST(Conjugation, IdentityUnchanged) {
    const auto p = turntable(1.0);
    const auto sys = build_turntable(p);
    const auto traj = integrate(sys, turntable_state(p, 0.5, 0.2, Vec3(0.1, 0.3, 0.2)), 2.0);
    const auto out = conjugate_trajectory(identity_map(5), traj);
    ASSERT_EQ(out.size(), traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        EXPECT_EQ(out.states[i].q, traj.states[i].q);
        EXPECT_EQ(out.states[i].qdot, traj.states[i].qdot);
    }
}

TEST(Conjugation, SingleSliceMatchesLift) {
    const auto p = turntable(1.0);
    const auto twin = build_rotating_frame_twin(p);
    const auto traj = integrate(twin, turntable_state(p, 0.5, 0.2, Vec3(0.1, 0.3, 0.2)), 1.0);
    const auto C = rotating_frame_map(p, p.Omega);
    const auto out = conjugate_trajectory(C, traj);
    const auto s = lift(C, traj.states[3]);
    EXPECT_EQ(out.states[3].q, s.q);
    EXPECT_EQ(out.states[3].qdot, s.qdot);
}

TEST(Conjugation, MovingFrameAgreesWithInertialOverTenPeriods) {
    const auto p = turntable(1.0);
    const auto sys = build_turntable(p);
    const auto twin = build_rotating_frame_twin(p);
    const auto C = rotating_frame_map(p, p.Omega);
    IntegratorOptions opts;
    opts.rtol = 1e-12;
    opts.atol = 1e-14;
    const double T = 10.0 * test::turntable_true_period(p);
    const auto init = turntable_state(p, 1.0, 0.0, Vec3::Zero());
    const auto inertial = integrate(sys, init, T, opts);
    const auto moving = integrate(twin, unlift(C, init), T, opts);
    const auto pushed = conjugate_trajectory(C, moving);
    double worst = 0.0;
    for (std::size_t i = 0; i < pushed.size(); ++i) {
        const auto ref = inertial.at(pushed.times[i]);
        // Spin pseudo-coordinates are path dependent, so only the position block is compared.
        worst = std::max({worst, (ref.q.head<2>() - pushed.states[i].q.head<2>()).lpNorm<Eigen::Infinity>(),
                          (ref.qdot - pushed.states[i].qdot).lpNorm<Eigen::Infinity>()});
    }
    EXPECT_LT(worst, 1e-8);
}

} // namespace
} // namespace nhlab
