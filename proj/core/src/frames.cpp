#include <nhlab/frames.hpp>

#include <algorithm>
#include <cmath>

namespace nhlab {

namespace {

Mat planar_rotation(double theta) {
    Mat H(2, 2);
    H << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return H;
}

Mat spatial_rotation(double theta) {
    Mat H = Mat::Identity(3, 3);
    H.topLeftCorner(2, 2) = planar_rotation(theta);
    return H;
}

Vec sample_box(SampleRng &rng, const Vec &lo, const Vec &hi) {
    Vec x(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        x[i] = rng.uniform(lo[i], hi[i]);
    }
    return x;
}

Vec sample_velocity(SampleRng &rng, int n, double half_width) {
    Vec v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = rng.uniform(-half_width, half_width);
    }
    return v;
}

// Running worst-case tracker for one hypothesis. `excess` is residual / tolerance,
// so a sample fails when it exceeds 1.
struct Worst {
    HypothesisResult result;
    double worst_excess = -1.0;

    explicit Worst(std::string name) { result.name = std::move(name); }

    void record(double residual, double tolerance, const Vec &q, const Vec &qdot, double t) {
        record_excess(residual, residual / tolerance, q, qdot, t);
    }

    void record_excess(double residual, double excess, const Vec &q, const Vec &qdot, double t) {
        if (!(excess <= 1.0)) {
            result.passed = false;
        }
        if (excess > worst_excess || std::isnan(excess)) {
            worst_excess = excess;
            result.worst_residual = residual;
            result.worst_q = q;
            result.worst_qdot = qdot;
            result.worst_t = t;
        }
    }
};

void check_spec(const SampleSpec &spec, int n) {
    require(spec.points > 0, "sample spec needs at least one point");
    require(!spec.times.empty(), "sample spec needs at least one time");
    require(spec.box_lo.size() == n && spec.box_hi.size() == n, "sample box has wrong dimension");
    require(spec.abs_tol > 0.0 && spec.rel_tol >= 0.0, "sample tolerances must be positive");
}

} // namespace

std::uint64_t SampleRng::next() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

TimeDependentMap identity_map(int n) {
    TimeDependentMap C;
    C.n = n;
    C.forward = [](const Vec &u, double) { return u; };
    C.jacobian = [n](const Vec &, double) { return Mat::Identity(n, n).eval(); };
    C.time_derivative = [n](const Vec &, double) { return Vec::Zero(n).eval(); };
    C.inverse = [](const Vec &q, double) { return q; };
    C.is_static = true;
    return C;
}

Vec AxialRotation::act(double theta, const Vec &q) const {
    require(q.size() == n, "axial rotation: dimension mismatch");
    Vec out = q;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    if (cartesian) {
        const auto [i, j] = *cartesian;
        out[i] = c * q[i] - s * q[j];
        out[j] = s * q[i] + c * q[j];
    }
    if (azimuth) {
        out[*azimuth] += theta;
    }
    if (spin_offset) {
        const int o = *spin_offset;
        out[o] = c * q[o] - s * q[o + 1];
        out[o + 1] = s * q[o] + c * q[o + 1];
    }
    return out;
}

Mat AxialRotation::tangent(double theta) const {
    Mat T = Mat::Identity(n, n);
    if (cartesian) {
        const auto [i, j] = *cartesian;
        const Mat H = planar_rotation(theta);
        T(i, i) = H(0, 0);
        T(i, j) = H(0, 1);
        T(j, i) = H(1, 0);
        T(j, j) = H(1, 1);
    }
    if (spin_offset) {
        T.block(*spin_offset, *spin_offset, 3, 3) = spatial_rotation(theta);
    }
    return T;
}

Vec AxialRotation::generator(const Vec &q) const {
    Vec Y = Vec::Zero(n);
    if (cartesian) {
        const auto [i, j] = *cartesian;
        Y[i] = -q[j];
        Y[j] = q[i];
    }
    if (azimuth) {
        Y[*azimuth] = 1.0;
    }
    if (spin_offset) {
        Y[*spin_offset + 2] = 1.0;
    }
    return Y;
}

TimeDependentMap rotation_map(const AxialRotation &action, std::function<double(double)> angle,
                              std::function<double(double)> angle_rate) {
    TimeDependentMap C;
    C.n = action.n;
    C.forward = [action, angle](const Vec &u, double t) { return action.act(angle(t), u); };
    C.jacobian = [action, angle](const Vec &, double t) { return action.tangent(angle(t)); };
    C.time_derivative = [action, angle, angle_rate](const Vec &u, double t) {
        return (angle_rate(t) * action.generator(action.act(angle(t), u))).eval();
    };
    C.inverse = [action, angle](const Vec &q, double t) { return action.act(-angle(t), q); };
    if (action.spin_offset) {
        for (int i = 0; i < 3; ++i) {
            C.pseudo_indices.push_back(*action.spin_offset + i);
        }
    }
    return C;
}

TimeDependentMap rotating_map(const AxialRotation &action, double eta) {
    TimeDependentMap C = rotation_map(
        action, [eta](double t) { return eta * t; }, [eta](double) { return eta; });
    C.is_static = (eta == 0.0);
    return C;
}

GroupGenerator axial_generator(const AxialRotation &action, double eta) {
    GroupGenerator Y;
    Y.field = [action, eta](const Vec &q) { return (eta * action.generator(q)).eval(); };
    Y.flow = rotating_map(action, eta);
    return Y;
}

std::vector<GroupElementSample> sample_axial_elements(const AxialRotation &action,
                                                      std::span<const double> angles) {
    std::vector<GroupElementSample> out;
    out.reserve(angles.size());
    for (double theta : angles) {
        GroupElementSample g;
        g.label = "theta=" + std::to_string(theta);
        g.act = [action, theta](const Vec &q) { return action.act(theta, q); };
        g.tangent = [action, theta](const Vec &) { return action.tangent(theta); };
        out.push_back(std::move(g));
    }
    return out;
}

std::pair<Vec, Vec> lift(const TimeDependentMap &C, const Vec &u, const Vec &udot, double t) {
    require(u.size() == C.n && udot.size() == C.n, "lift: dimension mismatch");
    return {C.forward(u, t), C.jacobian(u, t) * udot + C.time_derivative(u, t)};
}

VelocityState lift(const TimeDependentMap &C, const VelocityState &state) {
    auto [q, qdot] = lift(C, state.q, state.qdot, state.t);
    return {std::move(q), std::move(qdot), state.t};
}

VelocityState unlift(const TimeDependentMap &C, const VelocityState &state) {
    require(state.q.size() == C.n, "unlift: dimension mismatch");
    VelocityState out;
    out.t = state.t;
    out.q = C.inverse(state.q, state.t);
    const Mat J = C.jacobian(out.q, state.t);
    out.qdot = J.partialPivLu().solve(state.qdot - C.time_derivative(out.q, state.t));
    return out;
}

AffineConstraint pullback_constraint(const TimeDependentMap &C, const AffineConstraint &K) {
    require(C.n == K.n, "pullback_constraint: dimension mismatch");
    AffineConstraint out;
    out.n = K.n;
    out.k = K.k;
    out.time_dependent = K.time_dependent || !C.is_static;
    out.matrix = [C, K](const Vec &u, double t) {
        return (K.S(C.forward(u, t), t) * C.jacobian(u, t)).eval();
    };
    if (K.offset || !C.is_static) {
        out.offset = [C, K](const Vec &u, double t) {
            const Vec q = C.forward(u, t);
            return (K.s(q, t) + K.S(q, t) * C.time_derivative(u, t)).eval();
        };
    }
    return out;
}

MechanicalLagrangian pullback_lagrangian(const TimeDependentMap &C, const MechanicalLagrangian &L) {
    require(C.n == L.n, "pullback_lagrangian: dimension mismatch");
    MechanicalLagrangian out;
    out.n = L.n;
    out.time_dependent = L.time_dependent || !C.is_static;
    out.mass_matrix = [C, L](const Vec &u, double t) {
        const Mat J = C.jacobian(u, t);
        return (J.transpose() * L.M(C.forward(u, t), t) * J).eval();
    };
    if (L.linear_term || !C.is_static) {
        out.linear_term = [C, L](const Vec &u, double t) {
            const Vec q = C.forward(u, t);
            const Mat J = C.jacobian(u, t);
            return (J.transpose() * (L.M(q, t) * C.time_derivative(u, t) + L.b(q, t))).eval();
        };
    }
    if (L.potential || L.linear_term || !C.is_static) {
        out.potential = [C, L](const Vec &u, double t) {
            const Vec q = C.forward(u, t);
            const Vec qt = C.time_derivative(u, t);
            return L.V(q, t) - 0.5 * qt.dot(L.M(q, t) * qt) - L.b(q, t).dot(qt);
        };
    }
    return out;
}

ScalarField moving_energy(const MechanicalLagrangian &L, const TimeDependentMap &C) {
    return [L, C](const VelocityState &state) {
        const Vec u = C.inverse(state.q, state.t);
        return energy(L, state) - momentum(L, state).dot(C.time_derivative(u, state.t));
    };
}

ScalarField momentum_map_component(const MechanicalLagrangian &L, const GroupGenerator &Y) {
    return [L, Y](const VelocityState &state) { return momentum(L, state).dot(Y.field(state.q)); };
}

Trajectory conjugate_trajectory(const TimeDependentMap &C, const Trajectory &traj_in_u) {
    Trajectory out;
    out.n = traj_in_u.n;
    out.k = traj_in_u.k;
    out.times = traj_in_u.times;
    out.multipliers = traj_in_u.multipliers;
    out.residuals = traj_in_u.residuals;
    out.states.reserve(traj_in_u.states.size());
    for (const auto &s : traj_in_u.states) {
        out.states.push_back(lift(C, s));
    }
    return out;
}

SampleSpec default_sample_spec(int n, double half_width) {
    SampleSpec spec;
    spec.box_lo = Vec::Constant(n, -half_width);
    spec.box_hi = Vec::Constant(n, half_width);
    return spec;
}

bool HypothesisReport::all_passed() const {
    return std::all_of(results.begin(), results.end(), [](const auto &r) { return r.passed; });
}

const HypothesisResult &HypothesisReport::operator[](const std::string &name) const {
    auto it = std::find_if(results.begin(), results.end(), [&](const auto &r) { return r.name == name; });
    if (it == results.end()) {
        throw ContractViolation("no hypothesis named " + name);
    }
    return *it;
}

HypothesisReport check_theorem1(const NonholonomicSystem &sys, const TimeDependentMap &C,
                                const SampleSpec &spec) {
    const int n = sys.dim();
    require(C.n == n, "check_theorem1: map dimension mismatch");
    check_spec(spec, n);
    const auto &L = sys.lagrangian;
    const auto &K = sys.constraint;
    const double t0 = spec.times.front();
    const ScalarField e_star = moving_energy(L, C);

    Worst hyp_l("L_pullback_time_independent");
    Worst hyp_e("moving_energy_time_independent");
    Worst hyp_m("pulled_back_constraint_linear_static");

    SampleRng rng(spec.seed);
    for (int i = 0; i < spec.points; ++i) {
        const Vec u = sample_box(rng, spec.box_lo, spec.box_hi);
        const Vec udot = sample_velocity(rng, n, spec.velocity_half_width);
        const Vec q = sample_box(rng, spec.box_lo, spec.box_hi);
        Vec qdot = sample_velocity(rng, n, spec.velocity_half_width);
        if (spec.fiber_only) {
            qdot = project_velocity(sys, q, qdot, t0);
        }

        const double l0 = lagrangian_value(L, lift(C, VelocityState{u, udot, t0}));
        const double e0 = e_star(VelocityState{q, qdot, t0});
        const Mat S0 = K.S(C.forward(u, t0), t0) * C.jacobian(u, t0);
        const Mat kernel0 = kernel_basis(S0);

        for (double t : spec.times) {
            const double lt = lagrangian_value(L, lift(C, VelocityState{u, udot, t}));
            hyp_l.record(std::abs(lt - l0), spec.abs_tol + spec.rel_tol * std::max(std::abs(l0), std::abs(lt)),
                         u, udot, t);

            const double et = e_star(VelocityState{q, qdot, t});
            hyp_e.record(std::abs(et - e0), spec.abs_tol + spec.rel_tol * std::max(std::abs(e0), std::abs(et)),
                         q, qdot, t);

            const Vec qt = C.forward(u, t);
            const Mat Sq = K.S(qt, t);
            const Mat St = Sq * C.jacobian(u, t);
            const Vec shift = Sq * C.time_derivative(u, t);
            const Vec offset = K.s(qt, t);
            const double offset_residual = (offset + shift).norm();
            const double offset_tol = spec.abs_tol + spec.rel_tol * (offset.norm() + shift.norm());
            const double kernel_residual = (St * kernel0).norm() / std::max(St.norm(), 1e-300);
            const double kernel_tol = spec.abs_tol + spec.rel_tol;
            const double excess = std::max(offset_residual / offset_tol, kernel_residual / kernel_tol);
            hyp_m.record_excess(std::max(offset_residual, kernel_residual), excess, u, Vec::Zero(n), t);
        }
    }

    HypothesisReport report;
    report.check = "moving_energy_theorem";
    report.results = {hyp_l.result, hyp_e.result, hyp_m.result};
    return report;
}

HypothesisReport check_symmetry_hypotheses(const NonholonomicSystem &sys,
                                           const std::vector<GroupElementSample> &elements,
                                           const GroupGenerator &Y, const SampleSpec &spec) {
    const int n = sys.dim();
    check_spec(spec, n);
    require(!elements.empty(), "check_symmetry_hypotheses: no group elements supplied");
    const auto &L = sys.lagrangian;
    const auto &K = sys.constraint;
    const double t = spec.times.front();

    Worst h1("H1_lagrangian_invariant");
    Worst h2("H2_distribution_invariant");
    Worst h3("H3_generator_in_fiber");

    SampleRng rng(spec.seed);
    for (int i = 0; i < spec.points; ++i) {
        const Vec q = sample_box(rng, spec.box_lo, spec.box_hi);
        const Vec qdot = sample_velocity(rng, n, spec.velocity_half_width);
        const double l0 = lagrangian_value(L, VelocityState{q, qdot, t});
        const Mat S = K.S(q, t);
        const Mat kernel = kernel_basis(S);

        for (const auto &g : elements) {
            const Vec gq = g.act(q);
            const Mat T = g.tangent(q);
            const double lg = lagrangian_value(L, VelocityState{gq, T * qdot, t});
            h1.record(std::abs(lg - l0), spec.abs_tol + spec.rel_tol * std::max(std::abs(l0), std::abs(lg)), q,
                      qdot, t);

            const Mat Sg = K.S(gq, t);
            const double r2 = (Sg * T * kernel).norm() / std::max(Sg.norm(), 1e-300);
            h2.record(r2, spec.abs_tol + spec.rel_tol, q, Vec::Zero(n), t);
        }

        const Vec SY = S * Y.field(q);
        const Vec s = K.s(q, t);
        h3.record((SY + s).norm(), spec.abs_tol + spec.rel_tol * (SY.norm() + s.norm()), q, Vec::Zero(n), t);
    }

    HypothesisReport report;
    report.check = "symmetry_hypotheses";
    report.results = {h1.result, h2.result, h3.result};
    return report;
}

double flow_condition_residual(const GroupGenerator &Y, const SampleSpec &spec) {
    require(Y.flow.has_value(), "generator has no flow map");
    const auto &C = *Y.flow;
    check_spec(spec, C.n);
    SampleRng rng(spec.seed);
    double worst = 0.0;
    for (int i = 0; i < spec.points; ++i) {
        const Vec u = sample_box(rng, spec.box_lo, spec.box_hi);
        for (double t : spec.times) {
            const Vec qt = C.time_derivative(u, t);
            const double r = (qt - Y.field(C.forward(u, t))).norm() / std::max(1.0, qt.norm());
            worst = std::max(worst, r);
        }
    }
    return worst;
}

double map_consistency_residual(const TimeDependentMap &C, const SampleSpec &spec) {
    check_spec(spec, C.n);
    const int n = C.n;
    std::vector<bool> pseudo(n, false);
    for (int i : C.pseudo_indices) {
        pseudo[i] = true;
    }
    const double h = 1e-6;
    SampleRng rng(spec.seed);
    double worst = 0.0;
    for (int i = 0; i < spec.points; ++i) {
        const Vec u = sample_box(rng, spec.box_lo, spec.box_hi);
        for (double t : spec.times) {
            const Vec dt = (C.forward(u, t + h) - C.forward(u, t - h)) / (2.0 * h);
            const Vec qt = C.time_derivative(u, t);
            const Mat J = C.jacobian(u, t);
            Vec up = u;
            Vec um = u;
            for (int r = 0; r < n; ++r) {
                if (!pseudo[r]) {
                    worst = std::max(worst, std::abs(dt[r] - qt[r]) / std::max(1.0, std::abs(qt[r])));
                }
            }
            for (int j = 0; j < n; ++j) {
                up[j] = u[j] + h;
                um[j] = u[j] - h;
                const Vec col = (C.forward(up, t) - C.forward(um, t)) / (2.0 * h);
                up[j] = u[j];
                um[j] = u[j];
                for (int r = 0; r < n; ++r) {
                    if (!pseudo[r]) {
                        worst = std::max(worst, std::abs(col[r] - J(r, j)) / std::max(1.0, std::abs(J(r, j))));
                    }
                }
            }
            // Round-trip of the inverse.
            worst = std::max(worst, (C.inverse(C.forward(u, t), t) - u).norm() / std::max(1.0, u.norm()));
        }
    }
    return worst;
}

} // namespace nhlab
