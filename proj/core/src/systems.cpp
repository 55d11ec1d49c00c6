#include <nhlab/systems.hpp>

#include <Eigen/Geometry>

#include <cmath>

namespace nhlab {

namespace {

constexpr int kN = 5;

std::vector<Mat> zero_matrices(int count, int rows, int cols) {
    return std::vector<Mat>(count, Mat::Zero(rows, cols));
}

Vec3 spin(const Vec &qdot) { return qdot.segment<3>(kSpinOffset); }

// ---- turntable pieces ----

MechanicalLagrangian turntable_lagrangian(const TurntableParams &p) {
    const double k = p.c * p.a * p.a;
    MechanicalLagrangian L;
    L.n = kN;
    L.mass_matrix = [k](const Vec &, double) {
        Vec d(kN);
        d << 1.0, 1.0, k, k, k;
        return Mat(d.asDiagonal());
    };
    L.mass_matrix_dq = [](const Vec &, double) { return zero_matrices(kN, kN, kN); };
    return L;
}

AffineConstraint turntable_constraint(double a, double Omega) {
    AffineConstraint K;
    K.n = kN;
    K.k = 2;
    K.matrix = [a](const Vec &, double) {
        Mat S = Mat::Zero(2, kN);
        S(0, 0) = 1.0;
        S(0, 3) = -a;
        S(1, 1) = 1.0;
        S(1, 2) = a;
        return S;
    };
    K.matrix_dq = [](const Vec &, double) { return zero_matrices(kN, 2, kN); };
    if (Omega != 0.0) {
        K.offset = [Omega](const Vec &q, double) { return Vec((Vec(2) << Omega * q[1], -Omega * q[0]).finished()); };
        K.offset_dq = [Omega](const Vec &, double) {
            Mat D = Mat::Zero(2, kN);
            D(0, 1) = Omega;
            D(1, 0) = -Omega;
            return D;
        };
    }
    return K;
}

ChartMeta turntable_chart() {
    ChartMeta chart;
    chart.spin_offset = kSpinOffset;
    return chart;
}

// ---- surface pieces ----

struct ProfileTerms {
    ProfilePoint P;
    double w, w_u;
    // A = aρρ′/w and B = aρζ′/w with their u-derivatives.
    double A, A_u, B, B_u;
};

ProfileTerms profile_terms(const SurfaceProfile &profile, double a, double u) {
    ProfileTerms T{};
    T.P = profile.at(u);
    const auto &P = T.P;
    T.w = std::hypot(P.drho, P.dzeta);
    T.w_u = (P.drho * P.ddrho + P.dzeta * P.ddzeta) / T.w;
    T.A = a * P.rho * P.drho / T.w;
    T.B = a * P.rho * P.dzeta / T.w;
    T.A_u = a * ((P.drho * P.drho + P.rho * P.ddrho) / T.w - P.rho * P.drho * T.w_u / (T.w * T.w));
    T.B_u = a * ((P.drho * P.dzeta + P.rho * P.ddzeta) / T.w - P.rho * P.dzeta * T.w_u / (T.w * T.w));
    return T;
}

MechanicalLagrangian surface_lagrangian(const SurfaceParams &p) {
    const double k = p.c * p.a * p.a;
    const double a = p.a;
    const double g = p.g;
    const SurfaceProfile profile = p.profile;
    MechanicalLagrangian L;
    L.n = kN;
    L.mass_matrix = [profile, a, k](const Vec &q, double) {
        const auto T = profile_terms(profile, a, q[0]);
        Vec d(kN);
        d << T.w * T.w, T.P.rho * T.P.rho, k, k, k;
        return Mat(d.asDiagonal());
    };
    L.mass_matrix_dq = [profile, a](const Vec &q, double) {
        const auto T = profile_terms(profile, a, q[0]);
        auto out = zero_matrices(kN, kN, kN);
        out[0](0, 0) = 2.0 * T.w * T.w_u;
        out[0](1, 1) = 2.0 * T.P.rho * T.P.drho;
        return out;
    };
    if (g != 0.0) {
        L.potential = [profile, g](const Vec &q, double) { return g * profile.at(q[0]).zeta; };
        L.potential_gradient = [profile, g](const Vec &q, double) {
            Vec grad = Vec::Zero(kN);
            grad[0] = g * profile.at(q[0]).dzeta;
            return grad;
        };
    }
    return L;
}

AffineConstraint surface_constraint(const SurfaceProfile &profile, double a, double Omega) {
    AffineConstraint K;
    K.n = kN;
    K.k = 2;
    K.matrix = [profile, a](const Vec &q, double) {
        const auto T = profile_terms(profile, a, q[0]);
        const double c = std::cos(q[1]);
        const double s = std::sin(q[1]);
        Mat S = Mat::Zero(2, kN);
        S(0, 0) = T.w * T.w;
        S(0, 2) = a * T.w * s;
        S(0, 3) = -a * T.w * c;
        S(1, 1) = T.P.rho * T.P.rho;
        S(1, 2) = T.A * c;
        S(1, 3) = T.A * s;
        S(1, 4) = T.B;
        return S;
    };
    K.matrix_dq = [profile, a](const Vec &q, double) {
        const auto T = profile_terms(profile, a, q[0]);
        const double c = std::cos(q[1]);
        const double s = std::sin(q[1]);
        auto out = zero_matrices(kN, 2, kN);
        Mat &Du = out[0];
        Du(0, 0) = 2.0 * T.w * T.w_u;
        Du(0, 2) = a * T.w_u * s;
        Du(0, 3) = -a * T.w_u * c;
        Du(1, 1) = 2.0 * T.P.rho * T.P.drho;
        Du(1, 2) = T.A_u * c;
        Du(1, 3) = T.A_u * s;
        Du(1, 4) = T.B_u;
        Mat &Dphi = out[1];
        Dphi(0, 2) = a * T.w * c;
        Dphi(0, 3) = a * T.w * s;
        Dphi(1, 2) = -T.A * s;
        Dphi(1, 3) = T.A * c;
        return out;
    };
    if (Omega != 0.0) {
        K.offset = [profile, a, Omega](const Vec &q, double) {
            const auto T = profile_terms(profile, a, q[0]);
            return Vec((Vec(2) << 0.0, -Omega * (T.P.rho * T.P.rho + T.B)).finished());
        };
        K.offset_dq = [profile, a, Omega](const Vec &q, double) {
            const auto T = profile_terms(profile, a, q[0]);
            Mat D = Mat::Zero(2, kN);
            D(1, 0) = -Omega * (2.0 * T.P.rho * T.P.drho + T.B_u);
            return D;
        };
    }
    return K;
}

ChartMeta surface_chart() {
    ChartMeta chart;
    chart.angle_indices = {1};
    chart.spin_offset = kSpinOffset;
    chart.symmetry_phase = 1;
    return chart;
}

Vec surface_probe(const SurfaceProfile &profile) {
    Vec q = Vec::Zero(kN);
    q[0] = profile.u_min() + std::min(1.0, 0.5 * (profile.u_max() - profile.u_min()));
    return q;
}

NamedIntegral energy_integral(const MechanicalLagrangian &L) {
    return {"energy", [L](const VelocityState &s) { return energy(L, s); }};
}

} // namespace

void TurntableParams::validate() const {
    require(std::isfinite(a) && a > 0.0, "turntable: radius a must be positive");
    require(std::isfinite(c) && c > 0.0, "turntable: inertia coefficient c must be positive");
    require(std::isfinite(Omega), "turntable: Omega must be finite");
}

void SurfaceParams::validate() const {
    require(std::isfinite(a) && a > 0.0, "surface: radius a must be positive");
    require(std::isfinite(c) && c > 0.0, "surface: inertia coefficient c must be positive");
    require(std::isfinite(Omega), "surface: Omega must be finite");
    require(std::isfinite(g) && g >= 0.0, "surface: gravity g must be non-negative");
}

NonholonomicSystem build_turntable(const TurntableParams &p) {
    p.validate();
    const double a = p.a;
    const double k = p.c * a * a;
    const double nu = p.nu();
    const double Omega = p.Omega;
    MechanicalLagrangian L = turntable_lagrangian(p);

    std::vector<NamedIntegral> integrals;
    integrals.push_back({"omega_z", [](const VelocityState &s) { return s.qdot[4]; }});
    integrals.push_back({"transverse_x", [a, nu](const VelocityState &s) { return a * s.qdot[2] - nu * s.q[0]; }});
    integrals.push_back({"transverse_y", [a, nu](const VelocityState &s) { return a * s.qdot[3] - nu * s.q[1]; }});
    integrals.push_back({"frame_energy", [L, a, Omega](const VelocityState &s) {
                             const double x = s.q[0];
                             const double y = s.q[1];
                             return energy(L, s) - Omega * Omega * (x * x + y * y) +
                                    Omega * a * (x * s.qdot[2] + y * s.qdot[3]);
                         }});
    integrals.push_back({"moving_energy", [L, k, Omega](const VelocityState &s) {
                             const double x = s.q[0];
                             const double y = s.q[1];
                             const double J = x * s.qdot[1] - y * s.qdot[0] + k * s.qdot[4];
                             return energy(L, s) - Omega * J;
                         }});
    integrals.push_back(energy_integral(L));

    return make_system("turntable", std::move(L), turntable_constraint(a, Omega), turntable_chart(),
                       std::move(integrals), Vec::Zero(kN));
}

Vec turntable_reduced_rhs(const TurntableParams &p, const Vec &z) {
    require(z.size() == 5, "turntable reduced state has 5 components");
    const double nu = p.nu();
    const double xdot = p.a * z[3] - p.Omega * z[1];
    const double ydot = -p.a * z[2] + p.Omega * z[0];
    Vec out(5);
    out << xdot, ydot, nu / p.a * xdot, nu / p.a * ydot, 0.0;
    return out;
}

VelocityState turntable_state(const TurntableParams &p, double x, double y, const Vec3 &omega, double t) {
    VelocityState s;
    s.t = t;
    s.q = Vec::Zero(kN);
    s.q[0] = x;
    s.q[1] = y;
    s.qdot = Vec::Zero(kN);
    s.qdot[0] = p.a * omega.y() - p.Omega * y;
    s.qdot[1] = -p.a * omega.x() + p.Omega * x;
    s.qdot.segment<3>(kSpinOffset) = omega;
    return s;
}

double turntable_energy_rate(const TurntableParams &p, const VelocityState &state) {
    const Vec3 w = spin(state.qdot);
    return p.a * p.c * p.nu() * p.Omega * (state.q[0] * w.y() - state.q[1] * w.x());
}

SurfaceGeometry surface_geometry(const SurfaceProfile &profile, double u, double phi) {
    const ProfilePoint P = profile.at(u);
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    SurfaceGeometry G;
    G.r = Vec3(P.rho * c, P.rho * s, P.zeta);
    G.r_u = Vec3(P.drho * c, P.drho * s, P.dzeta);
    G.r_phi = Vec3(-P.rho * s, P.rho * c, 0.0);
    G.r_uu = Vec3(P.ddrho * c, P.ddrho * s, P.ddzeta);
    G.r_uphi = Vec3(-P.drho * s, P.drho * c, 0.0);
    G.r_phiphi = Vec3(-P.rho * c, -P.rho * s, 0.0);

    const double w = std::hypot(P.drho, P.dzeta);
    const double w_u = (P.drho * P.ddrho + P.dzeta * P.ddzeta) / w;
    const Vec3 N(P.dzeta * c, P.dzeta * s, -P.drho);
    const Vec3 N_u(P.ddzeta * c, P.ddzeta * s, -P.ddrho);
    G.n = N / w;
    G.n_u = N_u / w - N * (w_u / (w * w));
    G.n_phi = Vec3(-P.dzeta * s, P.dzeta * c, 0.0) / w;

    G.metric << G.r_u.dot(G.r_u), G.r_u.dot(G.r_phi), G.r_phi.dot(G.r_u), G.r_phi.dot(G.r_phi);
    return G;
}

NonholonomicSystem build_rotating_surface(const SurfaceParams &p) {
    p.validate();
    const double k = p.c * p.a * p.a;
    const double Omega = p.Omega;
    const SurfaceProfile profile = p.profile;
    MechanicalLagrangian L = surface_lagrangian(p);

    std::vector<NamedIntegral> integrals;
    integrals.push_back(energy_integral(L));
    integrals.push_back({"moving_energy", [L, profile, k, Omega](const VelocityState &s) {
                             const double rho = profile.at(s.q[0]).rho;
                             return energy(L, s) - Omega * (rho * rho * s.qdot[1] + k * s.qdot[4]);
                         }});

    return make_system("rotating_surface[" + profile.description() + "]", std::move(L),
                       surface_constraint(profile, p.a, Omega), surface_chart(), std::move(integrals),
                       surface_probe(profile));
}

VelocityState surface_state(const SurfaceParams &p, double u, double phi, double udot, double phidot,
                            double spin_normal, double t) {
    const SurfaceGeometry G = surface_geometry(p.profile, u, phi);
    const double w = G.r_u.norm();
    const double rho = G.r(0) * std::cos(phi) + G.r(1) * std::sin(phi);
    const Vec3 t_u = G.r_u / w;
    const Vec3 e_phi(-std::sin(phi), std::cos(phi), 0.0);
    const double n_rho = G.n(0) * std::cos(phi) + G.n(1) * std::sin(phi);
    // Rows of the constraint in the orthonormal frame (t_u, e_φ, n).
    const double w_phi = w * udot / p.a;
    const double w_u = (p.Omega * (rho + p.a * n_rho) - rho * phidot) / p.a;
    const Vec3 omega = w_phi * e_phi + w_u * t_u + spin_normal * G.n;

    VelocityState s;
    s.t = t;
    s.q = Vec::Zero(kN);
    s.q[0] = u;
    s.q[1] = phi;
    s.qdot = Vec::Zero(kN);
    s.qdot[0] = udot;
    s.qdot[1] = phidot;
    s.qdot.segment<3>(kSpinOffset) = omega;
    return s;
}

Vec3 surface_slip_velocity(const SurfaceParams &p, const VelocityState &state) {
    const SurfaceGeometry G = surface_geometry(p.profile, state.q[0], state.q[1]);
    const Vec3 rdot = G.r_u * state.qdot[0] + G.r_phi * state.qdot[1];
    const Vec3 ez = Vec3::UnitZ();
    return rdot + p.a * spin(state.qdot).cross(G.n) - p.Omega * ez.cross(G.r + p.a * G.n);
}

NonholonomicSystem build_system(const Preset &preset) {
    return std::visit(
        [](const auto &p) {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, TurntableParams>) {
                return build_turntable(p);
            } else {
                return build_rotating_surface(p);
            }
        },
        preset);
}

std::string preset_name(const Preset &preset) {
    return std::holds_alternative<TurntableParams>(preset) ? "turntable" : "rotating_surface";
}

double preset_omega(const Preset &preset) {
    return std::visit([](const auto &p) { return p.Omega; }, preset);
}

AxialRotation preset_axial_rotation(const Preset &preset) {
    AxialRotation action;
    action.n = kN;
    action.spin_offset = kSpinOffset;
    if (std::holds_alternative<TurntableParams>(preset)) {
        action.cartesian = std::array<int, 2>{0, 1};
    } else {
        action.azimuth = 1;
    }
    return action;
}

TimeDependentMap rotating_frame_map(const Preset &preset, double rate) {
    return rotating_map(preset_axial_rotation(preset), rate);
}

NonholonomicSystem build_rotating_frame_twin(const Preset &preset, double f) {
    require(std::isfinite(f), "frame rate must be finite");
    if (const auto *tp = std::get_if<TurntableParams>(&preset)) {
        const TurntableParams &p = *tp;
        p.validate();
        const double k = p.c * p.a * p.a;
        MechanicalLagrangian L = turntable_lagrangian(p);
        if (f != 0.0) {
            L.linear_term = [f, k](const Vec &q, double) {
                Vec b = Vec::Zero(kN);
                b[0] = -f * q[1];
                b[1] = f * q[0];
                b[4] = f * k;
                return b;
            };
            L.linear_term_dq = [f](const Vec &, double) {
                Mat B = Mat::Zero(kN, kN);
                B(0, 1) = -f;
                B(1, 0) = f;
                return B;
            };
            L.potential = [f, k](const Vec &q, double) {
                return -0.5 * f * f * (q[0] * q[0] + q[1] * q[1] + k);
            };
            L.potential_gradient = [f](const Vec &q, double) {
                Vec grad = Vec::Zero(kN);
                grad[0] = -f * f * q[0];
                grad[1] = -f * f * q[1];
                return grad;
            };
        }
        std::vector<NamedIntegral> integrals{energy_integral(L)};
        return make_system("turntable_rotating_frame", std::move(L), turntable_constraint(p.a, p.Omega - f),
                           turntable_chart(), std::move(integrals), Vec::Zero(kN));
    }

    const SurfaceParams &p = std::get<SurfaceParams>(preset);
    p.validate();
    const double k = p.c * p.a * p.a;
    const double g = p.g;
    const SurfaceProfile profile = p.profile;
    MechanicalLagrangian L = surface_lagrangian(p);
    if (f != 0.0) {
        L.linear_term = [profile, f, k](const Vec &q, double) {
            const double rho = profile.at(q[0]).rho;
            Vec b = Vec::Zero(kN);
            b[1] = f * rho * rho;
            b[4] = f * k;
            return b;
        };
        L.linear_term_dq = [profile, f](const Vec &q, double) {
            const auto P = profile.at(q[0]);
            Mat B = Mat::Zero(kN, kN);
            B(1, 0) = 2.0 * f * P.rho * P.drho;
            return B;
        };
        L.potential = [profile, f, g, k](const Vec &q, double) {
            const auto P = profile.at(q[0]);
            return g * P.zeta - 0.5 * f * f * (P.rho * P.rho + k);
        };
        L.potential_gradient = [profile, f, g](const Vec &q, double) {
            const auto P = profile.at(q[0]);
            Vec grad = Vec::Zero(kN);
            grad[0] = g * P.dzeta - f * f * P.rho * P.drho;
            return grad;
        };
    }
    std::vector<NamedIntegral> integrals{energy_integral(L)};
    return make_system("rotating_surface_rotating_frame[" + profile.description() + "]", std::move(L),
                       surface_constraint(profile, p.a, p.Omega - f), surface_chart(), std::move(integrals),
                       surface_probe(profile));
}

NonholonomicSystem build_rotating_frame_twin(const Preset &preset) {
    return build_rotating_frame_twin(preset, preset_omega(preset));
}

NonholonomicSystem build_rotating_frame_twin(const NonholonomicSystem &sys, const AxialRotation &action,
                                             double frame_rate, const Vec &probe) {
    require(action.n == sys.dim(), "axial action dimension differs from system dimension");
    const TimeDependentMap C = rotating_map(action, frame_rate);
    MechanicalLagrangian L = pullback_lagrangian(C, sys.lagrangian);
    AffineConstraint K = pullback_constraint(C, sys.constraint);
    std::vector<NamedIntegral> integrals{energy_integral(L)};
    return make_system(sys.name + "_rotating_frame", std::move(L), std::move(K), sys.chart, std::move(integrals),
                       probe.size() == 0 ? Vec::Zero(sys.dim()).eval() : probe);
}

Vec reduced_state(const Preset &preset, const VelocityState &state) {
    require(state.q.size() == kN && state.qdot.size() == kN, "preset state has 5 components");
    Vec z;
    if (std::holds_alternative<TurntableParams>(preset)) {
        z.resize(5);
        z << state.q[0], state.q[1], spin(state.qdot);
        return z;
    }
    const double phi = state.q[1];
    const Vec3 w = Eigen::AngleAxisd(-phi, Vec3::UnitZ()) * spin(state.qdot);
    z.resize(6);
    z << state.q[0], state.qdot[0], state.qdot[1], w;
    return z;
}

} // namespace nhlab
