// Concrete presets: a sphere rolling on a turntable and a sphere rolling inside
// a surface of revolution spinning about its vertical axis.
#pragma once

#include <nhlab/frames.hpp>
#include <nhlab/profile.hpp>

#include <variant>

namespace nhlab {

struct TurntableParams {
    double a = 1.0;
    double c = 0.4;
    double Omega = 1.0;

    /// ν = Ω / (1 + c).
    double nu() const { return Omega / (1.0 + c); }
    void validate() const;
};

struct SurfaceParams {
    SurfaceProfile profile = paraboloid_profile();
    double a = 1.0;
    double c = 0.4;
    double Omega = 0.0;
    double g = 1.0;

    void validate() const;
};

using Preset = std::variant<TurntableParams, SurfaceParams>;

/// Chart indices shared by both presets: spin block ψ at 2..4.
inline constexpr int kSpinOffset = 2;

// ---- turntable ------------------------------------------------------------

/// q = (x, y, ψ), M = diag(1, 1, ca², ca², ca²),
/// ẋ − aω_y + Ωy = 0,  ẏ + aω_x − Ωx = 0.
///
/// Named integrals: "omega_z", "transverse_x" (aω_x − νx), "transverse_y"
/// (aω_y − νy), "frame_energy" (E − Ω²(x²+y²) + Ωa(xω_x + yω_y)),
/// "moving_energy" (E − J_Ω) and the non-conserved "energy".
NonholonomicSystem build_turntable(const TurntableParams &p);

/// Closed-form reduced vector field in z = (x, y, ω_x, ω_y, ω_z).
Vec turntable_reduced_rhs(const TurntableParams &p, const Vec &z);

/// On-fiber state with ψ = 0 from (x, y, ω).
VelocityState turntable_state(const TurntableParams &p, double x, double y, const Vec3 &omega, double t = 0.0);

/// acνΩ(xω_y − yω_x).
double turntable_energy_rate(const TurntableParams &p, const VelocityState &state);

// ---- surface of revolution -------------------------------------------------

struct SurfaceGeometry {
    Vec3 r, r_u, r_phi;
    Vec3 r_uu, r_uphi, r_phiphi;
    /// Unit normal pointing from the center toward the contact point.
    Vec3 n, n_u, n_phi;
    Eigen::Matrix2d metric;
};

SurfaceGeometry surface_geometry(const SurfaceProfile &profile, double u, double phi);

/// q = (u, φ, ψ) with center r = (ρ cos φ, ρ sin φ, ζ). The two constraint rows
/// are the projections of ṙ + aω×n − Ωe_z×(r + an) = 0 on r_u and r_φ.
///
/// Named integrals: "energy" and "moving_energy" (E − Ω(ρ²φ̇ + ca²ω_z)).
NonholonomicSystem build_rotating_surface(const SurfaceParams &p);

/// On-fiber state with ψ = 0. `spin_normal` is ω·n; the tangential spin follows
/// from the rolling constraint.
VelocityState surface_state(const SurfaceParams &p, double u, double phi, double udot, double phidot,
                            double spin_normal, double t = 0.0);

/// Contact-velocity slip [ṙ + aω×n − Ωe_z×(r + an)] in ℝ³.
Vec3 surface_slip_velocity(const SurfaceParams &p, const VelocityState &state);

// ---- shared ----------------------------------------------------------------

NonholonomicSystem build_system(const Preset &preset);
std::string preset_name(const Preset &preset);
double preset_omega(const Preset &preset);

/// Vertical-axis rotation acting on the preset's chart.
AxialRotation preset_axial_rotation(const Preset &preset);

/// Frame rotating about the vertical axis at `rate`: Q(u,t) = Ψ_{rate·t}(u).
TimeDependentMap rotating_frame_map(const Preset &preset, double rate);

/// The preset written in the frame rotating at `frame_rate` (default: Ω), built
/// in closed form: M̃ = M, b̃ = rate·M·Y, Ṽ = V − ½rate²YᵀMY, constraint with
/// table rate Ω − rate. Its "energy" is conserved when rate = Ω.
NonholonomicSystem build_rotating_frame_twin(const Preset &preset, double frame_rate);
NonholonomicSystem build_rotating_frame_twin(const Preset &preset);

/// Generic version through pullback_lagrangian / pullback_constraint (finite
/// difference derivatives). Works for any system carrying the given action;
/// `probe` is a configuration used for validation (default: origin).
NonholonomicSystem build_rotating_frame_twin(const NonholonomicSystem &sys, const AxialRotation &action,
                                             double frame_rate, const Vec &probe = Vec());

/// Coordinates of the symmetry-reduced dynamics:
/// turntable (x, y, ω); surface (u, u̇, φ̇, H_{−φ}ω).
Vec reduced_state(const Preset &preset, const VelocityState &state);

} // namespace nhlab
