// Time-dependent coordinate changes, pullbacks, moving energies and the
// sampled hypothesis checkers built on top of them.
#pragma once

#include <nhlab/integrate.hpp>

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <span>

namespace nhlab {

/// Q(u,t) together with Q′ = ∂Q/∂u, Q̇ = ∂Q/∂t and the inverse u = Q_t⁻¹(q).
///
/// On spin pseudo-coordinates (`pseudo_indices`) the velocity lift is the
/// right-trivialized tangent map, so `time_derivative` there carries the
/// trivialized generator and is not ∂_t of `forward`.
struct TimeDependentMap {
    int n = 0;
    std::function<Vec(const Vec &, double)> forward;
    std::function<Mat(const Vec &, double)> jacobian;
    std::function<Vec(const Vec &, double)> time_derivative;
    std::function<Vec(const Vec &, double)> inverse;
    std::vector<int> pseudo_indices;
    /// True when ∂_t Q vanishes identically (Q̇ ≡ 0).
    bool is_static = false;
};

TimeDependentMap identity_map(int n);

/// Rotation about the vertical axis, acting on whichever chart blocks are declared:
/// a Cartesian (x, y) pair, an azimuth coordinate (shifted), a spin block (rotated).
struct AxialRotation {
    int n = 0;
    std::optional<std::array<int, 2>> cartesian;
    std::optional<int> azimuth;
    std::optional<int> spin_offset;

    Vec act(double theta, const Vec &q) const;
    Mat tangent(double theta) const;
    /// Infinitesimal generator for η = 1.
    Vec generator(const Vec &q) const;
};

/// Q(u,t) = Ψ_{θ(t)}(u) for an arbitrary angle schedule θ(t) with rate θ′(t).
TimeDependentMap rotation_map(const AxialRotation &action, std::function<double(double)> angle,
                              std::function<double(double)> angle_rate);

/// The flow of η·Y: θ(t) = η t.
TimeDependentMap rotating_map(const AxialRotation &action, double eta);

struct GroupGenerator {
    VectorField field;
    std::optional<TimeDependentMap> flow;
};

GroupGenerator axial_generator(const AxialRotation &action, double eta);

/// One sampled group element g: q ↦ Ψ_g(q) and its tangent map Ψ′_g(q).
struct GroupElementSample {
    std::string label;
    std::function<Vec(const Vec &)> act;
    std::function<Mat(const Vec &)> tangent;
};

std::vector<GroupElementSample> sample_axial_elements(const AxialRotation &action,
                                                      std::span<const double> angles);

/// DC(u, u̇, t) = (Q(u,t), Q′ u̇ + Q̇).
std::pair<Vec, Vec> lift(const TimeDependentMap &C, const Vec &u, const Vec &udot, double t);
VelocityState lift(const TimeDependentMap &C, const VelocityState &state);
/// DC⁻¹.
VelocityState unlift(const TimeDependentMap &C, const VelocityState &state);

/// S̃ = (S∘C) Q′, s̃ = s∘C + (S∘C) Q̇. Derivatives of the result use finite differences.
AffineConstraint pullback_constraint(const TimeDependentMap &C, const AffineConstraint &K);

/// L̃ = L∘DC expanded as M̃ = Q′ᵀ(M∘C)Q′, b̃ = Q′ᵀ[(M∘C)Q̇ + b∘C],
/// Ṽ = V∘C − ½Q̇ᵀ(M∘C)Q̇ − (b∘C)·Q̇.
MechanicalLagrangian pullback_lagrangian(const TimeDependentMap &C, const MechanicalLagrangian &L);

/// E*_{L,C} = E_L − ⟨p, Q̇∘C⁻¹⟩.
ScalarField moving_energy(const MechanicalLagrangian &L, const TimeDependentMap &C);

/// J_η = ⟨p, Y_η⟩.
ScalarField momentum_map_component(const MechanicalLagrangian &L, const GroupGenerator &Y);

/// Applies the lift pointwise; multipliers and residuals carry over unchanged
/// because S̃u̇ + s̃ equals S q̇ + s at corresponding states.
Trajectory conjugate_trajectory(const TimeDependentMap &C, const Trajectory &traj_in_u);

/// Sampling controls shared by all checkers. Configuration points are drawn
/// uniformly from [box_lo, box_hi]; velocities from [−velocity_half_width, +]^n.
struct SampleSpec {
    int points = 200;
    std::vector<double> times = {0.0, 0.37, 1.0, 2.718281828459045, 3.141592653589793, 4.1, 6.3, 9.87};
    Vec box_lo;
    Vec box_hi;
    double velocity_half_width = 1.0;
    std::uint64_t seed = 0x5eed;
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    /// Test time-independence of E* only on the constraint fibers.
    bool fiber_only = false;
};

SampleSpec default_sample_spec(int n, double half_width = 2.0);

struct HypothesisResult {
    std::string name;
    bool passed = true;
    double worst_residual = 0.0;
    Vec worst_q;
    Vec worst_qdot;
    double worst_t = 0.0;
};

struct HypothesisReport {
    std::string check;
    std::vector<HypothesisResult> results;

    bool all_passed() const;
    const HypothesisResult &operator[](const std::string &name) const;
};

void to_json(nlohmann::json &j, const HypothesisResult &r);
void to_json(nlohmann::json &j, const HypothesisReport &r);

/// Hypotheses of the moving-energy theorem for a time-independent system:
///   "L_pullback_time_independent"  L∘DC independent of t,
///   "moving_energy_time_independent"  E*_{L,C} independent of t,
///   "pulled_back_constraint_linear_static"  s̃ = 0 and ker S̃ independent of t.
HypothesisReport check_theorem1(const NonholonomicSystem &sys, const TimeDependentMap &C,
                                const SampleSpec &spec);

/// Symmetry hypotheses for a generator Y:
///   "H1_lagrangian_invariant"  L(Ψ_g q, Ψ′_g q̇) = L(q, q̇),
///   "H2_distribution_invariant"  S(Ψ_g q) Ψ′_g(q) ker S(q) = 0,
///   "H3_generator_in_fiber"  S(q) Y(q) + s(q) = 0.
HypothesisReport check_symmetry_hypotheses(const NonholonomicSystem &sys,
                                           const std::vector<GroupElementSample> &elements,
                                           const GroupGenerator &Y, const SampleSpec &spec);

/// Max over samples of ‖Q̇(u,t) − Y(Q(u,t))‖ (flow condition for a generator's map),
/// relative to max(1, ‖Q̇‖).
double flow_condition_residual(const GroupGenerator &Y, const SampleSpec &spec);

/// Max over samples of the mismatch between central differences of `forward`
/// and the declared jacobian / time_derivative (spin slots skipped).
double map_consistency_residual(const TimeDependentMap &C, const SampleSpec &spec);

/// Deterministic uniform [0,1) doubles from a 64-bit seed, independent of the
/// standard library's distribution implementations.
class SampleRng {
  public:
    explicit SampleRng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  private:
    std::uint64_t state_;
};

} // namespace nhlab
