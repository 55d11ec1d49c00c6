// Measurements on trajectories: drift of first integrals, energy-rate
// identities, reaction annihilators, periods, reconstruction phases and
// functional independence of integrals.
#pragma once

#include <nhlab/attitude.hpp>
#include <nhlab/systems.hpp>

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>

namespace nhlab {

struct IntegralDrift {
    std::string name;
    double initial = 0.0;
    double max_abs_drift = 0.0;
    /// max|I − I0| / max(|I0|, 1).
    double relative_drift = 0.0;
    /// Least-squares slope of I(t) − I0 against t.
    double drift_rate = 0.0;
};

struct DriftReport {
    std::vector<IntegralDrift> integrals;
    std::size_t samples = 0;
    double t_begin = 0.0;
    double t_end = 0.0;

    const IntegralDrift &operator[](const std::string &name) const;
};

DriftReport drift_report(const Trajectory &traj, const std::vector<NamedIntegral> &integrals);

/// Selects integrals of `sys` by name (all of them when `names` is empty).
std::vector<NamedIntegral> select_integrals(const NonholonomicSystem &sys, const std::vector<std::string> &names);

/// Columns t, then I(t) − I(0) for each integral.
void write_drift_csv(const Trajectory &traj, const std::vector<NamedIntegral> &integrals, std::ostream &out);

struct EnergyRateCheck {
    int samples = 0;
    double fd_step = 0.0;
    /// max |dE/dt| (finite differences on dense output).
    double max_rate = 0.0;
    /// max |dE/dt − ⟨Sᵀλ, ξ₀⟩|.
    double max_discrepancy_reaction = 0.0;
    /// max |dE/dt − closed form|, when a closed form was supplied.
    std::optional<double> max_discrepancy_closed_form;
};

/// dE/dt by the five-point stencil on the dense output at `samples` interior
/// times, compared with the reaction power on ξ₀ and optionally a closed form.
/// Assumes a time-independent Lagrangian.
EnergyRateCheck energy_rate_check(const NonholonomicSystem &sys, const Trajectory &traj, int samples = 400,
                                  const ScalarField &closed_form = {}, double fd_step = 1e-3);

struct MembershipResult {
    bool member = true;
    double max_pairing = 0.0;
    /// max ‖Sᵀλ‖·‖Y‖ over the samples.
    double scale = 0.0;
    double tolerance = 0.0;
    int samples = 0;
    std::uint64_t seed = 0;
};

/// Samples velocities in [−1, 1]ⁿ, shifts them onto the fiber M₀(q), and tests
/// whether every exerted reaction annihilates Y: max|⟨Sᵀλ, Y⟩| ≤ tol·scale.
MembershipResult reaction_annihilator_membership(const NonholonomicSystem &sys, const Vec &q, const Vec &Y,
                                                 double t = 0.0, int n_samples = 64,
                                                 std::uint64_t seed = 0x5eed, double tol = 1e-10);

/// Codimension-one section through z(t0) normal to ż(t0).
struct SectionSpec {
    /// Return search window (t0, t0 + horizon].
    double horizon = 100.0;
    /// Grid spacing used to bracket crossings.
    double scan_step = 1e-2;
    /// Crossing refinement tolerance in time.
    double time_tolerance = 1e-10;
    /// Full-state return threshold ‖z(T) − z(t0)‖.
    double residual_threshold = 1e-6;
    /// ‖ż(t0)‖ below this is treated as an equilibrium.
    double equilibrium_speed = 1e-9;
};

struct PeriodEstimate {
    bool detected = false;
    bool equilibrium = false;
    double period = 0.0;
    double return_residual = 0.0;
    int crossings_examined = 0;
    int refinement_iterations = 0;
    Vec section_point;
    Vec section_normal;
    SectionSpec section;
    std::string note;
};

using Curve = std::function<Vec(double)>;
using StateReducer = std::function<Vec(const VelocityState &)>;

PeriodEstimate detect_period(const Curve &z, double t0, const SectionSpec &spec);
PeriodEstimate detect_period(const Trajectory &traj, const StateReducer &reduce, const SectionSpec &spec);
/// Integrates `sys` from `init` over the horizon first.
PeriodEstimate detect_period(const NonholonomicSystem &sys, const VelocityState &init, const StateReducer &reduce,
                             const SectionSpec &spec, const IntegratorOptions &options);
PeriodEstimate detect_period(const Preset &preset, const VelocityState &init, const SectionSpec &spec,
                             const IntegratorOptions &options);

/// Whether x is within `tolerance` of p/q for some q ≤ max_denominator,
/// using continued-fraction convergents.
bool is_near_rational(double x, int max_denominator = 64, double tolerance = 1e-6);

struct ResonanceSpec {
    int max_denominator = 64;
    double tolerance = 1e-6;
};

struct ReconstructionFrequencies {
    double period = 0.0;
    double reduced_frequency = 0.0;
    /// Δθ: advance of the S¹ phase over one reduced period (absent without one).
    std::optional<double> phase_advance;
    /// Δχ ∈ [0, π]: rotation angle of H_{−Δθ} R(T) R(0)ᵀ.
    double attitude_angle = 0.0;
    bool phase_resonant = true;
    bool attitude_resonant = true;
    int torus_dimension = 1;
    ResonanceSpec resonance;
    std::string method = "continued-fraction resonance heuristic";
};

/// Integrates the unreduced system over one reduced period and extracts the
/// group phases. Requires a spin block; uses chart.symmetry_phase when present.
ReconstructionFrequencies reconstruction_frequencies(const NonholonomicSystem &sys, const VelocityState &init,
                                                     const PeriodEstimate &period, const IntegratorOptions &options,
                                                     const ResonanceSpec &resonance = {});

struct IntegralRank {
    int rank = 0;
    std::vector<double> singular_values;
    double threshold = 0.0;
    double fd_step = 0.0;
};

/// Rank of the differentials of `integrals` restricted to M₀ at `state`. The
/// chart of M₀ is (δq, w) ↦ (q + δq, Π(q̇ + K w)) with K a basis of ker S(q) and
/// Π the Euclidean projection onto the fiber at q + δq. SVD cut-off
/// 1e-8 × σ_max.
IntegralRank integral_rank(const NonholonomicSystem &sys, const std::vector<NamedIntegral> &integrals,
                           const VelocityState &state, double fd_step = 1e-5);

void to_json(nlohmann::json &j, const IntegralDrift &d);
void to_json(nlohmann::json &j, const DriftReport &r);
void to_json(nlohmann::json &j, const EnergyRateCheck &r);
void to_json(nlohmann::json &j, const MembershipResult &r);
void to_json(nlohmann::json &j, const SectionSpec &s);
void to_json(nlohmann::json &j, const PeriodEstimate &p);
void to_json(nlohmann::json &j, const ReconstructionFrequencies &r);
void to_json(nlohmann::json &j, const IntegralRank &r);
void to_json(nlohmann::json &j, const IntegratorOptions &o);
void to_json(nlohmann::json &j, const SampleSpec &s);

} // namespace nhlab
