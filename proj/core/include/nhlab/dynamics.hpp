// Mechanical Lagrangians, affine constraints and the d'Alembert dynamics on
// the constraint fibers.
#pragma once

#include <nhlab/types.hpp>

#include <optional>
#include <string>
#include <vector>

namespace nhlab {

/// L(q, q̇, t) = ½ q̇ᵀ M(q,t) q̇ + b(q,t)·q̇ − V(q,t).
///
/// Only `mass_matrix` is mandatory. An empty `linear_term` or `potential`
/// means identically zero. The `*_dq` / `*_dt` callbacks are optional analytic
/// derivatives; when absent, central finite differences with step
/// h = max(1e-6, 1e-6·|q_i|) are used. `time_dependent == false` lets the
/// solver skip every ∂_t term.
struct MechanicalLagrangian {
    int n = 0;
    std::function<Mat(const Vec &, double)> mass_matrix;
    std::function<Vec(const Vec &, double)> linear_term;
    std::function<double(const Vec &, double)> potential;

    /// Entry i is ∂M/∂q_i.
    std::function<std::vector<Mat>(const Vec &, double)> mass_matrix_dq;
    std::function<Mat(const Vec &, double)> mass_matrix_dt;
    /// (i, j) entry is ∂b_i/∂q_j.
    std::function<Mat(const Vec &, double)> linear_term_dq;
    std::function<Vec(const Vec &, double)> linear_term_dt;
    std::function<Vec(const Vec &, double)> potential_gradient;

    bool time_dependent = false;

    Mat M(const Vec &q, double t) const;
    Vec b(const Vec &q, double t) const;
    double V(const Vec &q, double t) const;
};

/// Affine constraint S(q,t) q̇ + s(q,t) = 0 with S a full-rank k×n matrix.
/// An empty `offset` means a linear constraint (s ≡ 0).
struct AffineConstraint {
    int n = 0;
    int k = 0;
    std::function<Mat(const Vec &, double)> matrix;
    std::function<Vec(const Vec &, double)> offset;

    /// Entry i is ∂S/∂q_i.
    std::function<std::vector<Mat>(const Vec &, double)> matrix_dq;
    std::function<Mat(const Vec &, double)> matrix_dt;
    /// k×n matrix ∂s/∂q.
    std::function<Mat(const Vec &, double)> offset_dq;
    std::function<Vec(const Vec &, double)> offset_dt;

    bool time_dependent = false;

    Mat S(const Vec &q, double t) const;
    Vec s(const Vec &q, double t) const;
    bool is_linear() const { return !offset; }
};

/// Chart metadata.
///
/// `spin_offset` marks a 3-block of pseudo-coordinates ψ with ψ̇ = ω, the
/// right-trivialized (spatial) angular velocity of an isotropic body. The
/// solver adds the Euler–Poincaré term ω × p_ψ for that block; it vanishes
/// whenever p_ψ is parallel to ω, which is the case for every inertial preset.
struct ChartMeta {
    std::vector<int> angle_indices;
    std::optional<int> spin_offset;
    /// Coordinate whose shift generates the S¹ part of the symmetry group.
    std::optional<int> symmetry_phase;
};

struct NamedIntegral {
    std::string name;
    ScalarField value;
};

struct NonholonomicSystem {
    std::string name;
    MechanicalLagrangian lagrangian;
    AffineConstraint constraint;
    ChartMeta chart;
    std::vector<NamedIntegral> integrals;

    int dim() const { return lagrangian.n; }
    const NamedIntegral *find_integral(const std::string &key) const;
};

/// Checks dimensions, 1 < r = n − k < n, and, when a spin block is declared,
/// that the inertia of that block is isotropic at `probe`.
NonholonomicSystem make_system(std::string name, MechanicalLagrangian lagrangian,
                               AffineConstraint constraint, ChartMeta chart,
                               std::vector<NamedIntegral> integrals,
                               const Vec &probe);

/// Returns a copy of `sys` with one more named integral. This is how externally
/// known integrals (not derivable here) are registered with the harness.
NonholonomicSystem register_integral(NonholonomicSystem sys, std::string name, ScalarField fn);

struct DynamicsOptions {
    double manifold_tolerance = 1e-8;
    bool check_manifold = true;
    /// Above this size of the saddle-point system the Schur complement route is used.
    int schur_threshold = 64;
};

struct DynamicsOutput {
    Vec qddot;
    Vec lambda;
    /// Sᵀλ: the ideal reaction covector.
    Vec reaction;
};

double lagrangian_value(const MechanicalLagrangian &L, const VelocityState &state);

/// E_L = ⟨p, q̇⟩ − L = ½ q̇ᵀ M q̇ + V. The linear term cancels.
double energy(const MechanicalLagrangian &L, const VelocityState &state);

/// p = ∂L/∂q̇ = M q̇ + b.
Vec momentum(const MechanicalLagrangian &L, const VelocityState &state);

Vec constraint_residual(const AffineConstraint &K, const VelocityState &state);

/// Minimum-norm ξ with S ξ = −s.
Vec representative_xi(const AffineConstraint &K, const Vec &q, double t);

/// Orthonormal basis (columns) of ker S, from the SVD.
Mat kernel_basis(const Mat &S);

/// Throws SingularConstraintError unless σ_min(S) > 1e-10 σ_max(S).
void require_full_rank(const Mat &S);

/// Euler–Lagrange generalized force f such that M q̈ = f + Sᵀλ.
Vec generalized_force(const MechanicalLagrangian &L, const ChartMeta &chart,
                      const VelocityState &state);

/// Right-hand side of the differentiated constraint, S q̈ = rhs.
Vec constraint_acceleration_rhs(const AffineConstraint &K, const VelocityState &state);

DynamicsOutput eval_dynamics(const NonholonomicSystem &sys, const VelocityState &state,
                             const DynamicsOptions &options = {});

/// Closest point to `qdot` on { v : S v + s = 0 } in the M(q,t) metric.
Vec project_velocity(const NonholonomicSystem &sys, const Vec &q, const Vec &qdot, double t);

} // namespace nhlab
