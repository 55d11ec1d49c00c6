// Time integration of nonholonomic vector fields with velocity projection,
// dense output, and trajectory export.
#pragma once

#include <nhlab/dynamics.hpp>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nhlab {

enum class Method { FixedRK4, DormandPrince54 };
enum class Projection { None, EveryStep, EveryKSteps };

struct IntegratorOptions {
    Method method = Method::DormandPrince54;
    /// Step of the fixed-step method; initial step guess for the adaptive one (≤ 0: automatic).
    double step = 1e-2;
    double rtol = 1e-10;
    double atol = 1e-12;
    Projection projection = Projection::EveryStep;
    int projection_interval = 1;
    long max_steps = 5'000'000;
    /// Residual ‖S q̇ + s‖ that aborts the run as an off-manifold blow-up.
    double blowup_residual = 1e-4;
    /// Record λ at every accepted step (one extra dynamics solve per step).
    bool record_multipliers = true;
};

std::string to_string(Method m);
std::string to_string(Projection p);
Method parse_method(const std::string &s);
Projection parse_projection(const std::string &s);

/// Continuous extension of one accepted step, in Hairer's five-vector form
///   y(t0 + θh) = c0 + θ(c1 + (1−θ)(c2 + θ(c3 + (1−θ)c4))).
/// Fixed RK4 steps store the cubic Hermite interpolant (c4 = 0).
struct DenseSegment {
    double t0 = 0.0;
    double h = 0.0;
    std::array<Vec, 5> c;

    Vec eval(double t) const;
};

/// Raw ODE solution y(t) with dense output.
struct OdeSolution {
    std::vector<double> times;
    std::vector<Vec> values;
    std::vector<DenseSegment> segments;
    long rhs_evaluations = 0;
    long rejected_steps = 0;

    double t_begin() const { return times.front(); }
    double t_end() const { return times.back(); }
    Vec eval(double t) const;
};

using OdeRhs = std::function<Vec(double, const Vec &)>;
/// Called on every accepted state; may modify it (projection) and returns true if it did.
using StepHook = std::function<bool(double, Vec &, long)>;

OdeSolution integrate_ode(const OdeRhs &rhs, const Vec &y0, double t0, double t1,
                          const IntegratorOptions &options, const StepHook &hook = {});

struct Trajectory {
    int n = 0;
    int k = 0;
    std::vector<double> times;
    std::vector<VelocityState> states;
    std::vector<Vec> multipliers;
    std::vector<double> residuals;
    /// Dense output of y = (q, q̇); empty for resampled or conjugated trajectories.
    std::vector<DenseSegment> segments;
    long rhs_evaluations = 0;

    std::size_t size() const { return times.size(); }
    bool has_dense_output() const { return !segments.empty(); }
    /// State at t via dense output (throws if none and t is not a sample time).
    VelocityState at(double t) const;
};

Trajectory integrate(const NonholonomicSystem &sys, const VelocityState &init, double t_end,
                     const IntegratorOptions &options = {});

/// Re-evaluates a dense trajectory on the given time grid (multipliers recomputed from `sys`).
Trajectory resample(const NonholonomicSystem &sys, const Trajectory &traj, const std::vector<double> &grid);

std::vector<double> uniform_grid(double t0, double t1, int intervals);

/// CSV with header `t,q0..,qdot0..,lambda0..,residual` and 17 significant digits.
void write_trajectory_csv(const Trajectory &traj, std::ostream &out);
Trajectory read_trajectory_csv(std::istream &in);

/// Versioned little-endian binary export: magic "NHTR", u32 version, u32 n, u32 k,
/// u64 count, then per sample t, q, q̇, λ, residual as float64.
void write_trajectory_binary(const Trajectory &traj, std::ostream &out);
Trajectory read_trajectory_binary(std::istream &in);

inline constexpr std::uint32_t kTrajectoryBinaryVersion = 1;

} // namespace nhlab
