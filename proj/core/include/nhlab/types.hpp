// nhlab: numerical laboratory for nonholonomic systems with affine constraints.
// Basic value types and the error hierarchy shared by every module.
#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace nhlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// A kinematic state (q, q̇) at time t in a local chart.
struct VelocityState {
    Vec q;
    Vec qdot;
    double t = 0.0;

    int dim() const { return static_cast<int>(q.size()); }
};

using ScalarField = std::function<double(const VelocityState &)>;
using VectorField = std::function<Vec(const Vec &)>;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raised when a caller breaks an operation's precondition (dimension mismatch,
/// non-finite input, invalid parameters).
class ContractViolation : public Error {
  public:
    using Error::Error;
};

/// S(q,t) lost rank.
class SingularConstraintError : public Error {
  public:
    using Error::Error;
};

/// The saddle-point matrix [M Sᵀ; S 0] could not be factorized.
class DegenerateConstraintError : public Error {
  public:
    using Error::Error;
};

/// State is too far from the constraint fiber for the requested evaluation.
class OffManifoldError : public Error {
  public:
    using Error::Error;
};

/// A geometric query outside the admissible parameter domain.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Step-size underflow, step budget exhausted or constraint blow-up.
class IntegrationError : public Error {
  public:
    using Error::Error;
};

inline void require(bool condition, const std::string &message) {
    if (!condition) {
        throw ContractViolation(message);
    }
}

/// Validates the invariants of a VelocityState: n ≥ 2, matching dimensions,
/// finite entries.
void check_state(const VelocityState &state, int expected_dim);

} // namespace nhlab
