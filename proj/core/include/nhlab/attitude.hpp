// Attitude reconstruction R(t) from the spatial angular velocity, Ṙ = ω̂ R.
#pragma once

#include <nhlab/integrate.hpp>

#include <Eigen/Geometry>

namespace nhlab {

struct OmegaPath {
    std::vector<double> times;
    std::function<Vec3(double)> omega;
};

struct AttitudePath {
    std::vector<double> times;
    std::vector<Eigen::Quaterniond> attitudes;

    Mat3 rotation(std::size_t i) const { return attitudes[i].toRotationMatrix(); }
};

/// Integrates q̇ = ½ (0, ω) ⊗ q with classical RK4 between consecutive grid
/// times, renormalizing after each step. Requires h·max‖ω‖ < 0.5 on every interval.
AttitudePath reconstruct_attitude(const OmegaPath &path, const Eigen::Quaterniond &R0);

/// ω(t) taken from the spin block of a dense trajectory, on the trajectory's own
/// step grid refined until h·‖ω‖ ≤ `max_angle` on each interval.
OmegaPath omega_path_from(const Trajectory &traj, int spin_offset, double max_angle = 0.02);

/// Rotation angle in [0, π] of a rotation matrix.
double rotation_angle(const Mat3 &R);

Mat3 hat(const Vec3 &w);

} // namespace nhlab
