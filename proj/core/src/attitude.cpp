#include <nhlab/attitude.hpp>

#include <cmath>
#include <memory>

namespace nhlab {

namespace {

// d/dt of the quaternion under the spatial angular velocity w: ½ (0, w) ⊗ q.
Eigen::Vector4d qdot(const Vec3 &w, const Eigen::Vector4d &q) {
    const Eigen::Quaterniond wq(0.0, w.x(), w.y(), w.z());
    const Eigen::Quaterniond qq(q[0], q[1], q[2], q[3]);
    const Eigen::Quaterniond r = wq * qq;
    return 0.5 * Eigen::Vector4d(r.w(), r.x(), r.y(), r.z());
}

} // namespace

Mat3 hat(const Vec3 &w) {
    Mat3 W;
    W << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
    return W;
}

double rotation_angle(const Mat3 &R) {
    const Vec3 axis(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
    return std::atan2(0.5 * axis.norm(), 0.5 * (R.trace() - 1.0));
}

AttitudePath reconstruct_attitude(const OmegaPath &path, const Eigen::Quaterniond &R0) {
    require(!path.times.empty(), "omega path has no samples");
    require(static_cast<bool>(path.omega), "omega path has no angular velocity function");
    require(std::abs(R0.norm() - 1.0) < 1e-9, "initial attitude must be a unit quaternion");

    AttitudePath out;
    out.times = path.times;
    out.attitudes.reserve(path.times.size());
    Eigen::Vector4d q(R0.w(), R0.x(), R0.y(), R0.z());
    out.attitudes.push_back(R0);

    for (std::size_t i = 1; i < path.times.size(); ++i) {
        const double t = path.times[i - 1];
        const double h = path.times[i] - t;
        require(h > 0.0, "omega path times must be strictly increasing");
        const Vec3 w0 = path.omega(t);
        const Vec3 wm = path.omega(t + 0.5 * h);
        const Vec3 w1 = path.omega(t + h);
        const double wmax = std::max({w0.norm(), wm.norm(), w1.norm()});
        if (!(h * wmax < 0.5)) {
            throw ContractViolation("omega path undersampled at t = " + std::to_string(t) +
                                    " (step x |omega| = " + std::to_string(h * wmax) + ", need < 0.5)");
        }
        const Eigen::Vector4d k1 = qdot(w0, q);
        const Eigen::Vector4d k2 = qdot(wm, q + 0.5 * h * k1);
        const Eigen::Vector4d k3 = qdot(wm, q + 0.5 * h * k2);
        const Eigen::Vector4d k4 = qdot(w1, q + h * k3);
        q += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        q.normalize();
        out.attitudes.emplace_back(q[0], q[1], q[2], q[3]);
    }
    return out;
}

OmegaPath omega_path_from(const Trajectory &traj, int spin_offset, double max_angle) {
    require(traj.has_dense_output(), "attitude reconstruction needs a trajectory with dense output");
    require(spin_offset >= 0 && spin_offset + 3 <= traj.n, "spin block out of range");
    require(max_angle > 0.0 && max_angle < 0.5, "max_angle must lie in (0, 0.5)");

    auto shared = std::make_shared<const Trajectory>(traj);
    OmegaPath path;
    path.omega = [shared, spin_offset](double t) {
        return Vec3(shared->at(t).qdot.segment<3>(spin_offset));
    };
    path.times.push_back(traj.times.front());
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
        const double t0 = traj.times[i - 1];
        const double t1 = traj.times[i];
        const double wmax = std::max({path.omega(t0).norm(), path.omega(0.5 * (t0 + t1)).norm(),
                                      path.omega(t1).norm()});
        const int pieces = std::max(1, static_cast<int>(std::ceil((t1 - t0) * wmax / max_angle)));
        for (int j = 1; j < pieces; ++j) {
            path.times.push_back(t0 + (t1 - t0) * j / pieces);
        }
        path.times.push_back(t1);
    }
    return path;
}

} // namespace nhlab
