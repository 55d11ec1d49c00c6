// Meridian profiles (ρ(u), ζ(u)) of the surface of revolution traced by the
// sphere's CENTER. The physical cup is offset from it by the radius a.
#pragma once

#include <nhlab/types.hpp>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace nhlab {

struct ProfilePoint {
    double rho, drho, ddrho;
    double zeta, dzeta, ddzeta;
};

class SurfaceProfile {
  public:
    using Evaluator = std::function<ProfilePoint(double)>;

    SurfaceProfile(std::string description, Evaluator eval, double u_min, double u_max);

    /// Throws DomainError outside [u_min, u_max].
    ProfilePoint at(double u) const;
    bool contains(double u) const { return u >= u_min_ && u <= u_max_; }
    double u_min() const { return u_min_; }
    double u_max() const { return u_max_; }
    const std::string &description() const { return description_; }

  private:
    std::string description_;
    Evaluator eval_;
    double u_min_;
    double u_max_;
};

/// Default clearance kept from the symmetry axis (ρ = 0).
inline constexpr double kAxisMargin = 1e-3;

/// Horizontal plane at height h: ρ = u, ζ = h.
SurfaceProfile plane_profile(double height = 0.0, double axis_margin = kAxisMargin, double u_max = 1e6);

/// ζ = k u²/2, ρ = u.
SurfaceProfile paraboloid_profile(double k = 1.0, double axis_margin = kAxisMargin, double u_max = 1e6);

/// Center surface is a sphere of radius R about the origin, bottom at u = 0:
/// ρ = R sin u, ζ = −R cos u.
SurfaceProfile sphere_bowl_profile(double R, double axis_margin = kAxisMargin);

struct ProfileKnot {
    double u, rho, zeta;
};

/// Natural cubic-spline interpolation of (u, ρ, ζ) knots; u strictly increasing,
/// ρ > 0 at every knot. The domain is [u_first, u_last].
SurfaceProfile tabulated_profile(std::vector<ProfileKnot> knots);

/// Plain text, three whitespace-separated columns `u rho zeta` per line;
/// blank lines and lines starting with '#' are ignored.
std::vector<ProfileKnot> read_profile_knots(std::istream &in);
SurfaceProfile load_tabulated_profile(const std::string &path);

} // namespace nhlab
