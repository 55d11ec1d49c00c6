#include <nhlab/profile.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nhlab {

SurfaceProfile::SurfaceProfile(std::string description, Evaluator eval, double u_min, double u_max)
    : description_(std::move(description)), eval_(std::move(eval)), u_min_(u_min), u_max_(u_max) {
    require(static_cast<bool>(eval_), "profile evaluator missing");
    require(u_min_ < u_max_, "profile domain is empty");
}

ProfilePoint SurfaceProfile::at(double u) const {
    if (!contains(u)) {
        throw DomainError("u = " + std::to_string(u) + " outside profile domain [" + std::to_string(u_min_) +
                          ", " + std::to_string(u_max_) + "] of " + description_);
    }
    ProfilePoint p = eval_(u);
    if (!(p.rho > 0.0)) {
        throw DomainError("profile touches the symmetry axis at u = " + std::to_string(u));
    }
    if (!(p.drho * p.drho + p.dzeta * p.dzeta > 0.0)) {
        throw DomainError("profile curve is singular at u = " + std::to_string(u));
    }
    return p;
}

SurfaceProfile plane_profile(double height, double axis_margin, double u_max) {
    return SurfaceProfile(
        "plane(h=" + std::to_string(height) + ")",
        [height](double u) { return ProfilePoint{u, 1.0, 0.0, height, 0.0, 0.0}; }, axis_margin, u_max);
}

SurfaceProfile paraboloid_profile(double k, double axis_margin, double u_max) {
    require(k > 0.0, "paraboloid curvature must be positive");
    return SurfaceProfile(
        "paraboloid(k=" + std::to_string(k) + ")",
        [k](double u) { return ProfilePoint{u, 1.0, 0.0, 0.5 * k * u * u, k * u, k}; }, axis_margin, u_max);
}

SurfaceProfile sphere_bowl_profile(double R, double axis_margin) {
    require(R > 0.0, "bowl radius must be positive");
    const double pi = std::acos(-1.0);
    return SurfaceProfile(
        "sphere_bowl(R=" + std::to_string(R) + ")",
        [R](double u) {
            const double s = std::sin(u);
            const double c = std::cos(u);
            return ProfilePoint{R * s, R * c, -R * s, -R * c, R * s, R * c};
        },
        axis_margin, pi - axis_margin);
}

namespace {

// Second derivatives of the natural cubic spline through (x_i, y_i).
std::vector<double> spline_moments(const std::vector<double> &x, const std::vector<double> &y) {
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n < 3) {
        return m;
    }
    std::vector<double> diag(n, 1.0), upper(n, 0.0), lower(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x[i] - x[i - 1];
        const double h1 = x[i + 1] - x[i];
        lower[i] = h0 / 6.0;
        diag[i] = (h0 + h1) / 3.0;
        upper[i] = h1 / 6.0;
        rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
    }
    // Thomas algorithm.
    for (std::size_t i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    }
    return m;
}

struct Spline {
    std::vector<double> x, y, m;

    std::array<double, 3> eval(std::size_t i, double u) const {
        const double h = x[i + 1] - x[i];
        const double A = (x[i + 1] - u) / h;
        const double B = (u - x[i]) / h;
        const double v = A * y[i] + B * y[i + 1] + ((A * A * A - A) * m[i] + (B * B * B - B) * m[i + 1]) * h * h / 6.0;
        const double d = (y[i + 1] - y[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m[i] +
                         (3.0 * B * B - 1.0) / 6.0 * h * m[i + 1];
        const double dd = A * m[i] + B * m[i + 1];
        return {v, d, dd};
    }
};

} // namespace

SurfaceProfile tabulated_profile(std::vector<ProfileKnot> knots) {
    require(knots.size() >= 2, "tabulated profile needs at least two knots");
    std::vector<double> u, rho, zeta;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        require(std::isfinite(knots[i].u) && std::isfinite(knots[i].rho) && std::isfinite(knots[i].zeta),
                "tabulated profile has non-finite entries");
        if (i > 0) {
            require(knots[i].u > knots[i - 1].u, "tabulated profile: u must be strictly increasing");
        }
        require(knots[i].rho > 0.0, "tabulated profile: rho must be positive (axis excluded)");
        u.push_back(knots[i].u);
        rho.push_back(knots[i].rho);
        zeta.push_back(knots[i].zeta);
    }
    auto rho_spline = std::make_shared<Spline>(Spline{u, rho, spline_moments(u, rho)});
    auto zeta_spline = std::make_shared<Spline>(Spline{u, zeta, spline_moments(u, zeta)});
    const double lo = u.front();
    const double hi = u.back();
    return SurfaceProfile(
        "tabulated(" + std::to_string(knots.size()) + " knots)",
        [rho_spline, zeta_spline](double x) {
            const auto &xs = rho_spline->x;
            auto it = std::upper_bound(xs.begin(), xs.end(), x);
            std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
            i = std::min(i, xs.size() - 2);
            const auto r = rho_spline->eval(i, x);
            const auto z = zeta_spline->eval(i, x);
            return ProfilePoint{r[0], r[1], r[2], z[0], z[1], z[2]};
        },
        lo, hi);
}

std::vector<ProfileKnot> read_profile_knots(std::istream &in) {
    std::vector<ProfileKnot> knots;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::istringstream row(line);
        ProfileKnot k{};
        std::string extra;
        if (!(row >> k.u >> k.rho >> k.zeta) || (row >> extra)) {
            throw ContractViolation("profile knot file: line " + std::to_string(line_no) +
                                    " must contain exactly three numbers");
        }
        knots.push_back(k);
    }
    return knots;
}

SurfaceProfile load_tabulated_profile(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ContractViolation("cannot open profile file " + path);
    }
    return tabulated_profile(read_profile_knots(in));
}

} // namespace nhlab
