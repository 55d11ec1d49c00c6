#include <nhlab/integrate.hpp>

#include <algorithm>
#include <cmath>

namespace nhlab {

namespace {

// Dormand–Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Dense output (Hairer's contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

DenseSegment hermite_segment(double t0, double h, const Vec &y0, const Vec &y1, const Vec &f0, const Vec &f1) {
    DenseSegment seg;
    seg.t0 = t0;
    seg.h = h;
    const Vec delta = y1 - y0;
    seg.c[0] = y0;
    seg.c[1] = delta;
    seg.c[2] = h * f0 - delta;
    seg.c[3] = delta - h * f1 - seg.c[2];
    seg.c[4] = Vec::Zero(y0.size());
    return seg;
}

void check_options(const IntegratorOptions &o) {
    require(o.method == Method::FixedRK4 ? o.step > 0.0 : true, "fixed-step integration needs step > 0");
    require(o.rtol > 0.0 && o.atol > 0.0, "rtol and atol must be positive");
    require(o.projection != Projection::EveryKSteps || o.projection_interval >= 1,
            "projection interval must be at least 1");
    require(o.max_steps > 0, "max_steps must be positive");
}

bool apply_hook(const StepHook &hook, double t, Vec &y, long step) { return hook ? hook(t, y, step) : false; }

double initial_step(const OdeRhs &rhs, double t0, const Vec &y0, const Vec &f0, double t1,
                    const IntegratorOptions &o, long &evals) {
    // Hairer–Nørsett–Wanner starting step heuristic, order 5.
    const Vec sc = (o.atol + o.rtol * y0.array().abs()).matrix();
    const double d0 = std::sqrt((y0.array() / sc.array()).square().mean());
    const double d1n = std::sqrt((f0.array() / sc.array()).square().mean());
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, t1 - t0);
    const Vec f1 = rhs(t0 + h0, y0 + h0 * f0);
    ++evals;
    const double d2 = std::sqrt(((f1 - f0).array() / sc.array()).square().mean()) / h0;
    const double m = std::max(d1n, d2);
    const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 1.0 / 5.0);
    return std::min({100.0 * h0, h1, t1 - t0});
}

OdeSolution integrate_rk4(const OdeRhs &rhs, const Vec &y0, double t0, double t1, const IntegratorOptions &o,
                          const StepHook &hook) {
    OdeSolution sol;
    sol.times.push_back(t0);
    sol.values.push_back(y0);
    double t = t0;
    Vec y = y0;
    Vec k1 = rhs(t, y);
    ++sol.rhs_evaluations;
    long step = 0;
    while (t < t1) {
        if (++step > o.max_steps) {
            throw IntegrationError("max_steps exceeded at t = " + std::to_string(t));
        }
        // Land exactly on t1 without a sliver step.
        double h = o.step;
        if (t + h >= t1 || t1 - (t + h) < 1e-9 * o.step) {
            h = t1 - t;
        }
        const Vec k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
        const Vec k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
        const Vec k4 = rhs(t + h, y + h * k3);
        Vec y1 = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double tn = (h == t1 - t) ? t1 : t + h;
        Vec f1 = rhs(tn, y1);
        sol.rhs_evaluations += 4;
        sol.segments.push_back(hermite_segment(t, h, y, y1, k1, f1));
        if (apply_hook(hook, tn, y1, step)) {
            f1 = rhs(tn, y1);
            ++sol.rhs_evaluations;
        }
        t = tn;
        y = std::move(y1);
        k1 = std::move(f1);
        sol.times.push_back(t);
        sol.values.push_back(y);
    }
    return sol;
}

OdeSolution integrate_dp54(const OdeRhs &rhs, const Vec &y0, double t0, double t1, const IntegratorOptions &o,
                           const StepHook &hook) {
    OdeSolution sol;
    sol.times.push_back(t0);
    sol.values.push_back(y0);
    if (t1 == t0) {
        return sol;
    }
    double t = t0;
    Vec y = y0;
    Vec k1 = rhs(t, y);
    ++sol.rhs_evaluations;
    double h = o.step > 0.0 ? std::min(o.step, t1 - t0) : initial_step(rhs, t0, y0, k1, t1, o, sol.rhs_evaluations);
    const double span = t1 - t0;
    bool last_rejected = false;
    long step = 0;

    while (t < t1) {
        if (step >= o.max_steps) {
            throw IntegrationError("max_steps exceeded at t = " + std::to_string(t));
        }
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            throw IntegrationError("step size underflow at t = " + std::to_string(t));
        }
        bool final_step = false;
        if (t + h >= t1 || t1 - (t + h) < 1e-12 * span) {
            h = t1 - t;
            final_step = true;
        }

        const Vec k2 = rhs(t + c2 * h, y + h * (a21 * k1));
        const Vec k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const Vec k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vec k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vec k6 = rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Vec y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        const double tn = final_step ? t1 : t + h;
        Vec k7 = rhs(tn, y1);
        sol.rhs_evaluations += 6;

        const Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const Vec sc = (o.atol + o.rtol * y.array().abs().max(y1.array().abs())).matrix();
        const double err_norm = std::sqrt((err.array() / sc.array()).square().mean());
        if (!std::isfinite(err_norm)) {
            throw IntegrationError("non-finite state at t = " + std::to_string(t));
        }

        if (err_norm <= 1.0) {
            ++step;
            DenseSegment seg;
            seg.t0 = t;
            seg.h = h;
            const Vec delta = y1 - y;
            seg.c[0] = y;
            seg.c[1] = delta;
            seg.c[2] = h * k1 - delta;
            seg.c[3] = delta - h * k7 - seg.c[2];
            seg.c[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            sol.segments.push_back(std::move(seg));

            if (apply_hook(hook, tn, y1, step)) {
                k7 = rhs(tn, y1);
                ++sol.rhs_evaluations;
            }
            t = tn;
            y = std::move(y1);
            k1 = std::move(k7);
            sol.times.push_back(t);
            sol.values.push_back(y);

            double fac = err_norm == 0.0 ? 5.0 : 0.9 * std::pow(err_norm, -0.2);
            fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
            h *= fac;
            last_rejected = false;
        } else {
            ++sol.rejected_steps;
            h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
            last_rejected = true;
        }
    }
    return sol;
}

const DenseSegment &find_segment(const std::vector<DenseSegment> &segments, double t) {
    require(!segments.empty(), "no dense output available");
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](double value, const DenseSegment &s) { return value < s.t0; });
    if (it != segments.begin()) {
        --it;
    }
    const DenseSegment &seg = *it;
    const double end = segments.back().t0 + segments.back().h;
    const double slack = 1e-12 * std::max(1.0, std::abs(end));
    if (t < segments.front().t0 - slack || t > end + slack) {
        throw ContractViolation("time " + std::to_string(t) + " outside the dense-output range");
    }
    return seg;
}

VelocityState split_state(const Vec &y, int n, double t) {
    return {y.head(n), y.tail(n), t};
}

} // namespace

std::string to_string(Method m) { return m == Method::FixedRK4 ? "rk4" : "dp54"; }

std::string to_string(Projection p) {
    switch (p) {
    case Projection::None:
        return "none";
    case Projection::EveryStep:
        return "every_step";
    case Projection::EveryKSteps:
        return "every_k_steps";
    }
    return "unknown";
}

Method parse_method(const std::string &s) {
    if (s == "rk4") {
        return Method::FixedRK4;
    }
    if (s == "dp54") {
        return Method::DormandPrince54;
    }
    throw ContractViolation("unknown integration method '" + s + "' (expected rk4 or dp54)");
}

Projection parse_projection(const std::string &s) {
    if (s == "none") {
        return Projection::None;
    }
    if (s == "every_step") {
        return Projection::EveryStep;
    }
    if (s == "every_k_steps") {
        return Projection::EveryKSteps;
    }
    throw ContractViolation("unknown projection '" + s + "' (expected none, every_step or every_k_steps)");
}

Vec DenseSegment::eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return c[0] + th * (c[1] + th1 * (c[2] + th * (c[3] + th1 * c[4])));
}

Vec OdeSolution::eval(double t) const {
    if (segments.empty()) {
        require(!times.empty() && t == times.front(), "no dense output available");
        return values.front();
    }
    return find_segment(segments, t).eval(t);
}

OdeSolution integrate_ode(const OdeRhs &rhs, const Vec &y0, double t0, double t1,
                          const IntegratorOptions &options, const StepHook &hook) {
    check_options(options);
    require(std::isfinite(t0) && std::isfinite(t1) && t1 >= t0, "integration interval must satisfy t1 >= t0");
    require(y0.allFinite(), "initial value has non-finite entries");
    if (options.method == Method::FixedRK4) {
        return integrate_rk4(rhs, y0, t0, t1, options, hook);
    }
    return integrate_dp54(rhs, y0, t0, t1, options, hook);
}

VelocityState Trajectory::at(double t) const {
    if (!has_dense_output()) {
        auto it = std::lower_bound(times.begin(), times.end(), t);
        if (it != times.end() && *it == t) {
            return states[static_cast<std::size_t>(it - times.begin())];
        }
        throw ContractViolation("trajectory has no dense output and t is not a sample time");
    }
    return split_state(find_segment(segments, t).eval(t), n, t);
}

Trajectory integrate(const NonholonomicSystem &sys, const VelocityState &init, double t_end,
                     const IntegratorOptions &options) {
    const int n = sys.dim();
    check_state(init, n);
    check_options(options);
    require(t_end >= init.t, "t_end must not precede the initial time");

    VelocityState start = init;
    if (options.projection != Projection::None) {
        start.qdot = project_velocity(sys, start.q, start.qdot, start.t);
    } else {
        const double r = constraint_residual(sys.constraint, start).norm();
        if (!(r <= DynamicsOptions{}.manifold_tolerance)) {
            throw OffManifoldError("initial state is off the constraint fiber (residual " + std::to_string(r) +
                                   ") and projection is disabled");
        }
    }

    DynamicsOptions dyn;
    dyn.check_manifold = false;
    const OdeRhs rhs = [&sys, n, &dyn](double t, const Vec &y) {
        const VelocityState s{y.head(n), y.tail(n), t};
        Vec dy(2 * n);
        dy << s.qdot, eval_dynamics(sys, s, dyn).qddot;
        return dy;
    };

    const StepHook hook = [&sys, n, &options](double t, Vec &y, long step) {
        bool changed = false;
        const bool project = options.projection == Projection::EveryStep ||
                             (options.projection == Projection::EveryKSteps && step % options.projection_interval == 0);
        if (project) {
            y.tail(n) = project_velocity(sys, y.head(n), y.tail(n), t);
            changed = true;
        }
        const Vec residual = sys.constraint.S(y.head(n), t) * y.tail(n) + sys.constraint.s(y.head(n), t);
        if (!(residual.norm() <= options.blowup_residual)) {
            throw IntegrationError("constraint residual " + std::to_string(residual.norm()) + " exceeds " +
                                   std::to_string(options.blowup_residual) + " at t = " + std::to_string(t));
        }
        return changed;
    };

    Vec y0(2 * n);
    y0 << start.q, start.qdot;
    OdeSolution sol = integrate_ode(rhs, y0, start.t, t_end, options, hook);

    Trajectory traj;
    traj.n = n;
    traj.k = sys.constraint.k;
    traj.times = std::move(sol.times);
    traj.segments = std::move(sol.segments);
    traj.rhs_evaluations = sol.rhs_evaluations;
    traj.states.reserve(traj.times.size());
    traj.residuals.reserve(traj.times.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        VelocityState s = split_state(sol.values[i], n, traj.times[i]);
        traj.residuals.push_back(constraint_residual(sys.constraint, s).norm());
        if (options.record_multipliers) {
            traj.multipliers.push_back(eval_dynamics(sys, s, dyn).lambda);
        }
        traj.states.push_back(std::move(s));
    }
    return traj;
}

Trajectory resample(const NonholonomicSystem &sys, const Trajectory &traj, const std::vector<double> &grid) {
    require(traj.n == sys.dim(), "trajectory dimension differs from system dimension");
    require(std::is_sorted(grid.begin(), grid.end()), "resample grid must be increasing");
    DynamicsOptions dyn;
    dyn.check_manifold = false;
    Trajectory out;
    out.n = traj.n;
    out.k = traj.k;
    for (double t : grid) {
        VelocityState s = traj.at(t);
        out.times.push_back(t);
        out.residuals.push_back(constraint_residual(sys.constraint, s).norm());
        out.multipliers.push_back(eval_dynamics(sys, s, dyn).lambda);
        out.states.push_back(std::move(s));
    }
    return out;
}

std::vector<double> uniform_grid(double t0, double t1, int intervals) {
    require(intervals >= 1, "uniform grid needs at least one interval");
    require(t1 > t0, "uniform grid needs t1 > t0");
    std::vector<double> grid(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i) {
        grid[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * static_cast<double>(i) / intervals;
    }
    grid.back() = t1;
    return grid;
}

} // namespace nhlab
