#include <nhlab/analysis.hpp>

#include <boost/math/tools/toms748_solve.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace nhlab {

namespace {

constexpr double kTwoPi = 6.283185307179586;

void put_number(std::ostream &out, double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
}

} // namespace

const IntegralDrift &DriftReport::operator[](const std::string &name) const {
    auto it = std::find_if(integrals.begin(), integrals.end(), [&](const auto &d) { return d.name == name; });
    if (it == integrals.end()) {
        throw ContractViolation("drift report has no integral named " + name);
    }
    return *it;
}

DriftReport drift_report(const Trajectory &traj, const std::vector<NamedIntegral> &integrals) {
    require(traj.size() >= 1, "drift report needs a non-empty trajectory");
    DriftReport report;
    report.samples = traj.size();
    report.t_begin = traj.times.front();
    report.t_end = traj.times.back();

    const std::size_t m = traj.size();
    double t_mean = 0.0;
    for (double t : traj.times) {
        t_mean += t;
    }
    t_mean /= static_cast<double>(m);
    double t_var = 0.0;
    for (double t : traj.times) {
        t_var += (t - t_mean) * (t - t_mean);
    }

    for (const auto &integral : integrals) {
        IntegralDrift d;
        d.name = integral.name;
        std::vector<double> values(m);
        for (std::size_t i = 0; i < m; ++i) {
            values[i] = integral.value(traj.states[i]);
        }
        d.initial = values.front();
        double d_mean = 0.0;
        for (double v : values) {
            d.max_abs_drift = std::max(d.max_abs_drift, std::abs(v - d.initial));
            d_mean += v - d.initial;
        }
        d_mean /= static_cast<double>(m);
        d.relative_drift = d.max_abs_drift / std::max(std::abs(d.initial), 1.0);
        if (t_var > 0.0) {
            double cov = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                cov += (traj.times[i] - t_mean) * (values[i] - d.initial - d_mean);
            }
            d.drift_rate = cov / t_var;
        }
        report.integrals.push_back(std::move(d));
    }
    return report;
}

std::vector<NamedIntegral> select_integrals(const NonholonomicSystem &sys, const std::vector<std::string> &names) {
    if (names.empty()) {
        return sys.integrals;
    }
    std::vector<NamedIntegral> out;
    for (const auto &name : names) {
        const NamedIntegral *found = sys.find_integral(name);
        if (found == nullptr) {
            throw ContractViolation("system '" + sys.name + "' has no integral named '" + name + "'");
        }
        out.push_back(*found);
    }
    return out;
}

void write_drift_csv(const Trajectory &traj, const std::vector<NamedIntegral> &integrals, std::ostream &out) {
    out << "t";
    for (const auto &i : integrals) {
        out << ',' << i.name;
    }
    out << '\n';
    std::vector<double> initial;
    for (const auto &i : integrals) {
        initial.push_back(traj.size() > 0 ? i.value(traj.states.front()) : 0.0);
    }
    for (std::size_t r = 0; r < traj.size(); ++r) {
        put_number(out, traj.times[r]);
        for (std::size_t c = 0; c < integrals.size(); ++c) {
            out << ',';
            put_number(out, integrals[c].value(traj.states[r]) - initial[c]);
        }
        out << '\n';
    }
}

EnergyRateCheck energy_rate_check(const NonholonomicSystem &sys, const Trajectory &traj, int samples,
                                  const ScalarField &closed_form, double fd_step) {
    require(traj.has_dense_output(), "energy rate check needs dense output");
    require(samples >= 1 && fd_step > 0.0, "energy rate check needs samples >= 1 and fd_step > 0");
    const double h = fd_step;
    const double lo = traj.times.front() + 2.0 * h;
    const double hi = traj.times.back() - 2.0 * h;
    require(hi > lo, "trajectory too short for the finite-difference stencil");

    const auto &L = sys.lagrangian;
    auto E = [&](double t) { return energy(L, traj.at(t)); };
    DynamicsOptions dyn;
    dyn.check_manifold = false;

    EnergyRateCheck out;
    out.samples = samples;
    out.fd_step = h;
    if (closed_form) {
        out.max_discrepancy_closed_form = 0.0;
    }
    for (int i = 0; i < samples; ++i) {
        const double t = samples == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (samples - 1);
        const double rate = (E(t - 2.0 * h) - 8.0 * E(t - h) + 8.0 * E(t + h) - E(t + 2.0 * h)) / (12.0 * h);
        const VelocityState s = traj.at(t);
        const Vec reaction = eval_dynamics(sys, s, dyn).reaction;
        const double power = reaction.dot(representative_xi(sys.constraint, s.q, s.t));
        out.max_rate = std::max(out.max_rate, std::abs(rate));
        out.max_discrepancy_reaction = std::max(out.max_discrepancy_reaction, std::abs(rate - power));
        if (closed_form) {
            *out.max_discrepancy_closed_form =
                std::max(*out.max_discrepancy_closed_form, std::abs(rate - closed_form(s)));
        }
    }
    return out;
}

MembershipResult reaction_annihilator_membership(const NonholonomicSystem &sys, const Vec &q, const Vec &Y,
                                                 double t, int n_samples, std::uint64_t seed, double tol) {
    const int n = sys.dim();
    require(q.size() == n && Y.size() == n, "membership test: dimension mismatch");
    require(n_samples >= 1, "membership test needs at least one sample");
    const Mat S = sys.constraint.S(q, t);
    require_full_rank(S);
    const Vec xi0 = representative_xi(sys.constraint, q, t);
    const Mat K = kernel_basis(S);
    const Mat P = K * K.transpose();

    MembershipResult out;
    out.samples = n_samples;
    out.seed = seed;
    out.tolerance = tol;
    SampleRng rng(seed);
    for (int i = 0; i < n_samples; ++i) {
        Vec v(n);
        for (int j = 0; j < n; ++j) {
            v[j] = rng.uniform(-1.0, 1.0);
        }
        const VelocityState state{q, xi0 + P * v, t};
        const Vec reaction = eval_dynamics(sys, state).reaction;
        out.max_pairing = std::max(out.max_pairing, std::abs(reaction.dot(Y)));
        out.scale = std::max(out.scale, reaction.norm() * Y.norm());
    }
    out.member = out.max_pairing <= tol * out.scale;
    return out;
}

PeriodEstimate detect_period(const Curve &z, double t0, const SectionSpec &spec) {
    require(spec.horizon > 0.0 && spec.scan_step > 0.0 && spec.time_tolerance > 0.0,
            "section spec needs positive horizon, scan step and time tolerance");
    PeriodEstimate est;
    est.section = spec;
    const Vec z0 = z(t0);
    const double hd = 1e-5 * std::min(1.0, spec.scan_step * 100.0);
    const Vec zdot = (-3.0 * z0 + 4.0 * z(t0 + hd) - z(t0 + 2.0 * hd)) / (2.0 * hd);
    est.section_point = z0;
    const double speed = zdot.norm();
    if (speed < spec.equilibrium_speed) {
        est.equilibrium = true;
        est.section_normal = Vec::Zero(z0.size());
        est.note = "equilibrium: the reduced state does not move";
        return est;
    }
    const Vec normal = zdot / speed;
    est.section_normal = normal;
    auto g = [&](double t) { return normal.dot(z(t) - z0); };

    const double t_end = t0 + spec.horizon;
    double best_residual = std::numeric_limits<double>::infinity();
    double t_prev = t0 + spec.scan_step;
    double g_prev = g(t_prev);
    while (t_prev < t_end) {
        const double t = std::min(t_prev + spec.scan_step, t_end);
        const double gt = g(t);
        if (g_prev < 0.0 && gt >= 0.0) {
            std::uintmax_t iters = 100;
            const double tol = spec.time_tolerance;
            const auto root = boost::math::tools::toms748_solve(
                g, t_prev, t, g_prev, gt, [tol](double a, double b) { return std::abs(b - a) <= tol; }, iters);
            const double T = 0.5 * (root.first + root.second);
            const double residual = (z(T) - z0).norm();
            ++est.crossings_examined;
            est.refinement_iterations += static_cast<int>(iters);
            if (residual < best_residual) {
                best_residual = residual;
                est.period = T - t0;
                est.return_residual = residual;
            }
            if (residual < spec.residual_threshold) {
                est.detected = true;
                est.period = T - t0;
                est.return_residual = residual;
                est.note = "closed orbit";
                return est;
            }
        }
        t_prev = t;
        g_prev = gt;
    }
    est.note = est.crossings_examined == 0 ? "not detected: no section crossing within horizon"
                                           : "not detected: no crossing returned within the residual threshold";
    return est;
}

PeriodEstimate detect_period(const Trajectory &traj, const StateReducer &reduce, const SectionSpec &spec) {
    require(traj.has_dense_output(), "period detection needs dense output");
    const double t0 = traj.times.front();
    SectionSpec s = spec;
    s.horizon = std::min(spec.horizon, traj.times.back() - t0);
    return detect_period([&](double t) { return reduce(traj.at(t)); }, t0, s);
}

PeriodEstimate detect_period(const NonholonomicSystem &sys, const VelocityState &init, const StateReducer &reduce,
                             const SectionSpec &spec, const IntegratorOptions &options) {
    const Trajectory traj = integrate(sys, init, init.t + spec.horizon, options);
    return detect_period(traj, reduce, spec);
}

PeriodEstimate detect_period(const Preset &preset, const VelocityState &init, const SectionSpec &spec,
                             const IntegratorOptions &options) {
    const NonholonomicSystem sys = build_system(preset);
    return detect_period(sys, init, [&preset](const VelocityState &s) { return reduced_state(preset, s); }, spec,
                         options);
}

bool is_near_rational(double x, int max_denominator, double tolerance) {
    require(max_denominator >= 1 && tolerance > 0.0, "invalid rational-approximation settings");
    if (!std::isfinite(x)) {
        return false;
    }
    // Convergents p_k/q_k of the continued fraction of x.
    double p_prev = 1.0, q_prev = 0.0;
    double p = std::floor(x), q = 1.0;
    double rest = x - std::floor(x);
    while (q <= max_denominator) {
        if (std::abs(x - p / q) <= tolerance) {
            return true;
        }
        if (rest < 1e-15) {
            break;
        }
        const double inv = 1.0 / rest;
        const double a = std::floor(inv);
        rest = inv - a;
        const double p_next = a * p + p_prev;
        const double q_next = a * q + q_prev;
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
    }
    return false;
}

ReconstructionFrequencies reconstruction_frequencies(const NonholonomicSystem &sys, const VelocityState &init,
                                                     const PeriodEstimate &period, const IntegratorOptions &options,
                                                     const ResonanceSpec &resonance) {
    require(sys.chart.spin_offset.has_value(), "reconstruction needs a spin block");
    ReconstructionFrequencies out;
    out.resonance = resonance;
    const auto phase_index = sys.chart.symmetry_phase;
    if (period.equilibrium) {
        if (phase_index) {
            out.phase_advance = 0.0;
        }
        return out;
    }
    if (!period.detected || !(period.period > 0.0)) {
        throw ContractViolation("reconstruction needs a periodic reduced orbit");
    }
    out.period = period.period;
    out.reduced_frequency = kTwoPi / period.period;

    const Trajectory traj = integrate(sys, init, init.t + period.period, options);
    const OmegaPath path = omega_path_from(traj, *sys.chart.spin_offset);
    const AttitudePath attitude = reconstruct_attitude(path, Eigen::Quaterniond::Identity());
    Mat3 g = attitude.rotation(attitude.attitudes.size() - 1);
    if (phase_index) {
        const double dtheta = traj.states.back().q[*phase_index] - traj.states.front().q[*phase_index];
        out.phase_advance = dtheta;
        g = Eigen::AngleAxisd(-dtheta, Vec3::UnitZ()).toRotationMatrix() * g;
        out.phase_resonant = is_near_rational(dtheta / kTwoPi, resonance.max_denominator, resonance.tolerance);
    }
    out.attitude_angle = rotation_angle(g);
    out.attitude_resonant =
        is_near_rational(out.attitude_angle / kTwoPi, resonance.max_denominator, resonance.tolerance);
    out.torus_dimension = 1 + (phase_index && !out.phase_resonant ? 1 : 0) + (out.attitude_resonant ? 0 : 1);
    return out;
}

IntegralRank integral_rank(const NonholonomicSystem &sys, const std::vector<NamedIntegral> &integrals,
                           const VelocityState &state, double fd_step) {
    const int n = sys.dim();
    check_state(state, n);
    require(!integrals.empty(), "integral rank needs at least one integral");
    require(fd_step > 0.0, "fd_step must be positive");
    const auto &K = sys.constraint;
    const double t = state.t;
    const Mat S0 = K.S(state.q, t);
    require_full_rank(S0);
    const Mat basis = kernel_basis(S0);
    const int r = static_cast<int>(basis.cols());
    const int m = static_cast<int>(integrals.size());

    auto on_fiber = [&](const Vec &q, const Vec &v) {
        const Mat S = K.S(q, t);
        const Vec res = S * v + K.s(q, t);
        return (v - S.transpose() * (S * S.transpose()).ldlt().solve(res)).eval();
    };
    const Vec qdot0 = on_fiber(state.q, state.qdot);
    auto values = [&](const Vec &x) {
        const Vec q = state.q + x.head(n);
        const Vec v = on_fiber(q, qdot0 + basis * x.tail(r));
        const VelocityState s{q, v, t};
        Vec out(m);
        for (int i = 0; i < m; ++i) {
            out[i] = integrals[static_cast<std::size_t>(i)].value(s);
        }
        return out;
    };
    auto jacobian = [&](double h) {
        Mat J(m, n + r);
        Vec x = Vec::Zero(n + r);
        for (int j = 0; j < n + r; ++j) {
            x[j] = h;
            const Vec fp = values(x);
            x[j] = -h;
            const Vec fm = values(x);
            x[j] = 0.0;
            J.col(j) = (fp - fm) / (2.0 * h);
        }
        return J;
    };

    double h = fd_step;
    for (int attempt = 0; attempt < 3; ++attempt, h *= 10.0) {
        const Mat J1 = jacobian(h);
        const Mat J2 = jacobian(2.0 * h);
        if (!J1.allFinite() || !J2.allFinite()) {
            continue;
        }
        const double scale = std::max(J1.norm(), 1e-300);
        if ((J1 - J2).norm() > 1e-4 * scale) {
            continue;
        }
        Eigen::JacobiSVD<Mat> svd(J1);
        const Vec sv = svd.singularValues();
        IntegralRank out;
        out.fd_step = h;
        out.singular_values.assign(sv.data(), sv.data() + sv.size());
        out.threshold = sv.size() > 0 ? 1e-8 * sv[0] : 0.0;
        for (Eigen::Index i = 0; i < sv.size(); ++i) {
            if (sv[i] > out.threshold) {
                ++out.rank;
            }
        }
        return out;
    }
    throw ContractViolation("integral rank: finite differences unstable even after widening the step");
}

} // namespace nhlab
