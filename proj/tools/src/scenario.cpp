#include "scenario.hpp"

#include <fstream>
#include <sstream>

namespace nhlab::cli {

using nlohmann::json;

namespace {

template <class T>
void take(const json &obj, const char *key, T &dst) {
    if (obj.contains(key)) {
        dst = obj[key].get<T>();
    }
}

Vec3 vec3(const json &arr) { return Vec3(arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()); }

std::vector<NamedIntegral> integrals_or_throw(const NonholonomicSystem &sys, const std::vector<std::string> &names) {
    try {
        return select_integrals(sys, names);
    } catch (const ContractViolation &e) {
        throw ValidationError(e.what());
    }
}

SampleSpec check_sample_spec(const CheckSpec &check, const Preset &preset, const NonholonomicSystem &sys,
                             std::uint64_t seed) {
    SampleSpec spec = default_sample_spec(sys.dim(), check.half_width);
    spec.points = check.points;
    spec.seed = seed;
    spec.fiber_only = check.fiber_only;
    if (const auto *sp = std::get_if<SurfaceParams>(&preset)) {
        // Keep the meridian coordinate inside the profile's domain.
        const double lo = std::max(sp->profile.u_min(), 0.1);
        spec.box_lo[0] = lo;
        spec.box_hi[0] = std::min(lo + 2.0 * check.half_width, sp->profile.u_max());
    }
    return spec;
}

} // namespace

Scenario parse_scenario(const json &doc, const std::filesystem::path &base_dir) {
    const auto problems = validate_json(doc, scenario_schema());
    if (!problems.empty()) {
        std::string msg = "scenario does not match the schema:";
        for (const auto &p : problems) {
            msg += "\n  " + p;
        }
        throw ValidationError(msg);
    }

    Scenario sc;
    sc.base_dir = base_dir;
    sc.name = doc["name"].get<std::string>();
    take(doc, "description", sc.description);
    take(doc, "seed", sc.seed);

    const auto &sys = doc["system"];
    sc.system.preset = sys["preset"].get<std::string>();
    if (sc.system.preset == "turntable") {
        const TurntableParams d;
        sc.system.a = d.a;
        sc.system.c = d.c;
        sc.system.Omega = d.Omega;
        if (sys.contains("profile") || sys.contains("g")) {
            throw ValidationError("/system: 'profile' and 'g' only apply to the rotating_surface preset");
        }
    } else {
        const SurfaceParams d;
        sc.system.a = d.a;
        sc.system.c = d.c;
        sc.system.Omega = d.Omega;
        sc.system.g = d.g;
    }
    take(sys, "a", sc.system.a);
    take(sys, "c", sc.system.c);
    take(sys, "Omega", sc.system.Omega);
    take(sys, "g", sc.system.g);
    if (sys.contains("profile")) {
        const auto &pr = sys["profile"];
        sc.system.profile.kind = pr["kind"].get<std::string>();
        take(pr, "k", sc.system.profile.k);
        take(pr, "R", sc.system.profile.R);
        take(pr, "height", sc.system.profile.height);
        take(pr, "path", sc.system.profile.path);
        if (sc.system.profile.kind == "sphere_bowl" && !pr.contains("R")) {
            throw ValidationError("/system/profile: sphere_bowl needs 'R'");
        }
        if (sc.system.profile.kind == "tabulated" && sc.system.profile.path.empty()) {
            throw ValidationError("/system/profile: tabulated needs 'path'");
        }
    }

    if (doc.contains("initial_state")) {
        const auto &is = doc["initial_state"];
        static const char *planar[] = {"x", "y", "omega"};
        static const char *surface[] = {"u", "phi", "udot", "phidot", "spin_normal"};
        const bool table = sc.system.preset == "turntable";
        for (const char *key : table ? std::vector<const char *>(std::begin(surface), std::end(surface))
                                     : std::vector<const char *>(std::begin(planar), std::end(planar))) {
            if (is.contains(key)) {
                throw ValidationError(std::string("/initial_state: '") + key + "' does not apply to the " +
                                      sc.system.preset + " preset");
            }
        }
        auto &in = sc.initial;
        take(is, "t0", in.t0);
        take(is, "x", in.x);
        take(is, "y", in.y);
        take(is, "u", in.u);
        take(is, "phi", in.phi);
        take(is, "udot", in.udot);
        take(is, "phidot", in.phidot);
        take(is, "spin_normal", in.spin_normal);
        if (is.contains("omega")) {
            in.omega = vec3(is["omega"]);
        }
        if (is.contains("psi")) {
            in.psi = vec3(is["psi"]);
        }
    }

    if (doc.contains("integrator")) {
        const auto &ig = doc["integrator"];
        auto &o = sc.integrator;
        if (ig.contains("method")) {
            o.method = parse_method(ig["method"].get<std::string>());
        }
        if (ig.contains("projection")) {
            o.projection = parse_projection(ig["projection"].get<std::string>());
        }
        take(ig, "t_end", sc.t_end);
        take(ig, "rtol", o.rtol);
        take(ig, "atol", o.atol);
        take(ig, "step", o.step);
        take(ig, "projection_interval", o.projection_interval);
        take(ig, "max_steps", o.max_steps);
    }
    if (sc.t_end <= sc.initial.t0) {
        throw ValidationError("/integrator/t_end: must exceed the initial time");
    }

    if (doc.contains("analyses")) {
        const auto &an = doc["analyses"];
        auto &a = sc.analyses;
        if (an.contains("drift")) {
            a.drift = an["drift"]["integrals"].get<std::vector<std::string>>();
        }
        if (an.contains("energy_rate")) {
            a.energy_rate_samples = an["energy_rate"].value("samples", 400);
        }
        if (an.contains("period")) {
            SectionSpec s;
            const auto &p = an["period"];
            take(p, "horizon", s.horizon);
            take(p, "scan_step", s.scan_step);
            take(p, "time_tolerance", s.time_tolerance);
            take(p, "residual_threshold", s.residual_threshold);
            a.period = s;
        }
        if (an.contains("reconstruction")) {
            ResonanceSpec r;
            take(an["reconstruction"], "max_denominator", r.max_denominator);
            take(an["reconstruction"], "tolerance", r.tolerance);
            a.reconstruction = r;
            if (!a.period) {
                a.period = SectionSpec{};
            }
        }
        if (an.contains("integral_rank")) {
            a.integral_rank = an["integral_rank"]["integrals"].get<std::vector<std::string>>();
        }
    }

    if (doc.contains("check")) {
        const auto &ck = doc["check"];
        CheckSpec c;
        c.kind = ck["kind"].get<std::string>();
        take(ck, "frame", c.frame);
        if (ck.contains("frame_rate")) {
            c.frame_rate = ck["frame_rate"].get<double>();
        }
        if (ck.contains("eta")) {
            c.eta = ck["eta"].get<double>();
        }
        take(ck, "angles", c.angles);
        take(ck, "points", c.points);
        take(ck, "half_width", c.half_width);
        take(ck, "fiber_only", c.fiber_only);
        sc.check = c;
    }

    if (doc.contains("sweep")) {
        const auto &sw = doc["sweep"];
        for (const auto &[axis, values] : sw["grid"].items()) {
            sc.sweep.push_back({axis, values.get<std::vector<double>>()});
        }
        if (sw.contains("threads")) {
            sc.sweep_threads = sw["threads"].get<int>();
        }
    }

    if (doc.contains("output")) {
        take(doc["output"], "trajectory_csv", sc.trajectory_csv);
        take(doc["output"], "drift_csv", sc.drift_csv);
    }
    return sc;
}

Scenario load_scenario(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open scenario '" + path.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw ValidationError("scenario '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_scenario(doc, path.parent_path());
}

Preset build_preset(const Scenario &sc) {
    const auto &s = sc.system;
    try {
        if (s.preset == "turntable") {
            TurntableParams p;
            p.a = s.a;
            p.c = s.c;
            p.Omega = s.Omega;
            p.validate();
            return p;
        }
        SurfaceParams p;
        const auto &pr = s.profile;
        if (pr.kind == "plane") {
            p.profile = plane_profile(pr.height);
        } else if (pr.kind == "paraboloid") {
            p.profile = paraboloid_profile(pr.k);
        } else if (pr.kind == "sphere_bowl") {
            p.profile = sphere_bowl_profile(pr.R);
        } else {
            std::filesystem::path path = pr.path;
            if (path.is_relative()) {
                path = sc.base_dir / path;
            }
            p.profile = load_tabulated_profile(path.string());
        }
        p.a = s.a;
        p.c = s.c;
        p.Omega = s.Omega;
        p.g = s.g;
        p.validate();
        return p;
    } catch (const ContractViolation &e) {
        throw ValidationError(std::string("/system: ") + e.what());
    }
}

VelocityState initial_state(const Scenario &sc, const Preset &preset) {
    const auto &in = sc.initial;
    if (const auto *tp = std::get_if<TurntableParams>(&preset)) {
        auto s = turntable_state(*tp, in.x, in.y, in.omega, in.t0);
        s.q.segment<3>(kSpinOffset) = in.psi;
        return s;
    }
    const auto &sp = std::get<SurfaceParams>(preset);
    auto s = surface_state(sp, in.u, in.phi, in.udot, in.phidot, in.spin_normal, in.t0);
    s.q.segment<3>(kSpinOffset) = in.psi;
    return s;
}

void apply_axis(Scenario &sc, const std::string &axis, double value) {
    auto &s = sc.system;
    auto &in = sc.initial;
    if (axis == "Omega") {
        s.Omega = value;
    } else if (axis == "a") {
        s.a = value;
    } else if (axis == "c") {
        s.c = value;
    } else if (axis == "g") {
        s.g = value;
    } else if (axis == "k") {
        s.profile.k = value;
    } else if (axis == "x") {
        in.x = value;
    } else if (axis == "y") {
        in.y = value;
    } else if (axis == "u") {
        in.u = value;
    } else if (axis == "udot") {
        in.udot = value;
    } else if (axis == "phidot") {
        in.phidot = value;
    } else if (axis == "spin_normal") {
        in.spin_normal = value;
    } else {
        throw ValidationError("unknown sweep axis '" + axis + "'");
    }
}

json settings_block(const Scenario &sc) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["tool"] = version_string();
    j["scenario"] = sc.name;
    j["seed"] = sc.seed;
    const auto &s = sc.system;
    j["system"] = {{"preset", s.preset}, {"a", s.a}, {"c", s.c}, {"Omega", s.Omega}};
    if (s.preset == "rotating_surface") {
        j["system"]["g"] = s.g;
        j["system"]["profile"] = {{"kind", s.profile.kind}};
        if (s.profile.kind == "paraboloid") {
            j["system"]["profile"]["k"] = s.profile.k;
        } else if (s.profile.kind == "sphere_bowl") {
            j["system"]["profile"]["R"] = s.profile.R;
        } else if (s.profile.kind == "plane") {
            j["system"]["profile"]["height"] = s.profile.height;
        } else {
            j["system"]["profile"]["path"] = s.profile.path;
        }
    }
    const auto &in = sc.initial;
    json init = {{"t0", in.t0}, {"psi", {in.psi[0], in.psi[1], in.psi[2]}}};
    if (s.preset == "turntable") {
        init["x"] = in.x;
        init["y"] = in.y;
        init["omega"] = {in.omega[0], in.omega[1], in.omega[2]};
    } else {
        init["u"] = in.u;
        init["phi"] = in.phi;
        init["udot"] = in.udot;
        init["phidot"] = in.phidot;
        init["spin_normal"] = in.spin_normal;
    }
    j["initial_state"] = init;
    j["integrator"] = sc.integrator;
    j["integrator"]["t_end"] = sc.t_end;
    json an = json::object();
    if (sc.analyses.period) {
        an["section"] = *sc.analyses.period;
    }
    if (sc.analyses.reconstruction) {
        an["resonance"] = {{"max_denominator", sc.analyses.reconstruction->max_denominator},
                           {"tolerance", sc.analyses.reconstruction->tolerance},
                           {"method", "continued-fraction resonance heuristic"}};
    }
    if (sc.analyses.energy_rate_samples) {
        an["energy_rate_samples"] = *sc.analyses.energy_rate_samples;
    }
    j["analyses"] = an;
    return j;
}

Analysis run_analyses(const Scenario &sc) {
    const Preset preset = build_preset(sc);
    const NonholonomicSystem sys = build_system(preset);
    const VelocityState init = initial_state(sc, preset);
    const auto &an = sc.analyses;

    Analysis out;
    if (an.drift) {
        out.drift_integrals = integrals_or_throw(sys, *an.drift);
    }
    std::vector<NamedIntegral> rank_integrals;
    if (an.integral_rank) {
        rank_integrals = integrals_or_throw(sys, *an.integral_rank);
    }

    out.trajectory = integrate(sys, init, sc.t_end, sc.integrator);
    const auto &traj = out.trajectory;
    double max_residual = 0.0;
    for (double r : traj.residuals) {
        max_residual = std::max(max_residual, r);
    }
    json &res = out.results;
    res["trajectory"] = {{"samples", traj.size()},
                         {"t_begin", traj.times.front()},
                         {"t_end", traj.times.back()},
                         {"rhs_evaluations", traj.rhs_evaluations},
                         {"max_constraint_residual", max_residual}};

    if (an.drift) {
        res["drift"] = drift_report(traj, out.drift_integrals);
    }
    if (an.energy_rate_samples) {
        ScalarField closed;
        if (const auto *tp = std::get_if<TurntableParams>(&preset)) {
            closed = [p = *tp](const VelocityState &s) { return turntable_energy_rate(p, s); };
        }
        res["energy_rate"] = energy_rate_check(sys, traj, *an.energy_rate_samples, closed);
    }
    if (an.period) {
        const auto est = detect_period(preset, init, *an.period, sc.integrator);
        res["period"] = est;
        if (an.reconstruction) {
            if (est.detected || est.equilibrium) {
                res["reconstruction"] = reconstruction_frequencies(sys, init, est, sc.integrator, *an.reconstruction);
            } else {
                res["reconstruction"] = {{"skipped", "no closed reduced orbit"}};
            }
        }
    }
    if (an.integral_rank) {
        res["integral_rank"] = integral_rank(sys, rank_integrals, init);
    }
    return out;
}

HypothesisReport run_check(const Scenario &sc) {
    if (!sc.check) {
        throw ValidationError("scenario has no 'check' block");
    }
    const auto &ck = *sc.check;
    const Preset preset = build_preset(sc);
    const NonholonomicSystem sys = build_system(preset);
    const SampleSpec spec = check_sample_spec(ck, preset, sys, sc.seed);
    if (ck.kind == "theorem1") {
        const TimeDependentMap C = ck.frame == "identity"
                                       ? identity_map(sys.dim())
                                       : rotating_frame_map(preset, ck.frame_rate.value_or(preset_omega(preset)));
        return check_theorem1(sys, C, spec);
    }
    const AxialRotation action = preset_axial_rotation(preset);
    const auto elements = sample_axial_elements(action, ck.angles);
    return check_symmetry_hypotheses(sys, elements, axial_generator(action, ck.eta.value_or(preset_omega(preset))),
                                     spec);
}

std::uint64_t row_seed(std::uint64_t seed, std::uint64_t row) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (row + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace nhlab::cli
