#include <nhlab/analysis.hpp>

#include <nlohmann/json.hpp>

namespace nhlab {

namespace {

std::vector<double> to_std(const Vec &v) { return {v.data(), v.data() + v.size()}; }

} // namespace

void to_json(nlohmann::json &j, const HypothesisResult &r) {
    j = {{"name", r.name},
         {"passed", r.passed},
         {"worst_residual", r.worst_residual},
         {"worst_sample", {{"q", to_std(r.worst_q)}, {"qdot", to_std(r.worst_qdot)}, {"t", r.worst_t}}}};
}

void to_json(nlohmann::json &j, const HypothesisReport &r) {
    j = {{"check", r.check}, {"all_passed", r.all_passed()}, {"hypotheses", r.results}};
}

void to_json(nlohmann::json &j, const IntegralDrift &d) {
    j = {{"name", d.name},
         {"initial", d.initial},
         {"max_abs_drift", d.max_abs_drift},
         {"relative_drift", d.relative_drift},
         {"drift_rate", d.drift_rate}};
}

void to_json(nlohmann::json &j, const DriftReport &r) {
    j = {{"samples", r.samples}, {"t_begin", r.t_begin}, {"t_end", r.t_end}, {"integrals", r.integrals}};
}

void to_json(nlohmann::json &j, const EnergyRateCheck &r) {
    j = {{"samples", r.samples},
         {"fd_step", r.fd_step},
         {"max_rate", r.max_rate},
         {"max_discrepancy_reaction", r.max_discrepancy_reaction}};
    if (r.max_discrepancy_closed_form) {
        j["max_discrepancy_closed_form"] = *r.max_discrepancy_closed_form;
    }
}

void to_json(nlohmann::json &j, const MembershipResult &r) {
    j = {{"member", r.member},       {"max_pairing", r.max_pairing}, {"scale", r.scale},
         {"tolerance", r.tolerance}, {"samples", r.samples},         {"seed", r.seed}};
}

void to_json(nlohmann::json &j, const SectionSpec &s) {
    j = {{"horizon", s.horizon},
         {"scan_step", s.scan_step},
         {"time_tolerance", s.time_tolerance},
         {"residual_threshold", s.residual_threshold},
         {"equilibrium_speed", s.equilibrium_speed}};
}

void to_json(nlohmann::json &j, const PeriodEstimate &p) {
    j = {{"detected", p.detected},
         {"equilibrium", p.equilibrium},
         {"period", p.period},
         {"return_residual", p.return_residual},
         {"crossings_examined", p.crossings_examined},
         {"refinement_iterations", p.refinement_iterations},
         {"section_point", to_std(p.section_point)},
         {"section_normal", to_std(p.section_normal)},
         {"section", p.section},
         {"note", p.note}};
}

void to_json(nlohmann::json &j, const ReconstructionFrequencies &r) {
    j = {{"period", r.period},
         {"reduced_frequency", r.reduced_frequency},
         {"attitude_angle", r.attitude_angle},
         {"attitude_resonant", r.attitude_resonant},
         {"torus_dimension", r.torus_dimension},
         {"method", r.method},
         {"resonance", {{"max_denominator", r.resonance.max_denominator}, {"tolerance", r.resonance.tolerance}}}};
    if (r.phase_advance) {
        j["phase_advance"] = *r.phase_advance;
        j["phase_resonant"] = r.phase_resonant;
    } else {
        j["phase_advance"] = nullptr;
    }
}

void to_json(nlohmann::json &j, const IntegralRank &r) {
    j = {{"rank", r.rank}, {"singular_values", r.singular_values}, {"threshold", r.threshold}, {"fd_step", r.fd_step}};
}

void to_json(nlohmann::json &j, const IntegratorOptions &o) {
    j = {{"method", to_string(o.method)},
         {"step", o.step},
         {"rtol", o.rtol},
         {"atol", o.atol},
         {"projection", to_string(o.projection)},
         {"projection_interval", o.projection_interval},
         {"max_steps", o.max_steps},
         {"blowup_residual", o.blowup_residual}};
}

void to_json(nlohmann::json &j, const SampleSpec &s) {
    j = {{"points", s.points},
         {"times", s.times},
         {"box_lo", to_std(s.box_lo)},
         {"box_hi", to_std(s.box_hi)},
         {"velocity_half_width", s.velocity_half_width},
         {"seed", s.seed},
         {"abs_tol", s.abs_tol},
         {"rel_tol", s.rel_tol},
         {"fiber_only", s.fiber_only}};
}

} // namespace nhlab
