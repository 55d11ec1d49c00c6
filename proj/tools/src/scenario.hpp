// Scenario files: schema validation, parsing, and the run/check/sweep drivers
// behind the `nhlab` command.
#pragma once

#include <nhlab/nhlab.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nhlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitHypotheses = 4;

inline constexpr int kSchemaVersion = 1;

/// Bad input: unparsable file, schema violation, unknown key, bad parameter.
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Scenario schema shipped with the tool (embedded at build time).
const nlohmann::json &scenario_schema();

/// Checks `doc` against a JSON-Schema subset: type, const, enum, properties,
/// required, additionalProperties, items, minItems, maxItems, minimum,
/// exclusiveMinimum. Returns one "pointer: message" line per violation.
std::vector<std::string> validate_json(const nlohmann::json &doc, const nlohmann::json &schema);

struct ProfileSpec {
    std::string kind = "paraboloid";
    double k = 1.0;
    double R = 1.0;
    double height = 0.0;
    std::string path;
};

struct SystemSpec {
    std::string preset;
    double a = 1.0;
    double c = 0.4;
    double Omega = 0.0;
    double g = 1.0;
    ProfileSpec profile;
};

struct InitialSpec {
    double t0 = 0.0;
    double x = 0.0;
    double y = 0.0;
    Vec3 omega = Vec3::Zero();
    double u = 1.0;
    double phi = 0.0;
    double udot = 0.0;
    double phidot = 0.0;
    double spin_normal = 0.0;
    Vec3 psi = Vec3::Zero();
};

struct AnalysisSpec {
    std::optional<std::vector<std::string>> drift;
    std::optional<int> energy_rate_samples;
    std::optional<SectionSpec> period;
    std::optional<ResonanceSpec> reconstruction;
    std::optional<std::vector<std::string>> integral_rank;
};

struct CheckSpec {
    std::string kind;
    std::string frame = "rotating";
    std::optional<double> frame_rate;
    std::optional<double> eta;
    std::vector<double> angles = {0.3, 1.0, 2.5, -4.0};
    int points = 200;
    double half_width = 2.0;
    bool fiber_only = false;
};

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct Scenario {
    std::string name;
    std::string description;
    std::uint64_t seed = 0;
    SystemSpec system;
    InitialSpec initial;
    IntegratorOptions integrator;
    double t_end = 10.0;
    AnalysisSpec analyses;
    std::optional<CheckSpec> check;
    std::vector<SweepAxis> sweep;
    std::optional<int> sweep_threads;
    bool trajectory_csv = true;
    bool drift_csv = true;
    /// Directory that relative paths (tabulated profiles) resolve against.
    std::filesystem::path base_dir;
};

/// Validates against the schema, then converts. Throws ValidationError.
Scenario parse_scenario(const nlohmann::json &doc, const std::filesystem::path &base_dir = {});
Scenario load_scenario(const std::filesystem::path &path);

Preset build_preset(const Scenario &sc);
VelocityState initial_state(const Scenario &sc, const Preset &preset);

/// Applies a sweep coordinate (system parameter or initial-state field).
void apply_axis(Scenario &sc, const std::string &axis, double value);

/// Everything that determines the numbers in a report.
nlohmann::json settings_block(const Scenario &sc);

struct Analysis {
    nlohmann::json results;
    Trajectory trajectory;
    std::vector<NamedIntegral> drift_integrals;
};

/// Integrates the scenario and runs the requested analyses. Throws nhlab::Error
/// or ValidationError.
Analysis run_analyses(const Scenario &sc);

/// Hypothesis report for the scenario's check block.
HypothesisReport run_check(const Scenario &sc);

/// splitmix64 finalizer of (seed, row): the per-row seed of a sweep.
std::uint64_t row_seed(std::uint64_t seed, std::uint64_t row);

struct CommandOptions {
    std::filesystem::path scenario;
    std::filesystem::path out_dir = "nhlab-out";
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    bool quiet = false;
};

int run_command(const CommandOptions &opts, std::ostream &log, std::ostream &err);
int check_command(const CommandOptions &opts, std::ostream &log, std::ostream &err);
int sweep_command(const CommandOptions &opts, std::ostream &log, std::ostream &err);

std::string version_string();

} // namespace nhlab::cli
