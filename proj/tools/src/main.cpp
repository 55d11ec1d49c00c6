#include "scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv) {
    using namespace nhlab::cli;

    CLI::App app{"Nonholonomic systems lab: integrate scenarios, check hypotheses, sweep parameters"};
    app.require_subcommand(1);

    CommandOptions opts;
    std::uint64_t seed = 0;
    double tol = 0.0;

    auto add_common = [&](CLI::App *cmd) {
        cmd->add_option("--scenario", opts.scenario, "Scenario file (JSON)")->required();
        cmd->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
        cmd->add_option("--seed", seed, "Override the scenario seed");
        cmd->add_option("--tol", tol, "Override integrator rtol (atol = tol/100)");
        cmd->add_flag("--quiet", opts.quiet, "Only print diagnostics");
    };
    auto *run = app.add_subcommand("run", "Integrate a scenario and run its analyses");
    auto *check = app.add_subcommand("check", "Check frame and symmetry hypotheses");
    auto *sweep = app.add_subcommand("sweep", "Run the analyses over a parameter grid");
    app.add_subcommand("version", "Print version information");
    for (auto *cmd : {run, check, sweep}) {
        add_common(cmd);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    for (auto *cmd : {run, check, sweep}) {
        if (cmd->count("--seed") > 0) {
            opts.seed = seed;
        }
        if (cmd->count("--tol") > 0) {
            opts.tol = tol;
        }
    }

    if (*run) {
        return run_command(opts, std::cout, std::cerr);
    }
    if (*check) {
        return check_command(opts, std::cout, std::cerr);
    }
    if (*sweep) {
        return sweep_command(opts, std::cout, std::cerr);
    }
    std::cout << version_string() << '\n';
    return kExitOk;
}
