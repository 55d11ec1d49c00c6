#include "scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <thread>

#ifndef NHLAB_VERSION
#define NHLAB_VERSION "0.0.0"
#endif

namespace nhlab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string version_string() {
    return std::string("nhlab ") + NHLAB_VERSION + " (scenario schema " + std::to_string(kSchemaVersion) + ")";
}

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char ch : s) {
        out += ch;
        if (ch == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

void write_json(const fs::path &path, const json &j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write '" + path.string() + "'");
    }
    out << j.dump(2) << '\n';
}

std::ofstream open_out(const fs::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write '" + path.string() + "'");
    }
    return out;
}

Scenario prepare(const CommandOptions &opts) {
    Scenario sc = load_scenario(opts.scenario);
    if (opts.seed) {
        sc.seed = *opts.seed;
    }
    if (opts.tol) {
        if (!(*opts.tol > 0.0)) {
            throw ValidationError("--tol must be positive");
        }
        sc.integrator.rtol = *opts.tol;
        sc.integrator.atol = *opts.tol * 1e-2;
    }
    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (ec) {
        throw ValidationError("cannot create output directory '" + opts.out_dir.string() + "': " + ec.message());
    }
    return sc;
}

/// Maps exceptions to exit codes and prints the diagnostic.
template <class F>
int guarded(std::ostream &err, F &&body) {
    try {
        return body();
    } catch (const ValidationError &e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ContractViolation &e) {
        err << "error: invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const DomainError &e) {
        err << "error: outside the surface domain: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception &e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}

void summarize(std::ostream &log, const json &results) {
    if (results.contains("drift")) {
        for (const auto &d : results["drift"]["integrals"]) {
            log << "  drift " << d["name"].get<std::string>() << ": " << num(d["max_abs_drift"].get<double>())
                << '\n';
        }
    }
    if (results.contains("period")) {
        const auto &p = results["period"];
        log << "  period: " << (p["detected"].get<bool>() ? num(p["period"].get<double>()) : "not detected")
            << '\n';
    }
    if (results.contains("reconstruction") && results["reconstruction"].contains("torus_dimension")) {
        log << "  torus dimension: " << results["reconstruction"]["torus_dimension"].get<int>() << '\n';
    }
    if (results.contains("integral_rank")) {
        log << "  integral rank: " << results["integral_rank"]["rank"].get<int>() << '\n';
    }
}

struct RowOutcome {
    bool ok = false;
    std::uint64_t seed = 0;
    std::vector<double> point;
    json results;
    std::string error;
};

RowOutcome run_row(const Scenario &base, const std::vector<SweepAxis> &axes, const std::vector<double> &point,
                   std::uint64_t seed) {
    RowOutcome row;
    row.seed = seed;
    row.point = point;
    try {
        Scenario sc = base;
        sc.seed = seed;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            apply_axis(sc, axes[a].name, point[a]);
        }
        row.results = run_analyses(sc).results;
        row.ok = true;
    } catch (const std::exception &e) {
        row.error = e.what();
    }
    return row;
}

} // namespace

int run_command(const CommandOptions &opts, std::ostream &log, std::ostream &err) {
    return guarded(err, [&] {
        const Scenario sc = prepare(opts);
        json report;
        report["settings"] = settings_block(sc);
        Analysis an;
        try {
            an = run_analyses(sc);
        } catch (const ValidationError &) {
            throw;
        } catch (const ContractViolation &) {
            throw;
        } catch (const DomainError &) {
            throw;
        } catch (const std::exception &e) {
            report["status"] = "failed";
            report["error"] = e.what();
            write_json(opts.out_dir / "report.json", report);
            throw;
        }
        report["status"] = "ok";
        report["results"] = an.results;
        write_json(opts.out_dir / "report.json", report);
        if (sc.trajectory_csv) {
            auto out = open_out(opts.out_dir / "trajectory.csv");
            write_trajectory_csv(an.trajectory, out);
        }
        if (sc.drift_csv && !an.drift_integrals.empty()) {
            auto out = open_out(opts.out_dir / "drift.csv");
            write_drift_csv(an.trajectory, an.drift_integrals, out);
        }
        if (!opts.quiet) {
            log << sc.name << ": " << an.trajectory.size() << " samples to t = " << num(an.trajectory.times.back())
                << '\n';
            summarize(log, an.results);
            log << "  wrote " << (opts.out_dir / "report.json").string() << '\n';
        }
        return kExitOk;
    });
}

int check_command(const CommandOptions &opts, std::ostream &log, std::ostream &err) {
    return guarded(err, [&] {
        const Scenario sc = prepare(opts);
        if (!sc.check) {
            throw ValidationError("scenario has no 'check' block");
        }
        const HypothesisReport rep = run_check(sc);
        json out;
        out["settings"] = settings_block(sc);
        const auto &ck = *sc.check;
        json check = {{"kind", ck.kind}, {"points", ck.points}, {"half_width", ck.half_width},
                      {"fiber_only", ck.fiber_only}};
        if (ck.kind == "theorem1") {
            check["frame"] = ck.frame;
            if (ck.frame == "rotating") {
                check["frame_rate"] = ck.frame_rate.value_or(sc.system.Omega);
            }
        } else {
            check["eta"] = ck.eta.value_or(sc.system.Omega);
            check["angles"] = ck.angles;
        }
        out["settings"]["check"] = check;
        out["report"] = rep;
        write_json(opts.out_dir / "hypotheses.json", out);
        if (!opts.quiet) {
            log << sc.name << ": " << rep.check << '\n';
            for (const auto &h : rep.results) {
                log << "  " << (h.passed ? "holds " : "FAILS ") << h.name << "  worst residual "
                    << num(h.worst_residual) << '\n';
            }
        }
        return rep.all_passed() ? kExitOk : kExitHypotheses;
    });
}

int sweep_command(const CommandOptions &opts, std::ostream &log, std::ostream &err) {
    return guarded(err, [&] {
        const Scenario sc = prepare(opts);
        const auto &axes = sc.sweep;
        std::size_t rows = axes.empty() ? 0 : 1;
        for (const auto &a : axes) {
            rows *= a.values.size();
        }
        if (rows == 0) {
            throw ValidationError("sweep grid is empty");
        }

        // Row-major over the axes, last axis fastest.
        std::vector<std::vector<double>> points(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            std::size_t rem = r;
            points[r].resize(axes.size());
            for (std::size_t a = axes.size(); a-- > 0;) {
                points[r][a] = axes[a].values[rem % axes[a].values.size()];
                rem /= axes[a].values.size();
            }
        }

        std::vector<RowOutcome> outcomes(rows);
        const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        const std::size_t workers = std::min<std::size_t>(sc.sweep_threads ? *sc.sweep_threads : hw, rows);
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (std::size_t r = next++; r < rows; r = next++) {
                outcomes[r] = run_row(sc, axes, points[r], row_seed(sc.seed, r));
            }
        };
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < workers; ++w) {
            pool.emplace_back(work);
        }
        work();
        pool.clear();

        const auto drift_names = sc.analyses.drift.value_or(std::vector<std::string>{});
        auto csv = open_out(opts.out_dir / "sweep.csv");
        csv << "row,seed";
        for (const auto &a : axes) {
            csv << ',' << a.name;
        }
        csv << ",status,period,return_residual,torus_dimension";
        for (const auto &n : drift_names) {
            csv << ",drift_" << n;
        }
        csv << ",error\n";

        json rows_json = json::array();
        std::size_t failed = 0;
        for (std::size_t r = 0; r < rows; ++r) {
            const auto &o = outcomes[r];
            failed += o.ok ? 0 : 1;
            csv << r << ',' << o.seed;
            json point = json::object();
            for (std::size_t a = 0; a < axes.size(); ++a) {
                csv << ',' << num(o.point[a]);
                point[axes[a].name] = o.point[a];
            }
            csv << ',' << (o.ok ? "ok" : "failed");
            const json &res = o.results;
            const bool has_period = o.ok && res.contains("period") && res["period"]["detected"].get<bool>();
            csv << ',' << (has_period ? num(res["period"]["period"].get<double>()) : "");
            csv << ',' << (has_period ? num(res["period"]["return_residual"].get<double>()) : "");
            const bool has_torus =
                o.ok && res.contains("reconstruction") && res["reconstruction"].contains("torus_dimension");
            csv << ',' << (has_torus ? std::to_string(res["reconstruction"]["torus_dimension"].get<int>()) : "");
            for (std::size_t i = 0; i < drift_names.size(); ++i) {
                csv << ',' << (o.ok ? num(res["drift"]["integrals"][i]["max_abs_drift"].get<double>()) : "");
            }
            csv << ',' << csv_field(o.error) << '\n';

            json row = {{"row", r}, {"seed", o.seed}, {"point", point}, {"status", o.ok ? "ok" : "failed"}};
            if (o.ok) {
                row["results"] = res;
            } else {
                row["error"] = o.error;
            }
            rows_json.push_back(row);
        }
        json report;
        report["settings"] = settings_block(sc);
        json grid = json::object();
        for (const auto &a : axes) {
            grid[a.name] = a.values;
        }
        report["settings"]["sweep"] = {{"grid", grid}, {"row_seed", "splitmix64(seed, row)"}};
        report["rows"] = rows_json;
        write_json(opts.out_dir / "sweep.json", report);
        if (!opts.quiet) {
            log << sc.name << ": " << rows << " rows, " << failed << " failed\n";
            log << "  wrote " << (opts.out_dir / "sweep.csv").string() << '\n';
        }
        for (const auto &o : outcomes) {
            if (!o.ok) {
                err << "row failed: " << o.error << '\n';
            }
        }
        return failed == rows ? kExitNumerical : kExitOk;
    });
}

} // namespace nhlab::cli
