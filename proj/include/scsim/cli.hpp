#pragma once

// Command-line front end. Exit codes: 0 success (a collapsed run is still a
// success), 1 invalid input (usage, unknown scenario, schema or
// initialization errors), 2 run failure (I/O or numerical failure).

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "scsim/batch.hpp"
#include "scsim/error.hpp"
#include "scsim/scenario_json.hpp"
#include "scsim/scenarios.hpp"

namespace scsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitRunFailure = 2;

/// A catalog name, or a path to a scenario JSON file.
inline ScenarioSpec resolve_scenario(const std::string& ref) {
    std::error_code ec;
    const bool looks_like_file = ref.size() > 5 && ref.compare(ref.size() - 5, 5, ".json") == 0;
    if (looks_like_file || std::filesystem::is_regular_file(ref, ec)) return parse_scenario_file(ref);
    return find_case(ref);
}

namespace detail {

struct ScenarioOptions {
    std::vector<std::string> sets;
    std::optional<double> dt;
    std::optional<double> t_end;

    void attach(CLI::App* cmd) {
        cmd->add_option("--set", sets, "Override a field, dotted path: --set placements.1.h=6");
        cmd->add_option("--dt", dt, "Integration step, s");
        cmd->add_option("--t-end", t_end, "Simulation end time, s");
    }

    ScenarioSpec apply(ScenarioSpec s) const {
        s = apply_overrides(std::move(s), sets);
        if (dt) s.config.dt = *dt;
        if (t_end) s.config.t_end = *t_end;
        s.validate();
        return s;
    }
};

inline void print_outcome(std::ostream& os, const CaseOutcome& r) {
    if (r.status != CaseStatus::ok) {
        os << r.name << ": " << to_string(r.status) << ": " << r.error << '\n';
        return;
    }
    os << r.name << ": termination=" << to_string(r.termination) << " end=" << r.end_time
       << " verdict=" << to_string(r.metrics.verdict) << " nadir_hz=" << r.metrics.nadir_hz
       << " max_rocof_hz_s=" << r.metrics.max_rocof_hz_s << '\n';
}

inline int exit_code(const std::vector<CaseOutcome>& results) {
    int code = kExitOk;
    for (const auto& r : results) {
        if (r.status == CaseStatus::failed) return kExitRunFailure;
        if (r.status == CaseStatus::invalid) code = kExitInvalid;
    }
    return code;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"RMS simulator for synchronous condensers and grid-following inverters", "scsim"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "Print the catalog case names");

    std::string scenario;
    bool print_json = false;
    detail::ScenarioOptions validate_opts;
    auto* validate = app.add_subcommand("validate", "Check a scenario and its initial operating point");
    validate->add_option("--scenario,-s", scenario, "Catalog name or scenario JSON path")->required();
    validate->add_flag("--print", print_json, "Print the resolved scenario as JSON");
    validate_opts.attach(validate);

    std::string out_dir;
    detail::ScenarioOptions run_opts;
    auto* run_cmd = app.add_subcommand("run", "Run one scenario");
    run_cmd->add_option("--scenario,-s", scenario, "Catalog name or scenario JSON path")->required();
    run_cmd->add_option("--out,-o", out_dir, "Output directory")->required();
    run_opts.attach(run_cmd);

    std::vector<std::string> sweep_scenarios;
    std::vector<std::string> vary;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    detail::ScenarioOptions sweep_opts;
    auto* sweep = app.add_subcommand("sweep", "Run several scenarios or parameter variants in parallel");
    sweep->add_option("--scenario,-s", sweep_scenarios, "Catalog name, JSON path, or 'all'; repeatable")->required();
    sweep->add_option("--vary", vary, "Sweep axis key=v1,v2,...; repeatable (cartesian product)");
    sweep->add_option("--jobs,-j", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
    sweep->add_option("--out,-o", out_dir, "Output directory")->required();
    sweep_opts.attach(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (list->parsed()) {
            for (const auto& s : case_catalog()) out << s.name << '\n';
            return kExitOk;
        }
        if (validate->parsed()) {
            const ScenarioSpec s = validate_opts.apply(resolve_scenario(scenario));
            Simulation sim(s);
            if (print_json) {
                out << serialize_scenario(s);
            } else {
                out << s.name << ": ok (" << s.placements.size() << " devices, " << s.events.size() << " events)\n";
            }
            return kExitOk;
        }
        if (run_cmd->parsed()) {
            const ScenarioSpec s = run_opts.apply(resolve_scenario(scenario));
            prepare_output_dir(out_dir);
            const CaseOutcome r = run_case(s, out_dir);
            detail::print_outcome(r.status == CaseStatus::ok ? out : err, r);
            return detail::exit_code({r});
        }
        if (sweep->parsed()) {
            std::vector<ScenarioSpec> specs;
            for (const auto& ref : sweep_scenarios) {
                std::vector<ScenarioSpec> bases;
                if (ref == "all") {
                    bases = case_catalog();
                } else {
                    bases.push_back(resolve_scenario(ref));
                }
                for (auto& b : bases) {
                    for (auto& v : expand_sweep(sweep_opts.apply(std::move(b)), vary)) specs.push_back(std::move(v));
                }
            }
            prepare_output_dir(out_dir);
            const auto results = run_batch(specs, out_dir, jobs);
            write_text(std::filesystem::path(out_dir) / "summary.csv", summary_csv(results));
            for (const auto& r : results) detail::print_outcome(r.status == CaseStatus::ok ? out : err, r);
            return detail::exit_code(results);
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitRunFailure;
    } catch (const ScenarioError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const InitializationError& e) {
        err << "error: initialization failed: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const ContractError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const NetworkError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRunFailure;
    }
    return kExitInvalid;
}

}  // namespace scsim
