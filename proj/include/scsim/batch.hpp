#pragma once

// Runs scenarios and writes their per-case outputs. A batch spreads cases
// over worker threads; results always come back in input order.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "scsim/engine.hpp"
#include "scsim/error.hpp"
#include "scsim/scenario_json.hpp"
#include "scsim/scenarios.hpp"

namespace scsim {

enum class CaseStatus { ok, invalid, failed };

struct CaseOutcome {
    std::string name;
    CaseStatus status = CaseStatus::ok;
    std::string error;
    Termination termination = Termination::completed;
    double end_time = 0.0;
    MetricReport metrics;
    std::string csv_path;
    std::string metrics_path;
};

inline Json metrics_json(const MetricReport& m) {
    auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    Json j;
    j["nadir_hz"] = m.nadir_hz;
    j["time_to_ufls_s"] = opt(m.time_to_ufls_s);
    j["max_rocof_hz_s"] = m.max_rocof_hz_s;
    j["settling_time_s"] = opt(m.settling_time_s);
    j["osc_period_s"] = opt(m.osc_period_s);
    j["verdict"] = to_string(m.verdict);
    return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << text;
    os.flush();
    if (!os) throw IoError("write to '" + path.string() + "' failed");
}

/// Creates `dir` if needed and checks that files can be written there.
inline void prepare_output_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));
    }
    const auto probe = dir / ".scsim_write_probe";
    {
        std::ofstream os(probe);
        if (!os) throw IoError("output directory '" + dir.string() + "' is not writable");
    }
    std::filesystem::remove(probe, ec);
}

/// Runs one scenario and writes `<dir>/<name>.csv` and
/// `<dir>/<name>.metrics.json`. Never throws; failures land in the outcome.
inline CaseOutcome run_case(const ScenarioSpec& spec, const std::filesystem::path& dir) {
    CaseOutcome out;
    out.name = spec.name;
    try {
        const SimResult r = run(spec);
        out.termination = r.termination;
        out.end_time = r.end_time;
        out.metrics = metrics(r, spec.monitor);
        out.csv_path = (dir / (spec.name + ".csv")).string();
        out.metrics_path = (dir / (spec.name + ".metrics.json")).string();
        export_csv(r, out.csv_path);
        write_text(out.metrics_path, metrics_json(out.metrics).dump(2) + "\n");
    } catch (const ScenarioError& e) {
        out.status = CaseStatus::invalid;
        out.error = e.what();
    } catch (const InitializationError& e) {
        out.status = CaseStatus::invalid;
        out.error = e.what();
    } catch (const ContractError& e) {
        out.status = CaseStatus::invalid;
        out.error = e.what();
    } catch (const std::exception& e) {
        out.status = CaseStatus::failed;
        out.error = e.what();
    }
    return out;
}

/// Runs every spec with at most `jobs` concurrent workers.
inline std::vector<CaseOutcome> run_batch(const std::vector<ScenarioSpec>& specs, const std::filesystem::path& dir,
                                          unsigned jobs) {
    std::vector<CaseOutcome> results(specs.size());
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(specs.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < specs.size(); k = next++) results[k] = run_case(specs[k], dir);
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return results;
}

inline const char* to_string(CaseStatus s) {
    switch (s) {
        case CaseStatus::ok: return "ok";
        case CaseStatus::invalid: return "invalid";
        case CaseStatus::failed: return "failed";
    }
    return "?";
}

/// One line per case, in input order.
inline std::string summary_csv(const std::vector<CaseOutcome>& results) {
    std::ostringstream os;
    os << "case,status,termination,end_time_s,verdict,nadir_hz,time_to_ufls_s,max_rocof_hz_s,settling_time_s,"
          "osc_period_s\n";
    auto opt = [&os](const std::optional<double>& v) {
        os << ',';
        if (v) detail::put_number(os, *v);
    };
    for (const auto& r : results) {
        os << r.name << ',' << to_string(r.status);
        if (r.status != CaseStatus::ok) {
            os << ",,,,,,,,\n";
            continue;
        }
        os << ',' << to_string(r.termination) << ',';
        detail::put_number(os, r.end_time);
        os << ',' << to_string(r.metrics.verdict) << ',';
        detail::put_number(os, r.metrics.nadir_hz);
        opt(r.metrics.time_to_ufls_s);
        os << ',';
        detail::put_number(os, r.metrics.max_rocof_hz_s);
        opt(r.metrics.settling_time_s);
        opt(r.metrics.osc_period_s);
        os << '\n';
    }
    return os.str();
}

/// Keeps letters, digits and ".-+" so variant names are safe file names.
inline std::string file_safe(const std::string& text) {
    std::string out = text;
    for (auto& ch : out) {
        const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '+';
        if (!keep) ch = '_';
    }
    return out;
}

/// Cartesian expansion of `base` over each "key=v1,v2,..." axis. Variant
/// names append "__key-value" per axis.
inline std::vector<ScenarioSpec> expand_sweep(const ScenarioSpec& base, const std::vector<std::string>& axes) {
    std::vector<ScenarioSpec> out{base};
    for (const auto& axis : axes) {
        const auto [key, list] = split_assignment(axis);
        std::vector<std::string> values;
        std::size_t start = 0;
        while (true) {
            const auto comma = list.find(',', start);
            values.push_back(list.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        std::vector<ScenarioSpec> next;
        for (const auto& s : out) {
            for (const auto& v : values) {
                if (v.empty()) throw ScenarioError("sweep axis '" + axis + "' has an empty value");
                ScenarioSpec variant = apply_override(s, key, v);
                variant.name = s.name + "__" + file_safe(key + "-" + v);
                next.push_back(std::move(variant));
            }
        }
        out = std::move(next);
    }
    return out;
}

}  // namespace scsim
