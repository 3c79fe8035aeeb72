#pragma once

// WSCC 9-bus case data, the study catalog, frequency metrics, stability
// classification and CSV export.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "scsim/engine.hpp"
#include "scsim/error.hpp"
#include "scsim/model.hpp"

namespace scsim {

// ---------------------------------------------------------------------------
// Network data (100 MVA base, 0-based bus ids, names are the usual 1..9)

inline NetworkModel wscc9_network() {
    NetworkModel net;
    const double kv[9] = {16.5, 18.0, 13.8, 230, 230, 230, 230, 230, 230};
    for (std::size_t i = 0; i < 9; ++i) {
        Bus b;
        b.id = i;
        b.name = std::to_string(i + 1);
        b.base_kv = kv[i];
        net.buses.push_back(b);
    }
    net.buses[0].v_set = 1.04;
    net.buses[1].v_set = 1.025;
    net.buses[2].v_set = 1.025;
    net.buses[4].load_p = 1.25, net.buses[4].load_q = 0.50;
    net.buses[5].load_p = 0.90, net.buses[5].load_q = 0.30;
    net.buses[7].load_p = 1.00, net.buses[7].load_q = 0.35;

    auto br = [&](std::size_t f, std::size_t t, double r, double x, double b) {
        net.branches.push_back(Branch{f - 1, t - 1, r, x, b});
    };
    br(1, 4, 0.0, 0.0576, 0.0);
    br(4, 5, 0.010, 0.085, 0.176);
    br(4, 6, 0.017, 0.092, 0.158);
    br(5, 7, 0.032, 0.161, 0.306);
    br(6, 9, 0.039, 0.170, 0.358);
    br(7, 8, 0.0085, 0.072, 0.149);
    br(8, 9, 0.0119, 0.1008, 0.209);
    br(2, 7, 0.0, 0.0625, 0.0);
    br(3, 9, 0.0, 0.0586, 0.0);
    return net;
}

/// Anderson generator data on a 200 MVA rating.
inline MachineParams default_generator(double h = 4.0) {
    MachineParams m;
    m.rated_mva = 200.0;
    m.h = h;
    return m;
}

inline MachineParams default_condenser(double rated_mva, double h = 4.0, double xd_pp = 0.22) {
    MachineParams m;
    m.mode = MachineMode::condenser;
    m.rated_mva = rated_mva;
    m.h = h;
    m.xd = 1.6;
    m.xq = 1.5;
    m.xd_p = 0.35;
    m.xq_p = 0.6;
    m.xd_pp = xd_pp;
    m.xq_pp = xd_pp;
    m.xl = std::min(0.12, 0.8 * xd_pp);
    m.td0_p = 7.0;
    m.tq0_p = 0.5;
    m.td0_pp = 0.035;
    m.tq0_pp = 0.05;
    return m;
}

inline Placement gen_at(std::size_t bus, double p_set, double h = 4.0) {
    return Placement{bus, DeviceKind::sync_gen, "", SyncMachineSetup{default_generator(h), ExciterST1A{}, p_set}};
}

inline Placement condenser_at(std::size_t bus, double rated_mva, double h = 4.0, double xd_pp = 0.22) {
    return Placement{bus, DeviceKind::sync_cond, "",
                     SyncMachineSetup{default_condenser(rated_mva, h, xd_pp), ExciterST1A{}, 0.0}};
}

inline GflParams default_gfl(double p_set) {
    GflParams g;
    g.rated_mva = 200.0;
    g.p_set = p_set;
    g.v_pll_freeze = 0.9;
    return g;
}

inline Placement gfl_at(std::size_t bus, GflParams params) {
    return Placement{bus, DeviceKind::gfl, "", GflSetup{params, true}};
}

inline Placement aux_at(std::size_t bus) { return Placement{bus, DeviceKind::aux_source, "", AuxSourceSetup{}}; }

// ---------------------------------------------------------------------------
// Catalog

inline constexpr double kFaultTime = 1.0;
inline constexpr double kFaultDuration = 5.0 / 60.0;
inline constexpr std::size_t kFaultBus = 5;  // bus "6"

struct CondenserSpec {
    std::size_t bus;
    double rated_mva;
    double h = 4.0;
    double xd_pp = 0.22;
};

inline std::size_t find_placement(const ScenarioSpec& s, DeviceKind kind, std::size_t bus) {
    for (std::size_t i = 0; i < s.placements.size(); ++i) {
        if (s.placements[i].kind == kind && s.placements[i].bus == bus) return i;
    }
    throw ScenarioError("scenario '" + s.name + "' has no " + to_string(kind) + " at bus " + std::to_string(bus + 1));
}

/// GFLs at buses 1 and 3, generator at bus 2 (slack), fault at bus 6.
inline ScenarioSpec gfl13_case(const std::string& name, const std::vector<CondenserSpec>& condensers, double gen_h = 4.0) {
    ScenarioSpec s;
    s.name = name;
    s.network = wscc9_network();
    s.placements.push_back(gfl_at(0, default_gfl(0.716 * 100.0 / 200.0)));
    s.placements.push_back(gen_at(1, 1.63 * 100.0 / 200.0, gen_h));
    s.placements.push_back(gfl_at(2, default_gfl(0.85 * 100.0 / 200.0)));
    for (const auto& c : condensers) s.placements.push_back(condenser_at(c.bus, c.rated_mva, c.h, c.xd_pp));
    s.events.push_back(Event::fault(kFaultTime, kFaultBus));
    s.events.push_back(Event::clear(kFaultTime + kFaultDuration, kFaultBus));
    s.monitor = find_placement(s, DeviceKind::sync_gen, 1);
    return s;
}

/// All three units are GFLs; an aux source at bus 1 starts the system and
/// is disconnected at t = 1 s.
inline ScenarioSpec grid_forming_case(const std::string& name, const std::vector<CondenserSpec>& condensers) {
    ScenarioSpec s;
    s.name = name;
    s.network = wscc9_network();
    const double p_set[3] = {0.45, 0.5, 0.45};
    for (std::size_t b = 0; b < 3; ++b) {
        GflParams g = default_gfl(p_set[b]);
        g.p_max = p_set[b];
        s.placements.push_back(gfl_at(b, g));
    }
    s.placements.push_back(aux_at(0));
    for (const auto& c : condensers) s.placements.push_back(condenser_at(c.bus, c.rated_mva, c.h, c.xd_pp));
    s.events.push_back(Event::open_device(kFaultTime, 3));
    s.config.t_end = 6.0;
    s.monitor = find_placement(s, DeviceKind::gfl, 2);
    return s;
}

inline std::string mva_label(double s) {
    std::ostringstream o;
    o << s;
    return o.str();
}

inline std::vector<ScenarioSpec> case_catalog() {
    std::vector<ScenarioSpec> c;
    // Grid-forming tests.
    c.push_back(grid_forming_case("GF-noSynCo", {}));
    c.push_back(grid_forming_case("GF-SynCo1", {{0, 14.85}}));
    c.push_back(grid_forming_case("GF-SynCo3", {{0, 14.85}, {1, 14.58}, {2, 20.70}}));

    // Grid strength: single condenser paired with the GFL at bus 1.
    c.push_back(gfl13_case("GFL13-noSynCo", {}));
    c.push_back(gfl13_case("GFL13-SynCo-S14.85-H4", {{0, 14.85, 4.0}}));
    c.push_back(gfl13_case("GFL13-SynCo-S14.85-H6", {{0, 14.85, 6.0}}));
    c.push_back(gfl13_case("GFL13-SynCo-S24.75-H4", {{0, 24.75, 4.0}}));

    // Subtransient reactance sweep on the stable single-condenser case.
    for (double x : {0.150, 0.220, 0.295}) {
        std::ostringstream n;
        n.setf(std::ios::fixed);
        n.precision(3);
        n << "GFL13-SynCo-S24.75-H4-Xd" << x;
        c.push_back(gfl13_case(n.str(), {{0, 24.75, 4.0, x}}));
    }

    // Reduced generator inertia.
    c.push_back(gfl13_case("GFL13-genH2-noSynCo", {}, 2.0));
    c.push_back(gfl13_case("GFL13-genH2-SynCo-S24.75-H4", {{0, 24.75, 4.0}}, 2.0));
    c.push_back(gfl13_case("GFL13-genH2-SynCo-S24.75-H6", {{0, 24.75, 6.0}}, 2.0));

    // Two condensers, buses 1 and 3.
    c.push_back(gfl13_case("GFL13-2SynCo-S12.36-S10.35", {{0, 12.36}, {2, 10.35}}));
    // Redistribution at a fixed total of 22.71 MVA.
    for (double s1 : {11.355, 14.36, 16.36}) {
        const double s3 = 22.71 - s1;
        c.push_back(gfl13_case("GFL13-2SynCo-split-S" + mva_label(s1) + "-S" + mva_label(s3), {{0, s1}, {2, s3}}));
    }
    c.push_back(gfl13_case("GFL13-genH2-2SynCo-S12.36-S10.35-H4", {{0, 12.36, 4.0}, {2, 10.35, 4.0}}, 2.0));
    c.push_back(gfl13_case("GFL13-genH2-2SynCo-S12.36-S10.35-H6", {{0, 12.36, 6.0}, {2, 10.35, 6.0}}, 2.0));
    c.push_back(gfl13_case("GFL13-genH2-2SynCo-S24.75-S20.70-H4", {{0, 24.75, 4.0}, {2, 20.70, 4.0}}, 2.0));
    // Heterogeneous inertia, total 23.94 MVA.
    c.push_back(gfl13_case("GFL13-genH2-2SynCo-S13.59H2-S10.35H6", {{0, 13.59, 2.0}, {2, 10.35, 6.0}}, 2.0));
    c.push_back(gfl13_case("GFL13-genH2-2SynCo-S13.59H6-S10.35H2", {{0, 13.59, 6.0}, {2, 10.35, 2.0}}, 2.0));
    return c;
}

/// Exact name match first, then a case-insensitive one.
inline ScenarioSpec find_case(const std::string& name) {
    auto lower = [](std::string v) {
        for (auto& ch : v) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        return v;
    };
    auto cat = case_catalog();
    for (auto& s : cat) {
        if (s.name == name) return s;
    }
    for (auto& s : cat) {
        if (lower(s.name) == lower(name)) return s;
    }
    throw ScenarioError("no catalog case named '" + name + "'");
}

// ---------------------------------------------------------------------------
// Metrics

enum class Verdict { stable, unstable, collapsed };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::stable: return "stable";
        case Verdict::unstable: return "unstable";
        case Verdict::collapsed: return "collapsed";
    }
    return "?";
}

inline constexpr double kUflsThresholdHz = 59.5;
inline constexpr double kRocofWindow = 0.1;
inline constexpr double kSettlingBandHz = 0.05;
inline constexpr double kStabilityWindow = 2.0;
inline constexpr double kStabilityThresholdHz = 0.05;
inline constexpr double kCollapseLowHz = 55.0;
inline constexpr double kCollapseHighHz = 65.0;

struct MetricReport {
    double nadir_hz = 0.0;
    std::optional<double> time_to_ufls_s;
    double max_rocof_hz_s = 0.0;
    std::optional<double> settling_time_s;
    std::optional<double> osc_period_s;
    Verdict verdict = Verdict::stable;
    double final_window_p2p_hz = 0.0;
};

namespace detail {

inline double interp(const std::vector<double>& t, const std::vector<double>& f, double at) {
    auto it = std::lower_bound(t.begin(), t.end(), at);
    if (it == t.begin()) return f.front();
    if (it == t.end()) return f.back();
    const auto k = static_cast<std::size_t>(it - t.begin());
    if (t[k] == at) return f[k];
    const double w = (at - t[k - 1]) / (t[k] - t[k - 1]);
    return f[k - 1] + w * (f[k] - f[k - 1]);
}

}  // namespace detail

/// Peak-to-peak frequency over the final `window` seconds. Throws when the
/// trace is shorter than the window.
inline double final_window_p2p(const std::vector<double>& t, const std::vector<double>& f, double window = kStabilityWindow) {
    if (t.empty() || t.size() != f.size()) throw ContractError("frequency trace is empty or ragged");
    if (t.back() - t.front() < window - 1e-9) throw ContractError("trace shorter than the stability window");
    const double start = t.back() - window;
    double lo = f.back(), hi = f.back();
    for (std::size_t k = t.size(); k-- > 0 && t[k] >= start - 1e-12;) {
        lo = std::min(lo, f[k]);
        hi = std::max(hi, f[k]);
    }
    return hi - lo;
}

inline Verdict classify_stability(const std::vector<double>& t, const std::vector<double>& f, bool terminated_early = false,
                                  double window = kStabilityWindow) {
    const double p2p = final_window_p2p(t, f, window);
    if (terminated_early) return Verdict::collapsed;
    for (double v : f) {
        if (!(v >= kCollapseLowHz && v <= kCollapseHighHz)) return Verdict::collapsed;
    }
    return p2p < kStabilityThresholdHz ? Verdict::stable : Verdict::unstable;
}

/// Metrics of one frequency trace. `t_event` is the first disturbance;
/// times are reported relative to it.
inline MetricReport frequency_metrics(const std::vector<double>& t_all, const std::vector<double>& f_all, double t_event,
                                      bool terminated_early = false) {
    if (t_all.empty() || t_all.size() != f_all.size()) throw ContractError("metrics need a non-empty frequency trace");
    std::vector<double> t, f;
    for (std::size_t k = 0; k < t_all.size(); ++k) {
        if (t_all[k] >= t_event - 1e-12) {
            t.push_back(t_all[k]);
            f.push_back(f_all[k]);
        }
    }
    if (t.empty()) throw ContractError("frequency trace ends before the first event");

    MetricReport m;
    m.nadir_hz = *std::min_element(f.begin(), f.end());
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (f[k] <= kUflsThresholdHz) {
            double tc = t[k];
            if (k > 0 && f[k - 1] > kUflsThresholdHz) {
                tc = t[k - 1] + (f[k - 1] - kUflsThresholdHz) / (f[k - 1] - f[k]) * (t[k] - t[k - 1]);
            }
            m.time_to_ufls_s = tc - t_event;
            break;
        }
    }
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] - kRocofWindow < t.front() - 1e-12) continue;
        const double rate = std::abs(f[k] - detail::interp(t, f, t[k] - kRocofWindow)) / kRocofWindow;
        m.max_rocof_hz_s = std::max(m.max_rocof_hz_s, rate);
    }

    const bool have_window = t.back() - t.front() >= kStabilityWindow - 1e-9;
    if (terminated_early || !have_window) {
        m.verdict = Verdict::collapsed;
        if (have_window) m.final_window_p2p_hz = final_window_p2p(t, f);
        return m;
    }
    m.final_window_p2p_hz = final_window_p2p(t, f);
    m.verdict = classify_stability(t, f, false);

    if (m.verdict == Verdict::stable) {
        const double final = f.back();
        std::size_t last_out = t.size();
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (std::abs(f[k] - final) > kSettlingBandHz) last_out = k;
        }
        m.settling_time_s = last_out == t.size() ? 0.0 : t[std::min(last_out + 1, t.size() - 1)] - t_event;
    } else if (m.verdict == Verdict::unstable) {
        // Mean-level upward crossings over the final half of the trace.
        const double start = t.front() + 0.5 * (t.back() - t.front());
        std::size_t k0 = 0;
        while (k0 < t.size() && t[k0] < start) ++k0;
        double mean = 0.0;
        for (std::size_t k = k0; k < t.size(); ++k) mean += f[k];
        mean /= static_cast<double>(t.size() - k0);
        std::vector<double> ups;
        for (std::size_t k = k0 + 1; k < t.size(); ++k) {
            if (f[k - 1] < mean && f[k] >= mean) {
                ups.push_back(t[k - 1] + (mean - f[k - 1]) / (f[k] - f[k - 1]) * (t[k] - t[k - 1]));
            }
        }
        if (ups.size() >= 2) m.osc_period_s = (ups.back() - ups.front()) / static_cast<double>(ups.size() - 1);
    }
    return m;
}

inline MetricReport metrics(const SimResult& r, std::size_t device) {
    if (device >= r.devices.size()) throw ContractError("metrics device index out of range");
    if (r.t.empty()) throw ContractError("metrics need a non-empty result");
    return frequency_metrics(r.t, r.devices[device].freq, r.first_event_time(), r.termination != Termination::completed);
}

// ---------------------------------------------------------------------------
// CSV

inline std::vector<std::string> csv_header(const SimResult& r) {
    std::vector<std::string> h{"t"};
    for (const auto& b : r.bus_names) {
        h.push_back("v_" + b);
        h.push_back("ang_" + b);
    }
    for (const auto& d : r.device_labels) {
        for (const char* q : {"p", "q", "f", "delta", "online"}) h.push_back(d + "." + q);
    }
    return h;
}

namespace detail {

inline void put_number(std::ostream& os, double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    os.write(buf, res.ptr - buf);
}

}  // namespace detail

/// Shortest round-trip decimal for every value, so a re-run is byte
/// identical and the file parses back to the exact doubles.
inline void write_csv(const SimResult& r, std::ostream& os) {
    const auto header = csv_header(r);
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (std::size_t k = 0; k < r.rows(); ++k) {
        detail::put_number(os, r.t[k]);
        for (std::size_t b = 0; b < r.v_mag.size(); ++b) {
            os << ',';
            detail::put_number(os, r.v_mag[b][k]);
            os << ',';
            detail::put_number(os, r.v_ang[b][k]);
        }
        for (const auto& d : r.devices) {
            for (double v : {d.p[k], d.q[k], d.freq[k], d.delta[k]}) {
                os << ',';
                detail::put_number(os, v);
            }
            os << ',' << static_cast<int>(d.online[k]);
        }
        os << '\n';
    }
}

inline void export_csv(const SimResult& r, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_csv(r, os);
    os.flush();
    if (!os) throw IoError("write to '" + path + "' failed");
}

}  // namespace scsim
