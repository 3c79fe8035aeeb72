#pragma once

// Scenario files: a strict JSON reader (unknown keys are errors), the
// matching writer, and dotted-path overrides applied on the JSON form.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "scsim/error.hpp"
#include "scsim/model.hpp"

namespace scsim {

using Json = nlohmann::ordered_json;

namespace detail {

/// Tracks which keys of one JSON object were consumed so leftovers can be
/// reported as unknown.
class ObjectReader {
  public:
    ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "document must be a JSON object" : "'" + path_ + "' must be an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    const Json& at(const char* key) {
        used_.insert(key);
        if (!j_.contains(key)) fail("missing required key '" + child(key) + "'");
        return j_.at(key);
    }

    void number(const char* key, double& out) {
        if (!has(key)) return;
        const Json& v = at(key);
        if (!v.is_number()) fail("'" + child(key) + "' must be a number");
        out = v.get<double>();
    }

    /// null maps to +infinity (used for unbounded limits).
    void number_or_null(const char* key, double& out) {
        if (has(key) && j_.at(key).is_null()) {
            used_.insert(key);
            out = std::numeric_limits<double>::infinity();
            return;
        }
        number(key, out);
    }

    void index(const char* key, std::size_t& out) {
        if (!has(key)) return;
        const Json& v = at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) fail("'" + child(key) + "' must be a non-negative integer");
        out = v.get<std::size_t>();
    }

    void integer(const char* key, int& out) {
        if (!has(key)) return;
        const Json& v = at(key);
        if (!v.is_number_integer()) fail("'" + child(key) + "' must be an integer");
        out = v.get<int>();
    }

    void boolean(const char* key, bool& out) {
        if (!has(key)) return;
        const Json& v = at(key);
        if (!v.is_boolean()) fail("'" + child(key) + "' must be true or false");
        out = v.get<bool>();
    }

    void text(const char* key, std::string& out) {
        if (!has(key)) return;
        const Json& v = at(key);
        if (!v.is_string()) fail("'" + child(key) + "' must be a string");
        out = v.get<std::string>();
    }

    std::string required_text(const char* key) {
        const Json& v = at(key);
        if (!v.is_string()) fail("'" + child(key) + "' must be a string");
        return v.get<std::string>();
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!used_.count(item.key())) fail("unknown key '" + child(item.key()) + "'");
        }
    }

    [[noreturn]] static void fail(const std::string& m) { throw ScenarioError("scenario schema: " + m); }

  private:
    const Json& j_;
    std::string path_;
    std::set<std::string> used_;
};

inline const Json& array_at(ObjectReader& r, const char* key) {
    const Json& a = r.at(key);
    if (!a.is_array()) ObjectReader::fail("'" + r.child(key) + "' must be an array");
    return a;
}

inline Json number_or_null(double v) { return std::isinf(v) ? Json(nullptr) : Json(v); }

template <class Enum, std::size_t N>
Enum parse_enum(const std::string& text, const std::pair<const char*, Enum> (&table)[N], const std::string& where) {
    for (const auto& [name, value] : table) {
        if (text == name) return value;
    }
    std::string options;
    for (const auto& entry : table) options += std::string(options.empty() ? "" : ", ") + entry.first;
    ObjectReader::fail("'" + where + "' has unknown value '" + text + "' (expected one of: " + options + ")");
}

inline constexpr std::pair<const char*, DeviceKind> kDeviceKinds[] = {
    {"sync_gen", DeviceKind::sync_gen},
    {"sync_cond", DeviceKind::sync_cond},
    {"gfl", DeviceKind::gfl},
    {"aux_source", DeviceKind::aux_source},
};
inline constexpr std::pair<const char*, EventKind> kEventKinds[] = {
    {"apply_fault", EventKind::apply_fault},
    {"clear_fault", EventKind::clear_fault},
    {"open_breaker", EventKind::open_breaker},
    {"close_breaker", EventKind::close_breaker},
};
inline constexpr std::pair<const char*, BreakerTarget> kBreakerTargets[] = {
    {"device", BreakerTarget::device},
    {"branch", BreakerTarget::branch},
};
inline constexpr std::pair<const char*, LimitPriority> kPriorities[] = {
    {"automatic", LimitPriority::automatic},
    {"reactive", LimitPriority::reactive},
    {"active", LimitPriority::active},
};

inline const char* to_string(LimitPriority p) {
    for (const auto& [name, value] : kPriorities) {
        if (value == p) return name;
    }
    return "?";
}

inline const char* to_string(BreakerTarget t) { return t == BreakerTarget::device ? "device" : "branch"; }

// ---- writers ---------------------------------------------------------------

inline Json machine_json(const SyncMachineSetup& s) {
    const auto& m = s.machine;
    Json j;
    j["rated_mva"] = m.rated_mva;
    j["p_set"] = s.p_set;
    j["h"] = m.h;
    j["d"] = m.d;
    j["ra"] = m.ra;
    j["xd"] = m.xd;
    j["xq"] = m.xq;
    j["xd_p"] = m.xd_p;
    j["xq_p"] = m.xq_p;
    j["xd_pp"] = m.xd_pp;
    j["xl"] = m.xl;
    j["td0_p"] = m.td0_p;
    j["tq0_p"] = m.tq0_p;
    j["td0_pp"] = m.td0_pp;
    j["tq0_pp"] = m.tq0_pp;
    j["exciter"] = Json{{"tr", s.exciter.tr},
                        {"ka", s.exciter.ka},
                        {"efd_min", s.exciter.efd_min},
                        {"efd_max", s.exciter.efd_max}};
    return j;
}

inline Json gfl_json(const GflSetup& s) {
    const auto& g = s.params;
    Json j;
    j["rated_mva"] = g.rated_mva;
    j["p_set"] = g.p_set;
    j["q_set"] = g.q_set;
    j["m_p"] = g.m_p;
    j["m_q"] = g.m_q;
    j["omega_n"] = g.omega_n;
    j["v_n"] = g.v_n;
    j["v_n_from_powerflow"] = s.v_n_from_powerflow;
    j["kp_pll"] = g.kp_pll;
    j["ki_pll"] = g.ki_pll;
    j["v_pll_freeze"] = g.v_pll_freeze;
    j["i_max"] = g.i_max;
    j["limit_priority"] = to_string(g.limit_priority);
    j["p_max"] = number_or_null(g.p_max);
    j["t_i"] = g.t_i;
    j["f_trip_lo"] = g.f_trip_lo;
    j["f_trip_hi"] = g.f_trip_hi;
    j["v_trip_lo"] = g.v_trip_lo;
    j["t_trip"] = g.t_trip;
    return j;
}

// ---- readers ---------------------------------------------------------------

inline void read_machine(ObjectReader& r, SyncMachineSetup& s) {
    auto& m = s.machine;
    r.number("rated_mva", m.rated_mva);
    r.number("p_set", s.p_set);
    r.number("h", m.h);
    r.number("d", m.d);
    r.number("ra", m.ra);
    r.number("xd", m.xd);
    r.number("xq", m.xq);
    r.number("xd_p", m.xd_p);
    r.number("xq_p", m.xq_p);
    r.number("xd_pp", m.xd_pp);
    m.xq_pp = m.xd_pp;
    r.number("xl", m.xl);
    r.number("td0_p", m.td0_p);
    r.number("tq0_p", m.tq0_p);
    r.number("td0_pp", m.td0_pp);
    r.number("tq0_pp", m.tq0_pp);
    if (r.has("exciter")) {
        ObjectReader e(r.at("exciter"), r.child("exciter"));
        e.number("tr", s.exciter.tr);
        e.number("ka", s.exciter.ka);
        e.number("efd_min", s.exciter.efd_min);
        e.number("efd_max", s.exciter.efd_max);
        e.finish();
    }
}

inline void read_gfl(ObjectReader& r, GflSetup& s) {
    auto& g = s.params;
    r.number("rated_mva", g.rated_mva);
    r.number("p_set", g.p_set);
    r.number("q_set", g.q_set);
    r.number("m_p", g.m_p);
    r.number("m_q", g.m_q);
    r.number("omega_n", g.omega_n);
    r.number("v_n", g.v_n);
    r.boolean("v_n_from_powerflow", s.v_n_from_powerflow);
    r.number("kp_pll", g.kp_pll);
    r.number("ki_pll", g.ki_pll);
    r.number("v_pll_freeze", g.v_pll_freeze);
    r.number("i_max", g.i_max);
    if (r.has("limit_priority")) {
        g.limit_priority = parse_enum(r.required_text("limit_priority"), kPriorities, r.child("limit_priority"));
    }
    r.number_or_null("p_max", g.p_max);
    r.number("t_i", g.t_i);
    r.number("f_trip_lo", g.f_trip_lo);
    r.number("f_trip_hi", g.f_trip_hi);
    r.number("v_trip_lo", g.v_trip_lo);
    r.number("t_trip", g.t_trip);
}

}  // namespace detail

/// Full JSON form of a scenario; every field is written so the output is
/// also the reference for what can be overridden.
inline Json to_json(const ScenarioSpec& s) {
    using namespace detail;
    Json j;
    j["name"] = s.name;
    j["description"] = s.description;
    j["monitor"] = s.monitor;

    Json buses = Json::array();
    for (const auto& b : s.network.buses) {
        buses.push_back(Json{{"id", b.id},
                             {"name", b.name},
                             {"base_kv", b.base_kv},
                             {"load_p", b.load_p},
                             {"load_q", b.load_q},
                             {"v_set", b.v_set}});
    }
    Json branches = Json::array();
    for (const auto& br : s.network.branches) {
        branches.push_back(Json{{"from", br.from_bus},
                                {"to", br.to_bus},
                                {"r", br.r},
                                {"x", br.x},
                                {"b_shunt", br.b_shunt},
                                {"tap", br.tap},
                                {"in_service", br.in_service}});
    }
    j["network"] = Json{{"buses", buses}, {"branches", branches}};

    Json placements = Json::array();
    for (const auto& pl : s.placements) {
        Json p{{"bus", pl.bus}, {"kind", to_string(pl.kind)}, {"name", pl.name}};
        if (auto* m = std::get_if<SyncMachineSetup>(&pl.setup)) {
            p.update(machine_json(*m));
        } else if (auto* g = std::get_if<GflSetup>(&pl.setup)) {
            p.update(gfl_json(*g));
        } else {
            const auto& a = pl.aux();
            p["r"] = a.r;
            p["x"] = a.x;
        }
        placements.push_back(std::move(p));
    }
    j["placements"] = placements;

    Json events = Json::array();
    for (const auto& ev : s.events) {
        Json e{{"time", ev.time}, {"kind", to_string(ev.kind)}};
        switch (ev.kind) {
            case EventKind::apply_fault:
                e["bus"] = ev.bus;
                e["g"] = ev.admittance.real();
                e["b"] = ev.admittance.imag();
                break;
            case EventKind::clear_fault:
                e["bus"] = ev.bus;
                break;
            case EventKind::open_breaker:
            case EventKind::close_breaker:
                e["target"] = to_string(ev.target);
                e["index"] = ev.index;
                break;
        }
        events.push_back(std::move(e));
    }
    j["events"] = events;

    const auto& c = s.config;
    j["config"] = Json{{"t_end", c.t_end},
                       {"dt", c.dt},
                       {"output_decimation", c.output_decimation},
                       {"network_tol", c.network_tol},
                       {"load_tm", c.load_tm},
                       {"base_mva", c.base_mva},
                       {"base_freq", c.base_freq}};
    return j;
}

/// Strict reader. Omitted fields keep their defaults; unknown keys, wrong
/// types and unknown enum values raise ScenarioError naming the key path.
/// The result is also checked with ScenarioSpec::validate().
inline ScenarioSpec scenario_from_json(const Json& j) {
    using namespace detail;
    ScenarioSpec s;
    ObjectReader top(j, "");
    s.name = top.required_text("name");
    top.text("description", s.description);
    top.index("monitor", s.monitor);

    {
        ObjectReader net(top.at("network"), "network");
        const Json& buses = array_at(net, "buses");
        for (std::size_t i = 0; i < buses.size(); ++i) {
            ObjectReader r(buses[i], "network.buses." + std::to_string(i));
            Bus b;
            b.id = i;
            r.index("id", b.id);
            r.text("name", b.name);
            if (b.name.empty()) b.name = std::to_string(i + 1);
            r.number("base_kv", b.base_kv);
            r.number("load_p", b.load_p);
            r.number("load_q", b.load_q);
            r.number("v_set", b.v_set);
            r.finish();
            s.network.buses.push_back(b);
        }
        const Json& branches = array_at(net, "branches");
        for (std::size_t i = 0; i < branches.size(); ++i) {
            ObjectReader r(branches[i], "network.branches." + std::to_string(i));
            Branch br;
            r.at("from");
            r.at("to");
            r.index("from", br.from_bus);
            r.index("to", br.to_bus);
            r.number("r", br.r);
            r.number("x", br.x);
            r.number("b_shunt", br.b_shunt);
            r.number("tap", br.tap);
            r.boolean("in_service", br.in_service);
            r.finish();
            s.network.branches.push_back(br);
        }
        net.finish();
    }

    const Json& placements = array_at(top, "placements");
    for (std::size_t i = 0; i < placements.size(); ++i) {
        const std::string path = "placements." + std::to_string(i);
        ObjectReader r(placements[i], path);
        Placement pl;
        r.at("bus");
        r.index("bus", pl.bus);
        pl.kind = parse_enum(r.required_text("kind"), kDeviceKinds, path + ".kind");
        r.text("name", pl.name);
        switch (pl.kind) {
            case DeviceKind::sync_gen:
            case DeviceKind::sync_cond: {
                SyncMachineSetup m;
                m.machine.mode = pl.kind == DeviceKind::sync_cond ? MachineMode::condenser : MachineMode::generator;
                read_machine(r, m);
                pl.setup = m;
                break;
            }
            case DeviceKind::gfl: {
                GflSetup g;
                read_gfl(r, g);
                pl.setup = g;
                break;
            }
            case DeviceKind::aux_source: {
                AuxSourceSetup a;
                r.number("r", a.r);
                r.number("x", a.x);
                pl.setup = a;
                break;
            }
        }
        r.finish();
        s.placements.push_back(std::move(pl));
    }

    if (top.has("events")) {
        const Json& events = array_at(top, "events");
        for (std::size_t i = 0; i < events.size(); ++i) {
            const std::string path = "events." + std::to_string(i);
            ObjectReader r(events[i], path);
            Event ev;
            r.at("time");
            r.number("time", ev.time);
            ev.kind = parse_enum(r.required_text("kind"), kEventKinds, path + ".kind");
            switch (ev.kind) {
                case EventKind::apply_fault: {
                    r.at("bus");
                    r.index("bus", ev.bus);
                    double g = ev.admittance.real(), b = ev.admittance.imag();
                    r.number("g", g);
                    r.number("b", b);
                    ev.admittance = {g, b};
                    break;
                }
                case EventKind::clear_fault:
                    r.at("bus");
                    r.index("bus", ev.bus);
                    break;
                case EventKind::open_breaker:
                case EventKind::close_breaker:
                    if (r.has("target")) ev.target = parse_enum(r.required_text("target"), kBreakerTargets, path + ".target");
                    r.at("index");
                    r.index("index", ev.index);
                    break;
            }
            r.finish();
            s.events.push_back(ev);
        }
    }

    if (top.has("config")) {
        ObjectReader r(top.at("config"), "config");
        auto& c = s.config;
        r.number("t_end", c.t_end);
        r.number("dt", c.dt);
        r.integer("output_decimation", c.output_decimation);
        r.number("network_tol", c.network_tol);
        r.number("load_tm", c.load_tm);
        r.number("base_mva", c.base_mva);
        r.number("base_freq", c.base_freq);
        r.finish();
    }
    top.finish();
    s.validate();
    return s;
}

/// Parses scenario text; JSON syntax errors report the byte offset.
inline ScenarioSpec parse_scenario_text(const std::string& text, const std::string& origin = "<input>") {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioError("malformed JSON in " + origin + ": " + e.what());
    }
    return scenario_from_json(j);
}

inline ScenarioSpec parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot read scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path);
}

inline std::string serialize_scenario(const ScenarioSpec& s) { return to_json(s).dump(2) + "\n"; }

/// Splits "key=value" at the first '='.
inline std::pair<std::string, std::string> split_assignment(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ScenarioError("override '" + text + "' must have the form key=value");
    return {text.substr(0, eq), text.substr(eq + 1)};
}

/// Sets the field at a dotted path ("placements.1.h") on the full JSON
/// form of `s` and re-reads it. The path must name an existing scalar.
/// The value is read as JSON when possible, otherwise as a string.
inline ScenarioSpec apply_override(const ScenarioSpec& s, const std::string& path, const std::string& value) {
    Json j = to_json(s);
    Json* node = &j;
    std::string walked;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ScenarioError("override key '" + path + "' has an empty segment");
        walked += (walked.empty() ? "" : ".") + part;
        if (node->is_array()) {
            std::size_t idx = 0;
            try {
                std::size_t used = 0;
                idx = std::stoul(part, &used);
                if (used != part.size()) throw std::invalid_argument(part);
            } catch (const std::exception&) {
                throw ScenarioError("override key '" + path + "': '" + walked + "' must be an array index");
            }
            if (idx >= node->size()) throw ScenarioError("override key '" + path + "': index out of range at '" + walked + "'");
            node = &(*node)[idx];
        } else if (node->is_object()) {
            if (!node->contains(part)) throw ScenarioError("override key '" + path + "': no field '" + walked + "'");
            node = &(*node)[part];
        } else {
            throw ScenarioError("override key '" + path + "': '" + walked + "' is not a container");
        }
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    if (node->is_object() || node->is_array()) {
        throw ScenarioError("override key '" + path + "' names a container, not a value");
    }
    Json parsed;
    try {
        parsed = Json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
        parsed = value;
    }
    *node = parsed;
    return scenario_from_json(j);
}

inline ScenarioSpec apply_overrides(ScenarioSpec s, const std::vector<std::string>& assignments) {
    for (const auto& a : assignments) {
        const auto [key, value] = split_assignment(a);
        s = apply_override(s, key, value);
    }
    return s;
}

}  // namespace scsim
