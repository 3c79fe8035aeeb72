#pragma once

// Plain data describing a study: device placements, timed events and solver
// configuration. Shared by the engine (which runs it) and the scenario
// catalog / JSON layer (which produce it).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "scsim/error.hpp"
#include "scsim/gfl.hpp"
#include "scsim/machines.hpp"
#include "scsim/netmodel.hpp"

namespace scsim {

enum class DeviceKind { sync_gen, sync_cond, gfl, aux_source };

inline const char* to_string(DeviceKind k) {
    switch (k) {
        case DeviceKind::sync_gen: return "sync_gen";
        case DeviceKind::sync_cond: return "sync_cond";
        case DeviceKind::gfl: return "gfl";
        case DeviceKind::aux_source: return "aux_source";
    }
    return "?";
}

struct SyncMachineSetup {
    MachineParams machine;
    ExciterST1A exciter;
    double p_set = 0.0;  // pu on machine rating; ignored at the slack bus
};

struct GflSetup {
    GflParams params;
    bool v_n_from_powerflow = true;  // droop voltage reference = initial terminal voltage
};

/// Ideal voltage source behind a small impedance (system base).
struct AuxSourceSetup {
    double r = 0.0;
    double x = 0.001;
};

struct Placement {
    std::size_t bus = 0;
    DeviceKind kind = DeviceKind::sync_gen;
    std::string name;  // optional label; generated when empty
    std::variant<SyncMachineSetup, GflSetup, AuxSourceSetup> setup;

    const SyncMachineSetup& sync() const { return std::get<SyncMachineSetup>(setup); }
    SyncMachineSetup& sync() { return std::get<SyncMachineSetup>(setup); }
    const GflSetup& gfl() const { return std::get<GflSetup>(setup); }
    GflSetup& gfl() { return std::get<GflSetup>(setup); }
    const AuxSourceSetup& aux() const { return std::get<AuxSourceSetup>(setup); }

    double rated_mva() const {
        if (auto* s = std::get_if<SyncMachineSetup>(&setup)) return s->machine.rated_mva;
        if (auto* g = std::get_if<GflSetup>(&setup)) return g->params.rated_mva;
        return 0.0;
    }
};

enum class EventKind { apply_fault, clear_fault, open_breaker, close_breaker };
enum class BreakerTarget { device, branch };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::apply_fault: return "apply_fault";
        case EventKind::clear_fault: return "clear_fault";
        case EventKind::open_breaker: return "open_breaker";
        case EventKind::close_breaker: return "close_breaker";
    }
    return "?";
}

inline constexpr double kBoltedFaultConductance = 1e6;

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::apply_fault;
    std::size_t bus = 0;                              // faults
    Complex admittance{kBoltedFaultConductance, 0.0};  // apply_fault
    BreakerTarget target = BreakerTarget::device;     // breakers
    std::size_t index = 0;                            // device (placement) or branch index

    static Event fault(double t, std::size_t bus, Complex y = {kBoltedFaultConductance, 0.0}) {
        return Event{t, EventKind::apply_fault, bus, y};
    }
    static Event clear(double t, std::size_t bus) { return Event{t, EventKind::clear_fault, bus}; }
    static Event open_device(double t, std::size_t device) {
        Event e{t, EventKind::open_breaker};
        e.index = device;
        return e;
    }
};

struct SimConfig {
    double t_end = 21.0;
    double dt = 1e-3;
    int output_decimation = 10;
    double network_tol = 1e-8;
    // Constant-power loads act on a lagged voltage measurement with this
    // time constant; 0 makes them algebraic (Newton network solve).
    double load_tm = 0.02;
    double base_mva = kDefaultBaseMva;
    double base_freq = kDefaultBaseFreq;

    void validate() const {
        if (!(dt > 0.0 && dt <= 0.01)) throw ScenarioError("config.dt must satisfy 0 < dt <= 0.01");
        if (!(t_end > 0.0)) throw ScenarioError("config.t_end must be positive");
        if (output_decimation < 1) throw ScenarioError("config.output_decimation must be >= 1");
        if (!(network_tol > 0.0)) throw ScenarioError("config.network_tol must be positive");
        if (!(load_tm >= 0.0)) throw ScenarioError("config.load_tm must be non-negative");
        if (!(base_mva > 0.0)) throw ScenarioError("config.base_mva must be positive");
        if (!(base_freq > 0.0)) throw ScenarioError("config.base_freq must be positive");
    }
};

struct ScenarioSpec {
    std::string name;
    std::string description;
    NetworkModel network;
    std::vector<Placement> placements;
    std::vector<Event> events;
    SimConfig config;
    std::size_t monitor = 0;  // placement whose frequency feeds the metrics

    std::vector<std::string> device_labels() const {
        std::vector<std::string> out;
        std::set<std::string> seen;
        for (std::size_t i = 0; i < placements.size(); ++i) {
            const auto& pl = placements[i];
            std::string label = pl.name;
            if (label.empty()) {
                label = std::string(to_string(pl.kind)) + "_bus" + network.buses.at(pl.bus).name;
            }
            if (seen.count(label)) label += "_" + std::to_string(i);
            seen.insert(label);
            out.push_back(label);
        }
        return out;
    }

    void validate() const {
        auto fail = [this](const std::string& m) { throw ScenarioError("scenario '" + name + "': " + m); };
        if (name.empty()) throw ScenarioError("scenario name must not be empty");
        try {
            network.validate();
        } catch (const NetworkError& e) {
            fail(e.what());
        }
        config.validate();
        if (placements.empty()) fail("no devices placed");
        int aux_count = 0;
        for (std::size_t i = 0; i < placements.size(); ++i) {
            const auto& pl = placements[i];
            const std::string where = "placement " + std::to_string(i) + ": ";
            if (pl.bus >= network.size()) fail(where + "bus " + std::to_string(pl.bus) + " does not exist");
            try {
                switch (pl.kind) {
                    case DeviceKind::sync_gen:
                    case DeviceKind::sync_cond: {
                        auto* s = std::get_if<SyncMachineSetup>(&pl.setup);
                        if (!s) fail(where + "synchronous device needs machine parameters");
                        const auto want = pl.kind == DeviceKind::sync_cond ? MachineMode::condenser : MachineMode::generator;
                        if (s->machine.mode != want) fail(where + "machine mode does not match device kind");
                        s->machine.validate();
                        s->exciter.validate();
                        break;
                    }
                    case DeviceKind::gfl: {
                        auto* g = std::get_if<GflSetup>(&pl.setup);
                        if (!g) fail(where + "gfl device needs inverter parameters");
                        g->params.validate(config.base_freq);
                        break;
                    }
                    case DeviceKind::aux_source: {
                        auto* a = std::get_if<AuxSourceSetup>(&pl.setup);
                        if (!a) fail(where + "aux_source needs source impedance");
                        if (a->r == 0.0 && a->x == 0.0) fail(where + "aux_source impedance must be nonzero");
                        ++aux_count;
                        break;
                    }
                }
            } catch (const ContractError& e) {
                fail(where + e.what());
            }
        }
        if (aux_count > 1) fail("at most one aux_source is allowed");
        if (monitor >= placements.size()) fail("monitor index out of range");

        double last = 0.0;
        std::set<std::size_t> faulted;
        for (std::size_t k = 0; k < events.size(); ++k) {
            const auto& ev = events[k];
            const std::string where = "event " + std::to_string(k) + ": ";
            if (!(ev.time >= 0.0) || !std::isfinite(ev.time)) fail(where + "time must be >= 0");
            if (ev.time < last) fail(where + "events must be sorted by time");
            last = ev.time;
            switch (ev.kind) {
                case EventKind::apply_fault:
                    if (ev.bus >= network.size()) fail(where + "fault bus does not exist");
                    if (!std::isfinite(ev.admittance.real()) || !std::isfinite(ev.admittance.imag())) {
                        fail(where + "fault admittance must be finite");
                    }
                    faulted.insert(ev.bus);
                    break;
                case EventKind::clear_fault:
                    if (!faulted.count(ev.bus)) fail(where + "clear_fault without a matching apply_fault");
                    faulted.erase(ev.bus);
                    break;
                case EventKind::open_breaker:
                case EventKind::close_breaker:
                    if (ev.target == BreakerTarget::device && ev.index >= placements.size()) {
                        fail(where + "breaker device index out of range");
                    }
                    if (ev.target == BreakerTarget::branch && ev.index >= network.branches.size()) {
                        fail(where + "breaker branch index out of range");
                    }
                    break;
            }
        }
    }
};

}  // namespace scsim
