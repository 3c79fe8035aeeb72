#pragma once

// Time-domain engine: equilibrium initialization from a power flow, fixed
// step RK4 with a network solve at every stage, event handling by step
// splitting, and decimated recording.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "scsim/error.hpp"
#include "scsim/gfl.hpp"
#include "scsim/integrator.hpp"
#include "scsim/machines.hpp"
#include "scsim/model.hpp"
#include "scsim/netmodel.hpp"

namespace scsim {

enum class Termination { completed, network_collapse, all_sources_offline };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::completed: return "completed";
        case Termination::network_collapse: return "network_collapse";
        case Termination::all_sources_offline: return "all_sources_offline";
    }
    return "?";
}

struct LoggedEvent {
    double time = 0.0;
    std::string description;
};

struct DeviceTrace {
    std::vector<double> p;      // terminal injection, pu system base
    std::vector<double> q;
    std::vector<double> freq;   // Hz
    std::vector<double> delta;  // rad (rotor angle, PLL angle, or source angle)
    std::vector<double> i_mag;  // pu on the device rating
    std::vector<std::uint8_t> online;
};

struct SimResult {
    std::string scenario;
    std::vector<std::string> bus_names;
    std::vector<std::string> device_labels;
    std::vector<DeviceKind> device_kinds;
    std::vector<double> t;
    std::vector<std::vector<double>> v_mag;  // [bus][row]
    std::vector<std::vector<double>> v_ang;
    std::vector<DeviceTrace> devices;
    std::vector<double> power_mismatch;  // |sum injections - loads - network absorption|, pu
    std::vector<LoggedEvent> events;
    Termination termination = Termination::completed;
    double end_time = 0.0;
    std::string termination_detail;

    std::size_t rows() const noexcept { return t.size(); }
    double first_event_time() const { return events.empty() ? (t.empty() ? 0.0 : t.front()) : events.front().time; }
    double last_event_time() const { return events.empty() ? (t.empty() ? 0.0 : t.front()) : events.back().time; }
};

/// Per-device values at the current instant, as recorded.
struct DeviceSample {
    Complex s;  // system base
    double freq = 0.0;
    double delta = 0.0;
    double i_mag = 0.0;
    bool online = false;
};

namespace detail {

struct MachineUnit {
    MachineParams params;  // system base
    ExciterST1A exciter;   // v_meas lives in the state vector
    double p_mech = 0.0;
};
struct GflUnit {
    GflParams params;  // device base
    double scale = 1.0;  // rated / system base
    GflState status;     // discrete part: online, trip timer, last omega estimate
};
struct AuxUnit {
    Complex emf;
    Complex y;
};
}  // namespace detail

class Simulation {
  public:
    explicit Simulation(ScenarioSpec spec) : spec_(std::move(spec)) {
        spec_.validate();
        initialize();
    }

    const ScenarioSpec& scenario() const noexcept { return spec_; }
    double time() const noexcept { return t_; }
    const std::vector<Complex>& bus_voltages() const noexcept { return v_; }
    const std::vector<double>& state_vector() const noexcept { return x_; }
    const std::vector<double>& derivatives() const noexcept { return dx_; }
    const PowerFlowSolution& power_flow() const noexcept { return pf_; }
    std::size_t device_count() const noexcept { return devices_.size(); }
    double base_mva() const noexcept { return spec_.config.base_mva; }

    /// Largest |derivative| per device at the current state.
    std::vector<double> device_residuals() const {
        std::vector<double> out;
        for (const auto& d : devices_) {
            double m = 0.0;
            for (std::size_t k = 0; k < d.n_states; ++k) m = std::max(m, std::abs(dx_[d.offset + k]));
            out.push_back(m);
        }
        return out;
    }

    double max_derivative() const {
        double m = 0.0;
        for (double v : dx_) m = std::max(m, std::abs(v));
        return m;
    }

    /// Overwrites the continuous state (tests use this to perturb an
    /// equilibrium) and re-solves the network.
    void set_state_vector(std::vector<double> x) {
        if (x.size() != x_.size()) throw ContractError("state vector size mismatch");
        x_ = std::move(x);
        refresh();
    }

    MachineState machine_state(std::size_t device) const {
        const auto& d = devices_.at(device);
        if (!std::holds_alternative<MachineUnit>(d.unit)) throw ContractError("device is not a machine");
        return unpack_machine(x_.data() + d.offset);
    }

    const MachineParams& machine_params(std::size_t device) const {
        return std::get<MachineUnit>(devices_.at(device).unit).params;
    }

    GflState gfl_state(std::size_t device) const {
        const auto& d = devices_.at(device);
        const auto& g = std::get<GflUnit>(d.unit);
        GflState s = g.status;
        s.theta_pll = x_[d.offset];
        s.pll_integ = x_[d.offset + 1];
        s.id_filt = x_[d.offset + 2];
        s.iq_filt = x_[d.offset + 3];
        return s;
    }

    bool device_online(std::size_t device) const { return devices_.at(device).online; }

    /// Advances the continuous state by `dt` with one RK4 step, then applies
    /// GFL trip logic. Throws ConvergenceError when the network solve fails.
    void step(double dt) { step_to(t_ + dt); }

    /// Advances to exactly `t_end` in one RK4 step.
    void step_to(double t_end) {
        const double dt = t_end - t_;
        if (!(dt > 0.0)) throw ContractError("step_to needs a time after the current one");
        auto rhs = [this](double, const std::vector<double>& x, std::vector<double>& dx) {
            evaluate(x, dx, stage_v_);
        };
        stage_v_ = v_;
        rk4_step(rhs, t_, x_, dt, ws_, &dx_);
        t_ = t_end;
        for (double v : x_) {
            if (!std::isfinite(v)) throw ConvergenceError("state became non-finite", v, 0);
        }
        evaluate(x_, dx_, v_);
        if (update_trips(dt)) evaluate(x_, dx_, v_);
    }

    void apply_event(const Event& ev) {
        switch (ev.kind) {
            case EventKind::apply_fault:
                faults_.add_shunt(ev.bus, ev.admittance);
                break;
            case EventKind::clear_fault:
                if (faults_.shunt(ev.bus) != Complex{}) faults_.add_shunt(ev.bus, -faults_.shunt(ev.bus));
                break;
            case EventKind::open_breaker:
            case EventKind::close_breaker: {
                const bool close = ev.kind == EventKind::close_breaker;
                if (ev.target == BreakerTarget::branch) {
                    branches_.at(ev.index).in_service = close;
                    rebuild_network_matrix();
                } else {
                    auto& d = devices_.at(ev.index);
                    d.online = close;
                    if (auto* g = std::get_if<GflUnit>(&d.unit)) {
                        g->status.online = close;
                        g->status.trip_timer = 0.0;
                    }
                }
                break;
            }
        }
        rebuild_solver();
        refresh();
    }

    /// True when no device able to supply sustained active power (a
    /// generator, the aux source or a GFL) is online.
    bool all_sources_offline() const {
        return std::none_of(devices_.begin(), devices_.end(), [](const DeviceSlot& d) {
            return d.online && d.kind != DeviceKind::sync_cond;
        });
    }

    std::vector<DeviceSample> sample_devices() const {
        std::vector<DeviceSample> out;
        const double fb = spec_.config.base_freq;
        const double base = spec_.config.base_mva;
        for (const auto& d : devices_) {
            DeviceSample s;
            s.online = d.online;
            const Complex v = v_[d.bus];
            std::visit(
                [&](const auto& u) {
                    using T = std::decay_t<decltype(u)>;
                    if constexpr (std::is_same_v<T, MachineUnit>) {
                        const auto ms = unpack_machine(x_.data() + d.offset);
                        s.freq = ms.omega * fb;
                        s.delta = ms.delta;
                        if (d.online) {
                            const auto st = stator(u.params, ms, v);
                            s.s = v * std::conj(st.current);
                            s.i_mag = std::abs(st.current) * base / u.params.rated_mva;
                        }
                    } else if constexpr (std::is_same_v<T, GflUnit>) {
                        const auto gs = gfl_state(index_of(d));
                        s.freq = gs.omega_pll * fb;
                        s.delta = gs.theta_pll;
                        if (d.online) {
                            const Complex i = gs.current_network();
                            s.s = v * std::conj(i * u.scale);
                            s.i_mag = std::abs(i);
                        }
                    } else {
                        s.freq = fb;
                        s.delta = std::arg(u.emf);
                        if (d.online) {
                            const Complex i = (u.emf - v) * u.y;
                            s.s = v * std::conj(i);
                            s.i_mag = std::abs(i);
                        }
                    }
                },
                d.unit);
            out.push_back(s);
        }
        return out;
    }

    /// |sum of device injections - load consumption - power absorbed by the
    /// network (branches, shunts, faults)| at the current instant.
    double power_mismatch() const {
        Complex inj{};
        for (const auto& s : sample_devices()) inj += s.s;
        Complex load{};
        for (std::size_t k = 0; k < loads_.size(); ++k) {
            const Complex v = v_[loads_[k].bus];
            load += dynamic_loads() ? v * std::conj(load_admittance(k, x_) * v) : loads_[k].power(v);
        }
        const auto n = static_cast<Eigen::Index>(v_.size());
        Eigen::Map<const Eigen::VectorXcd> vv(v_.data(), n);
        Eigen::VectorXcd i_net = y_net_ * vv;
        Complex absorbed{};
        for (Eigen::Index i = 0; i < n; ++i) absorbed += vv(i) * std::conj(i_net(i));
        return std::abs(inj - load - absorbed);
    }

  private:
    using MachineUnit = detail::MachineUnit;
    using GflUnit = detail::GflUnit;
    using AuxUnit = detail::AuxUnit;

    struct DeviceSlot {
        DeviceKind kind;
        std::size_t bus = 0;
        std::size_t offset = 0;
        std::size_t n_states = 0;
        bool online = true;
        std::variant<MachineUnit, GflUnit, AuxUnit> unit;
    };

    static constexpr std::size_t kMachineStates = 7;
    static constexpr std::size_t kGflStates = 4;

    static MachineState unpack_machine(const double* p) { return {p[0], p[1], p[2], p[3], p[4], p[5]}; }

    std::size_t index_of(const DeviceSlot& d) const { return static_cast<std::size_t>(&d - devices_.data()); }

    double omega_b() const { return omega_base(spec_.config.base_freq); }

    void initialize() {
        const auto& cfg = spec_.config;
        const double base = cfg.base_mva;
        NetworkModel net = spec_.network;
        const std::size_t n = net.size();

        // Slack: the aux source if present, otherwise the first generator.
        std::size_t slack_dev = spec_.placements.size();
        for (std::size_t i = 0; i < spec_.placements.size(); ++i) {
            if (spec_.placements[i].kind == DeviceKind::aux_source) slack_dev = i;
        }
        if (slack_dev == spec_.placements.size()) {
            for (std::size_t i = 0; i < spec_.placements.size(); ++i) {
                if (spec_.placements[i].kind == DeviceKind::sync_gen) {
                    slack_dev = i;
                    break;
                }
            }
        }
        if (slack_dev == spec_.placements.size()) {
            throw InitializationError("scenario '" + spec_.name + "' has no generator or aux source to act as slack");
        }
        const std::size_t slack_bus = spec_.placements[slack_dev].bus;
        for (auto& b : net.buses) b.init_role = BusRole::pq;
        for (const auto& pl : spec_.placements) net.buses[pl.bus].init_role = BusRole::pv;
        net.buses[slack_bus].init_role = BusRole::slack;

        Dispatch dispatch{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};
        for (std::size_t i = 0; i < n; ++i) dispatch.v_set[i] = net.buses[i].v_set;
        for (std::size_t i = 0; i < spec_.placements.size(); ++i) {
            const auto& pl = spec_.placements[i];
            if (pl.kind == DeviceKind::sync_gen && i != slack_dev) {
                dispatch.p_gen[pl.bus] += pl.sync().p_set * pl.sync().machine.rated_mva / base;
            } else if (pl.kind == DeviceKind::gfl) {
                dispatch.p_gen[pl.bus] += pl.gfl().params.p_set * pl.gfl().params.rated_mva / base;
            }
        }

        // Condensers with stator resistance absorb their copper losses; iterate
        // the power flow until that draw is consistent.
        std::vector<double> cond_draw(spec_.placements.size(), 0.0);
        std::vector<Complex> dev_s;
        for (int pass = 0;; ++pass) {
            Dispatch d = dispatch;
            for (std::size_t i = 0; i < spec_.placements.size(); ++i) d.p_gen[spec_.placements[i].bus] -= cond_draw[i];
            try {
                pf_ = solve_power_flow(net, d, PowerFlowOptions{1e-11, 40});
            } catch (const ConvergenceError& e) {
                throw InitializationError("scenario '" + spec_.name + "': " + e.what());
            }
            dev_s = allocate_bus_power(net, slack_dev, cond_draw);
            bool settled = true;
            for (std::size_t i = 0; i < spec_.placements.size(); ++i) {
                const auto& pl = spec_.placements[i];
                if (pl.kind != DeviceKind::sync_cond || pl.sync().machine.ra == 0.0) continue;
                const Complex v = pf_.voltage(pl.bus);
                const Complex cur = std::conj(dev_s[i] / v);
                const double draw = std::norm(cur) * rebase_impedance(pl.sync().machine.ra, pl.sync().machine.rated_mva, base);
                if (std::abs(draw - cond_draw[i]) > 1e-13) settled = false;
                cond_draw[i] = draw;
            }
            if (settled) break;
            if (pass > 50) throw InitializationError("condenser loss iteration did not settle");
        }

        // Device states.
        branches_ = net.branches;
        std::size_t offset = 0;
        for (std::size_t i = 0; i < spec_.placements.size(); ++i) {
            const auto& pl = spec_.placements[i];
            DeviceSlot slot;
            slot.kind = pl.kind;
            slot.bus = pl.bus;
            slot.offset = offset;
            const Complex v = pf_.voltage(pl.bus);
            const Complex s = dev_s[i];
            const Complex cur = std::conj(s / v);
            switch (pl.kind) {
                case DeviceKind::sync_gen:
                case DeviceKind::sync_cond: {
                    MachineUnit mu;
                    mu.params = to_system_base(pl.sync().machine, base);
                    MachineEquilibrium eq;
                    try {
                        eq = machine_equilibrium(mu.params, pl.sync().exciter, v, cur);
                    } catch (const InitializationError& e) {
                        throw InitializationError("scenario '" + spec_.name + "', device " + std::to_string(i) + ": " + e.what());
                    }
                    mu.exciter = eq.exciter;
                    mu.p_mech = pl.kind == DeviceKind::sync_cond ? 0.0 : eq.p_mech;
                    slot.n_states = kMachineStates;
                    slot.unit = mu;
                    const auto& ms = eq.state;
                    x_.insert(x_.end(), {ms.delta, ms.omega, ms.eq_p, ms.ed_p, ms.eq_pp, ms.ed_pp, eq.exciter.v_meas});
                    break;
                }
                case DeviceKind::gfl: {
                    GflUnit gu;
                    gu.params = pl.gfl().params;
                    gu.scale = gu.params.rated_mva / base;
                    const Complex s_dev = s / gu.scale;
                    const double vm = std::abs(v);
                    if (pl.gfl().v_n_from_powerflow) gu.params.v_n = vm;
                    gu.params.q_set = s_dev.imag() - (gu.params.v_n - vm) * gu.params.m_q;
                    if (gu.params.p_set > gu.params.p_max) {
                        throw InitializationError("scenario '" + spec_.name + "', device " + std::to_string(i) +
                                                  ": p_set exceeds available power p_max");
                    }
                    const Complex i_dev{s_dev.real() / vm, -s_dev.imag() / vm};
                    if (std::abs(i_dev) > gu.params.i_max) {
                        std::ostringstream msg;
                        msg << "scenario '" << spec_.name << "', device " << i << ": dispatch needs " << std::abs(i_dev)
                            << " pu current, above i_max " << gu.params.i_max;
                        throw InitializationError(msg.str());
                    }
                    slot.n_states = kGflStates;
                    gu.status = GflState{};
                    gu.status.omega_pll = 1.0;
                    slot.unit = gu;
                    x_.insert(x_.end(), {std::arg(v), 0.0, i_dev.real(), i_dev.imag()});
                    break;
                }
                case DeviceKind::aux_source: {
                    const Complex z{pl.aux().r, pl.aux().x};
                    slot.unit = AuxUnit{v + z * cur, 1.0 / z};
                    slot.n_states = 0;
                    break;
                }
            }
            offset += slot.n_states;
            devices_.push_back(std::move(slot));
        }

        loads_.clear();
        load_offset_ = offset;
        for (const auto& b : net.buses) {
            if (b.load_p != 0.0 || b.load_q != 0.0) {
                loads_.push_back(ConstantPowerLoad::at_voltage(b.id, {b.load_p, b.load_q}, pf_.v_mag[b.id]));
                if (dynamic_loads()) x_.push_back(pf_.v_mag[b.id]);
            }
        }
        faults_ = AdmittanceMatrix(n, AdmittanceMatrix::Sparse(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
        rebuild_network_matrix();
        rebuild_solver();
        v_.resize(n);
        for (std::size_t i = 0; i < n; ++i) v_[i] = pf_.voltage(i);
        dx_.resize(x_.size());
        try {
            evaluate(x_, dx_, v_);
        } catch (const ConvergenceError& e) {
            throw InitializationError("scenario '" + spec_.name + "': initial network solve failed: " + e.what());
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(v_[i] - pf_.voltage(i)) > 1e-6) {
                throw InitializationError("scenario '" + spec_.name + "': dynamic network solve disagrees with power flow at bus " +
                                          net.buses[i].name);
            }
        }
        for (auto& d : devices_) {
            if (auto* g = std::get_if<GflUnit>(&d.unit)) {
                g->status.omega_pll = pll_derivs(g->params, gfl_state(index_of(d)), v_[d.bus], omega_b()).omega_pll;
            }
        }
        const auto res = device_residuals();
        if (*std::max_element(res.begin(), res.end()) > kEquilibriumTolerance) {
            std::ostringstream msg;
            msg << "scenario '" << spec_.name << "': equilibrium residual too large;";
            for (std::size_t i = 0; i < res.size(); ++i) msg << " device " << i << "=" << res[i];
            throw InitializationError(msg.str());
        }
    }

  public:
    static constexpr double kEquilibriumTolerance = 1e-9;

  private:
    /// Splits each bus's power-flow generation among its devices. Fixed
    /// active dispatch stays with its device; the slack device absorbs the
    /// remainder. Reactive remainder goes to the aux source if present, else
    /// to synchronous devices by rating, else to GFLs by rating.
    std::vector<Complex> allocate_bus_power(const NetworkModel& net, std::size_t slack_dev,
                                            const std::vector<double>& cond_draw) const {
        const double base = spec_.config.base_mva;
        const auto& pls = spec_.placements;
        std::vector<Complex> out(pls.size());
        for (std::size_t bus = 0; bus < net.size(); ++bus) {
            std::vector<std::size_t> here;
            for (std::size_t i = 0; i < pls.size(); ++i) {
                if (pls[i].bus == bus) here.push_back(i);
            }
            if (here.empty()) continue;
            double p_rest = pf_.gen_p[bus];
            for (auto i : here) {
                const auto& pl = pls[i];
                double p = 0.0;
                if (i == slack_dev) continue;
                if (pl.kind == DeviceKind::sync_gen) p = pl.sync().p_set * pl.sync().machine.rated_mva / base;
                if (pl.kind == DeviceKind::gfl) p = pl.gfl().params.p_set * pl.gfl().params.rated_mva / base;
                if (pl.kind == DeviceKind::sync_cond) p = -cond_draw[i];
                out[i].real(p);
                p_rest -= p;
            }
            if (pls[slack_dev].bus == bus) out[slack_dev].real(p_rest);

            std::vector<std::size_t> absorbers;
            for (auto i : here) {
                if (pls[i].kind == DeviceKind::aux_source) absorbers = {i};
            }
            if (absorbers.empty()) {
                for (auto i : here) {
                    if (pls[i].kind == DeviceKind::sync_gen || pls[i].kind == DeviceKind::sync_cond) absorbers.push_back(i);
                }
            }
            if (absorbers.empty()) absorbers = here;
            double q_rest = pf_.gen_q[bus];
            for (auto i : here) {
                if (std::find(absorbers.begin(), absorbers.end(), i) != absorbers.end()) continue;
                double q = 0.0;
                if (pls[i].kind == DeviceKind::gfl) q = pls[i].gfl().params.q_set * pls[i].gfl().params.rated_mva / base;
                out[i].imag(q);
                q_rest -= q;
            }
            double rating_sum = 0.0;
            for (auto i : absorbers) rating_sum += pls[i].rated_mva();
            for (auto i : absorbers) {
                const double share = rating_sum > 0.0 ? pls[i].rated_mva() / rating_sum : 1.0 / static_cast<double>(absorbers.size());
                out[i].imag(q_rest * share);
            }
        }
        return out;
    }

    void rebuild_network_matrix() {
        // Connectivity is not required mid-run; an islanded bus with no shunt
        // makes the solve singular and is reported as a collapse.
        const auto n = static_cast<Eigen::Index>(spec_.network.size());
        y_branches_ = Eigen::MatrixXcd::Zero(n, n);
        for (const auto& br : branches_) {
            if (!br.in_service) continue;
            const Complex ys = 1.0 / Complex{br.r, br.x};
            const Complex hb{0.0, br.b_shunt / 2.0};
            const auto f = static_cast<Eigen::Index>(br.from_bus);
            const auto t = static_cast<Eigen::Index>(br.to_bus);
            y_branches_(f, f) += (ys + hb) / (br.tap * br.tap);
            y_branches_(t, t) += ys + hb;
            y_branches_(f, t) += -ys / br.tap;
            y_branches_(t, f) += -ys / br.tap;
        }
    }

    void rebuild_solver() {
        y_net_ = y_branches_;
        for (const auto& [bus, ys] : faults_.shunts()) y_net_(static_cast<Eigen::Index>(bus), static_cast<Eigen::Index>(bus)) += ys;
        Eigen::MatrixXcd y_aug = y_net_;
        for (const auto& d : devices_) {
            if (!d.online) continue;
            const auto b = static_cast<Eigen::Index>(d.bus);
            if (const auto* m = std::get_if<MachineUnit>(&d.unit)) y_aug(b, b) += 1.0 / m->params.subtransient_impedance();
            if (const auto* a = std::get_if<AuxUnit>(&d.unit)) y_aug(b, b) += a->y;
        }
        if (dynamic_loads()) {
            y_aug_ = std::move(y_aug);
        } else {
            solver_ = NetworkSolver(y_aug, loads_, spec_.config.network_tol);
        }
    }

    bool dynamic_loads() const { return spec_.config.load_tm > 0.0; }

    /// Load admittances at the measured voltages held in `x`.
    Complex load_admittance(std::size_t k, const std::vector<double>& x) const {
        return loads_[k].admittance_at(x[load_offset_ + k]);
    }

    void refresh() { evaluate(x_, dx_, v_); }

    /// Network solve for state `x` followed by every device derivative.
    /// `v` holds the initial guess on entry and the solution on exit.
    void evaluate(const std::vector<double>& x, std::vector<double>& dx, std::vector<Complex>& v) {
        const double wb = omega_b();
        sources_.assign(v.size(), Complex{});
        for (const auto& d : devices_) {
            if (!d.online) continue;
            if (const auto* m = std::get_if<MachineUnit>(&d.unit)) {
                sources_[d.bus] += norton_equivalent(m->params, unpack_machine(x.data() + d.offset)).current;
            } else if (const auto* g = std::get_if<GflUnit>(&d.unit)) {
                const double* p = x.data() + d.offset;
                sources_[d.bus] += Complex{p[2], p[3]} * std::polar(1.0, p[0]) * g->scale;
            } else if (const auto* a = std::get_if<AuxUnit>(&d.unit)) {
                sources_[d.bus] += a->emf * a->y;
            }
        }
        if (dynamic_loads()) {
            Eigen::MatrixXcd y = y_aug_;
            for (std::size_t k = 0; k < loads_.size(); ++k) {
                const auto b = static_cast<Eigen::Index>(loads_[k].bus);
                y(b, b) += load_admittance(k, x);
            }
            const auto n = static_cast<Eigen::Index>(v.size());
            Eigen::Map<const Eigen::VectorXcd> src(sources_.data(), n);
            Eigen::VectorXcd sol = y.partialPivLu().solve(src);
            for (Eigen::Index i = 0; i < n; ++i) {
                const Complex vi = sol(i);
                if (!std::isfinite(vi.real()) || !std::isfinite(vi.imag())) {
                    throw ConvergenceError("network solve produced non-finite voltages", std::abs(vi), 1);
                }
                v[static_cast<std::size_t>(i)] = vi;
            }
        } else {
            auto sol = solver_.solve(sources_, v);
            v = std::move(sol.v);
        }

        dx.assign(x.size(), 0.0);
        for (const auto& d : devices_) {
            if (!d.online) continue;
            const double* p = x.data() + d.offset;
            double* dp = dx.data() + d.offset;
            const Complex vt = v[d.bus];
            if (const auto* m = std::get_if<MachineUnit>(&d.unit)) {
                ExciterST1A exc = m->exciter;
                exc.v_meas = p[6];
                const auto md = machine_derivs(m->params, unpack_machine(p), exc, vt, m->p_mech, wb);
                const auto ed = exciter_derivs(exc, std::abs(vt));
                dp[0] = md.d_delta;
                dp[1] = md.d_omega;
                dp[2] = md.d_eq_p;
                dp[3] = md.d_ed_p;
                dp[4] = md.d_eq_pp;
                dp[5] = md.d_ed_pp;
                dp[6] = ed.d_v_meas;
            } else if (const auto* g = std::get_if<GflUnit>(&d.unit)) {
                GflState s;
                s.theta_pll = p[0];
                s.pll_integ = p[1];
                const auto pd = pll_derivs(g->params, s, vt, wb);
                const auto tgt = droop_targets(g->params, pd.omega_pll, std::abs(vt));
                const Complex cmd = current_command(g->params, tgt.p_star, tgt.q_star, vt * std::polar(1.0, -p[0]));
                dp[0] = pd.d_theta;
                dp[1] = pd.d_integ;
                dp[2] = (cmd.real() - p[2]) / g->params.t_i;
                dp[3] = (cmd.imag() - p[3]) / g->params.t_i;
            }
        }
        if (dynamic_loads()) {
            for (std::size_t k = 0; k < loads_.size(); ++k) {
                const std::size_t i = load_offset_ + k;
                dx[i] = (std::abs(v[loads_[k].bus]) - x[i]) / spec_.config.load_tm;
            }
        }
    }

    /// Updates PLL frequency estimates and trip timers after an accepted
    /// step. Returns true when a unit went offline.
    bool update_trips(double dt) {
        bool changed = false;
        for (auto& d : devices_) {
            auto* g = std::get_if<GflUnit>(&d.unit);
            if (!g || !d.online) continue;
            GflState s = gfl_state(index_of(d));
            g->status.omega_pll = pll_derivs(g->params, s, v_[d.bus], omega_b()).omega_pll;
            if (!trip_check(g->params, g->status, std::abs(v_[d.bus]), dt, spec_.config.base_freq)) {
                d.online = false;
                x_[d.offset + 2] = 0.0;
                x_[d.offset + 3] = 0.0;
                trip_log_.push_back(index_of(d));
                changed = true;
            }
        }
        if (changed) rebuild_solver();
        return changed;
    }

  public:
    /// Devices tripped since the last call (drained).
    std::vector<std::size_t> take_trips() {
        auto out = std::move(trip_log_);
        trip_log_.clear();
        return out;
    }

  private:
    ScenarioSpec spec_;
    PowerFlowSolution pf_;
    std::vector<DeviceSlot> devices_;
    std::vector<Branch> branches_;
    std::vector<ConstantPowerLoad> loads_;
    AdmittanceMatrix faults_;
    Eigen::MatrixXcd y_branches_;
    Eigen::MatrixXcd y_net_;
    NetworkSolver solver_;
    Eigen::MatrixXcd y_aug_;
    std::size_t load_offset_ = 0;
    std::vector<double> x_, dx_;
    std::vector<Complex> v_, stage_v_, sources_;
    Rk4Workspace ws_;
    std::vector<std::size_t> trip_log_;
    double t_ = 0.0;
};

namespace detail {

inline void record(SimResult& r, const Simulation& sim) {
    if (!r.t.empty() && r.t.back() >= sim.time()) {
        // Post-event values replace the pre-event row at the same instant.
        r.t.pop_back();
        for (auto& c : r.v_mag) c.pop_back();
        for (auto& c : r.v_ang) c.pop_back();
        for (auto& d : r.devices) {
            d.p.pop_back();
            d.q.pop_back();
            d.freq.pop_back();
            d.delta.pop_back();
            d.i_mag.pop_back();
            d.online.pop_back();
        }
        r.power_mismatch.pop_back();
    }
    r.t.push_back(sim.time());
    const auto& v = sim.bus_voltages();
    for (std::size_t i = 0; i < v.size(); ++i) {
        r.v_mag[i].push_back(std::abs(v[i]));
        r.v_ang[i].push_back(std::arg(v[i]));
    }
    const auto samples = sim.sample_devices();
    for (std::size_t k = 0; k < samples.size(); ++k) {
        auto& d = r.devices[k];
        d.p.push_back(samples[k].s.real());
        d.q.push_back(samples[k].s.imag());
        d.freq.push_back(samples[k].freq);
        d.delta.push_back(samples[k].delta);
        d.i_mag.push_back(samples[k].i_mag);
        d.online.push_back(samples[k].online ? 1 : 0);
    }
    r.power_mismatch.push_back(sim.power_mismatch());
}

inline std::string describe(const Event& ev, const ScenarioSpec& spec) {
    std::ostringstream s;
    s << to_string(ev.kind);
    if (ev.kind == EventKind::apply_fault || ev.kind == EventKind::clear_fault) {
        s << " bus " << spec.network.buses.at(ev.bus).name;
    } else if (ev.target == BreakerTarget::device) {
        s << " device " << spec.device_labels().at(ev.index);
    } else {
        s << " branch " << ev.index;
    }
    return s.str();
}

}  // namespace detail

/// Initializes and integrates `spec` to config.t_end. Network divergence and
/// loss of every source end the run early; the reason is recorded rather
/// than thrown. Scenario validation and initialization failures throw.
inline SimResult run(const ScenarioSpec& spec) {
    Simulation sim(spec);
    const auto& cfg = sim.scenario().config;
    SimResult r;
    r.scenario = spec.name;
    for (const auto& b : spec.network.buses) r.bus_names.push_back(b.name);
    r.device_labels = spec.device_labels();
    for (const auto& pl : spec.placements) r.device_kinds.push_back(pl.kind);
    r.v_mag.resize(spec.network.size());
    r.v_ang.resize(spec.network.size());
    r.devices.resize(spec.placements.size());
    detail::record(r, sim);

    const double eps = 1e-9 * cfg.dt;
    std::size_t next_event = 0;
    auto finish = [&](Termination why, std::string detail) {
        r.termination = why;
        r.termination_detail = std::move(detail);
        r.end_time = sim.time();
        return r;
    };
    auto fire_events_at = [&](double t) {
        while (next_event < spec.events.size() && spec.events[next_event].time <= t + eps) {
            const auto& ev = spec.events[next_event++];
            r.events.push_back({ev.time, detail::describe(ev, spec)});
            sim.apply_event(ev);
        }
    };

    try {
        fire_events_at(0.0);
        if (!r.events.empty()) detail::record(r, sim);
        // Steps land on the global grid n·dt; an event inside a grid
        // interval splits that step so the event fires at its own time.
        long long n = 0;
        while (sim.time() < cfg.t_end - eps) {
            const double grid_next = std::min(cfg.t_end, static_cast<double>(n + 1) * cfg.dt);
            double target = grid_next;
            if (next_event < spec.events.size() && spec.events[next_event].time < target - eps) {
                target = spec.events[next_event].time;
            }
            sim.step_to(target);
            const bool on_grid = target == grid_next;
            if (on_grid) ++n;
            for (auto dev : sim.take_trips()) {
                r.events.push_back({sim.time(), "trip device " + r.device_labels[dev]});
            }
            if (sim.all_sources_offline()) {
                detail::record(r, sim);
                return finish(Termination::all_sources_offline, "no active-power source remains online");
            }
            if ((on_grid && n % cfg.output_decimation == 0) || sim.time() >= cfg.t_end - eps) detail::record(r, sim);
            const std::size_t before = r.events.size();
            fire_events_at(sim.time());
            if (r.events.size() != before) {
                detail::record(r, sim);
                if (sim.all_sources_offline()) {
                    return finish(Termination::all_sources_offline, "no active-power source remains online");
                }
            }
        }
    } catch (const ConvergenceError& e) {
        return finish(Termination::network_collapse, e.what());
    }
    return finish(Termination::completed, "");
}

}  // namespace scsim
