#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "scsim/scsim.hpp"

namespace scsim::testing {

struct SwingSample {
    double t = 0.0;
    double d_omega = 0.0;  // pu
    double d_delta = 0.0;  // rad
};

/// Open-circuit machine (no stator current, exciter held) driven by a
/// constant net accelerating power, integrated with the library RK4 step.
inline std::vector<SwingSample> isolated_swing(double h, double accel_power, double t_end, double dt) {
    MachineParams p;
    p.h = h;
    p.d = 0.0;
    MachineState s;
    s.delta = 0.3;
    s.eq_p = s.eq_pp = 1.0;
    ExciterST1A exc;
    exc.v_meas = 1.0;
    exc.vref = 1.0 + s.eq_p / exc.ka;

    auto pack = [](const MachineState& m) { return std::vector<double>{m.delta, m.omega, m.eq_p, m.ed_p, m.eq_pp, m.ed_pp}; };
    auto unpack = [](const std::vector<double>& x) { return MachineState{x[0], x[1], x[2], x[3], x[4], x[5]}; };
    auto rhs = [&](double, const std::vector<double>& x, std::vector<double>& dx) {
        const MachineState m = unpack(x);
        const auto d = machine_derivs(p, m, exc, m.emf_pp(), accel_power);
        dx = {d.d_delta, d.d_omega, d.d_eq_p, d.d_ed_p, d.d_eq_pp, d.d_ed_pp};
    };

    std::vector<double> x = pack(s);
    Rk4Workspace ws;
    std::vector<SwingSample> out{{0.0, 0.0, 0.0}};
    const auto steps = static_cast<long>(std::llround(t_end / dt));
    for (long k = 1; k <= steps; ++k) {
        rk4_step(rhs, (k - 1) * dt, x, dt, ws);
        out.push_back({k * dt, x[1] - 1.0, x[0] - s.delta});
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

inline ScenarioSpec without_events(ScenarioSpec s, double t_end) {
    s.events.clear();
    s.config.t_end = t_end;
    return s;
}

/// Index range of rows with t in [t0, t1].
inline std::pair<std::size_t, std::size_t> rows_between(const SimResult& r, double t0, double t1) {
    const auto lo = std::lower_bound(r.t.begin(), r.t.end(), t0 - 1e-9) - r.t.begin();
    const auto hi = std::upper_bound(r.t.begin(), r.t.end(), t1 + 1e-9) - r.t.begin();
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

inline std::vector<std::size_t> devices_of_kind(const ScenarioSpec& s, DeviceKind kind) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < s.placements.size(); ++i) {
        if (s.placements[i].kind == kind) out.push_back(i);
    }
    return out;
}

/// Largest deviation of any logged signal from its first value.
inline double max_drift(const SimResult& r) {
    double worst = 0.0;
    auto scan = [&worst](const auto& v) {
        for (const auto& x : v) worst = std::max(worst, std::abs(static_cast<double>(x) - static_cast<double>(v.front())));
    };
    for (const auto& c : r.v_mag) scan(c);
    for (const auto& c : r.v_ang) scan(c);
    for (const auto& d : r.devices) {
        scan(d.p);
        scan(d.q);
        scan(d.freq);
        scan(d.delta);
        scan(d.i_mag);
        scan(d.online);
    }
    return worst;
}

/// State after integrating `t_span` from a perturbed equilibrium with step `dt`.
inline std::vector<double> perturbed_run(const ScenarioSpec& spec, double dt, double t_span) {
    Simulation sim(spec);
    auto x = sim.state_vector();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += 1e-2 * (static_cast<double>(i % 3) - 1.0);
    sim.set_state_vector(x);
    const auto steps = std::llround(t_span / dt);
    for (long long k = 0; k < steps; ++k) sim.step_to(static_cast<double>(k + 1) * dt);
    return sim.state_vector();
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Observed convergence order of the integrator: errors at t_span/400 and
/// t_span/800 against a t_span/12800 reference. The 20 Hz PLL keeps 1 ms
/// steps short of the asymptotic range, hence the smaller steps.
struct OrderEstimate {
    double coarse_error = 0.0;
    double fine_error = 0.0;
    double order = 0.0;
};

inline OrderEstimate rk4_order(const ScenarioSpec& spec, double t_span = 0.1) {
    const auto ref = perturbed_run(spec, t_span / 12800, t_span);
    OrderEstimate e;
    e.coarse_error = max_abs_diff(perturbed_run(spec, t_span / 400, t_span), ref);
    e.fine_error = max_abs_diff(perturbed_run(spec, t_span / 800, t_span), ref);
    e.order = std::log2(e.coarse_error / e.fine_error);
    return e;
}

/// Scratch directory under the build tree (or the system temp dir).
inline std::filesystem::path scratch_dir(const std::string& name) {
    const char* env = std::getenv("SCSIM_TEST_TMP");
    const std::filesystem::path root = env ? std::filesystem::path(env) : std::filesystem::temp_directory_path() / "scsim_tests";
    const auto dir = root / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace scsim::testing
