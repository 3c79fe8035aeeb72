#pragma once

// Synchronous machine shared by generators and condensers: two-axis model
// with transient and subtransient emfs, swing equation, ST1A excitation,
// Norton interface to the network, and closed-form swing references.
//
// Frame convention: a dq quantity is held as the complex number (q + j d)
// and maps to the network frame by multiplication with exp(j*delta).
// Stator currents use the generator convention (positive out of the
// machine). With that convention the stator relation is
//   E'' = V + (ra + j x'') I.

#include <algorithm>
#include <cmath>
#include <string>

#include "scsim/error.hpp"
#include "scsim/units.hpp"

namespace scsim {

enum class MachineMode { generator, condenser };

struct MachineParams {
    double rated_mva = 200.0;
    double h = 4.0;      // s, on rated_mva
    double d = 0.0;      // pu power per pu speed deviation
    double ra = 0.0;
    double xd = 1.7916;
    double xq = 1.7290;
    double xd_p = 0.2396;
    double xq_p = 0.3938;
    double xd_pp = 0.20;
    double xq_pp = 0.20;
    double xl = 0.1042;
    double td0_p = 6.0;
    double tq0_p = 0.535;
    double td0_pp = 0.03;
    double tq0_pp = 0.05;
    MachineMode mode = MachineMode::generator;

    /// Rejects degenerate reactance orderings and non-positive time constants.
    /// The network interface uses a single subtransient reactance, so
    /// xq_pp must equal xd_pp.
    void validate() const {
        auto fail = [](const std::string& m) { throw ContractError("machine parameters: " + m); };
        if (!(rated_mva > 0.0)) fail("rated_mva must be positive");
        if (!(h > 0.0)) fail("h must be positive");
        if (!(d >= 0.0)) fail("d must be non-negative");
        if (!(ra >= 0.0)) fail("ra must be non-negative");
        if (!(xd >= xd_p && xd_p >= xd_pp && xd_pp > xl && xl >= 0.0)) fail("require xd >= xd_p >= xd_pp > xl >= 0");
        if (!(xq >= xq_p && xq_p >= xq_pp && xq_pp > xl)) fail("require xq >= xq_p >= xq_pp > xl");
        if (xq_pp != xd_pp) fail("xq_pp must equal xd_pp (no subtransient saliency)");
        if (!(td0_p > 0.0 && tq0_p > 0.0 && td0_pp > 0.0 && tq0_pp > 0.0)) fail("time constants must be positive");
    }

    Complex subtransient_impedance() const { return {ra, xd_pp}; }
};

/// Re-expresses machine-base parameters on the system MVA base. Reactances
/// and resistance scale by base/rated, h and d by rated/base; time constants
/// are unchanged. `rated_mva` is kept for reporting.
inline MachineParams to_system_base(const MachineParams& m, double base_mva) {
    MachineParams s = m;
    const double r = m.rated_mva;
    for (double* z : {&s.ra, &s.xd, &s.xq, &s.xd_p, &s.xq_p, &s.xd_pp, &s.xq_pp, &s.xl}) {
        *z = rebase_impedance(*z, r, base_mva);
    }
    s.h = rebase_power(m.h, r, base_mva);
    s.d = rebase_power(m.d, r, base_mva);
    return s;
}

struct MachineState {
    double delta = 0.0;  // rad, q-axis position relative to the synchronous frame
    double omega = 1.0;  // pu speed
    double eq_p = 0.0;
    double ed_p = 0.0;
    double eq_pp = 0.0;
    double ed_pp = 0.0;

    Complex emf_pp_dq() const { return {eq_pp, ed_pp}; }
    Complex emf_pp() const { return emf_pp_dq() * std::polar(1.0, delta); }
};

struct MachineDerivs {
    double d_delta = 0.0;
    double d_omega = 0.0;
    double d_eq_p = 0.0;
    double d_ed_p = 0.0;
    double d_eq_pp = 0.0;
    double d_ed_pp = 0.0;

    double max_abs() const {
        return std::max({std::abs(d_delta), std::abs(d_omega), std::abs(d_eq_p), std::abs(d_ed_p),
                         std::abs(d_eq_pp), std::abs(d_ed_pp)});
    }
};

/// ST1A static exciter without lead-lag or rate feedback: measurement lag
/// followed by a proportional gain with field-voltage ceilings.
struct ExciterST1A {
    double tr = 0.02;
    double ka = 200.0;
    double efd_min = -8.0;
    double efd_max = 8.0;
    double vref = 1.0;
    double v_meas = 1.0;  // state

    double efd() const { return std::clamp(ka * (vref - v_meas), efd_min, efd_max); }

    void validate() const {
        if (!(tr > 0.0)) throw ContractError("exciter tr must be positive");
        if (!(ka > 0.0)) throw ContractError("exciter ka must be positive");
        if (!(efd_min < efd_max)) throw ContractError("exciter requires efd_min < efd_max");
    }
};

struct ExciterDerivs {
    double d_v_meas = 0.0;
    double efd = 0.0;  // limited output at the current state
};

inline ExciterDerivs exciter_derivs(const ExciterST1A& exc, double v_terminal_mag) {
    if (v_terminal_mag < 0.0) throw ContractError("terminal voltage magnitude must be non-negative");
    return {(v_terminal_mag - exc.v_meas) / exc.tr, exc.efd()};
}

struct StatorQuantities {
    Complex current;     // network frame, out of the machine
    Complex current_dq;  // iq + j id
    double p_e = 0.0;    // air-gap power E''·conj(I), generator convention
    double q_e = 0.0;
};

inline StatorQuantities stator(const MachineParams& params, const MachineState& state, Complex v_terminal) {
    StatorQuantities out;
    const Complex e = state.emf_pp();
    out.current = (e - v_terminal) / params.subtransient_impedance();
    out.current_dq = out.current * std::polar(1.0, -state.delta);
    const Complex s = e * std::conj(out.current);
    out.p_e = s.real();
    out.q_e = s.imag();
    return out;
}

struct PowerPair {
    double p = 0.0;
    double q = 0.0;
};

/// Power delivered across the air gap by the subtransient emf, generator
/// convention, on whatever base `params` is expressed.
inline PowerPair electrical_power(const MachineParams& params, const MachineState& state, Complex v_terminal) {
    auto st = stator(params, state, v_terminal);
    return {st.p_e, st.q_e};
}

struct NortonEquivalent {
    Complex current;
    Complex admittance;
};

inline NortonEquivalent norton_equivalent(const MachineParams& params, const MachineState& state) {
    const Complex y = 1.0 / params.subtransient_impedance();
    return {state.emf_pp() * y, y};
}

/// Right-hand side of the swing equation and the four emf equations.
/// `omega_base` is the electrical base frequency in rad/s.
inline MachineDerivs machine_derivs(const MachineParams& p, const MachineState& s, const ExciterST1A& exc,
                                    Complex v_terminal, double p_mech,
                                    double omega_base_rad = omega_base(kDefaultBaseFreq)) {
    const auto st = stator(p, s, v_terminal);
    const double iq = st.current_dq.real();
    const double id = st.current_dq.imag();
    const double efd = exc.efd();
    MachineDerivs d;
    d.d_delta = omega_base_rad * (s.omega - 1.0);
    d.d_omega = (p_mech - st.p_e - p.d * (s.omega - 1.0)) / (2.0 * p.h);
    d.d_eq_p = (efd - s.eq_p + (p.xd - p.xd_p) * id) / p.td0_p;
    d.d_ed_p = (-s.ed_p - (p.xq - p.xq_p) * iq) / p.tq0_p;
    d.d_eq_pp = (-s.eq_pp + (p.xd_p - p.xd_pp) * id + s.eq_p) / p.td0_pp;
    d.d_ed_pp = (-s.ed_pp - (p.xq_p - p.xq_pp) * iq + s.ed_p) / p.tq0_pp;
    return d;
}

/// Free-running condenser: no shaft load. Air-gap power absorbed from the
/// network (the negative of electrical_power().p) accelerates the rotor.
inline MachineDerivs condenser_derivs(const MachineParams& p, const MachineState& s, const ExciterST1A& exc,
                                      Complex v_terminal, double omega_base_rad = omega_base(kDefaultBaseFreq)) {
    if (p.mode != MachineMode::condenser) {
        throw ContractError("condenser_derivs called for a machine in generator mode");
    }
    return machine_derivs(p, s, exc, v_terminal, 0.0, omega_base_rad);
}

/// Machine states, exciter reference and mechanical power that hold the
/// machine at rest while delivering `current` (network frame, generator
/// convention) at terminal voltage `v`.
struct MachineEquilibrium {
    MachineState state;
    ExciterST1A exciter;
    double p_mech = 0.0;
    double efd = 0.0;
};

inline MachineEquilibrium machine_equilibrium(const MachineParams& p, ExciterST1A exc, Complex v, Complex current) {
    MachineEquilibrium eq;
    const Complex e_q_axis = v + Complex{p.ra, p.xq} * current;
    const double delta = std::arg(e_q_axis);
    const Complex rot = std::polar(1.0, -delta);
    const Complex v_dq = v * rot;
    const Complex i_dq = current * rot;
    const double vq = v_dq.real(), vd = v_dq.imag();
    const double iq = i_dq.real(), id = i_dq.imag();

    MachineState& s = eq.state;
    s.delta = delta;
    s.omega = 1.0;
    s.ed_p = -(p.xq - p.xq_p) * iq;
    s.ed_pp = s.ed_p - (p.xq_p - p.xq_pp) * iq;
    s.eq_pp = vq + p.ra * iq - p.xd_pp * id;
    s.eq_p = s.eq_pp - (p.xd_p - p.xd_pp) * id;
    eq.efd = s.eq_p - (p.xd - p.xd_p) * id;
    (void)vd;

    const auto st = stator(p, s, v);
    eq.p_mech = st.p_e;
    exc.v_meas = std::abs(v);
    exc.vref = exc.v_meas + eq.efd / exc.ka;
    eq.exciter = exc;
    if (eq.efd < exc.efd_min || eq.efd > exc.efd_max) {
        throw InitializationError("required field voltage " + std::to_string(eq.efd) + " pu is outside exciter limits");
    }
    return eq;
}

// ---------------------------------------------------------------------------
// Closed-form swing references for a machine with D = 0 and a held power
// imbalance. M is the angular momentum in pu power·s²/rad, M = 2H/omega_base.

inline double angular_momentum(double h, double base_freq_hz = kDefaultBaseFreq) {
    return 2.0 * h / omega_base(base_freq_hz);
}

/// Frequency deviation in Hz after `t` seconds of imbalance `delta_pe` (pu).
inline double analytic_freq_dev(double m, double delta_pe, double t) {
    if (t < 0.0) throw ContractError("analytic_freq_dev requires t >= 0");
    return delta_pe * t / (2.0 * std::numbers::pi * m);
}

/// Speed deviation in pu for inertia constant `h`.
inline double analytic_speed_dev(double h, double delta_pe, double t) {
    if (t < 0.0) throw ContractError("analytic_speed_dev requires t >= 0");
    return delta_pe * t / (2.0 * h);
}

/// Rotor angle in rad: delta0 + delta_pe·t²/(2M).
inline double analytic_angle(double m, double delta_pe, double t, double delta0) {
    if (t < 0.0) throw ContractError("analytic_angle requires t >= 0");
    return delta0 + delta_pe * t * t / (2.0 * m);
}

/// Initial symmetrical current for a bolted fault at the machine terminals,
/// |E''| / xd'' with E'' rebuilt from the prefault terminal voltage and the
/// current delivered to the network.
inline double initial_fault_current(const MachineParams& p, Complex v_prefault, Complex i_prefault) {
    const Complex e = v_prefault + p.subtransient_impedance() * i_prefault;
    return std::abs(e) / p.xd_pp;
}

/// Constant flux linkage split: the flux held at 0- equals the transiently
/// induced part plus the flux driven at 0+.
struct FluxDecomposition {
    double psi_pre = 0.0;
    double psi_post = 0.0;
    double psi_forced = 0.0;

    double reconstructed() const { return psi_forced + psi_post; }
};

inline FluxDecomposition flux_decomposition(double psi_pre, double psi_post) {
    if (!std::isfinite(psi_pre) || !std::isfinite(psi_post)) {
        throw ContractError("flux linkages must be finite");
    }
    return {psi_pre, psi_post, psi_pre - psi_post};
}

}  // namespace scsim
