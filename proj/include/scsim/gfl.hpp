#pragma once

// Grid-following inverter in RMS form: SRF-PLL, P/f and Q/V droop outer
// loops, a current limiter and a first-order lag standing in for the inner
// current loops. All quantities are per unit on the inverter rating.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "scsim/error.hpp"
#include "scsim/units.hpp"

namespace scsim {

enum class LimitPriority { automatic, reactive, active };

struct GflParams {
    double rated_mva = 200.0;
    double p_set = 0.0;
    double q_set = 0.0;
    double m_p = 20.0;
    double m_q = 5.0;
    double omega_n = 1.0;
    double v_n = 1.0;
    double kp_pll = 2.0 * 0.7 * (2.0 * std::numbers::pi * 20.0);
    double ki_pll = (2.0 * std::numbers::pi * 20.0) * (2.0 * std::numbers::pi * 20.0);
    double i_max = 1.1;
    double t_i = 0.01;
    double f_trip_lo = 57.0;
    double f_trip_hi = 63.0;
    double v_trip_lo = 0.1;
    double t_trip = 0.15;
    // Available primary power; droop cannot raise output above it.
    double p_max = std::numeric_limits<double>::infinity();
    LimitPriority limit_priority = LimitPriority::automatic;
    // Below this terminal voltage the PLL integrator and proportional path
    // are held (flywheel at the last integrator frequency). 0 disables.
    double v_pll_freeze = 0.0;

    void validate(double base_freq = kDefaultBaseFreq) const {
        auto fail = [](const std::string& m) { throw ContractError("GFL parameters: " + m); };
        if (!(rated_mva > 0.0)) fail("rated_mva must be positive");
        if (!(i_max >= 1.0)) fail("i_max must be at least 1 pu");
        if (!(m_p >= 0.0 && m_q >= 0.0)) fail("droop gains must be non-negative");
        if (!(ki_pll > 0.0 && kp_pll >= 0.0)) fail("PLL gains must be positive");
        if (!(t_i > 0.0)) fail("t_i must be positive");
        if (!(f_trip_lo < base_freq && base_freq < f_trip_hi)) fail("trip band must bracket the base frequency");
        if (!(t_trip >= 0.0)) fail("t_trip must be non-negative");
        if (!(v_trip_lo >= 0.0)) fail("v_trip_lo must be non-negative");
        if (!(v_pll_freeze >= 0.0 && v_pll_freeze < 1.0)) fail("v_pll_freeze must be in [0, 1)");
    }
};

struct GflState {
    double theta_pll = 0.0;  // rad, relative to the synchronous frame
    double pll_integ = 0.0;  // rad/s
    double omega_pll = 1.0;  // pu, last evaluated estimate
    double id_filt = 0.0;    // pu, PLL frame
    double iq_filt = 0.0;
    bool online = true;
    double trip_timer = 0.0;

    Complex current_pll() const { return {id_filt, iq_filt}; }
    /// Injected current in the network frame, device base; zero when offline.
    Complex current_network() const { return online ? current_pll() * std::polar(1.0, theta_pll) : Complex{}; }
};

struct PllDerivs {
    double v_q = 0.0;
    double d_integ = 0.0;
    double omega_pll = 1.0;
    double d_theta = 0.0;  // relative to the synchronous frame: omega_base·(omega_pll - 1)

    double absolute_rate(double omega_base_rad) const { return omega_base_rad * omega_pll; }
};

inline PllDerivs pll_derivs(const GflParams& p, const GflState& s, Complex v_terminal,
                            double omega_base_rad = omega_base(kDefaultBaseFreq)) {
    PllDerivs d;
    d.v_q = (v_terminal * std::polar(1.0, -s.theta_pll)).imag();
    const double err = std::abs(v_terminal) < p.v_pll_freeze ? 0.0 : d.v_q;
    d.d_integ = p.ki_pll * err;
    const double dev = p.kp_pll * err + s.pll_integ;
    d.omega_pll = 1.0 + dev / omega_base_rad;
    d.d_theta = dev;
    return d;
}

struct DroopTargets {
    double p_star = 0.0;
    double q_star = 0.0;
};

inline DroopTargets droop_targets(const GflParams& p, double omega_pll, double v_mag) {
    return {p.p_set + (p.omega_n - omega_pll) * p.m_p, p.q_set + (p.v_n - v_mag) * p.m_q};
}

inline constexpr double kGflVoltageFloor = 0.1;
inline constexpr double kReactivePriorityBelow = 0.9;

/// Current reference i = conj(S*/v) in the PLL frame, returned as id + j·iq.
/// The divisor is floored at 0.1 pu, active power is capped at p_max and the
/// magnitude is limited to i_max by the configured priority.
inline Complex current_command(const GflParams& p, double p_star, double q_star, Complex v_pll) {
    const double vmag = std::abs(v_pll);
    Complex v = v_pll;
    if (vmag < kGflVoltageFloor) {
        v = vmag > 0.0 ? v_pll * (kGflVoltageFloor / vmag) : Complex{kGflVoltageFloor, 0.0};
    }
    const double pp = std::min(p_star, p.p_max);
    Complex i = std::conj(Complex{pp, q_star} / v);
    const double imag_sq = std::norm(i);
    if (imag_sq <= p.i_max * p.i_max) return i;

    LimitPriority mode = p.limit_priority;
    if (mode == LimitPriority::automatic) {
        mode = vmag < kReactivePriorityBelow ? LimitPriority::reactive : LimitPriority::active;
    }
    double id = i.real(), iq = i.imag();
    if (mode == LimitPriority::reactive) {
        iq = std::clamp(iq, -p.i_max, p.i_max);
        const double room = std::sqrt(std::max(0.0, p.i_max * p.i_max - iq * iq));
        id = std::copysign(std::min(std::abs(id), room), id);
    } else {
        id = std::clamp(id, -p.i_max, p.i_max);
        const double room = std::sqrt(std::max(0.0, p.i_max * p.i_max - id * id));
        iq = std::copysign(std::min(std::abs(iq), room), iq);
    }
    return {id, iq};
}

/// Advances the ride-through timer by `dt` and latches the unit offline once
/// frequency or voltage has been outside its band for t_trip continuously.
inline bool trip_check(const GflParams& p, GflState& s, double v_mag, double dt,
                       double base_freq = kDefaultBaseFreq) {
    if (!s.online) return false;
    const double f = s.omega_pll * base_freq;
    const bool outside = f < p.f_trip_lo || f > p.f_trip_hi || v_mag < p.v_trip_lo;
    s.trip_timer = outside ? s.trip_timer + dt : 0.0;
    if (outside && s.trip_timer >= p.t_trip - 1e-12) {
        s.online = false;
        s.id_filt = 0.0;
        s.iq_filt = 0.0;
    }
    return s.online;
}

}  // namespace scsim
