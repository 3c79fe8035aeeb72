#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>

#include "scsim/gfl.hpp"
#include "scsim/integrator.hpp"

using namespace scsim;
using Catch::Approx;

namespace {

constexpr double kWb = omega_base(60.0);

// Frequency step response of a PI-tracking PLL, linearized:
// H(s) = (kp s + ki) / (s^2 + kp s + ki), so for a unit step
// y(t) = 1 - exp(-a t) (cos(wd t) - (a / wd) sin(wd t)).
double pll_step_oracle(const GflParams& p, double t) {
    const double a = p.kp_pll / 2.0;
    const double wd = std::sqrt(p.ki_pll - a * a);
    return 1.0 - std::exp(-a * t) * (std::cos(wd * t) - a / wd * std::sin(wd * t));
}

}  // namespace

TEST_CASE("default PLL gains give 20 Hz bandwidth at damping 0.7", "[gfl][pll]") {
    const GflParams p;
    const double wn = std::sqrt(p.ki_pll);
    CHECK(wn == Approx(2.0 * std::numbers::pi * 20.0).epsilon(1e-12));
    CHECK(p.kp_pll / (2.0 * wn) == Approx(0.7).epsilon(1e-12));
}

TEST_CASE("locked PLL holds its frame", "[gfl][pll]") {
    const GflParams p;
    GflState s;
    s.theta_pll = 0.37;
    const auto d = pll_derivs(p, s, std::polar(1.02, 0.37));
    CHECK(std::abs(d.v_q) < 1e-15);
    CHECK(std::abs(d.d_integ) < 1e-10);
    CHECK(d.omega_pll == Approx(1.0).epsilon(1e-15));
    CHECK(d.absolute_rate(kWb) == Approx(kWb).epsilon(1e-15));
}

TEST_CASE("PLL follows a frequency step with the second-order response", "[gfl][pll]") {
    const GflParams p;
    const double df_hz = -0.1;
    const double dw = 2.0 * std::numbers::pi * df_hz;  // rad/s, bus relative to synchronous
    GflState s;
    std::vector<double> x{0.0, 0.0};
    Rk4Workspace ws;
    auto rhs = [&](double t, const std::vector<double>& xv, std::vector<double>& dx) {
        GflState st = s;
        st.theta_pll = xv[0];
        st.pll_integ = xv[1];
        const auto d = pll_derivs(p, st, std::polar(1.0, dw * t));
        dx = {d.d_theta, d.d_integ};
    };
    const double dt = 1e-5;
    double worst = 0.0;
    double omega = 1.0;
    for (int k = 0; k < 50000; ++k) {
        rk4_step(rhs, k * dt, x, dt, ws);
        const double t = (k + 1) * dt;
        GflState st = s;
        st.theta_pll = x[0];
        st.pll_integ = x[1];
        omega = pll_derivs(p, st, std::polar(1.0, dw * t)).omega_pll;
        const double ref = 1.0 + dw / kWb * pll_step_oracle(p, t);
        worst = std::max(worst, std::abs(omega - ref) / std::abs(dw / kWb));
    }
    CHECK(worst < 1e-3);
    CHECK(omega == Approx(59.9 / 60.0).epsilon(1e-9));
    CHECK(omega == Approx(0.99833).epsilon(1e-5));
}

TEST_CASE("PLL flywheels on a dead bus", "[gfl][pll]") {
    const GflParams p;
    GflState s;
    s.pll_integ = -0.4;
    const auto d = pll_derivs(p, s, Complex{});
    CHECK(d.v_q == 0.0);
    CHECK(d.d_integ == 0.0);
    CHECK(d.omega_pll == Approx(1.0 - 0.4 / kWb).epsilon(1e-15));
}

TEST_CASE("PLL error is held below the freeze voltage", "[gfl][pll]") {
    GflParams p;
    p.v_pll_freeze = 0.9;
    GflState s;
    s.pll_integ = 0.2;
    const auto frozen = pll_derivs(p, s, std::polar(0.5, 0.3));
    CHECK(frozen.v_q != 0.0);
    CHECK(frozen.d_integ == 0.0);
    CHECK(frozen.d_theta == 0.2);
    const auto live = pll_derivs(p, s, std::polar(0.95, 0.3));
    CHECK(live.d_integ == Approx(p.ki_pll * 0.95 * std::sin(0.3)).epsilon(1e-12));
}

TEST_CASE("droop targets", "[gfl][droop]") {
    GflParams p;
    p.p_set = 0.8;
    p.q_set = 0.1;
    const auto zero = droop_targets(p, p.omega_n, p.v_n);
    CHECK(zero.p_star == p.p_set);
    CHECK(zero.q_star == p.q_set);

    CHECK(std::abs(droop_targets(p, 0.999, 1.0).p_star - 0.82) <= 1e-12);
    CHECK(std::abs(droop_targets(p, 1.0, 0.95).q_star - 0.35) <= 1e-12);
}

TEST_CASE("current command without limiting", "[gfl][limit]") {
    const GflParams p;
    const Complex i = current_command(p, 0.8, 0.0, Complex{1.0, 0.0});
    CHECK(std::abs(i - Complex{0.8, 0.0}) < 1e-15);
    const Complex v{0.9, 0.2};
    const Complex i2 = current_command(p, 0.5, 0.2, v);
    CHECK(std::abs(v * std::conj(i2) - Complex{0.5, 0.2}) < 1e-14);
}

TEST_CASE("reactive-priority limiter keeps the reactive part", "[gfl][limit]") {
    GflParams p;
    p.i_max = 1.2;
    p.limit_priority = LimitPriority::reactive;
    const Complex i = current_command(p, 1.0, 1.0, Complex{1.0, 0.0});
    CHECK(std::abs(i) == Approx(1.2).epsilon(1e-14));
    CHECK(i.imag() == Approx(-1.0).epsilon(1e-14));
    CHECK(i.real() == Approx(std::sqrt(1.44 - 1.0)).epsilon(1e-14));

    p.limit_priority = LimitPriority::active;
    const Complex ia = current_command(p, 1.0, 1.0, Complex{1.0, 0.0});
    CHECK(std::abs(ia) == Approx(1.2).epsilon(1e-14));
    CHECK(ia.real() == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("automatic priority switches on terminal voltage", "[gfl][limit]") {
    GflParams p;
    p.i_max = 1.1;
    const Complex healthy = current_command(p, 1.0, 0.8, Complex{0.95, 0.0});
    CHECK(healthy.real() == Approx(1.0 / 0.95).epsilon(1e-12));
    const Complex sagged = current_command(p, 0.5, 0.8, Complex{0.6, 0.0});
    CHECK(sagged.imag() == Approx(-1.1).epsilon(1e-12));
    CHECK(sagged.real() == Approx(0.0).margin(1e-7));
}

TEST_CASE("voltage floor bounds the command", "[gfl][limit]") {
    const GflParams p;
    const Complex i = current_command(p, 0.05, 0.0, Complex{0.02, 0.0});
    CHECK(i.real() == Approx(0.5).epsilon(1e-14));
    const Complex big = current_command(p, 1.0, 0.0, Complex{0.02, 0.0});
    CHECK(std::abs(big) <= p.i_max + 1e-12);
    const Complex dead = current_command(p, 1.0, 0.0, Complex{});
    CHECK(std::isfinite(dead.real()));
    CHECK(std::abs(dead) <= p.i_max + 1e-12);
}

TEST_CASE("available power caps the active command", "[gfl][limit]") {
    GflParams p;
    p.p_max = 0.5;
    const Complex i = current_command(p, 0.8, 0.0, Complex{1.0, 0.0});
    CHECK(i.real() == 0.5);
}

TEST_CASE("trip logic", "[gfl][trip]") {
    const GflParams p;
    const double dt = 1e-3;

    GflState healthy;
    for (int k = 0; k < 1000; ++k) trip_check(p, healthy, 1.0, dt);
    CHECK(healthy.online);

    // Five cycles of a deep sag ride through a 0.15 s persistence.
    GflState sag;
    for (int k = 0; k < 83; ++k) trip_check(p, sag, 0.02, dt);
    CHECK(sag.online);
    for (int k = 0; k < 100; ++k) trip_check(p, sag, 1.0, dt);
    CHECK(sag.online);
    CHECK(sag.trip_timer == 0.0);

    // Sustained under-frequency trips after the persistence time and latches.
    GflState drift;
    drift.id_filt = 0.8;
    drift.omega_pll = 56.9 / 60.0;
    for (int k = 0; k < 149; ++k) trip_check(p, drift, 1.0, dt);
    CHECK(drift.online);
    trip_check(p, drift, 1.0, dt);
    CHECK_FALSE(drift.online);
    CHECK(drift.current_network() == Complex{});
    drift.omega_pll = 1.0;
    trip_check(p, drift, 1.0, dt);
    CHECK_FALSE(drift.online);

    GflState high;
    high.omega_pll = 63.5 / 60.0;
    for (int k = 0; k < 200; ++k) trip_check(p, high, 1.0, dt);
    CHECK_FALSE(high.online);
}

TEST_CASE("inverter parameter validation", "[gfl][validate]") {
    GflParams p;
    CHECK_NOTHROW(p.validate());
    auto bad = p;
    bad.i_max = 0.9;
    CHECK_THROWS_AS(bad.validate(), ContractError);
    bad = p;
    bad.ki_pll = 0.0;
    CHECK_THROWS_AS(bad.validate(), ContractError);
    bad = p;
    bad.f_trip_lo = 61.0;
    CHECK_THROWS_AS(bad.validate(), ContractError);
    bad = p;
    bad.m_p = -1.0;
    CHECK_THROWS_AS(bad.validate(), ContractError);
}
