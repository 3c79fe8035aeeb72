#pragma once

#include <cstddef>
#include <vector>

namespace scsim {

/// Scratch buffers reused across classic RK4 steps.
struct Rk4Workspace {
    std::vector<double> k1, k2, k3, k4, tmp;

    void resize(std::size_t n) {
        for (auto* v : {&k1, &k2, &k3, &k4, &tmp}) v->resize(n);
    }
};

/// One classic fourth-order Runge-Kutta step of dx/dt = f(t, x).
/// `rhs(t, x, dx)` fills dx. When `k1` is supplied it must equal rhs(t, x)
/// and saves one evaluation.
template <class Rhs>
void rk4_step(Rhs&& rhs, double t, std::vector<double>& x, double dt, Rk4Workspace& ws,
              const std::vector<double>* k1 = nullptr) {
    const std::size_t n = x.size();
    ws.resize(n);
    if (k1) {
        ws.k1 = *k1;
    } else {
        rhs(t, x, ws.k1);
    }
    for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = x[i] + 0.5 * dt * ws.k1[i];
    rhs(t + 0.5 * dt, ws.tmp, ws.k2);
    for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = x[i] + 0.5 * dt * ws.k2[i];
    rhs(t + 0.5 * dt, ws.tmp, ws.k3);
    for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = x[i] + dt * ws.k3[i];
    rhs(t + dt, ws.tmp, ws.k4);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] += dt / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
    }
}

}  // namespace scsim
