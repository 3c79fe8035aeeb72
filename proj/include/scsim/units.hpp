#pragma once

#include <complex>
#include <numbers>

namespace scsim {

using Complex = std::complex<double>;

inline constexpr double kDefaultBaseMva = 100.0;
inline constexpr double kDefaultBaseFreq = 60.0;

constexpr double omega_base(double base_freq_hz) { return 2.0 * std::numbers::pi * base_freq_hz; }

/// Impedance in pu on `from_mva` re-expressed on `to_mva` (same voltage base).
constexpr double rebase_impedance(double z_pu, double from_mva, double to_mva) {
    return z_pu * to_mva / from_mva;
}

/// Power, current or inertia constant in pu on `from_mva` re-expressed on `to_mva`.
constexpr double rebase_power(double s_pu, double from_mva, double to_mva) {
    return s_pu * from_mva / to_mva;
}

}  // namespace scsim
