#pragma once

// Static network model: buses, branches, admittance matrix, fault shunts,
// Newton power flow and the algebraic network solve used at every
// integration stage.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "scsim/error.hpp"
#include "scsim/units.hpp"

namespace scsim {

enum class BusRole { slack, pv, pq };

struct Bus {
    std::size_t id = 0;
    std::string name;
    double base_kv = 230.0;
    double load_p = 0.0;  // pu on system base
    double load_q = 0.0;
    double v_set = 1.0;   // voltage target when the bus hosts a regulating device
    BusRole init_role = BusRole::pq;
};

struct Branch {
    std::size_t from_bus = 0;
    std::size_t to_bus = 0;
    double r = 0.0;
    double x = 0.0;
    double b_shunt = 0.0;  // total line charging
    double tap = 1.0;      // off-nominal ratio on the from side
    bool in_service = true;
};

struct NetworkModel {
    std::vector<Bus> buses;
    std::vector<Branch> branches;

    std::size_t size() const noexcept { return buses.size(); }

    /// Checks bus id contiguity, branch endpoints and impedances. Slack
    /// uniqueness is checked separately because roles are assigned late.
    void validate() const {
        for (std::size_t i = 0; i < buses.size(); ++i) {
            if (buses[i].id != i) {
                throw NetworkError("bus ids must be contiguous from 0; bus at position " +
                                   std::to_string(i) + " has id " + std::to_string(buses[i].id));
            }
            if (!std::isfinite(buses[i].load_p) || !std::isfinite(buses[i].load_q)) {
                throw NetworkError("bus " + buses[i].name + " has a non-finite load");
            }
        }
        for (std::size_t k = 0; k < branches.size(); ++k) {
            const auto& br = branches[k];
            if (br.from_bus >= buses.size() || br.to_bus >= buses.size()) {
                throw NetworkError("branch " + std::to_string(k) + " references a missing bus");
            }
            if (br.from_bus == br.to_bus) {
                throw NetworkError("branch " + std::to_string(k) + " connects a bus to itself");
            }
            if (br.r == 0.0 && br.x == 0.0) {
                throw NetworkError("branch " + std::to_string(k) + " has zero impedance");
            }
            if (!(br.tap > 0.0)) {
                throw NetworkError("branch " + std::to_string(k) + " has a non-positive tap");
            }
        }
    }

    void validate_roles() const {
        auto slacks = std::count_if(buses.begin(), buses.end(),
                                    [](const Bus& b) { return b.init_role == BusRole::slack; });
        if (slacks != 1) {
            throw NetworkError("exactly one slack bus is required, found " + std::to_string(slacks));
        }
    }
};

/// Groups of bus ids that are mutually reachable through in-service branches.
inline std::vector<std::vector<std::size_t>> find_islands(std::size_t n,
                                                          std::span<const Branch> branches) {
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    for (const auto& br : branches) {
        if (!br.in_service) continue;
        auto a = find(br.from_bus);
        auto b = find(br.to_bus);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [root, members] : groups) out.push_back(std::move(members));
    return out;
}

/// Sparse complex bus admittance matrix plus a set of additive shunts
/// (faults). Shunts are kept apart from the assembled entries so that a
/// fault followed by its exact negation restores every entry bit for bit.
class AdmittanceMatrix {
  public:
    using Sparse = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

    AdmittanceMatrix() = default;
    AdmittanceMatrix(std::size_t n, Sparse entries) : n_(n), entries_(std::move(entries)) {}

    std::size_t size() const noexcept { return n_; }

    Complex at(std::size_t i, std::size_t j) const {
        Complex v = entries_.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (i == j) {
            if (auto it = shunts_.find(i); it != shunts_.end()) v += it->second;
        }
        return v;
    }

    /// Sum of additive shunts currently applied at `bus` (zero when none).
    Complex shunt(std::size_t bus) const {
        auto it = shunts_.find(bus);
        return it == shunts_.end() ? Complex{} : it->second;
    }

    const std::map<std::size_t, Complex>& shunts() const noexcept { return shunts_; }
    const Sparse& entries() const noexcept { return entries_; }

    void add_shunt(std::size_t bus, Complex y) {
        if (bus >= n_) throw ContractError("shunt bus " + std::to_string(bus) + " out of range");
        Complex total = shunt(bus) + y;
        if (total == Complex{}) {
            shunts_.erase(bus);
        } else {
            shunts_[bus] = total;
        }
    }

    Eigen::MatrixXcd dense() const {
        Eigen::MatrixXcd d = Eigen::MatrixXcd(entries_);
        for (const auto& [bus, y] : shunts_) {
            d(static_cast<Eigen::Index>(bus), static_cast<Eigen::Index>(bus)) += y;
        }
        return d;
    }

    friend bool operator==(const AdmittanceMatrix& a, const AdmittanceMatrix& b) {
        if (a.n_ != b.n_ || a.shunts_ != b.shunts_) return false;
        return Eigen::MatrixXcd(a.entries_) == Eigen::MatrixXcd(b.entries_);
    }

  private:
    std::size_t n_ = 0;
    Sparse entries_;
    std::map<std::size_t, Complex> shunts_;
};

/// Standard pi-model assembly with off-nominal taps on the from side.
/// Throws NetworkError naming the islands if the in-service network is split.
inline AdmittanceMatrix build_ybus(std::span<const Bus> buses, std::span<const Branch> branches) {
    const std::size_t n = buses.size();
    if (n > 1) {
        auto islands = find_islands(n, branches);
        if (islands.size() > 1) {
            std::ostringstream msg;
            msg << "network is not connected; islands:";
            for (const auto& isl : islands) {
                msg << " {";
                for (std::size_t k = 0; k < isl.size(); ++k) msg << (k ? "," : "") << isl[k];
                msg << "}";
            }
            throw NetworkError(msg.str());
        }
    }
    std::vector<Eigen::Triplet<Complex>> triplets;
    triplets.reserve(4 * branches.size());
    for (const auto& br : branches) {
        if (!br.in_service) continue;
        const Complex y = 1.0 / Complex{br.r, br.x};
        const Complex half_b{0.0, br.b_shunt / 2.0};
        const double t = br.tap;
        const auto f = static_cast<Eigen::Index>(br.from_bus);
        const auto to = static_cast<Eigen::Index>(br.to_bus);
        triplets.emplace_back(f, f, (y + half_b) / (t * t));
        triplets.emplace_back(to, to, y + half_b);
        triplets.emplace_back(f, to, -y / t);
        triplets.emplace_back(to, f, -y / t);
    }
    AdmittanceMatrix::Sparse m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.setFromTriplets(triplets.begin(), triplets.end());
    return AdmittanceMatrix(n, std::move(m));
}

inline AdmittanceMatrix build_ybus(const NetworkModel& net) {
    return build_ybus(std::span<const Bus>(net.buses), std::span<const Branch>(net.branches));
}

/// Copy of `y` with `fault_admittance` added to the diagonal at `bus`.
inline AdmittanceMatrix apply_fault(const AdmittanceMatrix& y, std::size_t bus, Complex fault_admittance) {
    if (bus >= y.size()) throw ContractError("fault bus " + std::to_string(bus) + " does not exist");
    if (!std::isfinite(fault_admittance.real()) || !std::isfinite(fault_admittance.imag())) {
        throw ContractError("fault admittance must be finite");
    }
    AdmittanceMatrix out = y;
    out.add_shunt(bus, fault_admittance);
    return out;
}

// ---------------------------------------------------------------------------
// Power flow

struct Dispatch {
    std::vector<double> p_gen;  // pu injected at each bus (ignored at the slack)
    std::vector<double> v_set;  // pu magnitude at slack/PV buses
};

struct PowerFlowOptions {
    double tolerance = 1e-8;
    int max_iterations = 30;
};

struct PowerFlowSolution {
    std::vector<double> v_mag;
    std::vector<double> v_ang;
    std::vector<double> gen_p;  // injection + local load, per bus
    std::vector<double> gen_q;
    bool converged = false;
    int iterations = 0;
    double max_mismatch = 0.0;

    Complex voltage(std::size_t bus) const { return std::polar(v_mag[bus], v_ang[bus]); }
};

namespace detail {

inline void bus_powers(const Eigen::MatrixXcd& y, std::span<const double> vm, std::span<const double> va,
                       std::vector<double>& p, std::vector<double>& q) {
    const auto n = static_cast<Eigen::Index>(vm.size());
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(vm[i], va[i]);
    Eigen::VectorXcd i_inj = y * v;
    p.resize(vm.size());
    q.resize(vm.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        Complex s = v(i) * std::conj(i_inj(i));
        p[i] = s.real();
        q[i] = s.imag();
    }
}

}  // namespace detail

/// Newton-Raphson power flow in polar coordinates from a flat start.
/// Throws ConvergenceError (carrying the final mismatch) when the iteration
/// limit is reached.
inline PowerFlowSolution solve_power_flow(const NetworkModel& net, const Dispatch& dispatch,
                                          const PowerFlowOptions& options = {}) {
    net.validate();
    net.validate_roles();
    const std::size_t n = net.size();
    if (dispatch.p_gen.size() != n || dispatch.v_set.size() != n) {
        throw ContractError("dispatch vectors must have one entry per bus");
    }
    const Eigen::MatrixXcd y = build_ybus(net).dense();
    const Eigen::MatrixXd g = y.real();
    const Eigen::MatrixXd b = y.imag();

    std::vector<double> vm(n, 1.0), va(n, 0.0);
    std::vector<std::size_t> ang_idx, mag_idx;  // unknown positions
    for (std::size_t i = 0; i < n; ++i) {
        const auto role = net.buses[i].init_role;
        if (role != BusRole::pq) vm[i] = dispatch.v_set[i];
        if (role != BusRole::slack) ang_idx.push_back(i);
        if (role == BusRole::pq) mag_idx.push_back(i);
    }
    const std::size_t na = ang_idx.size();
    const std::size_t nu = na + mag_idx.size();

    std::vector<double> p_spec(n), q_spec(n);
    for (std::size_t i = 0; i < n; ++i) {
        p_spec[i] = dispatch.p_gen[i] - net.buses[i].load_p;
        q_spec[i] = -net.buses[i].load_q;
    }

    PowerFlowSolution sol;
    std::vector<double> p, q;
    Eigen::VectorXd mismatch(static_cast<Eigen::Index>(nu));
    for (int iter = 0;; ++iter) {
        detail::bus_powers(y, vm, va, p, q);
        for (std::size_t k = 0; k < na; ++k) mismatch(static_cast<Eigen::Index>(k)) = p_spec[ang_idx[k]] - p[ang_idx[k]];
        for (std::size_t k = 0; k < mag_idx.size(); ++k) {
            mismatch(static_cast<Eigen::Index>(na + k)) = q_spec[mag_idx[k]] - q[mag_idx[k]];
        }
        const double worst = nu ? mismatch.cwiseAbs().maxCoeff() : 0.0;
        sol.iterations = iter;
        sol.max_mismatch = worst;
        if (!std::isfinite(worst)) {
            throw ConvergenceError("power flow diverged (non-finite mismatch)", worst, iter);
        }
        if (worst < options.tolerance) break;
        if (iter >= options.max_iterations) {
            std::ostringstream msg;
            msg << "power flow did not converge in " << iter << " iterations; final mismatch " << worst << " pu";
            throw ConvergenceError(msg.str(), worst, iter);
        }

        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nu), static_cast<Eigen::Index>(nu));
        std::vector<long> ang_pos(n, -1), mag_pos(n, -1);
        for (std::size_t k = 0; k < na; ++k) ang_pos[ang_idx[k]] = static_cast<long>(k);
        for (std::size_t k = 0; k < mag_idx.size(); ++k) mag_pos[mag_idx[k]] = static_cast<long>(na + k);

        auto fill_row = [&](std::size_t i, long row, bool is_p) {
            for (std::size_t k = 0; k < n; ++k) {
                const auto ii = static_cast<Eigen::Index>(i);
                const auto kk = static_cast<Eigen::Index>(k);
                double d_ang, d_mag;
                if (i == k) {
                    if (is_p) {
                        d_ang = -q[i] - b(ii, ii) * vm[i] * vm[i];
                        d_mag = p[i] / vm[i] + g(ii, ii) * vm[i];
                    } else {
                        d_ang = p[i] - g(ii, ii) * vm[i] * vm[i];
                        d_mag = q[i] / vm[i] - b(ii, ii) * vm[i];
                    }
                } else {
                    const double th = va[i] - va[k];
                    const double gs = g(ii, kk) * std::sin(th), gc = g(ii, kk) * std::cos(th);
                    const double bs = b(ii, kk) * std::sin(th), bc = b(ii, kk) * std::cos(th);
                    if (is_p) {
                        d_ang = vm[i] * vm[k] * (gs - bc);
                        d_mag = vm[i] * (gc + bs);
                    } else {
                        d_ang = -vm[i] * vm[k] * (gc + bs);
                        d_mag = vm[i] * (gs - bc);
                    }
                }
                if (ang_pos[k] >= 0) jac(row, ang_pos[k]) = d_ang;
                if (mag_pos[k] >= 0) jac(row, mag_pos[k]) = d_mag;
            }
        };
        for (std::size_t k = 0; k < na; ++k) fill_row(ang_idx[k], static_cast<long>(k), true);
        for (std::size_t k = 0; k < mag_idx.size(); ++k) fill_row(mag_idx[k], static_cast<long>(na + k), false);

        Eigen::VectorXd dx = jac.partialPivLu().solve(mismatch);
        for (std::size_t k = 0; k < na; ++k) va[ang_idx[k]] += dx(static_cast<Eigen::Index>(k));
        for (std::size_t k = 0; k < mag_idx.size(); ++k) vm[mag_idx[k]] += dx(static_cast<Eigen::Index>(na + k));
    }

    sol.converged = true;
    sol.v_mag = vm;
    sol.v_ang = va;
    sol.gen_p.resize(n);
    sol.gen_q.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sol.gen_p[i] = p[i] + net.buses[i].load_p;
        sol.gen_q[i] = q[i] + net.buses[i].load_q;
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Dynamic network solve

/// Constant-power load that blends to a constant impedance at low voltage:
/// pure constant power at or above `v_blend_hi`, pure constant impedance
/// (`y_equiv`) below `v_blend_lo`, linear weight in between.
struct ConstantPowerLoad {
    std::size_t bus = 0;
    Complex s;        // consumed power, pu
    Complex y_equiv;  // admittance drawing `s` at the pre-disturbance voltage
    double v_blend_hi = 0.4;
    double v_blend_lo = 0.2;

    static ConstantPowerLoad at_voltage(std::size_t bus, Complex s, double v0) {
        return ConstantPowerLoad{bus, s, std::conj(s) / (v0 * v0)};
    }

    double constant_power_weight(double vmag) const {
        if (vmag >= v_blend_hi) return 1.0;
        if (vmag <= v_blend_lo) return 0.0;
        return (vmag - v_blend_lo) / (v_blend_hi - v_blend_lo);
    }

    /// Current drawn from the bus.
    Complex current(Complex v) const {
        const double w = constant_power_weight(std::abs(v));
        if (w == 0.0) return y_equiv * v;
        const Complex ip = std::conj(s / v);
        return w == 1.0 ? ip : w * ip + (1.0 - w) * y_equiv * v;
    }

    /// Partial derivatives of current() with respect to Re(v) and Im(v).
    std::pair<Complex, Complex> current_derivatives(Complex v) const {
        const double vmag = std::abs(v);
        const double w = constant_power_weight(vmag);
        if (w == 0.0) return {y_equiv, y_equiv * Complex{0.0, 1.0}};
        const Complex vc = std::conj(v);
        const Complex dip_dr = -std::conj(s) / (vc * vc);
        const Complex dip_di = Complex{0.0, 1.0} * std::conj(s) / (vc * vc);
        if (w == 1.0) return {dip_dr, dip_di};
        const Complex ip = std::conj(s) / vc;
        const Complex iz = y_equiv * v;
        const double span = v_blend_hi - v_blend_lo;
        const double dw_dr = v.real() / (vmag * span);
        const double dw_di = v.imag() / (vmag * span);
        const Complex d_r = dw_dr * (ip - iz) + w * dip_dr + (1.0 - w) * y_equiv;
        const Complex d_i = dw_di * (ip - iz) + w * dip_di + (1.0 - w) * y_equiv * Complex{0.0, 1.0};
        return {d_r, d_i};
    }

    Complex power(Complex v) const { return v * std::conj(current(v)); }

    /// Admittance drawing the blended load at a measured voltage magnitude.
    Complex admittance_at(double v_meas) const {
        const double w = constant_power_weight(v_meas);
        if (w == 0.0) return y_equiv;
        const Complex yp = std::conj(s) / (v_meas * v_meas);
        return w == 1.0 ? yp : w * yp + (1.0 - w) * y_equiv;
    }
};

struct NetworkSolveResult {
    std::vector<Complex> v;
    int iterations = 0;
    double residual = 0.0;
};

/// Solves Y·V = I_src - I_load(V) for bus voltages. `y_aug` already holds
/// device Norton admittances and fault shunts; the constant-impedance part
/// of each load is added here. Newton iteration in rectangular coordinates.
class NetworkSolver {
  public:
    NetworkSolver() = default;

    NetworkSolver(const Eigen::MatrixXcd& y_aug, std::vector<ConstantPowerLoad> loads, double tolerance = 1e-8,
                  int max_iterations = 50)
        : y_(y_aug), loads_(std::move(loads)), tol_(tolerance), max_iter_(max_iterations) {
        for (const auto& ld : loads_) {
            if (ld.bus >= static_cast<std::size_t>(y_.rows())) {
                throw ContractError("load bus " + std::to_string(ld.bus) + " out of range");
            }
            y_(static_cast<Eigen::Index>(ld.bus), static_cast<Eigen::Index>(ld.bus)) += ld.y_equiv;
        }
        const auto n = y_.rows();
        linear_jac_.resize(2 * n, 2 * n);
        linear_jac_ << y_.real(), -y_.imag(), y_.imag(), y_.real();
        if (loads_.empty()) linear_lu_.compute(linear_jac_);
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(y_.rows()); }
    const std::vector<ConstantPowerLoad>& loads() const noexcept { return loads_; }
    const Eigen::MatrixXcd& matrix() const noexcept { return y_; }

    /// Residual Y·V - I_src + sum(I_load - y_equiv·V), per bus.
    Eigen::VectorXcd residual(std::span<const Complex> sources, std::span<const Complex> v) const {
        return residual(sources, v, 1.0);
    }

    /// Newton from `guess`. If that fails, the constant-power part of the
    /// loads is ramped in from zero (pure impedance loads, a linear problem)
    /// to reach the solution branch connected to the impedance solution.
    NetworkSolveResult solve(std::span<const Complex> sources, std::span<const Complex> guess) const {
        const auto n = y_.rows();
        NetworkSolveResult out;
        out.v.assign(guess.begin(), guess.end());
        if (loads_.empty()) {
            Eigen::VectorXd rhs(2 * n);
            for (Eigen::Index i = 0; i < n; ++i) {
                rhs(i) = sources[static_cast<std::size_t>(i)].real();
                rhs(n + i) = sources[static_cast<std::size_t>(i)].imag();
            }
            Eigen::VectorXd x = linear_lu_.solve(rhs);
            for (Eigen::Index i = 0; i < n; ++i) out.v[static_cast<std::size_t>(i)] = {x(i), x(n + i)};
            out.iterations = 1;
            out.residual = residual(sources, out.v).cwiseAbs().maxCoeff();
            return out;
        }
        if (newton(sources, out, 1.0, max_iter_)) return out;
        const double first_residual = out.residual;
        const int first_iterations = out.iterations;

        out.v.assign(guess.begin(), guess.end());
        constexpr int kRampSteps = 8;
        bool ok = true;
        for (int k = 0; k <= kRampSteps && ok; ++k) {
            ok = newton(sources, out, static_cast<double>(k) / kRampSteps, max_iter_);
        }
        if (ok) return out;
        std::ostringstream msg;
        msg << "network solve diverged after " << first_iterations << " iterations; residual " << first_residual << " pu";
        throw ConvergenceError(msg.str(), first_residual, first_iterations);
    }

  private:
    Eigen::VectorXcd residual(std::span<const Complex> sources, std::span<const Complex> v, double weight) const {
        const auto n = y_.rows();
        Eigen::Map<const Eigen::VectorXcd> vv(v.data(), n);
        Eigen::Map<const Eigen::VectorXcd> src(sources.data(), n);
        Eigen::VectorXcd f = y_ * vv - src;
        for (const auto& ld : loads_) {
            const auto b = static_cast<Eigen::Index>(ld.bus);
            f(b) += weight * (ld.current(v[ld.bus]) - ld.y_equiv * v[ld.bus]);
        }
        return f;
    }

    /// Damped Newton on the residual with the constant-power share scaled by
    /// `weight`. Returns false on non-convergence; `out` holds the last iterate.
    bool newton(std::span<const Complex> sources, NetworkSolveResult& out, double weight, int max_iter) const {
        const auto n = y_.rows();
        std::vector<Complex> trial(out.v.size());
        for (int iter = 0;; ++iter) {
            Eigen::VectorXcd f = residual(sources, out.v, weight);
            const double worst = f.cwiseAbs().maxCoeff();
            out.iterations = iter;
            out.residual = worst;
            if (!std::isfinite(worst)) return false;
            if (worst < tol_) return true;
            if (iter >= max_iter) return false;
            Eigen::MatrixXd jac = linear_jac_;
            for (const auto& ld : loads_) {
                const auto b = static_cast<Eigen::Index>(ld.bus);
                auto [d_r, d_i] = ld.current_derivatives(out.v[ld.bus]);
                d_r = weight * (d_r - ld.y_equiv);
                d_i = weight * (d_i - ld.y_equiv * Complex{0.0, 1.0});
                jac(b, b) += d_r.real();
                jac(b, n + b) += d_i.real();
                jac(n + b, b) += d_r.imag();
                jac(n + b, n + b) += d_i.imag();
            }
            Eigen::VectorXd rhs(2 * n);
            rhs << f.real(), f.imag();
            Eigen::VectorXd dx = jac.partialPivLu().solve(rhs);
            // Backtrack when the full step does not reduce the worst residual.
            double lambda = 1.0;
            for (int cut = 0;; ++cut) {
                for (Eigen::Index i = 0; i < n; ++i) {
                    const auto k = static_cast<std::size_t>(i);
                    trial[k] = out.v[k] - lambda * Complex{dx(i), dx(n + i)};
                }
                if (cut == 10) break;
                const double next = residual(sources, trial, weight).cwiseAbs().maxCoeff();
                if (std::isfinite(next) && next < worst) break;
                lambda *= 0.5;
            }
            out.v.swap(trial);
        }
    }

    Eigen::MatrixXcd y_;
    std::vector<ConstantPowerLoad> loads_;
    double tol_ = 1e-8;
    int max_iter_ = 50;
    Eigen::MatrixXd linear_jac_;
    Eigen::PartialPivLU<Eigen::MatrixXd> linear_lu_;
};

/// One-shot form of NetworkSolver::solve.
inline NetworkSolveResult network_solve_dynamic(const Eigen::MatrixXcd& y_aug, std::span<const Complex> sources,
                                                std::vector<ConstantPowerLoad> loads,
                                                std::span<const Complex> guess, double tolerance = 1e-8) {
    return NetworkSolver(y_aug, std::move(loads), tolerance).solve(sources, guess);
}

}  // namespace scsim
