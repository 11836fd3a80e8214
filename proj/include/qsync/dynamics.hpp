// dynamics.hpp -- Excited-state amplitude B(t) of a frequency-modulated qubit
// in a Lorentzian reservoir.
//
// B obeys  dB/dt + int_0^t K(t,t') B(t') dt' = 0,  B(0) = 1, with
//   K(t,t') = (gamma lambda / 2) exp(-lambda (t - t')) F(t) conj(F(t')),
//   F(t)    = exp(i (d/Omega) sin(Omega t)).
// Two independent solvers are provided: trapezoidal product integration of the
// memory integral (solve_volterra) and an embedded Runge-Kutta integration of
// the equivalent two-variable system obtained from the separable kernel
// (solve_ode). analytic_unmodulated is the closed form for d = 0.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "qsync/bessel.hpp"
#include "qsync/error.hpp"

namespace qsync {

using complex = std::complex<double>;

/// Physical configuration. Rates and frequencies are in units of gamma; time
/// is in units of 1/gamma.
struct SystemParams {
    double gamma = 1.0;
    double lambda = 1.0;
    double d = 0.0;
    double omega = 0.0;
    bool modulation_on = false;

    static SystemParams unmodulated(double lambda) {
        SystemParams p;
        p.lambda = lambda;
        return p;
    }

    static SystemParams modulated(double lambda, double d, double omega) {
        SystemParams p;
        p.lambda = lambda;
        p.d = d;
        p.omega = omega;
        p.modulation_on = true;
        return p;
    }

    /// d/Omega, or 0 when modulation is off.
    double ratio() const { return modulation_on ? d / omega : 0.0; }

    void validate() const {
        if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidInput("gamma must be positive");
        if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be positive");
        if (!(d >= 0.0) || !std::isfinite(d)) throw InvalidInput("d must be non-negative");
        if (!(omega >= 0.0) || !std::isfinite(omega)) throw InvalidInput("omega must be non-negative");
        if (modulation_on && !(omega > 0.0))
            throw InvalidInput("omega must be positive when modulation is on");
    }

    bool operator==(const SystemParams&) const = default;
};

/// Uniform time grid t_i = i * t_max / n_steps, i = 0..n_steps.
struct TimeGrid {
    double t_max = 1.0;
    std::size_t n_steps = 2;

    double dt() const { return t_max / static_cast<double>(n_steps); }
    double time(std::size_t i) const { return static_cast<double>(i) * dt(); }
    std::size_t size() const { return n_steps + 1; }

    void validate() const {
        if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InvalidInput("t_max must be positive");
        if (n_steps < 2) throw InvalidInput("n_steps must be at least 2");
    }

    bool operator==(const TimeGrid&) const = default;
};

/// Non-fatal notes about grids too coarse for the drive or the kernel memory.
inline std::vector<std::string> resolution_warnings(const SystemParams& params, const TimeGrid& grid) {
    std::vector<std::string> out;
    const double dt = grid.dt();
    if (params.modulation_on) {
        const double limit = (2.0 * std::numbers::pi / params.omega) / 32.0;
        if (dt > limit) {
            std::ostringstream msg;
            msg << "dt = " << dt << " exceeds drive period / 32 = " << limit;
            out.push_back(msg.str());
        }
    }
    const double kernel_limit = 0.05 / params.lambda;
    if (dt > kernel_limit) {
        std::ostringstream msg;
        msg << "dt = " << dt << " exceeds 0.05 / lambda = " << kernel_limit;
        out.push_back(msg.str());
    }
    return out;
}

/// Grid with dt <= min(0.005, drive period / 64) covering [0, t_max].
inline TimeGrid default_grid(const SystemParams& params, double t_max) {
    double dt = 0.005 / params.gamma;
    if (params.modulation_on) dt = std::min(dt, (2.0 * std::numbers::pi / params.omega) / 64.0);
    const auto n = static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
    return TimeGrid{t_max, std::max<std::size_t>(n, 2)};
}

/// Sampled amplitude B(t_i).
struct AmplitudeTrajectory {
    TimeGrid grid;
    std::vector<complex> values;
    /// Auxiliary memory variable z(t_i); filled by solve_ode only.
    std::vector<complex> memory;
    std::string solver;
    std::vector<std::string> warnings;

    std::size_t size() const { return values.size(); }
    double time(std::size_t i) const { return grid.time(i); }
    complex at(std::size_t i) const { return values.at(i); }
};

/// F(t) = exp(i (d/Omega) sin(Omega t)); identically 1 with modulation off.
inline complex modulation_factor(const SystemParams& params, double t) {
    if (!params.modulation_on) return {1.0, 0.0};
    return std::polar(1.0, params.ratio() * std::sin(params.omega * t));
}

/// Memory kernel K(t, t') for 0 <= t' <= t.
inline complex kernel(const SystemParams& params, double t, double t_prime) {
    if (!(t_prime >= 0.0) || !(t_prime <= t)) throw InvalidInput("kernel: requires 0 <= t' <= t");
    const double envelope = 0.5 * params.gamma * params.lambda * std::exp(-params.lambda * (t - t_prime));
    if (!params.modulation_on) return {envelope, 0.0};
    const double phase = params.ratio() * (std::sin(params.omega * t) - std::sin(params.omega * t_prime));
    return std::polar(envelope, phase);
}

/// exp(i a sin(tau)) summed over Bessel harmonics |n| <= n_max.
inline complex jacobi_anger_sin(double a, double tau, int n_max) {
    if (n_max < 0) throw InvalidInput("jacobi_anger_sin: n_max must be non-negative");
    complex sum = bessel_jn(0, a);
    for (int n = 1; n <= n_max; ++n) {
        const double jn = bessel_jn(n, a);
        // J_n e^{in tau} + J_{-n} e^{-in tau}: 2 J_n cos(n tau) for even n, 2i J_n sin(n tau) for odd n.
        if (n % 2 == 0) {
            sum += 2.0 * jn * std::cos(n * tau);
        } else {
            sum += complex(0.0, 2.0 * jn * std::sin(n * tau));
        }
    }
    return sum;
}

/// Kernel with each modulation exponential replaced by its Bessel-harmonic
/// series truncated at n_max.
inline complex kernel_truncated(const SystemParams& params, double t, double t_prime, int n_max) {
    if (!(t_prime >= 0.0) || !(t_prime <= t)) throw InvalidInput("kernel_truncated: requires 0 <= t' <= t");
    if (n_max < 0) throw InvalidInput("kernel_truncated: n_max must be non-negative");
    const double envelope = 0.5 * params.gamma * params.lambda * std::exp(-params.lambda * (t - t_prime));
    if (!params.modulation_on) return {envelope, 0.0};
    const double a = params.ratio();
    const complex f_t = jacobi_anger_sin(a, params.omega * t, n_max);
    const complex f_tp = jacobi_anger_sin(a, params.omega * t_prime, n_max);
    return envelope * f_t * std::conj(f_tp);
}

/// Closed-form B(t) with modulation off:
///   B(t) = e^{-lambda t / 2} [cosh(D t / 2) + (lambda / D) sinh(D t / 2)],
///   D = sqrt(lambda^2 - 2 gamma lambda)  (imaginary in the strong-coupling regime).
inline complex analytic_unmodulated(const SystemParams& params, double t) {
    if (params.modulation_on) throw InvalidInput("analytic_unmodulated: modulation must be off");
    const double lambda = params.lambda;
    const complex disc = std::sqrt(complex(lambda * lambda - 2.0 * params.gamma * lambda, 0.0));
    const complex half_dt = 0.5 * disc * t;
    complex sinh_over_d;
    if (std::abs(half_dt) < 1e-4) {
        // sinh(Dt/2)/D = (t/2)(1 + (Dt/2)^2/6 + (Dt/2)^4/120)
        const complex x2 = half_dt * half_dt;
        sinh_over_d = 0.5 * t * (1.0 + x2 / 6.0 + x2 * x2 / 120.0);
    } else {
        sinh_over_d = std::sinh(half_dt) / disc;
    }
    return std::exp(-0.5 * lambda * t) * (std::cosh(half_dt) + lambda * sinh_over_d);
}

namespace detail {

inline void check_finite(complex value, std::size_t step, const char* solver) {
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
        std::ostringstream msg;
        msg << solver << ": non-finite amplitude at step " << step;
        throw SolverDivergence(msg.str());
    }
}

// Trapezoidal product integration of B' = -I(t), I(t) = int_0^t K(t,t') B(t') dt'.
// `history(n, b)` must return sum_{j=0}^{n-1} w_j K(t_n, t_j) B_j with w_0 = 1/2 and
// w_j = 1 otherwise; `diagonal(n)` returns K(t_n, t_n). The implicit diagonal term
// is solved in closed form at each step.
template <class History, class Diagonal>
std::vector<complex> volterra_march(const TimeGrid& grid, History&& history, Diagonal&& diagonal) {
    const std::size_t n_points = grid.size();
    const double h = grid.dt();
    std::vector<complex> b(n_points);
    b[0] = 1.0;
    complex memory_now = 0.0; // I(t_n)
    for (std::size_t n = 0; n + 1 < n_points; ++n) {
        const complex partial = h * history(n + 1, static_cast<const std::vector<complex>&>(b));
        const complex diag = diagonal(n + 1);
        const complex rhs = b[n] - 0.5 * h * (memory_now + partial);
        b[n + 1] = rhs / (1.0 + 0.25 * h * h * diag);
        memory_now = partial + 0.5 * h * diag * b[n + 1];
        check_finite(b[n + 1], n + 1, "solve_volterra");
    }
    return b;
}

} // namespace detail

/// Solves the Volterra equation for an arbitrary kernel callable k(t, t'),
/// evaluating the kernel at every (t_n, t_j) pair: O(N^2) kernel calls.
template <class Kernel>
    requires std::invocable<Kernel&, double, double>
AmplitudeTrajectory solve_volterra(Kernel&& k, const TimeGrid& grid) {
    grid.validate();
    auto history = [&](std::size_t n, const std::vector<complex>& b) {
        const double tn = grid.time(n);
        complex sum = 0.5 * complex(k(tn, 0.0)) * b[0];
        for (std::size_t j = 1; j < n; ++j) sum += complex(k(tn, grid.time(j))) * b[j];
        return sum;
    };
    auto diagonal = [&](std::size_t n) { return complex(k(grid.time(n), grid.time(n))); };
    AmplitudeTrajectory out;
    out.grid = grid;
    out.values = detail::volterra_march(grid, history, diagonal);
    out.solver = "volterra-trapezoid";
    return out;
}

/// Solves the Volterra equation for the Lorentzian kernel.
///
/// The kernel is tabulated on the grid: e^{-lambda (t_n - t_j)} depends only on
/// n - j, and the drive phase is F(t_n) conj(F(t_j)). History terms whose
/// memory weight has decayed below 1e-18 are dropped.
inline AmplitudeTrajectory solve_volterra(const SystemParams& params, const TimeGrid& grid) {
    params.validate();
    grid.validate();
    const std::size_t n_points = grid.size();
    const double h = grid.dt();
    const double scale = 0.5 * params.gamma * params.lambda;

    std::vector<complex> drive(n_points);
    for (std::size_t i = 0; i < n_points; ++i) drive[i] = modulation_factor(params, grid.time(i));

    std::vector<double> decay;
    decay.reserve(n_points);
    for (std::size_t m = 0; m < n_points; ++m) {
        const double w = std::exp(-params.lambda * h * static_cast<double>(m));
        if (w < 1e-18) break;
        decay.push_back(w);
    }
    const std::size_t reach = decay.size();

    // weighted[j] = w_j conj(F(t_j)) B_j, filled as B_j becomes known.
    std::vector<complex> weighted(n_points);
    auto history = [&](std::size_t n, const std::vector<complex>& b) {
        const std::size_t j_new = n - 1;
        weighted[j_new] = (j_new == 0 ? 0.5 : 1.0) * std::conj(drive[j_new]) * b[j_new];
        const std::size_t j_begin = n >= reach ? n - reach + 1 : 0;
        double re = 0.0;
        double im = 0.0;
        for (std::size_t j = j_begin; j < n; ++j) {
            const double w = decay[n - j];
            re += w * weighted[j].real();
            im += w * weighted[j].imag();
        }
        return scale * drive[n] * complex(re, im);
    };
    auto diagonal = [&](std::size_t) { return complex(scale, 0.0); };

    AmplitudeTrajectory out;
    out.grid = grid;
    out.values = detail::volterra_march(grid, history, diagonal);
    out.solver = "volterra-trapezoid";
    out.warnings = resolution_warnings(params, grid);
    return out;
}

/// Tolerances for solve_ode.
struct OdeOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    /// Use one-period propagation when the grid step divides the drive period.
    bool allow_periodic = true;
    /// Accepted steps allowed per integration before reporting divergence.
    std::size_t max_steps = 50'000'000;
};

namespace detail {

namespace odeint = boost::numeric::odeint;

using OdeState = std::array<complex, 2>; // {B, z}

struct MemoryRhs {
    SystemParams params;
    void operator()(const OdeState& y, OdeState& dy, double t) const {
        const complex f = modulation_factor(params, t);
        dy[0] = -0.5 * params.gamma * params.lambda * f * y[1];
        dy[1] = -params.lambda * y[1] + std::conj(f) * y[0];
    }
};

// Integrates from y0 and records the state at every time in `times` (ascending, times[0] = 0).
// Step-size underflow and an exhausted step budget are reported as divergence.
inline std::vector<OdeState> integrate_dense(const MemoryRhs& rhs, OdeState y0, const std::vector<double>& times,
                                             double rel_tol, double abs_tol, std::size_t max_steps) {
    using Stepper = odeint::runge_kutta_dopri5<OdeState, double, OdeState, double, odeint::range_algebra>;
    std::vector<OdeState> out;
    out.reserve(times.size());
    double h0 = 1e-3;
    if (times.size() > 1) h0 = std::min(h0, times[1] - times[0]);
    auto stepper = odeint::make_dense_output(abs_tol, rel_tol, Stepper());
    stepper.initialize(y0, times.front(), h0);
    OdeState y = y0;
    std::size_t steps = 0;
    try {
        for (const double t : times) {
            while (stepper.current_time() < t) {
                stepper.do_step(std::ref(rhs));
                if (++steps > max_steps)
                    throw SolverDivergence("solve_ode: step budget of " + std::to_string(max_steps) +
                                           " exhausted near t = " + std::to_string(stepper.current_time()));
                const double h = stepper.current_time() - stepper.previous_time();
                if (!(h > 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(stepper.current_time()))))
                    throw SolverDivergence("solve_ode: step size underflow near t = " +
                                           std::to_string(stepper.current_time()));
                const auto& s = stepper.current_state();
                if (!std::isfinite(std::abs(s[0])) || !std::isfinite(std::abs(s[1])))
                    throw SolverDivergence("solve_ode: non-finite state near t = " +
                                           std::to_string(stepper.current_time()));
            }
            if (t == stepper.current_time()) {
                y = stepper.current_state();
            } else {
                stepper.calc_state(t, y);
            }
            out.push_back(y);
        }
    } catch (const odeint::odeint_error& e) {
        throw SolverDivergence(std::string("solve_ode: ") + e.what());
    }
    return out;
}

} // namespace detail

/// Integrates the equivalent local system
///   B' = -(gamma lambda / 2) F(t) z,   z' = -lambda z + conj(F(t)) B,
///   B(0) = 1, z(0) = 0
/// with an adaptive Dormand-Prince 5(4) stepper and dense output onto the grid.
///
/// When the grid step divides the drive period exactly (m dt = 2 pi / Omega
/// for an integer m) and the window spans at least two periods, the
/// fundamental matrix is integrated over one period at tightened tolerance
/// and the solution is advanced period by period with the monodromy matrix.
inline AmplitudeTrajectory solve_ode(const SystemParams& params, const TimeGrid& grid, const OdeOptions& opts = {}) {
    params.validate();
    grid.validate();
    const detail::MemoryRhs rhs{params};
    const std::size_t n_points = grid.size();
    const double dt = grid.dt();

    AmplitudeTrajectory out;
    out.grid = grid;
    out.warnings = resolution_warnings(params, grid);
    out.values.resize(n_points);
    out.memory.resize(n_points);

    std::size_t per_period = 0;
    if (opts.allow_periodic && params.modulation_on) {
        const double period = 2.0 * std::numbers::pi / params.omega;
        const double m = std::round(period / dt);
        if (m >= 1.0 && std::abs(m * dt - period) <= 1e-12 * period && grid.n_steps >= 2 * static_cast<std::size_t>(m))
            per_period = static_cast<std::size_t>(m);
    }

    if (per_period == 0) {
        std::vector<double> times(n_points);
        for (std::size_t i = 0; i < n_points; ++i) times[i] = grid.time(i);
        const auto states = detail::integrate_dense(rhs, {complex(1.0), complex(0.0)}, times, opts.rel_tol, opts.abs_tol, opts.max_steps);
        if (states.size() != n_points) throw SolverDivergence("solve_ode: integration stopped early");
        for (std::size_t i = 0; i < n_points; ++i) {
            out.values[i] = states[i][0];
            out.memory[i] = states[i][1];
            detail::check_finite(out.values[i], i, "solve_ode");
        }
        out.values[0] = 1.0;
        out.solver = "dopri5-dense";
        return out;
    }

    // Columns of the fundamental matrix at r dt, r = 0..per_period.
    std::vector<double> sub_times(per_period + 1);
    for (std::size_t r = 0; r <= per_period; ++r) sub_times[r] = static_cast<double>(r) * dt;
    const double tight_rel = std::min(opts.rel_tol, 1e-12);
    const double tight_abs = std::min(opts.abs_tol, 1e-15);
    const auto col_b = detail::integrate_dense(rhs, {complex(1.0), complex(0.0)}, sub_times, tight_rel, tight_abs, opts.max_steps);
    const auto col_z = detail::integrate_dense(rhs, {complex(0.0), complex(1.0)}, sub_times, tight_rel, tight_abs, opts.max_steps);
    if (col_b.size() != per_period + 1 || col_z.size() != per_period + 1)
        throw SolverDivergence("solve_ode: period integration stopped early");

    const auto& mb = col_b[per_period];
    const auto& mz = col_z[per_period];
    detail::OdeState w{complex(1.0), complex(0.0)}; // state at the start of the current period
    for (std::size_t i = 0; i < n_points; ++i) {
        const std::size_t r = i % per_period;
        if (i > 0 && r == 0) {
            w = {mb[0] * w[0] + mz[0] * w[1], mb[1] * w[0] + mz[1] * w[1]};
        }
        out.values[i] = col_b[r][0] * w[0] + col_z[r][0] * w[1];
        out.memory[i] = col_b[r][1] * w[0] + col_z[r][1] * w[1];
        detail::check_finite(out.values[i], i, "solve_ode");
    }
    out.values[0] = 1.0;
    out.solver = "dopri5-periodic";
    return out;
}

/// Largest |a_i - b_i| over two trajectories on the same grid.
inline double sup_norm_difference(const AmplitudeTrajectory& a, const AmplitudeTrajectory& b) {
    if (a.size() != b.size()) throw InvalidInput("sup_norm_difference: trajectories differ in length");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    return worst;
}

} // namespace qsync
