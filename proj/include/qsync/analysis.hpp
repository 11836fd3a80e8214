// analysis.hpp -- Synchronization time series, lifetimes, information-backflow
// witness and parameter sweeps.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qsync/bessel.hpp"
#include "qsync/dynamics.hpp"
#include "qsync/error.hpp"
#include "qsync/state.hpp"

namespace qsync {

inline constexpr double default_lifetime_epsilon = 0.01;

/// S(phi, t_i) from an already computed trajectory.
inline SyncSeries sync_series(const AmplitudeTrajectory& traj, const InitialState& init, double phi) {
    SyncSeries s;
    s.phi = phi;
    s.grid = traj.grid;
    s.values.reserve(traj.size());
    for (const complex b : traj.values) s.values.push_back(sync_measure(density_matrix(init, b), phi));
    return s;
}

inline SyncSeries sync_series(const SystemParams& params, const InitialState& init, const TimeGrid& grid, double phi,
                              const OdeOptions& opts = {}) {
    init.validate();
    return sync_series(solve_ode(params, grid, opts), init, phi);
}

/// Last grid time with |S| >= epsilon, or 0 if there is none.
inline double sync_lifetime(const SyncSeries& series, double epsilon = default_lifetime_epsilon) {
    if (!(epsilon > 0.0)) throw InvalidInput("sync_lifetime: epsilon must be positive");
    for (std::size_t i = series.size(); i-- > 0;) {
        if (std::abs(series.values[i]) >= epsilon) return series.time(i);
    }
    return 0.0;
}

/// Upper envelope of |S|: local maxima (plus both endpoints) joined linearly.
inline std::vector<double> sync_envelope(const SyncSeries& series) {
    const std::size_t n = series.size();
    std::vector<double> env(n, 0.0);
    if (n == 0) return env;
    std::vector<std::size_t> peaks{0};
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double a = std::abs(series.values[i - 1]);
        const double b = std::abs(series.values[i]);
        const double c = std::abs(series.values[i + 1]);
        if (b >= a && b >= c && (b > a || b > c)) peaks.push_back(i);
    }
    if (n > 1) peaks.push_back(n - 1);
    for (std::size_t p = 0; p + 1 < peaks.size(); ++p) {
        const std::size_t i0 = peaks[p];
        const std::size_t i1 = peaks[p + 1];
        const double v0 = std::abs(series.values[i0]);
        const double v1 = std::abs(series.values[i1]);
        for (std::size_t i = i0; i <= i1; ++i) {
            const double w = (i1 == i0) ? 0.0 : static_cast<double>(i - i0) / static_cast<double>(i1 - i0);
            env[i] = (1.0 - w) * v0 + w * v1;
        }
    }
    if (n == 1) env[0] = std::abs(series.values[0]);
    return env;
}

/// Intervals where the excited population |B|^2 grows.
struct BackflowReport {
    std::vector<std::pair<double, double>> intervals;
    double total_backflow = 0.0;
};

/// Finite-difference sign analysis of |B|^2. An interval opens on an
/// increase larger than `tolerance` and closes on a decrease larger than
/// `tolerance`; smaller changes leave the current state unchanged.
inline BackflowReport backflow_intervals(const AmplitudeTrajectory& traj, double tolerance = 1e-10) {
    if (traj.size() < 3) throw InvalidInput("backflow_intervals: need at least 3 samples");
    BackflowReport report;
    bool open = false;
    double start = 0.0;
    double end = 0.0;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double delta = std::norm(traj.values[i + 1]) - std::norm(traj.values[i]);
        if (!open && delta > tolerance) {
            open = true;
            start = traj.time(i);
        } else if (open && delta < -tolerance) {
            open = false;
            report.intervals.emplace_back(start, end);
        }
        if (open) {
            if (delta > 0.0) {
                report.total_backflow += delta;
                end = traj.time(i + 1);
            }
        }
    }
    if (open) report.intervals.emplace_back(start, end);
    return report;
}

enum class SweepVariable { omega, d, ratio };
enum class SweepObservable { sync_series, q_grid_snapshots, amplitude };

/// One-parameter family of runs around a base configuration.
struct SweepSpec {
    SystemParams base;
    SweepVariable variable = SweepVariable::omega;
    std::vector<double> values;
    /// Forces d = ratio_lock * Omega on every row.
    std::optional<double> ratio_lock;
    SweepObservable observable = SweepObservable::sync_series;
    double phi = 0.0;
    double epsilon = default_lifetime_epsilon;
    std::vector<double> snapshot_times;
    std::size_t n_theta = 101;
    std::size_t n_phi = 101;
    /// Re-run the first and last rows through solve_volterra.
    bool verify = false;
    /// Volterra cross-checks are limited to the first this-many grid points.
    std::size_t verify_max_points = 20001;

    void validate() const {
        if (values.empty()) throw InvalidInput("sweep: values must be non-empty");
        for (double v : values)
            if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("sweep: values must be finite and >= 0");
        if (ratio_lock && !(*ratio_lock > 0.0)) throw InvalidInput("sweep: ratio_lock must be positive");
        if (!(epsilon > 0.0)) throw InvalidInput("sweep: epsilon must be positive");
    }
};

/// Parameters for one sweep value.
inline SystemParams sweep_point(const SweepSpec& spec, double value) {
    SystemParams p = spec.base;
    switch (spec.variable) {
    case SweepVariable::omega:
        p.omega = value;
        p.modulation_on = value > 0.0;
        break;
    case SweepVariable::d:
        p.d = value;
        break;
    case SweepVariable::ratio:
        p.d = value * p.omega;
        break;
    }
    if (spec.ratio_lock) p.d = *spec.ratio_lock * p.omega;
    return p;
}

struct SweepRow {
    std::size_t index = 0;
    double value = 0.0;
    SystemParams params;
    bool ok = false;
    std::string error;
    std::string solver;
    std::vector<std::string> warnings;
    std::optional<AmplitudeTrajectory> trajectory;
    std::optional<SyncSeries> series;
    std::vector<std::pair<double, QGrid>> snapshots;
    double lifetime = 0.0;
    double min_abs_b = 0.0;
    double final_abs_b = 0.0;
    std::optional<double> verify_discrepancy;
};

struct SweepTable {
    std::vector<SweepRow> rows;
};

/// Index of the grid point nearest to t; throws if t lies outside [0, t_max].
inline std::size_t nearest_index(const TimeGrid& grid, double t) {
    if (!(t >= 0.0) || t > grid.t_max * (1.0 + 1e-12)) throw InvalidInput("time outside the simulated window");
    const auto i = static_cast<std::size_t>(std::llround(t / grid.dt()));
    return std::min(i, grid.n_steps);
}

namespace detail {

inline double volterra_crosscheck(const SystemParams& params, const AmplitudeTrajectory& reference,
                                  std::size_t max_points) {
    const std::size_t points = std::min(reference.size(), std::max<std::size_t>(max_points, 3));
    const TimeGrid prefix{reference.grid.dt() * static_cast<double>(points - 1), points - 1};
    const auto check = solve_volterra(params, prefix);
    double worst = 0.0;
    for (std::size_t i = 0; i < points; ++i) worst = std::max(worst, std::abs(check.values[i] - reference.values[i]));
    return worst;
}

} // namespace detail

/// Runs every sweep value on the solve_ode path. A failing row records its
/// error and the remaining rows still run; rows keep input order.
inline SweepTable run_sweep(const SweepSpec& spec, const InitialState& init, const TimeGrid& grid,
                            const OdeOptions& opts = {}) {
    spec.validate();
    init.validate();
    SweepTable table;
    table.rows.reserve(spec.values.size());
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        SweepRow row;
        row.index = i;
        row.value = spec.values[i];
        row.params = sweep_point(spec, spec.values[i]);
        try {
            grid.validate();
            auto traj = solve_ode(row.params, grid, opts);
            row.solver = traj.solver;
            row.warnings = traj.warnings;
            row.min_abs_b = std::abs(traj.values.front());
            for (const complex b : traj.values) row.min_abs_b = std::min(row.min_abs_b, std::abs(b));
            row.final_abs_b = std::abs(traj.values.back());
            auto series = sync_series(traj, init, spec.phi);
            row.lifetime = sync_lifetime(series, spec.epsilon);
            if (spec.verify && (i == 0 || i + 1 == spec.values.size()))
                row.verify_discrepancy = detail::volterra_crosscheck(row.params, traj, spec.verify_max_points);
            switch (spec.observable) {
            case SweepObservable::sync_series:
                row.series = std::move(series);
                break;
            case SweepObservable::amplitude:
                row.trajectory = std::move(traj);
                break;
            case SweepObservable::q_grid_snapshots:
                for (double t : spec.snapshot_times) {
                    const std::size_t k = nearest_index(grid, t);
                    row.snapshots.emplace_back(grid.time(k),
                                               husimi_grid(density_matrix(init, traj.values[k]), spec.n_theta, spec.n_phi));
                }
                break;
            }
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

struct BesselZeroRow {
    int zero_index = 0;
    double zero = 0.0; // d / Omega
    SystemParams params;
    double lifetime = 0.0;
    /// (time, envelope of |S|) at evenly spaced grid points.
    std::vector<std::pair<double, double>> envelope;
};

/// Sets d = j_{0,k} Omega for each k and compares synchronization lifetimes.
inline std::vector<BesselZeroRow> bessel_zero_comparison(const SystemParams& base, const std::vector<int>& zero_indices,
                                                         const InitialState& init, const TimeGrid& grid,
                                                         double phi = 0.0, double epsilon = default_lifetime_epsilon,
                                                         std::size_t envelope_samples = 11,
                                                         const OdeOptions& opts = {}) {
    if (!(base.omega > 0.0)) throw InvalidInput("bessel_zero_comparison: base Omega must be positive");
    if (envelope_samples < 2) throw InvalidInput("bessel_zero_comparison: need at least 2 envelope samples");
    std::vector<BesselZeroRow> rows;
    for (int k : zero_indices) {
        if (k < 1) throw InvalidInput("bessel_zero_comparison: zero indices start at 1");
        BesselZeroRow row;
        row.zero_index = k;
        row.zero = jn_zero(0, k);
        row.params = base;
        row.params.modulation_on = true;
        row.params.d = row.zero * base.omega;
        const auto series = sync_series(row.params, init, grid, phi, opts);
        row.lifetime = sync_lifetime(series, epsilon);
        const auto env = sync_envelope(series);
        for (std::size_t s = 0; s < envelope_samples; ++s) {
            const std::size_t i = s * grid.n_steps / (envelope_samples - 1);
            row.envelope.emplace_back(grid.time(i), env[i]);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace qsync
