// commands.hpp -- Implementation of the qsync command-line subcommands.
//
// Every command writes its datasets plus a JSON metadata sidecar into the
// output directory and returns a process exit status: 0 on success, 2 for
// input or validation errors, 3 for numerical failures.

#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsync/analysis.hpp"
#include "qsync/bessel.hpp"
#include "qsync/config.hpp"
#include "qsync/dynamics.hpp"
#include "qsync/error.hpp"
#include "qsync/figures.hpp"
#include "qsync/io.hpp"
#include "qsync/state.hpp"

namespace qsync {

inline constexpr int exit_ok = 0;
inline constexpr int exit_input_error = 2;
inline constexpr int exit_numerical_error = 3;

/// Environment variable naming the default output directory.
inline constexpr const char* output_dir_env = "QSYNC_OUTPUT_DIR";

struct CommandContext {
    /// From --out; takes precedence over the config file and the environment.
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::string> format;
    bool verify = false;
    std::ostream* log = &std::cerr;
};

/// Runs `body` and maps exceptions onto the exit-code contract.
template <class Body>
int run_guarded(Body&& body, std::ostream& err) {
    try {
        return body();
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return exit_input_error;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_input_error;
    } catch (const SolverDivergence& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical_error;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical_error;
    }
}

namespace detail {

inline std::filesystem::path resolve_out_dir(const CommandContext& ctx, const std::optional<std::string>& from_config) {
    if (ctx.out_dir) return *ctx.out_dir;
    if (from_config) return *from_config;
    if (const char* env = std::getenv(output_dir_env); env && *env) return env;
    return "qsync_out";
}

inline std::string resolve_format(const CommandContext& ctx, const std::string& from_config) {
    const std::string f = ctx.format.value_or(from_config);
    if (f != "csv" && f != "json") throw InvalidInput("--format must be csv or json");
    return f;
}

inline nlohmann::json params_json(const SystemParams& p) {
    return {{"gamma", p.gamma},
            {"lambda_over_gamma", p.lambda},
            {"d_over_gamma", p.d},
            {"omega_over_gamma", p.omega},
            {"modulation_on", p.modulation_on},
            {"d_over_omega", p.ratio()}};
}

inline nlohmann::json grid_json(const TimeGrid& g) {
    return {{"t_max_gamma", g.t_max}, {"n_steps", g.n_steps}, {"dt", g.dt()}};
}

inline nlohmann::json solver_json(const AmplitudeTrajectory& traj, const OdeOptions& opts) {
    return {{"name", traj.solver}, {"rel_tol", opts.rel_tol}, {"abs_tol", opts.abs_tol}};
}

inline nlohmann::json state_json(const InitialState& s) {
    return {{"c_e", {s.c_e.real(), s.c_e.imag()}}, {"c_g", {s.c_g.real(), s.c_g.imag()}}};
}

// Common sidecar fields for config-driven commands; the stored config text and
// argument vector reproduce the run.
inline nlohmann::json base_metadata(const std::string& command, const RunConfig& cfg, const std::string& format,
                                    const std::string& config_file, std::vector<std::string> extra_args) {
    nlohmann::json m;
    m["schema"] = metadata_schema;
    m["artifact_version"] = artifact_version;
    m["command"] = command;
    m["format"] = format;
    m["parameters"] = params_json(cfg.system);
    m["initial_state"] = state_json(cfg.initial);
    m["grid"] = grid_json(cfg.grid());
    m["config_file"] = config_file;
    m["config_text"] = serialize_config(cfg);
    std::vector<std::string> argv{"qsync", command, "--config", config_file, "--format", format};
    argv.insert(argv.end(), extra_args.begin(), extra_args.end());
    m["rerun"] = argv;
    return m;
}

inline Table amplitude_table(const AmplitudeTrajectory& traj) {
    Table t;
    t.columns = {"gamma_t", "re_b", "im_b", "pop_e"};
    t.rows.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const complex b = traj.values[i];
        t.add({traj.time(i), b.real(), b.imag(), std::norm(b)});
    }
    return t;
}

inline Table sync_table(const SyncSeries& s) {
    Table t;
    t.columns = {"gamma_t", "s_value"};
    t.rows.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) t.add({s.time(i), s.values[i]});
    return t;
}

inline Table qgrid_table(const QGrid& g) {
    Table t;
    t.columns = {"theta", "phi", "q"};
    t.rows.reserve(g.q.size());
    for (std::size_t i = 0; i < g.theta.size(); ++i)
        for (std::size_t j = 0; j < g.phi.size(); ++j) t.add({g.theta[i], g.phi[j], g.at(i, j)});
    return t;
}

inline nlohmann::json qgrid_summary(const QGrid& g) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < g.q.size(); ++k)
        if (g.q[k] > g.q[best]) best = k;
    const std::size_t n_phi = g.phi.size();
    return {{"normalization", g.normalization},
            {"normalization_error", std::abs(g.normalization - 1.0)},
            {"q_max", g.q[best]},
            {"theta_at_max", g.theta[best / n_phi]},
            {"phi_at_max", g.phi[best % n_phi]}};
}

inline nlohmann::json backflow_json(const BackflowReport& r) {
    nlohmann::json intervals = nlohmann::json::array();
    for (const auto& [a, b] : r.intervals) intervals.push_back({a, b});
    return {{"interval_count", r.intervals.size()}, {"total_backflow", r.total_backflow}, {"intervals", intervals}};
}

inline nlohmann::json verification_json(const SystemParams& params, const AmplitudeTrajectory& traj,
                                        std::size_t max_points = 20001) {
    const double diff = volterra_crosscheck(params, traj, max_points);
    return {{"solver", "volterra-trapezoid"},
            {"points", std::min(traj.size(), max_points)},
            {"sup_norm_difference", diff}};
}

inline QubitState snapshot_state(const RunConfig& cfg, complex b) {
    if (cfg.state_override == "maximally_mixed") return QubitState::maximally_mixed();
    return density_matrix(cfg.initial, b);
}

// Writes one Q mesh per snapshot time; returns the per-snapshot summaries.
inline nlohmann::json write_snapshots(const std::filesystem::path& dir, const std::string& prefix,
                                      const RunConfig& cfg, const AmplitudeTrajectory& traj,
                                      const std::vector<double>& times, const std::string& format) {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t s = 0; s < times.size(); ++s) {
        const std::size_t k = nearest_index(traj.grid, times[s]);
        const QGrid g = husimi_grid(snapshot_state(cfg, traj.values[k]), cfg.n_theta, cfg.n_phi);
        const std::string file = write_table(dir, prefix + "_" + std::to_string(s), qgrid_table(g), format);
        auto entry = qgrid_summary(g);
        entry["index"] = s;
        entry["requested_time"] = times[s];
        entry["time"] = traj.time(k);
        entry["file"] = file;
        list.push_back(entry);
    }
    return list;
}

inline void write_config_copy(const std::filesystem::path& dir, const std::string& name, const RunConfig& cfg) {
    write_file_atomic(dir / name, serialize_config(cfg));
}

} // namespace detail

/// Amplitude dataset: gamma_t, re_b, im_b, pop_e (= |B|^2).
inline int cmd_simulate(const RunConfig& cfg, const CommandContext& ctx) {
    const auto dir = detail::resolve_out_dir(ctx, cfg.output_dir);
    const auto format = detail::resolve_format(ctx, cfg.output_format);
    ensure_writable_dir(dir);
    const auto grid = cfg.grid();
    const auto opts = cfg.ode_options();
    cfg.initial.validate();
    const auto traj = solve_ode(cfg.system, grid, opts);
    for (const auto& w : traj.warnings) *ctx.log << "warning: " << w << '\n';

    auto meta = detail::base_metadata("simulate", cfg, format, "simulate.config", ctx.verify ? std::vector<std::string>{"--verify"} : std::vector<std::string>{});
    meta["solver"] = detail::solver_json(traj, opts);
    meta["warnings"] = traj.warnings;
    nlohmann::json datasets = nlohmann::json::array();
    datasets.push_back(write_table(dir, "simulate", detail::amplitude_table(traj), format));
    const auto wants = [&](const char* o) {
        return std::find(cfg.observables.begin(), cfg.observables.end(), o) != cfg.observables.end();
    };
    if (wants("sync")) {
        const auto series = sync_series(traj, cfg.initial, cfg.phi);
        datasets.push_back(write_table(dir, "simulate_sync", detail::sync_table(series), format));
        meta["sync_lifetime"] = sync_lifetime(series, cfg.lifetime_epsilon);
    }
    if (wants("qfunc") && !cfg.qfunc_times.empty())
        meta["snapshots"] = detail::write_snapshots(dir, "simulate_qfunc", cfg, traj, cfg.qfunc_times, format);
    if (ctx.verify) meta["verification"] = detail::verification_json(cfg.system, traj);
    meta["datasets"] = datasets;
    detail::write_config_copy(dir, "simulate.config", cfg);
    write_json(dir / "simulate.meta.json", meta);
    return exit_ok;
}

/// One (theta, phi, q) mesh per snapshot time plus a normalization report.
inline int cmd_qfunc(const RunConfig& cfg, std::vector<double> times, const CommandContext& ctx) {
    if (times.empty()) times = cfg.qfunc_times;
    if (times.empty()) throw InvalidInput("qfunc: no snapshot times (use --times or qfunc_times)");
    for (double t : times)
        if (!(t >= 0.0) || t > cfg.t_max) throw InvalidInput("qfunc: snapshot time " + detail::format_g17(t) + " outside [0, t_max_gamma]");
    const auto dir = detail::resolve_out_dir(ctx, cfg.output_dir);
    const auto format = detail::resolve_format(ctx, cfg.output_format);
    ensure_writable_dir(dir);
    cfg.initial.validate();
    const auto opts = cfg.ode_options();
    const auto traj = solve_ode(cfg.system, cfg.grid(), opts);
    for (const auto& w : traj.warnings) *ctx.log << "warning: " << w << '\n';

    std::string time_arg;
    for (std::size_t i = 0; i < times.size(); ++i) time_arg += (i ? "," : "") + detail::format_g17(times[i]);
    auto meta = detail::base_metadata("qfunc", cfg, format, "qfunc.config", {"--times", time_arg});
    meta["solver"] = detail::solver_json(traj, opts);
    meta["warnings"] = traj.warnings;
    meta["mesh"] = {{"n_theta", cfg.n_theta}, {"n_phi", cfg.n_phi}};
    if (!cfg.state_override.empty()) meta["state_override"] = cfg.state_override;
    meta["snapshots"] = detail::write_snapshots(dir, "qfunc", cfg, traj, times, format);
    if (ctx.verify) meta["verification"] = detail::verification_json(cfg.system, traj);
    detail::write_config_copy(dir, "qfunc.config", cfg);
    write_json(dir / "qfunc.meta.json", meta);
    return exit_ok;
}

/// S(phi, t) dataset: gamma_t, s_value; lifetime and backflow in the sidecar.
inline int cmd_sync(const RunConfig& cfg_in, std::optional<double> phi, const CommandContext& ctx) {
    RunConfig cfg = cfg_in;
    if (phi) cfg.phi = *phi;
    const auto dir = detail::resolve_out_dir(ctx, cfg.output_dir);
    const auto format = detail::resolve_format(ctx, cfg.output_format);
    ensure_writable_dir(dir);
    cfg.initial.validate();
    const auto opts = cfg.ode_options();
    const auto traj = solve_ode(cfg.system, cfg.grid(), opts);
    for (const auto& w : traj.warnings) *ctx.log << "warning: " << w << '\n';
    const auto series = sync_series(traj, cfg.initial, cfg.phi);

    auto meta = detail::base_metadata("sync", cfg, format, "sync.config", ctx.verify ? std::vector<std::string>{"--verify"} : std::vector<std::string>{});
    meta["solver"] = detail::solver_json(traj, opts);
    meta["warnings"] = traj.warnings;
    meta["phi"] = cfg.phi;
    meta["lifetime_epsilon"] = cfg.lifetime_epsilon;
    meta["sync_lifetime"] = sync_lifetime(series, cfg.lifetime_epsilon);
    meta["backflow"] = detail::backflow_json(backflow_intervals(traj));
    if (ctx.verify) meta["verification"] = detail::verification_json(cfg.system, traj);
    meta["datasets"] = {write_table(dir, "sync", detail::sync_table(series), format)};
    detail::write_config_copy(dir, "sync.config", cfg);
    write_json(dir / "sync.meta.json", meta);
    return exit_ok;
}

/// Parameter sweep: per-row datasets plus a summary table. Row failures are
/// recorded in the summary; the command exits 0 as long as the sweep ran.
inline int cmd_sweep(const RunConfig& cfg, const CommandContext& ctx) {
    const auto dir = detail::resolve_out_dir(ctx, cfg.output_dir);
    const auto format = detail::resolve_format(ctx, cfg.output_format);
    ensure_writable_dir(dir);
    auto spec = sweep_spec(cfg);
    spec.verify = ctx.verify;
    const auto table = run_sweep(spec, cfg.initial, cfg.grid(), cfg.ode_options());

    Table summary;
    summary.columns = {"row", "value", "lambda_over_gamma", "d_over_gamma", "omega_over_gamma", "modulation_on", "ok",
                       "sync_lifetime", "min_abs_b", "final_abs_b"};
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        summary.add({static_cast<double>(row.index), row.value, row.params.lambda, row.params.d, row.params.omega,
                     row.params.modulation_on ? 1.0 : 0.0, row.ok ? 1.0 : 0.0, row.lifetime, row.min_abs_b,
                     row.final_abs_b});
        nlohmann::json r;
        r["row"] = row.index;
        r["value"] = row.value;
        r["parameters"] = detail::params_json(row.params);
        r["ok"] = row.ok;
        if (!row.ok) {
            r["error"] = row.error;
            rows.push_back(r);
            continue;
        }
        r["solver"] = row.solver;
        r["warnings"] = row.warnings;
        r["sync_lifetime"] = row.lifetime;
        if (row.verify_discrepancy) r["verify_sup_norm_difference"] = *row.verify_discrepancy;
        const std::string stem = "sweep_row" + std::to_string(row.index);
        if (row.series) r["file"] = write_table(dir, stem, detail::sync_table(*row.series), format);
        if (row.trajectory) r["file"] = write_table(dir, stem, detail::amplitude_table(*row.trajectory), format);
        if (!row.snapshots.empty()) {
            nlohmann::json snaps = nlohmann::json::array();
            for (std::size_t s = 0; s < row.snapshots.size(); ++s) {
                const auto& [t, g] = row.snapshots[s];
                auto entry = detail::qgrid_summary(g);
                entry["time"] = t;
                entry["file"] = write_table(dir, stem + "_q" + std::to_string(s), detail::qgrid_table(g), format);
                snaps.push_back(entry);
            }
            r["snapshots"] = snaps;
        }
        rows.push_back(r);
    }
    auto meta = detail::base_metadata("sweep", cfg, format, "sweep.config", ctx.verify ? std::vector<std::string>{"--verify"} : std::vector<std::string>{});
    meta["sweep"] = {{"variable", cfg.sweep_variable},
                     {"values", cfg.sweep_values},
                     {"observable", cfg.sweep_observable},
                     {"ratio_lock", cfg.ratio_lock ? nlohmann::json(*cfg.ratio_lock) : nlohmann::json(nullptr)}};
    meta["rows"] = rows;
    meta["datasets"] = {write_table(dir, "sweep", summary, format)};
    detail::write_config_copy(dir, "sweep.config", cfg);
    write_json(dir / "sweep.meta.json", meta);
    return exit_ok;
}

/// Regenerates the datasets of one figure and a gnuplot script for them.
inline int cmd_figures(const std::string& figure_id, const CommandContext& ctx) {
    const FigureRecipe recipe = figure_recipe(figure_id);
    const auto dir = detail::resolve_out_dir(ctx, std::nullopt);
    ensure_writable_dir(dir);
    const OdeOptions opts;
    const InitialState init = InitialState::equal_superposition();

    nlohmann::json panels = nlohmann::json::array();
    std::vector<std::string> files;
    for (const auto& panel : recipe.panels) {
        const auto traj = solve_ode(panel.params, panel.grid, opts);
        const std::string stem = recipe.id + "_" + panel.id;
        nlohmann::json p;
        p["id"] = panel.id;
        p["label"] = panel.label;
        p["parameters"] = detail::params_json(panel.params);
        p["grid"] = detail::grid_json(panel.grid);
        p["solver"] = detail::solver_json(traj, opts);
        p["warnings"] = traj.warnings;
        if (panel.bessel_order) {
            p["bessel_order"] = *panel.bessel_order;
            p["zero_index"] = *panel.zero_index;
            // d was built as zero * Omega; record the zero itself rather than the rounded quotient.
            p["parameters"]["d_over_omega"] = jn_zero(*panel.bessel_order, *panel.zero_index);
        }
        if (panel.kind == PanelKind::q_snapshot) {
            const std::size_t k = nearest_index(panel.grid, panel.snapshot_time);
            const QGrid g = husimi_grid(density_matrix(init, traj.values[k]), recipe.n_theta, recipe.n_phi);
            files.push_back(write_table(dir, stem, detail::qgrid_table(g), "csv"));
            p["snapshot_time"] = traj.time(k);
            p["q_summary"] = detail::qgrid_summary(g);
        } else {
            const auto series = sync_series(traj, init, recipe.phi);
            files.push_back(write_table(dir, stem, detail::sync_table(series), "csv"));
            p["phi"] = recipe.phi;
            p["sync_lifetime"] = sync_lifetime(series);
            p["backflow"] = detail::backflow_json(backflow_intervals(traj));
        }
        if (ctx.verify) p["verification"] = detail::verification_json(panel.params, traj);
        p["file"] = files.back();
        panels.push_back(p);
    }
    const std::string script = recipe.id + ".gp";
    write_file_atomic(dir / script, plot_script(recipe, files));

    nlohmann::json meta;
    meta["schema"] = metadata_schema;
    meta["artifact_version"] = artifact_version;
    meta["command"] = "figures";
    meta["figure"] = recipe.id;
    meta["title"] = recipe.title;
    meta["assumptions"] = recipe.assumptions;
    meta["initial_state"] = detail::state_json(init);
    meta["lifetime_epsilon"] = default_lifetime_epsilon;
    meta["panels"] = panels;
    meta["plot_script"] = script;
    meta["rerun"] = ctx.verify ? std::vector<std::string>{"qsync", "figures", recipe.id, "--verify"}
                               : std::vector<std::string>{"qsync", "figures", recipe.id};
    write_json(dir / (recipe.id + ".meta.json"), meta);
    return exit_ok;
}

/// Prints the first `count` zeros of J_order, six significant digits.
inline int cmd_zeros(int order, int count, std::ostream& out) {
    if (order < 0) throw InvalidInput("zeros: --order must be >= 0");
    if (count < 1) throw InvalidInput("zeros: --count must be >= 1");
    const auto table = bessel_zero_table(order, count);
    out << "k,zero\n";
    char buf[64];
    for (std::size_t k = 0; k < table.zeros.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu,%.6g\n", k + 1, table.zeros[k]);
        out << buf;
    }
    return exit_ok;
}

} // namespace qsync
