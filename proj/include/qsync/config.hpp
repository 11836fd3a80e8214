// config.hpp -- Flat `key = value` run configuration.
//
// Lines are `key = value`; `#` starts a comment; blank lines are ignored.
// Lists are comma separated. Unknown or duplicate keys are errors, reported
// with the line they occur on.

#pragma once

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qsync/analysis.hpp"
#include "qsync/dynamics.hpp"
#include "qsync/error.hpp"
#include "qsync/state.hpp"

namespace qsync {

/// Malformed or invalid configuration; `line` is 0 when no single line is at fault.
class ConfigError : public InvalidInput {
public:
    ConfigError(const std::string& source, int line, const std::string& message)
        : InvalidInput(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message), line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

struct RunConfig {
    SystemParams system;
    InitialState initial;
    double t_max = 100.0;
    /// Grid resolution; the default grid is used when unset.
    std::optional<std::size_t> n_steps;
    double phi = 0.0;
    std::string output_format = "csv";
    std::optional<std::string> output_dir;
    std::vector<std::string> observables{"amplitude"};
    std::vector<double> qfunc_times;
    std::size_t n_theta = 101;
    std::size_t n_phi = 101;
    double lifetime_epsilon = default_lifetime_epsilon;
    /// Test hook: "maximally_mixed" replaces the evolved state in qfunc output.
    std::string state_override;
    std::string sweep_variable = "omega";
    std::vector<double> sweep_values;
    std::optional<double> ratio_lock;
    std::string sweep_observable = "sync-series";
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    std::size_t max_ode_steps = OdeOptions{}.max_steps;

    TimeGrid grid() const {
        if (n_steps) return TimeGrid{t_max, *n_steps};
        return default_grid(system, t_max);
    }

    OdeOptions ode_options() const {
        OdeOptions o;
        o.rel_tol = rel_tol;
        o.abs_tol = abs_tol;
        o.max_steps = max_ode_steps;
        return o;
    }

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        auto t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

class ConfigReader {
public:
    explicit ConfigReader(std::string source) : source_(std::move(source)) {}

    void add(int line, std::string key, std::string value) {
        if (entries_.count(key)) fail(line, "duplicate key '" + key + "'");
        entries_[key] = Entry{line, std::move(value), false};
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    int line_of(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    [[noreturn]] void fail(int line, const std::string& message) const { throw ConfigError(source_, line, message); }
    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        fail(line_of(key), key + ": " + message);
    }

    std::optional<std::string> text(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        it->second.used = true;
        return it->second.value;
    }

    std::optional<double> number(const std::string& key) {
        auto raw = text(key);
        if (!raw) return std::nullopt;
        return parse_double(key, *raw);
    }

    std::optional<std::size_t> count(const std::string& key) {
        auto raw = text(key);
        if (!raw) return std::nullopt;
        std::size_t v = 0;
        const char* b = raw->data();
        const char* e = b + raw->size();
        auto [ptr, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || ptr != e) fail(key, "expected a non-negative integer, got '" + *raw + "'");
        return v;
    }

    std::optional<bool> flag(const std::string& key) {
        auto raw = text(key);
        if (!raw) return std::nullopt;
        std::string v = *raw;
        std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
        if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "off" || v == "no") return false;
        fail(key, "expected a boolean, got '" + *raw + "'");
    }

    std::optional<std::vector<double>> numbers(const std::string& key) {
        auto raw = text(key);
        if (!raw) return std::nullopt;
        std::vector<double> out;
        for (const auto& item : split_list(*raw)) out.push_back(parse_double(key, item));
        return out;
    }

    void reject_unused() const {
        for (const auto& [key, e] : entries_)
            if (!e.used) fail(e.line, "unknown key '" + key + "'");
    }

private:
    struct Entry {
        int line = 0;
        std::string value;
        bool used = false;
    };

    double parse_double(const std::string& key, const std::string& raw) const {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(raw.c_str(), &end);
        if (raw.empty() || end != raw.c_str() + raw.size() || errno == ERANGE || !std::isfinite(v))
            fail(key, "expected a finite number, got '" + raw + "'");
        return v;
    }

    std::string source_;
    std::map<std::string, Entry> entries_;
};

} // namespace detail

/// Parses configuration text; `source` names it in error messages.
inline RunConfig parse_config(std::string_view text, const std::string& source = "config") {
    detail::ConfigReader in(source);
    {
        std::istringstream lines{std::string(text)};
        std::string raw;
        int line_no = 0;
        while (std::getline(lines, raw)) {
            ++line_no;
            const auto hash = raw.find('#');
            const std::string line = detail::trim(std::string_view(raw).substr(0, hash));
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) in.fail(line_no, "expected 'key = value'");
            const std::string key = detail::trim(std::string_view(line).substr(0, eq));
            const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
            if (key.empty()) in.fail(line_no, "missing key before '='");
            if (value.empty()) in.fail(line_no, "missing value for '" + key + "'");
            in.add(line_no, key, value);
        }
    }

    RunConfig c;
    const auto lambda = in.number("lambda_over_gamma");
    if (!lambda) in.fail(0, "missing required key 'lambda_over_gamma'");
    c.system.lambda = *lambda;
    if (!(c.system.lambda > 0.0)) in.fail("lambda_over_gamma", "must be > 0");
    c.system.d = in.number("d_over_gamma").value_or(0.0);
    if (!(c.system.d >= 0.0)) in.fail("d_over_gamma", "must be >= 0");
    c.system.omega = in.number("omega_over_gamma").value_or(0.0);
    if (!(c.system.omega >= 0.0)) in.fail("omega_over_gamma", "must be >= 0");
    c.system.modulation_on = in.flag("modulation_on").value_or(c.system.omega > 0.0);
    if (c.system.modulation_on && !(c.system.omega > 0.0))
        in.fail(in.has("modulation_on") ? "modulation_on" : "omega_over_gamma",
                "modulation requires omega_over_gamma > 0");

    c.t_max = in.number("t_max_gamma").value_or(c.t_max);
    if (!(c.t_max > 0.0)) in.fail("t_max_gamma", "must be > 0");
    c.n_steps = in.count("n_steps");
    if (c.n_steps && *c.n_steps < 2) in.fail("n_steps", "must be >= 2");
    c.phi = in.number("phi").value_or(0.0);

    const bool cartesian = in.has("c_e_re") || in.has("c_e_im") || in.has("c_g_re") || in.has("c_g_im");
    const bool polar = in.has("c_e_abs") || in.has("c_e_arg") || in.has("c_g_abs") || in.has("c_g_arg");
    auto first_line = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys)
            if (in.has(k)) return in.line_of(k);
        return 0;
    };
    if (cartesian && polar)
        in.fail(first_line({"c_e_abs", "c_e_arg", "c_g_abs", "c_g_arg"}), "mix of re/im and abs/arg amplitudes");
    if (cartesian) {
        c.initial.c_e = {in.number("c_e_re").value_or(0.0), in.number("c_e_im").value_or(0.0)};
        c.initial.c_g = {in.number("c_g_re").value_or(0.0), in.number("c_g_im").value_or(0.0)};
    } else if (polar) {
        c.initial = InitialState::from_polar(in.number("c_g_abs").value_or(0.0), in.number("c_g_arg").value_or(0.0),
                                             in.number("c_e_abs").value_or(0.0), in.number("c_e_arg").value_or(0.0));
    }
    const double norm = std::norm(c.initial.c_e) + std::norm(c.initial.c_g);
    if (!(norm > 0.0)) in.fail(first_line({"c_e_re", "c_e_im", "c_g_re", "c_g_im", "c_e_abs", "c_g_abs"}), "initial amplitudes are all zero");
    if (std::abs(norm - 1.0) > 1e-12) {
        const double s = 1.0 / std::sqrt(norm);
        c.initial.c_e *= s;
        c.initial.c_g *= s;
    }

    if (auto f = in.text("output_format")) {
        if (*f != "csv" && *f != "json") in.fail("output_format", "expected csv or json");
        c.output_format = *f;
    }
    c.output_dir = in.text("output_dir");
    if (auto obs = in.text("observables")) {
        c.observables = *obs == "none" ? std::vector<std::string>{} : detail::split_list(*obs);
        for (const auto& o : c.observables)
            if (o != "amplitude" && o != "sync" && o != "qfunc")
                in.fail("observables", "unknown observable '" + o + "' (amplitude, sync, qfunc)");
    }
    if (auto times = in.numbers("qfunc_times")) {
        for (double t : *times)
            if (t < 0.0 || t > c.t_max) in.fail("qfunc_times", "snapshot time outside [0, t_max_gamma]");
        c.qfunc_times = *times;
    }
    c.n_theta = in.count("n_theta").value_or(c.n_theta);
    if (c.n_theta < 8) in.fail("n_theta", "must be >= 8");
    c.n_phi = in.count("n_phi").value_or(c.n_phi);
    if (c.n_phi < 8) in.fail("n_phi", "must be >= 8");
    c.lifetime_epsilon = in.number("lifetime_epsilon").value_or(c.lifetime_epsilon);
    if (!(c.lifetime_epsilon > 0.0)) in.fail("lifetime_epsilon", "must be > 0");
    if (auto s = in.text("state_override")) {
        if (*s != "maximally_mixed" && *s != "none") in.fail("state_override", "expected maximally_mixed or none");
        c.state_override = *s == "none" ? "" : *s;
    }

    if (auto v = in.text("sweep_variable")) {
        if (*v != "omega" && *v != "d" && *v != "ratio") in.fail("sweep_variable", "expected omega, d or ratio");
        c.sweep_variable = *v;
    }
    if (auto vals = in.numbers("sweep_values")) {
        for (double v : *vals)
            if (v < 0.0) in.fail("sweep_values", "values must be >= 0");
        c.sweep_values = *vals;
    }
    c.ratio_lock = in.number("ratio_lock");
    if (c.ratio_lock && !(*c.ratio_lock > 0.0)) in.fail("ratio_lock", "must be > 0");
    if (auto o = in.text("sweep_observable")) {
        if (*o != "sync-series" && *o != "q-grid-snapshots" && *o != "amplitude")
            in.fail("sweep_observable", "expected sync-series, q-grid-snapshots or amplitude");
        c.sweep_observable = *o;
    }
    c.rel_tol = in.number("rel_tol").value_or(c.rel_tol);
    if (!(c.rel_tol > 0.0)) in.fail("rel_tol", "must be > 0");
    c.abs_tol = in.number("abs_tol").value_or(c.abs_tol);
    if (!(c.abs_tol > 0.0)) in.fail("abs_tol", "must be > 0");
    c.max_ode_steps = in.count("max_ode_steps").value_or(c.max_ode_steps);
    if (c.max_ode_steps < 1) in.fail("max_ode_steps", "must be >= 1");

    in.reject_unused();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path, 0, "cannot open configuration file");
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_config(buf.str(), path);
}

/// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& c) {
    using detail::format_g17;
    std::ostringstream out;
    auto list = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_g17(v[i]);
        return s;
    };
    out << "lambda_over_gamma = " << format_g17(c.system.lambda) << '\n';
    out << "d_over_gamma = " << format_g17(c.system.d) << '\n';
    out << "omega_over_gamma = " << format_g17(c.system.omega) << '\n';
    out << "modulation_on = " << (c.system.modulation_on ? "true" : "false") << '\n';
    out << "t_max_gamma = " << format_g17(c.t_max) << '\n';
    if (c.n_steps) out << "n_steps = " << *c.n_steps << '\n';
    out << "phi = " << format_g17(c.phi) << '\n';
    out << "c_e_re = " << format_g17(c.initial.c_e.real()) << '\n';
    out << "c_e_im = " << format_g17(c.initial.c_e.imag()) << '\n';
    out << "c_g_re = " << format_g17(c.initial.c_g.real()) << '\n';
    out << "c_g_im = " << format_g17(c.initial.c_g.imag()) << '\n';
    out << "output_format = " << c.output_format << '\n';
    if (c.output_dir) out << "output_dir = " << *c.output_dir << '\n';
    out << "observables = ";
    if (c.observables.empty()) out << "none";
    for (std::size_t i = 0; i < c.observables.size(); ++i) out << (i ? "," : "") << c.observables[i];
    out << '\n';
    if (!c.qfunc_times.empty()) out << "qfunc_times = " << list(c.qfunc_times) << '\n';
    out << "n_theta = " << c.n_theta << '\n';
    out << "n_phi = " << c.n_phi << '\n';
    out << "lifetime_epsilon = " << format_g17(c.lifetime_epsilon) << '\n';
    if (!c.state_override.empty()) out << "state_override = " << c.state_override << '\n';
    out << "sweep_variable = " << c.sweep_variable << '\n';
    if (!c.sweep_values.empty()) out << "sweep_values = " << list(c.sweep_values) << '\n';
    if (c.ratio_lock) out << "ratio_lock = " << format_g17(*c.ratio_lock) << '\n';
    out << "sweep_observable = " << c.sweep_observable << '\n';
    out << "rel_tol = " << format_g17(c.rel_tol) << '\n';
    out << "abs_tol = " << format_g17(c.abs_tol) << '\n';
    out << "max_ode_steps = " << c.max_ode_steps << '\n';
    return out.str();
}

/// SweepSpec described by the sweep_* keys.
inline SweepSpec sweep_spec(const RunConfig& c) {
    SweepSpec s;
    s.base = c.system;
    s.variable = c.sweep_variable == "d" ? SweepVariable::d
                 : c.sweep_variable == "ratio" ? SweepVariable::ratio
                                               : SweepVariable::omega;
    s.values = c.sweep_values;
    s.ratio_lock = c.ratio_lock;
    s.observable = c.sweep_observable == "amplitude"          ? SweepObservable::amplitude
                   : c.sweep_observable == "q-grid-snapshots" ? SweepObservable::q_grid_snapshots
                                                              : SweepObservable::sync_series;
    s.phi = c.phi;
    s.epsilon = c.lifetime_epsilon;
    s.snapshot_times = c.qfunc_times;
    s.n_theta = c.n_theta;
    s.n_phi = c.n_phi;
    return s;
}

} // namespace qsync
