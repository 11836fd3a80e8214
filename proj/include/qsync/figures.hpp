// figures.hpp -- Parameter recipes for the reference figure datasets.

#pragma once

#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qsync/bessel.hpp"
#include "qsync/dynamics.hpp"
#include "qsync/error.hpp"

namespace qsync {

enum class PanelKind { q_snapshot, sync_series };

struct FigurePanel {
    std::string id;
    std::string label;
    SystemParams params;
    TimeGrid grid;
    PanelKind kind = PanelKind::sync_series;
    double snapshot_time = 0.0;
    /// Set when d/Omega is a Bessel zero j_{order,index}.
    std::optional<int> bessel_order;
    std::optional<int> zero_index;
};

struct FigureRecipe {
    std::string id;
    std::string title;
    std::vector<FigurePanel> panels;
    /// Readings adopted where panel labels are ambiguous.
    std::vector<std::string> assumptions;
    std::size_t n_theta = 101;
    std::size_t n_phi = 101;
    double phi = 0.0;
};

inline const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids{"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"};
    return ids;
}

namespace detail {

inline std::string fmt_num(double x) {
    std::ostringstream s;
    s << x;
    return s.str();
}

inline SystemParams drive(double lambda, double d, std::optional<double> omega) {
    if (!omega) {
        SystemParams p = SystemParams::unmodulated(lambda);
        p.d = d;
        return p;
    }
    return SystemParams::modulated(lambda, d, *omega);
}

inline FigurePanel q_panel(std::string id, SystemParams p, double snapshot, double t_max) {
    FigurePanel panel;
    panel.id = std::move(id);
    panel.params = p;
    panel.kind = PanelKind::q_snapshot;
    panel.snapshot_time = snapshot;
    panel.grid = default_grid(p, t_max);
    std::ostringstream label;
    if (p.modulation_on) {
        label << "Omega = " << p.omega << " gamma, ";
    } else {
        label << "modulation off, ";
    }
    label << "d = " << p.d << " gamma, gamma t = " << snapshot;
    panel.label = label.str();
    return panel;
}

inline FigurePanel sync_panel(std::string id, SystemParams p, TimeGrid grid) {
    FigurePanel panel;
    panel.id = std::move(id);
    panel.params = p;
    panel.kind = PanelKind::sync_series;
    panel.grid = grid;
    std::ostringstream label;
    if (p.modulation_on) {
        label << "Omega = " << p.omega << " gamma, d = " << p.d << " gamma";
    } else {
        label << "modulation off";
    }
    panel.label = label.str();
    return panel;
}

} // namespace detail

inline FigureRecipe figure_recipe(const std::string& id) {
    using detail::drive;
    using detail::q_panel;
    using detail::sync_panel;
    using std::nullopt;
    FigureRecipe r;
    r.id = id;
    const std::string off_note = "panel label 'Omega = 0' is modulation switched off, not a static shift of d";

    if (id == "fig2") {
        r.title = "Husimi Q, weak coupling lambda = 3 gamma, d = 10 gamma";
        r.assumptions = {off_note};
        r.panels = {q_panel("a", drive(3.0, 10.0, nullopt), 0.0, 10.0),
                    q_panel("b", drive(3.0, 10.0, nullopt), 10.0, 10.0),
                    q_panel("c", drive(3.0, 10.0, 0.001), 10.0, 10.0),
                    q_panel("d", drive(3.0, 10.0, 100.0), 10.0, 10.0)};
    } else if (id == "fig3") {
        r.title = "Husimi Q, strong coupling lambda = 0.01 gamma, d = 5 gamma";
        r.assumptions = {off_note, "panel (e) 'Omega = 2.1 Omega' read as Omega = 2.1 gamma",
                         "panel (f) 'Omega = 50 Omega' read as Omega = 50 gamma"};
        r.panels = {q_panel("a", drive(0.01, 5.0, nullopt), 0.0, 100.0),
                    q_panel("b", drive(0.01, 5.0, nullopt), 100.0, 100.0),
                    q_panel("c", drive(0.01, 5.0, 0.001), 100.0, 100.0),
                    q_panel("d", drive(0.01, 5.0, 0.9), 100.0, 100.0),
                    q_panel("e", drive(0.01, 5.0, 2.1), 100.0, 100.0),
                    q_panel("f", drive(0.01, 5.0, 50.0), 100.0, 100.0)};
    } else if (id == "fig4") {
        r.title = "Husimi Q at gamma t = 100, lambda = 0.01 gamma: d = 5 gamma vs d = j_{0,1} Omega";
        r.assumptions = {"panel (e) 'Omega = 0.5 Omega' read as Omega = 0.5 gamma",
                         "d/Omega = 2.40483 taken as the computed first zero of J_0"};
        const double z = jn_zero(0, 1);
        r.panels = {q_panel("a", drive(0.01, 5.0, 0.05), 100.0, 100.0),
                    q_panel("b", drive(0.01, 5.0, 0.5), 100.0, 100.0),
                    q_panel("c", drive(0.01, 5.0, 5.0), 100.0, 100.0),
                    q_panel("d", drive(0.01, z * 0.05, 0.05), 100.0, 100.0),
                    q_panel("e", drive(0.01, z * 0.5, 0.5), 100.0, 100.0),
                    q_panel("f", drive(0.01, z * 5.0, 5.0), 100.0, 100.0)};
        for (std::size_t i = 3; i < 6; ++i) {
            r.panels[i].bessel_order = 0;
            r.panels[i].zero_index = 1;
        }
    } else if (id == "fig5") {
        r.title = "S(0, t), weak coupling lambda = 3 gamma, d = 10 gamma";
        r.assumptions = {"modulated curves use Omega in {0.001, 1, 100} gamma; the panel labels do not list them"};
        const TimeGrid g{100.0, 10000};
        r.panels = {sync_panel("off", drive(3.0, 10.0, nullopt), g), sync_panel("w0.001", drive(3.0, 10.0, 0.001), g),
                    sync_panel("w1", drive(3.0, 10.0, 1.0), g), sync_panel("w100", drive(3.0, 10.0, 100.0), g)};
    } else if (id == "fig6") {
        r.title = "S(0, t), strong coupling lambda = 0.01 gamma, d = 5 gamma";
        r.assumptions = {"modulated curves use Omega in {0.001, 0.9, 2.1, 50} gamma: two near-resonant drives bracketed by slow and fast limits"};
        const TimeGrid g{2000.0, 40000};
        r.panels = {sync_panel("off", drive(0.01, 5.0, nullopt), g), sync_panel("w0.001", drive(0.01, 5.0, 0.001), g),
                    sync_panel("w0.9", drive(0.01, 5.0, 0.9), g), sync_panel("w2.1", drive(0.01, 5.0, 2.1), g),
                    sync_panel("w50", drive(0.01, 5.0, 50.0), g)};
    } else if (id == "fig7") {
        r.title = "S(0, t), lambda = 0.01 gamma, d/Omega at the first zero of J_n, n = 0..3";
        r.assumptions = {"Omega in {0.05, 0.5, 5} gamma per panel, matching the Husimi comparison; the panel labels "
                         "do not list them",
                         "d/Omega values are the computed first zeros of J_0..J_3"};
        const TimeGrid g{1000.0, 20000};
        const char* letters[] = {"a", "b", "c", "d"};
        for (int n = 0; n < 4; ++n) {
            const double z = jn_zero(n, 1);
            for (double w : {0.05, 0.5, 5.0}) {
                auto panel = sync_panel(std::string(letters[n]) + "_w" + detail::fmt_num(w), drive(0.01, z * w, w), g);
                panel.bessel_order = n;
                panel.zero_index = 1;
                r.panels.push_back(panel);
            }
        }
    } else if (id == "fig8") {
        r.title = "S(0, t), lambda = 0.1 gamma, Omega = 5 gamma, d/Omega at the first four zeros of J_0";
        r.assumptions = {"window spans 100000 drive periods, sampled once per period"};
        constexpr double omega = 5.0;
        constexpr std::size_t periods = 100000;
        const TimeGrid g{static_cast<double>(periods) * 2.0 * std::numbers::pi / omega, periods};
        const char* letters[] = {"a", "b", "c", "d"};
        for (int k = 1; k <= 4; ++k) {
            const double z = jn_zero(0, k);
            auto panel = sync_panel(letters[k - 1], drive(0.1, z * omega, omega), g);
            panel.bessel_order = 0;
            panel.zero_index = k;
            r.panels.push_back(panel);
        }
    } else {
        std::string valid;
        for (const auto& v : figure_ids()) valid += (valid.empty() ? "" : ", ") + v;
        throw InvalidInput("unknown figure id '" + id + "'; valid ids: " + valid);
    }
    return r;
}

/// gnuplot script rendering every panel of a recipe from its CSV datasets.
inline std::string plot_script(const FigureRecipe& r, const std::vector<std::string>& files) {
    std::ostringstream s;
    s << "# gnuplot script for " << r.id << ": " << r.title << "\n";
    s << "set datafile separator ','\n";
    s << "set terminal pngcairo size 1200,900\n";
    s << "set output '" << r.id << ".png'\n";
    const bool q = !r.panels.empty() && r.panels.front().kind == PanelKind::q_snapshot;
    if (q) {
        s << "set multiplot layout " << (r.panels.size() + 2) / 3 << "," << std::min<std::size_t>(3, r.panels.size())
          << "\n";
        s << "set xlabel 'phi'\nset ylabel 'theta'\nset xrange [0:2*pi]\nset yrange [0:pi]\n";
        for (std::size_t i = 0; i < r.panels.size(); ++i) {
            s << "set title '(" << r.panels[i].id << ") " << r.panels[i].label << "'\n";
            s << "plot '" << files[i] << "' every ::1 using 2:1:3 with image notitle\n";
        }
        s << "unset multiplot\n";
    } else {
        s << "set xlabel 'gamma t'\nset ylabel 'S(phi, t)'\n";
        s << "plot ";
        for (std::size_t i = 0; i < r.panels.size(); ++i) {
            s << (i ? ", \\\n     " : "") << "'" << files[i] << "' every ::1 using 1:2 with lines title '"
              << r.panels[i].label << "'";
        }
        s << "\n";
    }
    return s.str();
}

} // namespace qsync
