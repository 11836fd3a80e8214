// qsync -- command-line front end.
//
//   qsync simulate --config run.cfg [--out DIR] [--format csv|json] [--verify]
//   qsync qfunc    --config run.cfg --times 0,10
//   qsync sync     --config run.cfg [--phi 0]
//   qsync sweep    --config run.cfg [--verify]
//   qsync figures  fig8 [--out DIR]
//   qsync zeros    --order 0 --count 4

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsync/commands.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::string out;
    std::string format;
    bool verify = false;

    void attach(CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config, "Run configuration (key = value)");
        if (needs_config) opt->required();
        cmd->add_option("--out", out, "Output directory");
        cmd->add_option("--format", format, "Dataset format")->check(CLI::IsMember({"csv", "json"}));
        cmd->add_flag("--verify", verify, "Cross-check against the Volterra solver");
    }

    qsync::CommandContext context() const {
        qsync::CommandContext ctx;
        if (!out.empty()) ctx.out_dir = out;
        if (!format.empty()) ctx.format = format;
        ctx.verify = verify;
        return ctx;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frequency-modulated qubit synchronization simulator"};
    app.require_subcommand(1);

    CommonFlags simulate_flags, qfunc_flags, sync_flags, sweep_flags, figures_flags;

    auto* simulate = app.add_subcommand("simulate", "Amplitude B(t) time series");
    simulate_flags.attach(simulate, true);

    auto* qfunc = app.add_subcommand("qfunc", "Husimi Q meshes at snapshot times");
    qfunc_flags.attach(qfunc, true);
    std::vector<double> times;
    qfunc->add_option("--times", times, "Snapshot times in units of 1/gamma")->delimiter(',');

    auto* sync = app.add_subcommand("sync", "Synchronization measure S(phi, t)");
    sync_flags.attach(sync, true);
    std::optional<double> phi;
    sync->add_option("--phi", phi, "Phase phi (overrides the config)");

    auto* sweep = app.add_subcommand("sweep", "One-parameter sweep");
    sweep_flags.attach(sweep, true);

    auto* figures = app.add_subcommand("figures", "Regenerate figure datasets and a gnuplot script");
    figures_flags.attach(figures, false);
    std::string figure_id;
    figures->add_option("figure", figure_id, "Figure id (fig2..fig8)")->required();

    auto* zeros = app.add_subcommand("zeros", "Positive zeros of J_n");
    int order = 0;
    int count = 1;
    zeros->add_option("--order", order, "Bessel order n")->required();
    zeros->add_option("--count", count, "Number of zeros")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return qsync::exit_input_error;
    }

    return qsync::run_guarded(
        [&]() -> int {
            if (*simulate) return qsync::cmd_simulate(qsync::load_config(simulate_flags.config), simulate_flags.context());
            if (*qfunc) return qsync::cmd_qfunc(qsync::load_config(qfunc_flags.config), times, qfunc_flags.context());
            if (*sync) return qsync::cmd_sync(qsync::load_config(sync_flags.config), phi, sync_flags.context());
            if (*sweep) return qsync::cmd_sweep(qsync::load_config(sweep_flags.config), sweep_flags.context());
            if (*figures) return qsync::cmd_figures(figure_id, figures_flags.context());
            return qsync::cmd_zeros(order, count, std::cout);
        },
        std::cerr);
}
