// qrt - resource monotones and distillation limits for quantum channels.
//
// Subcommands: measure (monotone queries with certificates), bound (limit
// formulas from monotone values), fig (CSV reproduction of the built-in
// parameter sweeps), selftest (full verification suite).
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qrt/cli.hpp"
#include "qrt/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"resource monotones and distillation limits for quantum channels"};
    app.require_subcommand(1);

    std::string cache_dir = ".qrt-cache";
    double tol_override = 0;
    std::uint64_t seed = 1;
    app.add_option("--cache-dir", cache_dir, "stabilizer polytope cache directory");
    app.add_option("--tol", tol_override, "override the certified-gap tolerance");
    app.add_option("--seed", seed, "seed for stochastic verification paths");

    qrt::cli::MeasureArgs margs;
    auto* measure = app.add_subcommand("measure", "compute a monotone with its certificate");
    measure->add_option("--theory", margs.theory, "ns | ppt | sep | stab | coherence")
        ->required();
    measure->add_option("--channel", margs.channel, "channel spec, e.g. depolarizing:p=0.3");
    measure->add_option("--state", margs.state, "state spec, e.g. T, CCZ, or a file");
    measure->add_option("--monotone", margs.monotone, "robustness | weight | fidelity")
        ->required();

    qrt::cli::BoundArgs bargs;
    auto* bound = app.add_subcommand("bound", "evaluate distillation limit formulas");
    bound
        ->add_option("--id", bargs.id,
                     "error-floor | state-error-floor | previous-bound | copy-floor | "
                     "transform-floor | rate-ceiling | prob-floor | prob-state-floor")
        ->required();
    for (const char* key : {"R", "W", "F", "m", "eps", "p", "trM", "lambda_min", "R_out",
                            "W_out", "Dinf"}) {
        bound->add_option_function<double>(
            std::string("--") + key,
            [&bargs, key](const double& v) { bargs.inputs[key] = v; });
    }

    qrt::cli::FigureSpec fspec;
    std::string grid_arg;
    auto* fig = app.add_subcommand("fig", "emit a parameter sweep as CSV");
    fig->add_option("--fig", fspec.id, "2a 2b 2c 2d 3a 3b 4a 4b")->required();
    fig->add_option("--out", fspec.out_path, "output path ('-' for stdout)");
    fig->add_option("--grid", grid_arg, "comma-separated grid override");

    auto* selftest = app.add_subcommand("selftest", "run the full verification suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return qrt::cli::kExitUsage;
    }

    if (tol_override > 0) {
        qrt::tol().solver_gap = tol_override;
        qrt::tol().witness = std::max(tol_override, qrt::tol().witness);
    }
    margs.cache_dir = cache_dir;
    fspec.cache_dir = cache_dir;
    fspec.seed = seed;

    if (measure->parsed()) return qrt::cli::cmd_measure(margs, std::cout, std::cerr);
    if (bound->parsed()) return qrt::cli::cmd_bound(bargs, std::cout, std::cerr);
    if (fig->parsed()) {
        if (!grid_arg.empty()) {
            std::stringstream ss(grid_arg);
            std::string item;
            while (std::getline(ss, item, ',')) fspec.grid.push_back(std::stod(item));
        }
        return qrt::cli::cmd_fig(fspec, std::cout, std::cerr);
    }
    if (selftest->parsed()) return qrt::cli::cmd_selftest(std::cout, cache_dir);
    return qrt::cli::kExitUsage;
}
