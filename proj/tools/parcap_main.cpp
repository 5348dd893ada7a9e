// parcap command line: thin flag parsing over the C API.
//
//   parcap solve      --config run.toml [--out DIR] [--force]
//   parcap obstacle   --config run.toml --set NAME [--lambda H]
//   parcap capacity   --config run.toml --set NAME --method balayage|energy|variational
//                     [--refine L]
//   parcap hausdorff  --config run.toml --set NAME [--s S] [--generations G]
//   parcap experiment [ID|all] --config run.toml [--out DIR] [--threads N] [--seed S]
//
// PARCAP_CACHE overrides the configured cache directory.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "parcap.h"

int main(int argc, char** argv) {
    CLI::App app{"parcap: solvers, capacities and parabolic Hausdorff contents for the "
                 "degenerate p-parabolic equation"};
    app.require_subcommand(1);

    std::string config_path, out_dir, set_name, method = "balayage", experiment = "all";
    int refine = 0, generations = 3, threads = 0;
    double s_value = -1, lambda = 1.0;
    std::uint64_t seed = 0;
    bool force = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "configuration file")->required();
        cmd->add_option("--out", out_dir, "output directory (overrides config)");
        cmd->add_option("--threads", threads, "worker threads (overrides config)");
        cmd->add_option("--seed", seed, "seed override");
        cmd->add_flag("--force", force, "overwrite existing outputs");
    };

    CLI::App* c_solve = app.add_subcommand("solve", "forward/measure-data solve");
    add_common(c_solve);

    CLI::App* c_obst = app.add_subcommand("obstacle", "obstacle problem / reduite");
    add_common(c_obst);
    c_obst->add_option("--set", set_name, "named set from the config")->required();
    c_obst->add_option("--lambda", lambda, "obstacle height");

    CLI::App* c_cap = app.add_subcommand("capacity", "capacity estimate");
    add_common(c_cap);
    c_cap->add_option("--set", set_name, "named set from the config")->required();
    c_cap->add_option("--method", method, "balayage | energy | variational");
    c_cap->add_option("--refine", refine, "refinement levels for the trace");

    CLI::App* c_haus = app.add_subcommand("hausdorff", "parabolic Hausdorff content + Frostman");
    add_common(c_haus);
    c_haus->add_option("--set", set_name, "named set from the config")->required();
    c_haus->add_option("--s", s_value, "content exponent (default n)");
    c_haus->add_option("--generations", generations, "dyadic generations");

    CLI::App* c_exp = app.add_subcommand("experiment", "experiment runner");
    add_common(c_exp);
    c_exp->add_option("id", experiment, "experiment id or 'all'");

    CLI11_PARSE(app, argc, argv);

    parcap_config* config = nullptr;
    if (parcap_config_parse_file(config_path.c_str(), &config) != PARCAP_OK) {
        std::fprintf(stderr, "config error:\n%s", parcap_last_error());
        return 2;
    }

    parcap_run_options opts;
    parcap_run_options_init(&opts);
    if (!out_dir.empty()) opts.out_dir = out_dir.c_str();
    if (!set_name.empty()) opts.set_name = set_name.c_str();
    opts.method = method.c_str();
    opts.experiment = experiment.c_str();
    opts.refine = refine;
    opts.s_value = s_value;
    opts.generations = generations;
    opts.lambda = lambda;
    opts.threads = threads;
    opts.seed = seed;
    opts.force = force ? 1 : 0;

    const std::string sub = app.get_subcommands().front()->get_name();
    int exit_code = 0;
    const parcap_status st = parcap_run(config, sub.c_str(), &opts, &exit_code);
    if (st != PARCAP_OK) {
        std::fprintf(stderr, "%s failed: %s\n", sub.c_str(), parcap_last_error());
        parcap_config_free(config);
        return 2;
    }
    if (exit_code == 2) std::fprintf(stderr, "solver failure: %s\n", parcap_last_error());
    parcap_config_free(config);
    return exit_code;
}
