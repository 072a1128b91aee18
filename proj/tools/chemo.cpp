#include "chemo/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <thread>

int main(int argc, char** argv)
{
    CLI::App app{"Two-species chemotaxis laboratory: steady states, flows, blow-downs, phase diagrams"};
    std::string config;
    chemo::RunContext ctx;
    std::string out_dir = ".";
    app.add_option("--config", config, "configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--threads", ctx.threads, "worker threads (0: all cores)")->capture_default_str();
    app.add_option("--seed", ctx.seed, "seed for random perturbations")->capture_default_str();
    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : chemo::kExitConfig;
    }
    ctx.out_dir = out_dir;
    if (ctx.threads == 0)
        ctx.threads = std::max(1u, std::thread::hardware_concurrency());
    return chemo::run_file(config, ctx, std::cerr);
}
