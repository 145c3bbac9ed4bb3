#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "harmonize/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Dual-process latent-diffusion inference with orthogonal visual embeddings "
                 "and masked self-attention swap"};

    std::string config_path;
    std::uint64_t seed = 0;
    int steps = 0;
    std::string out_dir;
    harmonize::RunFlags flags;

    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--out", out_dir, "output directory (HARMONIZE_OUT env var wins)");
    auto* seed_opt = app.add_option("--seed", seed, "seed override");
    auto* steps_opt = app.add_option("--steps", steps, "denoising step count override");
    app.add_option("--variant", flags.variant,
                   "baseline | orchestration | swap | ours | all (default all)");
    app.add_flag("--validate-only", flags.validate_only, "check the config and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (!out_dir.empty())
        flags.out_dir = out_dir;
    if (seed_opt->count() > 0)
        flags.seed = seed;
    if (steps_opt->count() > 0)
        flags.steps = steps;

    return harmonize::run_experiment(config_path, flags, std::cout);
}
