#include <CLI11.hpp>

#include "nsr/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "Approximate-inverse solver toolkit: synthetic three-phase signals, "
        "sliding-window harmonic estimation under injected faults, inverter "
        "benchmarks, and regularization condition sweeps"};
    app.require_subcommand(1);

    nsr::cli::RunManifest manifest;

    const struct {
        const char* name;
        const char* help;
    } commands[] = {
        {"generate", "Synthesize a three-phase waveform CSV from a scenario config"},
        {"detect", "Run the sliding-window estimation pipeline; emits trace CSVs and summary.json"},
        {"bench", "Benchmark the inverter family on seeded SPD matrices; emits bench.csv/json"},
        {"sweep", "Condition number of beta*I + A^T A over a beta grid; emits sweep.csv"},
    };
    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->add_option("--config", manifest.config_path, "key = value config file");
        sub->add_option("--out", manifest.out_dir, "output directory (default: .)");
        sub->add_option("--seed", manifest.seed, "override the scenario/bench seed");
        sub->add_option("--beta", manifest.beta, "override the regularization parameter");
        sub->add_option("--freeze-after", manifest.freeze_after,
                        "iterations that update G before freezing (negative: never freeze)");
        sub->add_option("--algo", manifest.algo,
                        "inverter: ns2 | hyperpower | durand | combined | factorized");
        sub->add_option("--order", manifest.order, "inverter order n");
        sub->callback([&manifest, name = cmd.name] { manifest.command = name; });
    }

    CLI11_PARSE(app, argc, argv);
    return nsr::cli::run(manifest);
}
