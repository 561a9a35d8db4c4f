#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>

#include "qnas/circuit.hpp"
#include "qnas/config.hpp"
#include "qnas/errors.hpp"
#include "qnas/runner.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string dataset_path;
    std::int64_t seed = -1;
    int generations = 0;
};

std::map<std::string, std::string> overrides_from(const CommonFlags& flags) {
    std::map<std::string, std::string> overrides;
    if (flags.seed >= 0) overrides["master_seed"] = std::to_string(flags.seed);
    if (flags.generations > 0) overrides["ga.generations"] = std::to_string(flags.generations);
    if (!flags.out_dir.empty()) overrides["out.dir"] = flags.out_dir;
    if (!flags.dataset_path.empty()) overrides["dataset.path"] = flags.dataset_path;
    return overrides;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
    cmd->add_option("--config", flags.config_path, "JSON config file (flat dotted keys)")
        ->required(config_required);
    cmd->add_option("--seed", flags.seed, "master seed override");
    cmd->add_option("--generations", flags.generations, "generation count override");
    cmd->add_option("--out", flags.out_dir, "output directory override");
    cmd->add_option("--dataset", flags.dataset_path, "training IDX file override");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"genetic architecture search over hybrid quantum-classical autoencoders"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    std::string resume_dir;
    auto* run_cmd = app.add_subcommand("run", "run the evolution loop");
    add_common(run_cmd, run_flags, true);
    run_cmd->add_option("--resume", resume_dir, "continue from this run directory's checkpoints");

    CommonFlags probe_flags;
    auto* probe_cmd =
        app.add_subcommand("probe", "compare the baseline ansatz against an over-entangled one");
    add_common(probe_cmd, probe_flags, true);

    std::string genome_path;
    auto* inspect_cmd = app.add_subcommand("inspect-genome", "pretty-print a genome JSON file");
    inspect_cmd->add_option("file", genome_path, "genome JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const auto config = qnas::parse_config(run_flags.config_path, overrides_from(run_flags));
            return qnas::run(config, resume_dir);
        }
        if (probe_cmd->parsed()) {
            const auto config =
                qnas::parse_config(probe_flags.config_path, overrides_from(probe_flags));
            return qnas::run_probe(config);
        }
        if (inspect_cmd->parsed()) {
            std::ifstream in(genome_path);
            if (!in) {
                std::cerr << "error: cannot open \"" << genome_path << "\"\n";
                return 1;
            }
            const std::string text{std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>()};
            std::cout << qnas::describe_genome(qnas::deserialize_genome(text));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
