#include "qnas/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "qnas/checkpoint.hpp"
#include "qnas/errors.hpp"
#include "qnas/metrics.hpp"
#include "qnas/pgm.hpp"

namespace qnas {

namespace fs = std::filesystem;
using nlohmann::json;

RunData load_run_data(const RunConfig& config) {
    if (config.dataset_path.empty())
        throw ConfigError("run: \"dataset.path\" is required");
    RunData data;
    data.train_file = load_idx_images(config.dataset_path, dataset_tag(config));
    data.splits = split(data.train_file, config.split_spec);
    if (!config.dataset_test_path.empty()) {
        data.test_file = load_idx_images(config.dataset_test_path, dataset_tag(config));
        DatasetView test_view;
        test_view.dataset = &data.test_file;
        std::size_t n = data.test_file.count;
        if (config.split_spec.test_cap != 0) n = std::min(n, config.split_spec.test_cap);
        for (std::size_t i = 0; i < n; ++i) test_view.indices.push_back(i);
        data.splits.test = test_view;
    }
    return data;
}

namespace {

MetricsRecord base_record(int generation, const Individual& ind) {
    MetricsRecord record;
    record.generation = generation;
    record.individual = ind.id;
    record.parent = ind.parent_id;
    record.genome_hash = genome_hash(ind.genome());
    record.gates = count_gates(ind.genome());
    return record;
}

// Streams metrics and persists genomes + checkpoints as generations finish.
class RunObserver : public EvolveObserver {
public:
    RunObserver(const std::string& out_dir, const GAConfig& ga)
        : out_dir_(out_dir), ga_(ga), metrics_(out_dir) {}

    void on_epoch(int generation, const Individual& ind, const EpochRecord& epoch) override {
        MetricsRecord record = base_record(generation, ind);
        record.type = "train";
        record.epoch = epoch.epoch;
        record.train_loss = epoch.train_loss;
        record.wall_ms = epoch.wall_ms;
        metrics_.write(record);
    }

    void on_evaluated(int generation, const Individual& ind, double wall_ms) override {
        MetricsRecord record = base_record(generation, ind);
        record.type = "val";
        if (ind.fitness && std::isfinite(*ind.fitness)) record.val_loss = *ind.fitness;
        record.wall_ms = wall_ms;
        metrics_.write(record);
        if (ind.fitness && !std::isfinite(*ind.fitness))
            std::cerr << "warning: individual " << ind.id << " diverged in generation "
                      << generation << "\n";
    }

    void on_generation(int generation, const std::vector<Individual>& population,
                       const GenerationSummary& summary) override {
        const fs::path genome_dir = fs::path(out_dir_) / "genomes" / ("gen" + std::to_string(generation));
        fs::create_directories(genome_dir);
        for (const auto& ind : population) {
            char name[32];
            std::snprintf(name, sizeof(name), "ind_%04d.json", ind.id);
            std::ofstream out(genome_dir / name);
            out << serialize_genome(ind.genome()) << '\n';
        }
        save_checkpoint(
            (fs::path(out_dir_) / "checkpoints" / ("gen" + std::to_string(generation))).string(),
            generation, population);
        summaries_.push_back(summary);
        metrics_.flush();
    }

    const std::vector<GenerationSummary>& summaries() const { return summaries_; }

private:
    std::string out_dir_;
    GAConfig ga_;
    MetricsWriter metrics_;
    std::vector<GenerationSummary> summaries_;
};

json summary_to_json(const GenerationSummary& s) {
    auto number_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j;
    j["generation"] = s.generation;
    j["best_id"] = s.best_id;
    j["best_val"] = number_or_null(s.best_val);
    j["best_so_far"] = number_or_null(s.best_so_far);
    j["mean_val_all"] = number_or_null(s.mean_val_all);
    j["mean_val_trained"] = number_or_null(s.mean_val_trained);
    j["mean_test_all"] = number_or_null(s.mean_test_all);
    j["mean_test_trained"] = number_or_null(s.mean_test_trained);
    j["trained_count"] = s.trained_count;
    j["diverged_count"] = s.diverged_count;
    j["wall_ms"] = s.wall_ms;
    return j;
}

void write_report(const RunConfig& config, const EvolutionReport& report,
                  const std::vector<GenerationSummary>& summaries) {
    json j;
    j["dataset"] = config.dataset_kind;
    j["training_sessions"] = report.training_sessions;
    j["generations"] = json::array();
    for (const auto& s : summaries) j["generations"].push_back(summary_to_json(s));
    json best;
    best["id"] = report.best.id;
    best["fitness"] = report.best.fitness && std::isfinite(*report.best.fitness)
                          ? json(*report.best.fitness)
                          : json(nullptr);
    best["parent_id"] = report.best.parent_id ? json(*report.best.parent_id) : json(nullptr);
    best["birth_generation"] = report.best.birth_generation;
    best["genome_hash"] = genome_hash(report.best.genome());
    j["best"] = std::move(best);
    std::ofstream out(fs::path(config.out_dir) / "report.json");
    out << j.dump(2) << '\n';
}

}  // namespace

void emit_reconstructions(const HybridAutoencoder& model, const DatasetView& samples,
                          int count, const std::string& dir) {
    fs::create_directories(dir);
    const int n = std::min<int>(count, static_cast<int>(samples.size()));
    for (int k = 0; k < n; ++k) {
        const auto x = samples.row(static_cast<std::size_t>(k));
        const auto recon = forward(model, x).reconstruction;
        std::vector<double> pair(static_cast<std::size_t>(kImageRows) * kImageCols * 2);
        for (int r = 0; r < kImageRows; ++r) {
            for (int c = 0; c < kImageCols; ++c) {
                pair[static_cast<std::size_t>(r * 2 * kImageCols + c)] =
                    x[static_cast<std::size_t>(r * kImageCols + c)];
                pair[static_cast<std::size_t>(r * 2 * kImageCols + kImageCols + c)] =
                    recon[static_cast<std::size_t>(r * kImageCols + c)];
            }
        }
        char prefix[32];
        std::snprintf(prefix, sizeof(prefix), "sample_%02d", k);
        try {
            write_pgm(dir + "/" + prefix + "_orig.pgm", x, kImageCols, kImageRows);
            write_pgm(dir + "/" + prefix + "_recon.pgm", recon, kImageCols, kImageRows);
            write_pgm(dir + "/" + prefix + "_pair.pgm", pair, 2 * kImageCols, kImageRows);
        } catch (const std::exception& e) {
            std::cerr << "warning: reconstruction dump failed: " << e.what() << "\n";
        }
    }
}

int run(const RunConfig& requested, const std::string& resume_dir) {
    try {
        RunConfig config = requested;
        std::vector<Individual> initial;
        int start_generation = 1;
        if (!resume_dir.empty()) {
            std::ifstream echo(fs::path(resume_dir) / "config.json");
            if (!echo)
                throw ConfigError("resume: no config echo under \"" + resume_dir + "\"");
            RunConfig resumed = config_from_json(std::string(
                std::istreambuf_iterator<char>(echo), std::istreambuf_iterator<char>()));
            if (resumed.ga.master_seed != config.ga.master_seed)
                throw ConfigError("resume: master_seed differs from the checkpointed run");
            resumed.ga.generations = config.ga.generations;
            resumed.out_dir = config.out_dir;
            config = resumed;
            const int latest = latest_checkpoint_generation(resume_dir);
            if (latest < 1)
                throw ConfigError("resume: no complete checkpoint under \"" + resume_dir + "\"");
            if (latest >= config.ga.generations)
                throw ConfigError("resume: checkpointed generation " + std::to_string(latest) +
                                  " already covers the requested " +
                                  std::to_string(config.ga.generations) + " generations");
            auto checkpoint = load_checkpoint(
                (fs::path(resume_dir) / "checkpoints" / ("gen" + std::to_string(latest))).string());
            initial = std::move(checkpoint.population);
            start_generation = checkpoint.generation + 1;
        }

        const RunData data = load_run_data(config);
        fs::create_directories(config.out_dir);
        {
            std::ofstream echo(fs::path(config.out_dir) / "config.json");
            echo << config_to_json(config) << '\n';
        }

        RunObserver observer(config.out_dir, config.ga);
        const EvolutionReport report =
            run_evolution(config.ga, config.model, config.train, data.splits, &observer,
                          std::move(initial), start_generation);

        write_report(config, report, observer.summaries());
        save_checkpoint((fs::path(config.out_dir) / "best").string(),
                        config.ga.generations, {report.best});
        {
            std::ofstream genome_out(fs::path(config.out_dir) / "best" / "genome.json");
            genome_out << serialize_genome(report.best.genome()) << '\n';
        }
        const DatasetView& sample_source =
            data.splits.test.size() > 0 ? data.splits.test : data.splits.val;
        emit_reconstructions(report.best.model, sample_source, config.recon_samples,
                             (fs::path(config.out_dir) / "recon").string());

        std::cout << "best individual " << report.best.id << " (validation loss "
                  << (report.best.fitness ? std::to_string(*report.best.fitness) : "?")
                  << ") after " << report.training_sessions << " training sessions\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run_probe(const RunConfig& config) {
    try {
        const RunData data = load_run_data(config);
        fs::create_directories(config.out_dir);
        const ProbeReport probe =
            run_entanglement_probe(config.ga, config.model, config.train, data.splits);
        json j;
        j["extra_cnots"] = probe.extra_cnots;
        j["epochs"] = probe.epochs;
        j["baseline_val_loss"] = probe.baseline_val_loss;
        j["entangled_val_loss"] = probe.entangled_val_loss;
        j["ratio"] = probe.entangled_val_loss / probe.baseline_val_loss;
        std::ofstream out(fs::path(config.out_dir) / "probe_report.json");
        out << j.dump(2) << '\n';
        std::cout << "baseline " << probe.baseline_val_loss << " vs entangled "
                  << probe.entangled_val_loss << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

std::string describe_genome(const CircuitGenome& genome) {
    const auto counts = count_gates(genome);
    std::string out;
    out += "qubits: " + std::to_string(genome.n_qubits) + "\n";
    out += "params: " + std::to_string(genome.n_params) + "\n";
    out += "genes:  " + std::to_string(genome.genes.size()) + " (h " + std::to_string(counts.h) +
           ", cnot " + std::to_string(counts.cnot) + ", rx " + std::to_string(counts.rx) +
           ", ry " + std::to_string(counts.ry) + ", rz " + std::to_string(counts.rz) + ")\n";
    out += "hash:   " + genome_hash(genome) + "\n";
    for (std::size_t i = 0; i < genome.genes.size(); ++i) {
        const Gene& g = genome.genes[i];
        char line[64];
        if (g.kind == GeneKind::Cnot) {
            std::snprintf(line, sizeof(line), "  %3zu  CNOT   q%d -> q%d", i, g.control, g.qubit);
        } else if (g.kind == GeneKind::Hadamard) {
            std::snprintf(line, sizeof(line), "  %3zu  H      q%d", i, g.qubit);
        } else {
            std::snprintf(line, sizeof(line), "  %3zu  %-5s  q%d  slot %d", i,
                          gene_kind_name(g.kind).c_str(), g.qubit, g.param_slot);
        }
        out += line;
        out += '\n';
    }
    return out;
}

}  // namespace qnas
