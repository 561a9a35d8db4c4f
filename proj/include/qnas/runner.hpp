#pragma once

#include <string>

#include "qnas/config.hpp"
#include "qnas/data.hpp"
#include "qnas/evolve.hpp"

namespace qnas {

// Loaded datasets plus the views the evolution consumes. The views point
// into the owned datasets, so keep the bundle alive while training.
struct RunData {
    ImageDataset train_file;
    ImageDataset test_file;  // empty when no test path was given
    DatasetSplits splits;
};

RunData load_run_data(const RunConfig& config);

// Full evolution run: echoes the config, streams metrics, writes genome
// files and a checkpoint every generation, then the report, the best-model
// checkpoint, and reconstruction dumps. Returns a process exit status.
// A non-empty resume_dir continues from that run's latest checkpoint.
int run(const RunConfig& config, const std::string& resume_dir = "");

// Original/reconstruction/side-by-side PGM triple per sample.
void emit_reconstructions(const HybridAutoencoder& model, const DatasetView& samples,
                          int count, const std::string& dir);

// Trains the baseline ansatz against an over-entangled variant and writes
// probe_report.json; returns a process exit status.
int run_probe(const RunConfig& config);

std::string describe_genome(const CircuitGenome& genome);

}  // namespace qnas
