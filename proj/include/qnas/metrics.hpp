#pragma once

#include <fstream>
#include <optional>
#include <string>

#include "qnas/circuit.hpp"

namespace qnas {

// One line of the metrics stream: a per-epoch training record or a
// per-generation validation summary for one individual. A missing val_loss on
// a "val" record means the individual diverged (+infinity is not
// representable in JSON).
struct MetricsRecord {
    std::string type;  // "train" | "val"
    int generation = 0;
    int individual = 0;
    std::optional<int> parent;
    std::string genome_hash;
    GateCounts gates;
    std::optional<int> epoch;
    std::optional<double> train_loss;
    std::optional<double> val_loss;
    double wall_ms = 0.0;
};

// FNV-1a over the canonical genome JSON, as 16 hex digits.
std::string genome_hash(const CircuitGenome& genome);

std::string metrics_json_line(const MetricsRecord& record);
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRecord& record);

// Drops the wall-time field; used by determinism comparisons.
std::string mask_wall_time(const std::string& json_line);

// Streams identical data to <dir>/metrics.jsonl and <dir>/metrics.csv.
class MetricsWriter {
public:
    explicit MetricsWriter(const std::string& dir);
    void write(const MetricsRecord& record);
    void flush();

private:
    std::ofstream jsonl_;
    std::ofstream csv_;
};

}  // namespace qnas
