#include "qnas/metrics.hpp"

#include <cstdint>
#include <nlohmann/json.hpp>

#include "qnas/errors.hpp"

namespace qnas {

using nlohmann::json;

std::string genome_hash(const CircuitGenome& genome) {
    const std::string text = serialize_genome(genome);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

json record_to_json(const MetricsRecord& r) {
    json j;
    j["type"] = r.type;
    j["generation"] = r.generation;
    j["individual"] = r.individual;
    j["parent"] = r.parent ? json(*r.parent) : json(nullptr);
    j["genome_hash"] = r.genome_hash;
    j["gates"] = {{"h", r.gates.h},
                  {"cnot", r.gates.cnot},
                  {"rx", r.gates.rx},
                  {"ry", r.gates.ry},
                  {"rz", r.gates.rz}};
    j["epoch"] = r.epoch ? json(*r.epoch) : json(nullptr);
    j["train_loss"] = r.train_loss ? json(*r.train_loss) : json(nullptr);
    j["val_loss"] = r.val_loss ? json(*r.val_loss) : json(nullptr);
    j["wall_ms"] = r.wall_ms;
    return j;
}

// CSV numeric fields reuse the JSON dump of the value so both streams carry
// byte-identical representations.
std::string csv_number(double v) { return json(v).dump(); }

}  // namespace

std::string metrics_json_line(const MetricsRecord& record) {
    return record_to_json(record).dump();
}

std::string metrics_csv_header() {
    return "type,generation,individual,parent,genome_hash,gates_h,gates_cnot,gates_rx,"
           "gates_ry,gates_rz,epoch,train_loss,val_loss,wall_ms";
}

std::string metrics_csv_row(const MetricsRecord& r) {
    std::string row;
    row += r.type;
    row += ',' + std::to_string(r.generation);
    row += ',' + std::to_string(r.individual);
    row += ',' + (r.parent ? std::to_string(*r.parent) : "");
    row += ',' + r.genome_hash;
    row += ',' + std::to_string(r.gates.h);
    row += ',' + std::to_string(r.gates.cnot);
    row += ',' + std::to_string(r.gates.rx);
    row += ',' + std::to_string(r.gates.ry);
    row += ',' + std::to_string(r.gates.rz);
    row += ',' + (r.epoch ? std::to_string(*r.epoch) : "");
    row += ',' + (r.train_loss ? csv_number(*r.train_loss) : "");
    row += ',' + (r.val_loss ? csv_number(*r.val_loss) : "");
    row += ',' + csv_number(r.wall_ms);
    return row;
}

std::string mask_wall_time(const std::string& json_line) {
    json j = json::parse(json_line);
    j.erase("wall_ms");
    return j.dump();
}

MetricsWriter::MetricsWriter(const std::string& dir)
    : jsonl_(dir + "/metrics.jsonl"), csv_(dir + "/metrics.csv") {
    if (!jsonl_ || !csv_) throw ConfigError("metrics: cannot open output files in \"" + dir + "\"");
    csv_ << metrics_csv_header() << '\n';
}

void MetricsWriter::write(const MetricsRecord& record) {
    jsonl_ << metrics_json_line(record) << '\n';
    csv_ << metrics_csv_row(record) << '\n';
}

void MetricsWriter::flush() {
    jsonl_.flush();
    csv_.flush();
}

}  // namespace qnas
