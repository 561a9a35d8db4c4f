#pragma once

#include <map>
#include <string>

#include "qnas/data.hpp"
#include "qnas/evolve.hpp"

namespace qnas {

// The union of every knob the runner understands, with paper defaults.
// Serialized as a flat JSON object with dotted keys.
struct RunConfig {
    GAConfig ga;
    ModelConfig model;
    TrainConfig train;
    SplitSpec split_spec;
    std::string dataset_path;
    std::string dataset_test_path;
    std::string dataset_kind = "mnist";
    std::string out_dir = "out";
    int recon_samples = 8;
};

// Overrides are (dotted key -> JSON value text) pairs; they win over the
// file. Pass an empty path to start from pure defaults.
RunConfig parse_config(const std::string& path,
                       const std::map<std::string, std::string>& overrides = {});

void validate_run_config(const RunConfig& config);

// Flat dotted-key JSON echo of a fully resolved config.
std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(const std::string& text);

DatasetTag dataset_tag(const RunConfig& config);

}  // namespace qnas
