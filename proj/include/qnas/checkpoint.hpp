#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qnas/evolve.hpp"

namespace qnas {

// Little-endian IEEE-754 doubles as base64; bit-exact round-trip.
std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(const std::string& text);

// Full individual state: genome JSON, flat parameter arrays with declared
// shapes, optimizer moments, fitness, lineage.
std::string individual_to_json(const Individual& individual);
Individual individual_from_json(const std::string& text);

// One directory per generation: meta.json plus ind_<id>.json files.
void save_checkpoint(const std::string& dir, int generation,
                     const std::vector<Individual>& population);

struct Checkpoint {
    int generation = 0;
    std::vector<Individual> population;
};

Checkpoint load_checkpoint(const std::string& dir);

// Largest complete generation checkpoint under <run_dir>/checkpoints, or -1.
int latest_checkpoint_generation(const std::string& run_dir);

}  // namespace qnas
