#pragma once

#include <stdexcept>
#include <string>

namespace qnas {

// Bad user-supplied configuration (ranges, missing files, key typos).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid operation on the statevector simulator (bad qubit index, NaN angle).
struct SimulationError : std::runtime_error {
    explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

// Caller broke an API contract (shape mismatch, unevaluated individual, ...).
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed binary input (IDX files).
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed textual input (genome JSON, config JSON).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Training produced a non-finite value somewhere in the pipeline.
struct TrainingDivergence : std::runtime_error {
    explicit TrainingDivergence(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qnas
