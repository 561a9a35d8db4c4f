#pragma once

#include <span>
#include <string>
#include <vector>

#include "qnas/simulator.hpp"

namespace qnas {

enum class GeneKind { RotX, RotY, RotZ, Hadamard, Cnot };

bool is_rotation(GeneKind kind);
std::string gene_kind_name(GeneKind kind);  // "ROT_X", ..., "H", "CNOT"

// One gate of the variational section. param_slot indexes the genome's shared
// parameter vector (rotations only); control is the CNOT control qubit.
struct Gene {
    GeneKind kind = GeneKind::RotY;
    int qubit = 0;
    int control = -1;     // CNOT only
    int param_slot = -1;  // rotations only

    bool operator==(const Gene&) const = default;
};

// The mutable variational ansatz. The feature map (H + RY(angle) per qubit)
// is implicit and immutable; it is applied by execute(), not stored here.
struct CircuitGenome {
    int n_qubits = 0;
    int n_params = 0;
    std::vector<Gene> genes;

    bool operator==(const CircuitGenome&) const = default;
};

// Throws ContractError unless: rotation genes carry param_slots that are
// exactly {0..n_params-1} each once, CNOT controls differ from targets,
// every qubit index is in range, and non-rotations carry no slot.
void validate_genome(const CircuitGenome& genome);

// depth repetitions of [RY per qubit with fresh slots, then the linear CNOT
// chain 0->1, 1->2, ...]. n_params = depth * n_qubits. Fully deterministic.
CircuitGenome build_initial_genome(int n_qubits, int depth);

std::vector<double> init_genome_params(const CircuitGenome& genome, class Rng& rng);

// Z-expectation of every qubit after: |0..0> -> feature map (H on every
// qubit, RY(angles[i]) on qubit i) -> genes in order. Values lie in [-1, 1].
std::vector<double> execute(const CircuitGenome& genome, std::span<const double> params,
                            std::span<const double> angles);

// Exact jacobians via the parameter-shift rule, d/dt f(t) =
// [f(t + pi/2) - f(t - pi/2)] / 2, valid for exp(-i t sigma / 2) rotations.
// Costs 2 * (n_params + n_qubits) circuit executions.
struct CircuitJacobians {
    // d<Z_i>/dparam_j, n_qubits rows of n_params entries, row-major.
    std::vector<double> d_params;
    // d<Z_i>/dangle_j, n_qubits rows of n_qubits entries, row-major.
    std::vector<double> d_angles;
    int n_qubits = 0;
    int n_params = 0;

    double param_entry(int out, int slot) const { return d_params[out * n_params + slot]; }
    double angle_entry(int out, int angle) const { return d_angles[out * n_qubits + angle]; }
};

CircuitJacobians param_shift_grads(const CircuitGenome& genome, std::span<const double> params,
                                   std::span<const double> angles);

// JSON text per the genome schema; deserialize validates all invariants and
// throws ParseError with field diagnostics on malformed input.
std::string serialize_genome(const CircuitGenome& genome);
CircuitGenome deserialize_genome(const std::string& text);

// Gate sequence realized by the genome's genes (no feature map).
std::vector<GateOp> genome_gates(const CircuitGenome& genome, std::span<const double> params);

struct GateCounts {
    int h = 0, cnot = 0, rx = 0, ry = 0, rz = 0;
};
GateCounts count_gates(const CircuitGenome& genome);

}  // namespace qnas
