#pragma once

#include <complex>
#include <vector>

namespace qnas {

using Amplitude = std::complex<double>;

// 2^n_qubits complex amplitudes, little-endian: qubit 0 is the least
// significant bit of the amplitude index.
struct StateVector {
    int n_qubits = 0;
    std::vector<Amplitude> amplitudes;

    std::size_t dim() const { return amplitudes.size(); }
    double norm() const;
};

enum class GateKind { Hadamard, RotX, RotY, RotZ, Cnot };

// angle is used by rotations only; control by CNOT only (-1 otherwise).
// Rotations follow the half-angle convention R_k(theta) = exp(-i theta sigma_k / 2).
struct GateOp {
    GateKind kind = GateKind::Hadamard;
    int qubit = 0;
    int control = -1;
    double angle = 0.0;

    static GateOp hadamard(int qubit) { return {GateKind::Hadamard, qubit, -1, 0.0}; }
    static GateOp rot_x(int qubit, double angle) { return {GateKind::RotX, qubit, -1, angle}; }
    static GateOp rot_y(int qubit, double angle) { return {GateKind::RotY, qubit, -1, angle}; }
    static GateOp rot_z(int qubit, double angle) { return {GateKind::RotZ, qubit, -1, angle}; }
    static GateOp cnot(int control, int target) { return {GateKind::Cnot, target, control, 0.0}; }
};

constexpr int kMaxQubits = 12;

// |0...0> on n_qubits; n_qubits must be in [1, 12].
StateVector init_state(int n_qubits);

// Multiplies the state by the gate's unitary, in place over the amplitude
// array (O(2^n) per single-qubit gate). Throws SimulationError on invalid
// qubit indices or a non-finite angle.
void apply_gate(StateVector& state, const GateOp& gate);

// <Z_qubit> = sum_i |amp_i|^2 * (+1 if bit `qubit` of i is 0 else -1).
double expectation_z(const StateVector& state, int qubit);

}  // namespace qnas
