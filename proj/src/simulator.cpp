#include "qnas/simulator.hpp"

#include <cmath>
#include <string>

#include "qnas/errors.hpp"

namespace qnas {

double StateVector::norm() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return std::sqrt(s);
}

StateVector init_state(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw ConfigError("init_state: n_qubits must be in [1, " +
                          std::to_string(kMaxQubits) + "], got " +
                          std::to_string(n_qubits));
    }
    StateVector s;
    s.n_qubits = n_qubits;
    s.amplitudes.assign(std::size_t{1} << n_qubits, Amplitude{0.0, 0.0});
    s.amplitudes[0] = Amplitude{1.0, 0.0};
    return s;
}

namespace {

void check_qubit(const StateVector& state, int qubit, const char* who) {
    if (qubit < 0 || qubit >= state.n_qubits) {
        throw SimulationError(std::string(who) + ": qubit index " +
                              std::to_string(qubit) + " out of range for " +
                              std::to_string(state.n_qubits) + " qubits");
    }
}

// In-place y = M x over every (index, index|stride) amplitude pair.
void apply_single_qubit(StateVector& state, int qubit, Amplitude m00,
                        Amplitude m01, Amplitude m10, Amplitude m11) {
    const std::size_t stride = std::size_t{1} << qubit;
    const std::size_t dim = state.dim();
    auto& amp = state.amplitudes;
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Amplitude a0 = amp[i];
            const Amplitude a1 = amp[i + stride];
            amp[i] = m00 * a0 + m01 * a1;
            amp[i + stride] = m10 * a0 + m11 * a1;
        }
    }
}

}  // namespace

void apply_gate(StateVector& state, const GateOp& gate) {
    check_qubit(state, gate.qubit, "apply_gate");
    if (gate.kind == GateKind::Cnot) {
        check_qubit(state, gate.control, "apply_gate");
        if (gate.control == gate.qubit) {
            throw SimulationError("apply_gate: CNOT control == target (" +
                                  std::to_string(gate.qubit) + ")");
        }
        const std::size_t cbit = std::size_t{1} << gate.control;
        const std::size_t tbit = std::size_t{1} << gate.qubit;
        auto& amp = state.amplitudes;
        for (std::size_t i = 0; i < state.dim(); ++i) {
            if ((i & cbit) != 0 && (i & tbit) == 0) {
                std::swap(amp[i], amp[i | tbit]);
            }
        }
        return;
    }

    if (!std::isfinite(gate.angle)) {
        throw SimulationError("apply_gate: non-finite rotation angle");
    }
    const double h = gate.angle / 2.0;
    const double c = std::cos(h);
    const double s = std::sin(h);
    switch (gate.kind) {
        case GateKind::Hadamard: {
            const double r = 1.0 / std::sqrt(2.0);
            apply_single_qubit(state, gate.qubit, {r, 0}, {r, 0}, {r, 0}, {-r, 0});
            break;
        }
        case GateKind::RotX:
            apply_single_qubit(state, gate.qubit, {c, 0}, {0, -s}, {0, -s}, {c, 0});
            break;
        case GateKind::RotY:
            apply_single_qubit(state, gate.qubit, {c, 0}, {-s, 0}, {s, 0}, {c, 0});
            break;
        case GateKind::RotZ:
            apply_single_qubit(state, gate.qubit, {c, -s}, {0, 0}, {0, 0}, {c, s});
            break;
        case GateKind::Cnot:
            break;  // handled above
    }
}

double expectation_z(const StateVector& state, int qubit) {
    check_qubit(state, qubit, "expectation_z");
    const std::size_t bit = std::size_t{1} << qubit;
    double value = 0.0;
    for (std::size_t i = 0; i < state.dim(); ++i) {
        const double p = std::norm(state.amplitudes[i]);
        value += (i & bit) ? -p : p;
    }
    return value;
}

}  // namespace qnas
