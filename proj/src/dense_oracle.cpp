#include "qnas/dense_oracle.hpp"

#include <cmath>
#include <string>

#include "qnas/errors.hpp"

namespace qnas {

DenseMatrix DenseMatrix::identity(std::size_t dim) {
    DenseMatrix out;
    out.dim = dim;
    out.m.assign(dim * dim, Amplitude{0.0, 0.0});
    for (std::size_t i = 0; i < dim; ++i) out.at(i, i) = {1.0, 0.0};
    return out;
}

DenseMatrix DenseMatrix::kron(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out;
    out.dim = a.dim * b.dim;
    out.m.assign(out.dim * out.dim, Amplitude{0.0, 0.0});
    for (std::size_t ar = 0; ar < a.dim; ++ar)
        for (std::size_t ac = 0; ac < a.dim; ++ac)
            for (std::size_t br = 0; br < b.dim; ++br)
                for (std::size_t bc = 0; bc < b.dim; ++bc)
                    out.at(ar * b.dim + br, ac * b.dim + bc) = a.at(ar, ac) * b.at(br, bc);
    return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out;
    out.dim = a.dim;
    out.m.assign(out.dim * out.dim, Amplitude{0.0, 0.0});
    for (std::size_t r = 0; r < a.dim; ++r)
        for (std::size_t k = 0; k < a.dim; ++k) {
            const Amplitude ark = a.at(r, k);
            for (std::size_t c = 0; c < a.dim; ++c) out.at(r, c) += ark * b.at(k, c);
        }
    return out;
}

DenseMatrix dagger(const DenseMatrix& a) {
    DenseMatrix out;
    out.dim = a.dim;
    out.m.assign(out.dim * out.dim, Amplitude{0.0, 0.0});
    for (std::size_t r = 0; r < a.dim; ++r)
        for (std::size_t c = 0; c < a.dim; ++c) out.at(r, c) = std::conj(a.at(c, r));
    return out;
}

std::vector<Amplitude> matvec(const DenseMatrix& a, std::span<const Amplitude> x) {
    std::vector<Amplitude> y(a.dim, Amplitude{0.0, 0.0});
    for (std::size_t r = 0; r < a.dim; ++r)
        for (std::size_t c = 0; c < a.dim; ++c) y[r] += a.at(r, c) * x[c];
    return y;
}

namespace {

DenseMatrix gate_2x2(const GateOp& gate) {
    DenseMatrix u;
    u.dim = 2;
    u.m.assign(4, Amplitude{0.0, 0.0});
    const double h = gate.angle / 2.0;
    const double c = std::cos(h);
    const double s = std::sin(h);
    switch (gate.kind) {
        case GateKind::Hadamard: {
            const double r = 1.0 / std::sqrt(2.0);
            u.m = {{r, 0}, {r, 0}, {r, 0}, {-r, 0}};
            break;
        }
        case GateKind::RotX:
            u.m = {{c, 0}, {0, -s}, {0, -s}, {c, 0}};
            break;
        case GateKind::RotY:
            u.m = {{c, 0}, {-s, 0}, {s, 0}, {c, 0}};
            break;
        case GateKind::RotZ:
            u.m = {{c, -s}, {0, 0}, {0, 0}, {c, s}};
            break;
        case GateKind::Cnot:
            break;  // not a 2x2 gate
    }
    return u;
}

// Little-endian embedding: full = I_{2^(n-1-q)} (x) U (x) I_{2^q}.
DenseMatrix embed_single(const GateOp& gate, int n_qubits) {
    const auto left = DenseMatrix::identity(std::size_t{1} << (n_qubits - 1 - gate.qubit));
    const auto right = DenseMatrix::identity(std::size_t{1} << gate.qubit);
    return DenseMatrix::kron(DenseMatrix::kron(left, gate_2x2(gate)), right);
}

// Permutation matrix from the CNOT truth table.
DenseMatrix embed_cnot(const GateOp& gate, int n_qubits) {
    DenseMatrix out;
    out.dim = std::size_t{1} << n_qubits;
    out.m.assign(out.dim * out.dim, Amplitude{0.0, 0.0});
    const std::size_t cbit = std::size_t{1} << gate.control;
    const std::size_t tbit = std::size_t{1} << gate.qubit;
    for (std::size_t col = 0; col < out.dim; ++col) {
        const std::size_t row = (col & cbit) ? (col ^ tbit) : col;
        out.at(row, col) = {1.0, 0.0};
    }
    return out;
}

}  // namespace

DenseMatrix dense_unitary_oracle(std::span<const GateOp> gates, int n_qubits) {
    if (n_qubits < 1 || n_qubits > 6) {
        throw ConfigError("dense_unitary_oracle: n_qubits must be in [1, 6], got " +
                          std::to_string(n_qubits));
    }
    for (const auto& g : gates) {
        if (g.qubit < 0 || g.qubit >= n_qubits ||
            (g.kind == GateKind::Cnot &&
             (g.control < 0 || g.control >= n_qubits || g.control == g.qubit))) {
            throw SimulationError("dense_unitary_oracle: invalid gate operands");
        }
    }
    auto total = DenseMatrix::identity(std::size_t{1} << n_qubits);
    for (const auto& g : gates) {
        const DenseMatrix full =
            g.kind == GateKind::Cnot ? embed_cnot(g, n_qubits) : embed_single(g, n_qubits);
        total = matmul(full, total);  // later gates multiply from the left
    }
    return total;
}

}  // namespace qnas
