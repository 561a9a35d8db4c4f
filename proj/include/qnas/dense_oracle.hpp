#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qnas/simulator.hpp"

namespace qnas {

// Row-major square complex matrix. Only used by the dense test oracle.
struct DenseMatrix {
    std::size_t dim = 0;
    std::vector<Amplitude> m;

    Amplitude& at(std::size_t r, std::size_t c) { return m[r * dim + c]; }
    const Amplitude& at(std::size_t r, std::size_t c) const { return m[r * dim + c]; }

    static DenseMatrix identity(std::size_t dim);
    static DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b);
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix dagger(const DenseMatrix& a);
std::vector<Amplitude> matvec(const DenseMatrix& a, std::span<const Amplitude> x);

// Explicit 2^n x 2^n product of the whole gate sequence, built by
// Kronecker-expanding each gate and multiplying in application order.
// Deliberately does not share code with apply_gate: it exists to cross-check
// the in-place bit-pair path. Refuses n_qubits > 6.
DenseMatrix dense_unitary_oracle(std::span<const GateOp> gates, int n_qubits);

}  // namespace qnas
