#include "qnas/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>

#include "qnas/errors.hpp"
#include "qnas/rng.hpp"

namespace qnas {

using nlohmann::json;

bool is_rotation(GeneKind kind) {
    return kind == GeneKind::RotX || kind == GeneKind::RotY || kind == GeneKind::RotZ;
}

std::string gene_kind_name(GeneKind kind) {
    switch (kind) {
        case GeneKind::RotX: return "ROT_X";
        case GeneKind::RotY: return "ROT_Y";
        case GeneKind::RotZ: return "ROT_Z";
        case GeneKind::Hadamard: return "H";
        case GeneKind::Cnot: return "CNOT";
    }
    return "?";
}

void validate_genome(const CircuitGenome& genome) {
    if (genome.n_qubits < 1) throw ContractError("genome: n_qubits must be positive");
    if (genome.n_params < 0) throw ContractError("genome: negative n_params");
    std::vector<int> slot_uses(static_cast<std::size_t>(genome.n_params), 0);
    int rotations = 0;
    for (std::size_t i = 0; i < genome.genes.size(); ++i) {
        const Gene& g = genome.genes[i];
        const std::string where = "genome: gene " + std::to_string(i);
        if (g.qubit < 0 || g.qubit >= genome.n_qubits)
            throw ContractError(where + ": qubit " + std::to_string(g.qubit) + " out of range");
        if (is_rotation(g.kind)) {
            ++rotations;
            if (g.param_slot < 0 || g.param_slot >= genome.n_params)
                throw ContractError(where + ": param_slot " + std::to_string(g.param_slot) +
                                    " out of range");
            if (++slot_uses[static_cast<std::size_t>(g.param_slot)] > 1)
                throw ContractError(where + ": param_slot " + std::to_string(g.param_slot) +
                                    " used more than once");
            if (g.control != -1) throw ContractError(where + ": rotation with a control qubit");
        } else if (g.kind == GeneKind::Cnot) {
            if (g.control < 0 || g.control >= genome.n_qubits)
                throw ContractError(where + ": control " + std::to_string(g.control) +
                                    " out of range");
            if (g.control == g.qubit) throw ContractError(where + ": CNOT control == target");
            if (g.param_slot != -1) throw ContractError(where + ": CNOT with a param_slot");
        } else {
            if (g.control != -1 || g.param_slot != -1)
                throw ContractError(where + ": H with control or param_slot");
        }
    }
    if (rotations != genome.n_params)
        throw ContractError("genome: " + std::to_string(rotations) + " rotation genes but n_params = " +
                            std::to_string(genome.n_params));
}

CircuitGenome build_initial_genome(int n_qubits, int depth) {
    if (n_qubits < 2) throw ContractError("build_initial_genome: n_qubits must be >= 2");
    if (depth < 1) throw ContractError("build_initial_genome: depth must be >= 1");
    CircuitGenome genome;
    genome.n_qubits = n_qubits;
    genome.n_params = depth * n_qubits;
    int slot = 0;
    for (int d = 0; d < depth; ++d) {
        for (int q = 0; q < n_qubits; ++q) {
            genome.genes.push_back(Gene{GeneKind::RotY, q, -1, slot++});
        }
        for (int q = 0; q + 1 < n_qubits; ++q) {
            genome.genes.push_back(Gene{GeneKind::Cnot, q + 1, q, -1});
        }
    }
    return genome;
}

std::vector<double> init_genome_params(const CircuitGenome& genome, Rng& rng) {
    std::vector<double> params(static_cast<std::size_t>(genome.n_params));
    for (auto& p : params) p = rng.uniform(-0.1, 0.1);
    return params;
}

std::vector<GateOp> genome_gates(const CircuitGenome& genome, std::span<const double> params) {
    std::vector<GateOp> gates;
    gates.reserve(genome.genes.size());
    for (const Gene& g : genome.genes) {
        switch (g.kind) {
            case GeneKind::RotX:
                gates.push_back(GateOp::rot_x(g.qubit, params[static_cast<std::size_t>(g.param_slot)]));
                break;
            case GeneKind::RotY:
                gates.push_back(GateOp::rot_y(g.qubit, params[static_cast<std::size_t>(g.param_slot)]));
                break;
            case GeneKind::RotZ:
                gates.push_back(GateOp::rot_z(g.qubit, params[static_cast<std::size_t>(g.param_slot)]));
                break;
            case GeneKind::Hadamard:
                gates.push_back(GateOp::hadamard(g.qubit));
                break;
            case GeneKind::Cnot:
                gates.push_back(GateOp::cnot(g.control, g.qubit));
                break;
        }
    }
    return gates;
}

std::vector<double> execute(const CircuitGenome& genome, std::span<const double> params,
                            std::span<const double> angles) {
    if (static_cast<int>(params.size()) != genome.n_params)
        throw ContractError("execute: expected " + std::to_string(genome.n_params) +
                            " params, got " + std::to_string(params.size()));
    if (static_cast<int>(angles.size()) != genome.n_qubits)
        throw ContractError("execute: expected " + std::to_string(genome.n_qubits) +
                            " angles, got " + std::to_string(angles.size()));

    StateVector state = init_state(genome.n_qubits);
    for (int q = 0; q < genome.n_qubits; ++q) apply_gate(state, GateOp::hadamard(q));
    for (int q = 0; q < genome.n_qubits; ++q)
        apply_gate(state, GateOp::rot_y(q, angles[static_cast<std::size_t>(q)]));
    for (const GateOp& g : genome_gates(genome, params)) apply_gate(state, g);

    std::vector<double> latent(static_cast<std::size_t>(genome.n_qubits));
    for (int q = 0; q < genome.n_qubits; ++q)
        latent[static_cast<std::size_t>(q)] = expectation_z(state, q);
    return latent;
}

CircuitJacobians param_shift_grads(const CircuitGenome& genome, std::span<const double> params,
                                   std::span<const double> angles) {
    const int nq = genome.n_qubits;
    const int np = genome.n_params;
    CircuitJacobians jac;
    jac.n_qubits = nq;
    jac.n_params = np;
    jac.d_params.assign(static_cast<std::size_t>(nq) * static_cast<std::size_t>(np), 0.0);
    jac.d_angles.assign(static_cast<std::size_t>(nq) * static_cast<std::size_t>(nq), 0.0);

    constexpr double shift = std::numbers::pi / 2.0;
    std::vector<double> shifted(params.begin(), params.end());
    for (int slot = 0; slot < np; ++slot) {
        const double original = shifted[static_cast<std::size_t>(slot)];
        shifted[static_cast<std::size_t>(slot)] = original + shift;
        const auto plus = execute(genome, shifted, angles);
        shifted[static_cast<std::size_t>(slot)] = original - shift;
        const auto minus = execute(genome, shifted, angles);
        shifted[static_cast<std::size_t>(slot)] = original;
        for (int out = 0; out < nq; ++out) {
            jac.d_params[static_cast<std::size_t>(out) * static_cast<std::size_t>(np) +
                         static_cast<std::size_t>(slot)] =
                (plus[static_cast<std::size_t>(out)] - minus[static_cast<std::size_t>(out)]) / 2.0;
        }
    }

    std::vector<double> shifted_angles(angles.begin(), angles.end());
    for (int a = 0; a < nq; ++a) {
        const double original = shifted_angles[static_cast<std::size_t>(a)];
        shifted_angles[static_cast<std::size_t>(a)] = original + shift;
        const auto plus = execute(genome, params, shifted_angles);
        shifted_angles[static_cast<std::size_t>(a)] = original - shift;
        const auto minus = execute(genome, params, shifted_angles);
        shifted_angles[static_cast<std::size_t>(a)] = original;
        for (int out = 0; out < nq; ++out) {
            jac.d_angles[static_cast<std::size_t>(out) * static_cast<std::size_t>(nq) +
                         static_cast<std::size_t>(a)] =
                (plus[static_cast<std::size_t>(out)] - minus[static_cast<std::size_t>(out)]) / 2.0;
        }
    }
    return jac;
}

namespace {

GeneKind kind_from_name(const std::string& name) {
    if (name == "ROT_X") return GeneKind::RotX;
    if (name == "ROT_Y") return GeneKind::RotY;
    if (name == "ROT_Z") return GeneKind::RotZ;
    if (name == "H") return GeneKind::Hadamard;
    if (name == "CNOT") return GeneKind::Cnot;
    throw ParseError("genome: unknown gate kind \"" + name + "\"");
}

int require_int(const json& j, const char* field, const std::string& where) {
    if (!j.contains(field)) throw ParseError(where + ": missing field \"" + field + "\"");
    if (!j[field].is_number_integer())
        throw ParseError(where + ": field \"" + field + "\" must be an integer");
    return j[field].get<int>();
}

}  // namespace

std::string serialize_genome(const CircuitGenome& genome) {
    json j;
    j["version"] = 1;
    j["n_qubits"] = genome.n_qubits;
    j["n_params"] = genome.n_params;
    j["genes"] = json::array();
    for (const Gene& g : genome.genes) {
        json jg;
        jg["kind"] = gene_kind_name(g.kind);
        jg["qubit"] = g.qubit;
        jg["control"] = g.kind == GeneKind::Cnot ? json(g.control) : json(nullptr);
        jg["param_slot"] = is_rotation(g.kind) ? json(g.param_slot) : json(nullptr);
        j["genes"].push_back(std::move(jg));
    }
    return j.dump(2);
}

CircuitGenome deserialize_genome(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("genome: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("genome: top-level value must be an object");
    const int version = require_int(j, "version", "genome");
    if (version != 1) throw ParseError("genome: unsupported version " + std::to_string(version));

    CircuitGenome genome;
    genome.n_qubits = require_int(j, "n_qubits", "genome");
    genome.n_params = require_int(j, "n_params", "genome");
    if (!j.contains("genes") || !j["genes"].is_array())
        throw ParseError("genome: missing or non-array field \"genes\"");

    std::size_t idx = 0;
    for (const json& jg : j["genes"]) {
        const std::string where = "genome: gene " + std::to_string(idx++);
        if (!jg.is_object()) throw ParseError(where + ": must be an object");
        if (!jg.contains("kind") || !jg["kind"].is_string())
            throw ParseError(where + ": missing string field \"kind\"");
        Gene g;
        g.kind = kind_from_name(jg["kind"].get<std::string>());
        g.qubit = require_int(jg, "qubit", where);
        if (jg.contains("control") && !jg["control"].is_null()) {
            if (!jg["control"].is_number_integer())
                throw ParseError(where + ": field \"control\" must be an integer or null");
            g.control = jg["control"].get<int>();
        }
        if (jg.contains("param_slot") && !jg["param_slot"].is_null()) {
            if (!jg["param_slot"].is_number_integer())
                throw ParseError(where + ": field \"param_slot\" must be an integer or null");
            g.param_slot = jg["param_slot"].get<int>();
        }
        genome.genes.push_back(g);
    }
    try {
        validate_genome(genome);
    } catch (const ContractError& e) {
        throw ParseError(e.what());
    }
    return genome;
}

GateCounts count_gates(const CircuitGenome& genome) {
    GateCounts counts;
    for (const Gene& g : genome.genes) {
        switch (g.kind) {
            case GeneKind::Hadamard: ++counts.h; break;
            case GeneKind::Cnot: ++counts.cnot; break;
            case GeneKind::RotX: ++counts.rx; break;
            case GeneKind::RotY: ++counts.ry; break;
            case GeneKind::RotZ: ++counts.rz; break;
        }
    }
    return counts;
}

}  // namespace qnas
