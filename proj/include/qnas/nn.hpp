#pragma once

#include <span>
#include <string>
#include <vector>

#include "qnas/circuit.hpp"

namespace qnas {

class Rng;

enum class Activation { Rectifier, Tanh, Sigmoid, Identity };

// Fully connected layer, weights row-major out x in.
struct DenseLayer {
    int in_dim = 0;
    int out_dim = 0;
    std::vector<double> weights;
    std::vector<double> biases;
    Activation activation = Activation::Identity;

    // pre-activation z = W x + b; writes z and a = act(z).
    void forward(std::span<const double> x, std::vector<double>& z, std::vector<double>& a) const;
};

DenseLayer make_dense(int in_dim, int out_dim, Activation activation, Rng& rng);

// g o f_vqc o f_c: two classical encoder layers squeeze the input to one
// pre-angle per qubit, the circuit turns angles into Z-expectations, and two
// classical decoder layers reconstruct the input.
struct HybridAutoencoder {
    DenseLayer enc1;          // input -> hidden, rectifier
    DenseLayer enc2;          // hidden -> n_qubits, identity (pre-angles)
    double angle_scale = 0.0; // angles = angle_scale * tanh(pre_angles)
    CircuitGenome genome;
    std::vector<double> q_params;
    DenseLayer dec1;          // n_qubits -> hidden, rectifier
    DenseLayer dec2;          // hidden -> input, sigmoid

    int input_dim() const { return enc1.in_dim; }
    int n_qubits() const { return genome.n_qubits; }

    // Parameter arrays in a fixed order (enc1 w/b, enc2 w/b, q, dec1 w/b,
    // dec2 w/b); gradients use the same order.
    std::vector<std::span<double>> param_views();
    std::vector<std::span<const double>> param_views() const;
    std::size_t param_count() const;
};

HybridAutoencoder make_autoencoder(int input_dim, int hidden_dim, CircuitGenome genome,
                                   double angle_scale, Rng& rng);

struct ForwardCache {
    std::vector<double> z1, a1;       // enc1
    std::vector<double> u;            // enc2 pre-angles
    std::vector<double> tanh_u;
    std::vector<double> angles;
    std::vector<double> latent;
    std::vector<double> z3, a3;       // dec1
    std::vector<double> z4;           // dec2 pre-activation
    std::vector<double> reconstruction;
};

// Throws TrainingDivergence if any intermediate value is non-finite.
ForwardCache forward(const HybridAutoencoder& model, std::span<const double> x);

// (1/N) sum_j ||recon_j - x_j||^2 (sum over pixels, mean over the batch).
double mse_loss(const std::vector<std::vector<double>>& reconstructions,
                const std::vector<std::vector<double>>& originals);
double squared_error(std::span<const double> reconstruction, std::span<const double> original);

struct Gradients {
    std::vector<double> enc1_w, enc1_b;
    std::vector<double> enc2_w, enc2_b;
    std::vector<double> q_params;
    std::vector<double> dec1_w, dec1_b;
    std::vector<double> dec2_w, dec2_b;

    static Gradients zeros_like(const HybridAutoencoder& model);
    void accumulate(const Gradients& other);
    void scale(double factor);
    std::vector<std::span<const double>> views() const;
};

// Gradient of the per-sample squared error w.r.t. every model parameter.
// The quantum segment uses the parameter-shift jacobians; the classical
// segments use the chain rule.
Gradients backward(const HybridAutoencoder& model, const ForwardCache& cache,
                   std::span<const double> x);

// Adaptive moment estimation over the model's flattened parameters.
struct OptimizerState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step_count = 0;
    std::vector<double> m;
    std::vector<double> v;

    static OptimizerState for_model(const HybridAutoencoder& model, double learning_rate);
};

// One update step; params and grads must match the state's total length.
// Throws TrainingDivergence on a non-finite gradient.
void optimizer_step(OptimizerState& state, std::vector<std::span<double>> params,
                    std::vector<std::span<const double>> grads);

}  // namespace qnas
