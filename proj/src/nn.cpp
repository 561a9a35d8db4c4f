#include "qnas/nn.hpp"

#include <cmath>

#include "qnas/errors.hpp"
#include "qnas/rng.hpp"

namespace qnas {

namespace {

double activate(Activation act, double z) {
    switch (act) {
        case Activation::Rectifier: return z > 0.0 ? z : 0.0;
        case Activation::Tanh: return std::tanh(z);
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::Identity: return z;
    }
    return z;
}

// derivative expressed through z and a = act(z)
double activate_grad(Activation act, double z, double a) {
    switch (act) {
        case Activation::Rectifier: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: return 1.0 - a * a;
        case Activation::Sigmoid: return a * (1.0 - a);
        case Activation::Identity: return 1.0;
    }
    return 1.0;
}

bool all_finite(std::span<const double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

void DenseLayer::forward(std::span<const double> x, std::vector<double>& z,
                         std::vector<double>& a) const {
    z.assign(static_cast<std::size_t>(out_dim), 0.0);
    a.resize(static_cast<std::size_t>(out_dim));
    for (int r = 0; r < out_dim; ++r) {
        const double* wrow = weights.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(in_dim);
        double acc = biases[static_cast<std::size_t>(r)];
        for (int c = 0; c < in_dim; ++c) acc += wrow[c] * x[static_cast<std::size_t>(c)];
        z[static_cast<std::size_t>(r)] = acc;
        a[static_cast<std::size_t>(r)] = activate(activation, acc);
    }
}

DenseLayer make_dense(int in_dim, int out_dim, Activation activation, Rng& rng) {
    DenseLayer layer;
    layer.in_dim = in_dim;
    layer.out_dim = out_dim;
    layer.activation = activation;
    layer.weights.resize(static_cast<std::size_t>(in_dim) * static_cast<std::size_t>(out_dim));
    layer.biases.assign(static_cast<std::size_t>(out_dim), 0.0);
    const double bound = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    for (auto& w : layer.weights) w = rng.uniform(-bound, bound);
    return layer;
}

std::vector<std::span<double>> HybridAutoencoder::param_views() {
    return {enc1.weights, enc1.biases, enc2.weights, enc2.biases, q_params,
            dec1.weights, dec1.biases, dec2.weights, dec2.biases};
}

std::vector<std::span<const double>> HybridAutoencoder::param_views() const {
    return {enc1.weights, enc1.biases, enc2.weights, enc2.biases, q_params,
            dec1.weights, dec1.biases, dec2.weights, dec2.biases};
}

std::size_t HybridAutoencoder::param_count() const {
    std::size_t n = 0;
    for (const auto& view : param_views()) n += view.size();
    return n;
}

HybridAutoencoder make_autoencoder(int input_dim, int hidden_dim, CircuitGenome genome,
                                   double angle_scale, Rng& rng) {
    validate_genome(genome);
    HybridAutoencoder model;
    const int nq = genome.n_qubits;
    model.enc1 = make_dense(input_dim, hidden_dim, Activation::Rectifier, rng);
    model.enc2 = make_dense(hidden_dim, nq, Activation::Identity, rng);
    model.angle_scale = angle_scale;
    model.q_params = init_genome_params(genome, rng);
    model.genome = std::move(genome);
    model.dec1 = make_dense(nq, hidden_dim, Activation::Rectifier, rng);
    model.dec2 = make_dense(hidden_dim, input_dim, Activation::Sigmoid, rng);
    return model;
}

ForwardCache forward(const HybridAutoencoder& model, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.input_dim())
        throw ContractError("forward: input size " + std::to_string(x.size()) +
                            " != model input dim " + std::to_string(model.input_dim()));
    ForwardCache cache;
    model.enc1.forward(x, cache.z1, cache.a1);
    if (!all_finite(cache.z1)) throw TrainingDivergence("forward: non-finite encoder activation");
    std::vector<double> enc2_act;
    model.enc2.forward(cache.a1, cache.u, enc2_act);  // identity activation
    if (!all_finite(cache.u)) throw TrainingDivergence("forward: non-finite pre-angles");
    const auto nq = static_cast<std::size_t>(model.n_qubits());
    cache.tanh_u.resize(nq);
    cache.angles.resize(nq);
    for (std::size_t i = 0; i < nq; ++i) {
        cache.tanh_u[i] = std::tanh(cache.u[i]);
        cache.angles[i] = model.angle_scale * cache.tanh_u[i];
    }
    cache.latent = execute(model.genome, model.q_params, cache.angles);
    model.dec1.forward(cache.latent, cache.z3, cache.a3);
    if (!all_finite(cache.z3)) throw TrainingDivergence("forward: non-finite decoder activation");
    model.dec2.forward(cache.a3, cache.z4, cache.reconstruction);
    if (!all_finite(cache.reconstruction))
        throw TrainingDivergence("forward: non-finite reconstruction");
    return cache;
}

double squared_error(std::span<const double> reconstruction, std::span<const double> original) {
    if (reconstruction.size() != original.size())
        throw ContractError("squared_error: size mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < original.size(); ++i) {
        const double d = reconstruction[i] - original[i];
        sum += d * d;
    }
    return sum;
}

double mse_loss(const std::vector<std::vector<double>>& reconstructions,
                const std::vector<std::vector<double>>& originals) {
    if (reconstructions.empty() || reconstructions.size() != originals.size())
        throw ContractError("mse_loss: empty batch or size mismatch");
    double total = 0.0;
    for (std::size_t j = 0; j < originals.size(); ++j)
        total += squared_error(reconstructions[j], originals[j]);
    return total / static_cast<double>(originals.size());
}

Gradients Gradients::zeros_like(const HybridAutoencoder& model) {
    Gradients g;
    g.enc1_w.assign(model.enc1.weights.size(), 0.0);
    g.enc1_b.assign(model.enc1.biases.size(), 0.0);
    g.enc2_w.assign(model.enc2.weights.size(), 0.0);
    g.enc2_b.assign(model.enc2.biases.size(), 0.0);
    g.q_params.assign(model.q_params.size(), 0.0);
    g.dec1_w.assign(model.dec1.weights.size(), 0.0);
    g.dec1_b.assign(model.dec1.biases.size(), 0.0);
    g.dec2_w.assign(model.dec2.weights.size(), 0.0);
    g.dec2_b.assign(model.dec2.biases.size(), 0.0);
    return g;
}

void Gradients::accumulate(const Gradients& other) {
    auto add = [](std::vector<double>& into, const std::vector<double>& from) {
        for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
    };
    add(enc1_w, other.enc1_w);
    add(enc1_b, other.enc1_b);
    add(enc2_w, other.enc2_w);
    add(enc2_b, other.enc2_b);
    add(q_params, other.q_params);
    add(dec1_w, other.dec1_w);
    add(dec1_b, other.dec1_b);
    add(dec2_w, other.dec2_w);
    add(dec2_b, other.dec2_b);
}

void Gradients::scale(double factor) {
    for (auto* vec : {&enc1_w, &enc1_b, &enc2_w, &enc2_b, &q_params, &dec1_w, &dec1_b,
                      &dec2_w, &dec2_b})
        for (auto& x : *vec) x *= factor;
}

std::vector<std::span<const double>> Gradients::views() const {
    return {enc1_w, enc1_b, enc2_w, enc2_b, q_params, dec1_w, dec1_b, dec2_w, dec2_b};
}

namespace {

// delta = dL/dz of this layer; accumulates dW, db and returns dL/dx.
std::vector<double> dense_backward(const DenseLayer& layer, std::span<const double> x,
                                   std::span<const double> delta, std::vector<double>& dw,
                                   std::vector<double>& db, bool want_dx) {
    for (int r = 0; r < layer.out_dim; ++r) {
        const double d = delta[static_cast<std::size_t>(r)];
        db[static_cast<std::size_t>(r)] += d;
        double* dwrow = dw.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(layer.in_dim);
        for (int c = 0; c < layer.in_dim; ++c) dwrow[c] += d * x[static_cast<std::size_t>(c)];
    }
    std::vector<double> dx;
    if (want_dx) {
        dx.assign(static_cast<std::size_t>(layer.in_dim), 0.0);
        for (int r = 0; r < layer.out_dim; ++r) {
            const double d = delta[static_cast<std::size_t>(r)];
            const double* wrow =
                layer.weights.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(layer.in_dim);
            for (int c = 0; c < layer.in_dim; ++c) dx[static_cast<std::size_t>(c)] += d * wrow[c];
        }
    }
    return dx;
}

std::vector<double> through_activation(Activation act, std::span<const double> z,
                                       std::span<const double> a, std::span<const double> da) {
    std::vector<double> dz(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) dz[i] = da[i] * activate_grad(act, z[i], a[i]);
    return dz;
}

}  // namespace

Gradients backward(const HybridAutoencoder& model, const ForwardCache& cache,
                   std::span<const double> x) {
    if (static_cast<int>(cache.reconstruction.size()) != model.input_dim() ||
        static_cast<int>(x.size()) != model.input_dim())
        throw ContractError("backward: cache does not match the model or input");

    Gradients grads = Gradients::zeros_like(model);
    const auto nq = static_cast<std::size_t>(model.n_qubits());

    // dL/drecon for L = ||recon - x||^2
    std::vector<double> d_recon(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        d_recon[i] = 2.0 * (cache.reconstruction[i] - x[i]);

    const auto dz4 =
        through_activation(model.dec2.activation, cache.z4, cache.reconstruction, d_recon);
    const auto da3 = dense_backward(model.dec2, cache.a3, dz4, grads.dec2_w, grads.dec2_b, true);
    const auto dz3 = through_activation(model.dec1.activation, cache.z3, cache.a3, da3);
    const auto d_latent =
        dense_backward(model.dec1, cache.latent, dz3, grads.dec1_w, grads.dec1_b, true);

    // Quantum segment: chain the loss gradient through the parameter-shift
    // jacobians to get d/dq_params and d/dangles.
    const auto jac = param_shift_grads(model.genome, model.q_params, cache.angles);
    for (int slot = 0; slot < jac.n_params; ++slot) {
        double acc = 0.0;
        for (std::size_t out = 0; out < nq; ++out)
            acc += d_latent[out] * jac.param_entry(static_cast<int>(out), slot);
        grads.q_params[static_cast<std::size_t>(slot)] = acc;
    }
    std::vector<double> d_angles(nq, 0.0);
    for (std::size_t a = 0; a < nq; ++a) {
        double acc = 0.0;
        for (std::size_t out = 0; out < nq; ++out)
            acc += d_latent[out] * jac.angle_entry(static_cast<int>(out), static_cast<int>(a));
        d_angles[a] = acc;
    }

    // angles = angle_scale * tanh(u)
    std::vector<double> du(nq);
    for (std::size_t i = 0; i < nq; ++i)
        du[i] = d_angles[i] * model.angle_scale * (1.0 - cache.tanh_u[i] * cache.tanh_u[i]);

    const auto da1 = dense_backward(model.enc2, cache.a1, du, grads.enc2_w, grads.enc2_b, true);
    const auto dz1 = through_activation(model.enc1.activation, cache.z1, cache.a1, da1);
    dense_backward(model.enc1, x, dz1, grads.enc1_w, grads.enc1_b, false);
    return grads;
}

OptimizerState OptimizerState::for_model(const HybridAutoencoder& model, double learning_rate) {
    OptimizerState state;
    state.learning_rate = learning_rate;
    state.m.assign(model.param_count(), 0.0);
    state.v.assign(model.param_count(), 0.0);
    return state;
}

void optimizer_step(OptimizerState& state, std::vector<std::span<double>> params,
                    std::vector<std::span<const double>> grads) {
    if (params.size() != grads.size()) throw ContractError("optimizer_step: view count mismatch");
    std::size_t total = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].size() != grads[i].size())
            throw ContractError("optimizer_step: parameter/gradient shape mismatch");
        total += params[i].size();
    }
    if (total != state.m.size())
        throw ContractError("optimizer_step: state sized for " + std::to_string(state.m.size()) +
                            " parameters, got " + std::to_string(total));

    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bias1 = 1.0 - std::pow(state.beta1, t);
    const double bias2 = 1.0 - std::pow(state.beta2, t);

    std::size_t offset = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i];
        auto g = grads[i];
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double grad = g[k];
            if (!std::isfinite(grad))
                throw TrainingDivergence("optimizer_step: non-finite gradient");
            double& m = state.m[offset + k];
            double& v = state.v[offset + k];
            m = state.beta1 * m + (1.0 - state.beta1) * grad;
            v = state.beta2 * v + (1.0 - state.beta2) * grad * grad;
            const double m_hat = m / bias1;
            const double v_hat = v / bias2;
            p[k] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
        offset += p.size();
    }
}

}  // namespace qnas
