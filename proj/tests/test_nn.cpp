#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "qnas/circuit.hpp"
#include "qnas/errors.hpp"
#include "qnas/nn.hpp"
#include "qnas/rng.hpp"

using namespace qnas;

namespace {

HybridAutoencoder tiny_model(std::uint64_t seed) {
    Rng rng(seed);
    return make_autoencoder(8, 6, build_initial_genome(2, 1), std::numbers::pi, rng);
}

std::vector<double> random_input(Rng& rng, int dim) {
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (auto& v : x) v = rng.uniform();
    return x;
}

double sample_loss(const HybridAutoencoder& model, const std::vector<double>& x) {
    return squared_error(forward(model, x).reconstruction, x);
}

void zero_weights(HybridAutoencoder& model) {
    for (auto view : model.param_views())
        for (auto& p : view) p = 0.0;
}

bool close_rel(double got, double want, double rel, double floor) {
    return std::abs(got - want) <= std::max(rel * std::max(std::abs(got), std::abs(want)), floor);
}

}  // namespace

TEST_CASE("forward produces sigmoid-bounded reconstructions") {
    Rng rng(3);
    auto model = tiny_model(17);
    const auto x = random_input(rng, 8);
    const auto cache = forward(model, x);
    REQUIRE(cache.reconstruction.size() == 8);
    for (double v : cache.reconstruction) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    CHECK(cache.latent.size() == 2);
}

TEST_CASE("zero-weight model maps everything to one half") {
    Rng rng(4);
    auto model = tiny_model(18);
    zero_weights(model);
    const auto x = random_input(rng, 8);
    const auto cache = forward(model, x);
    // H then RY(0) leaves <Z> = 0 on every qubit.
    for (double v : cache.latent) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
    for (double v : cache.reconstruction) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("forward is pure") {
    Rng rng(5);
    auto model = tiny_model(19);
    const auto x = random_input(rng, 8);
    const auto first = forward(model, x);
    const auto second = forward(model, x);
    CHECK(first.reconstruction == second.reconstruction);
    CHECK(first.latent == second.latent);
}

TEST_CASE("forward flags non-finite intermediates as divergence") {
    Rng rng(6);
    auto model = tiny_model(20);
    model.enc1.weights[0] = std::numeric_limits<double>::quiet_NaN();
    const auto x = random_input(rng, 8);
    CHECK_THROWS_AS(forward(model, x), TrainingDivergence);
}

TEST_CASE("mse_loss arithmetic") {
    std::vector<double> x(784, 0.0);
    x[0] = 1.0;
    x[1] = 1.0;
    const std::vector<double> zeros(784, 0.0);
    CHECK(mse_loss({x}, {x}) == 0.0);
    CHECK(mse_loss({zeros}, {x}) == doctest::Approx(2.0).epsilon(1e-15));

    // Batch loss is the mean of per-sample losses.
    std::vector<double> y(784, 0.0);
    y[2] = 0.5;
    const double batch = mse_loss({zeros, zeros}, {x, y});
    const double mean = (mse_loss({zeros}, {x}) + mse_loss({zeros}, {y})) / 2.0;
    CHECK(batch == doctest::Approx(mean).epsilon(1e-15));

    CHECK_THROWS_AS(mse_loss({}, {}), ContractError);
}

TEST_CASE("backward matches finite differences on every parameter") {
    Rng rng(7);
    auto model = tiny_model(21);
    const auto x = random_input(rng, 8);
    const auto cache = forward(model, x);
    const auto grads = backward(model, cache, x);

    const double h = 1e-4;
    auto grad_views = grads.views();
    auto param_views = model.param_views();
    for (std::size_t block = 0; block < param_views.size(); ++block) {
        for (std::size_t k = 0; k < param_views[block].size(); ++k) {
            double& p = param_views[block][k];
            const double orig = p;
            p = orig + h;
            const double plus = sample_loss(model, x);
            p = orig - h;
            const double minus = sample_loss(model, x);
            p = orig;
            const double fd = (plus - minus) / (2 * h);
            CHECK_MESSAGE(close_rel(grad_views[block][k], fd, 1e-3, 1e-7),
                          "block ", block, " index ", k, " analytic ", grad_views[block][k],
                          " fd ", fd);
        }
    }
}

TEST_CASE("perfect reconstruction yields zero gradients") {
    auto model = tiny_model(22);
    zero_weights(model);
    const std::vector<double> x(8, 0.5);  // reconstruction is exactly 0.5 everywhere
    const auto cache = forward(model, x);
    const auto grads = backward(model, cache, x);
    for (auto view : grads.views())
        for (double g : view) CHECK(std::abs(g) < 1e-9);
}

TEST_CASE("batch gradient equals the mean of per-sample gradients") {
    Rng rng(8);
    auto model = tiny_model(23);
    std::vector<std::vector<double>> xs;
    for (int i = 0; i < 3; ++i) xs.push_back(random_input(rng, 8));

    Gradients batch = Gradients::zeros_like(model);
    for (const auto& x : xs) batch.accumulate(backward(model, forward(model, x), x));
    batch.scale(1.0 / 3.0);

    Gradients mean = Gradients::zeros_like(model);
    for (const auto& x : xs) {
        auto g = backward(model, forward(model, x), x);
        g.scale(1.0 / 3.0);
        mean.accumulate(g);
    }
    auto bv = batch.views();
    auto mv = mean.views();
    for (std::size_t block = 0; block < bv.size(); ++block)
        for (std::size_t k = 0; k < bv[block].size(); ++k)
            CHECK(bv[block][k] == doctest::Approx(mv[block][k]).epsilon(1e-12));
}

TEST_CASE("optimizer holds still on zero gradients and counts steps") {
    auto model = tiny_model(24);
    auto state = OptimizerState::for_model(model, 1e-3);
    const auto before = model.q_params;
    const auto zero = Gradients::zeros_like(model);
    optimizer_step(state, model.param_views(), zero.views());
    CHECK(state.step_count == 1);
    optimizer_step(state, model.param_views(), zero.views());
    CHECK(state.step_count == 2);
    CHECK(model.q_params == before);
}

TEST_CASE("optimizer rejects non-finite gradients") {
    auto model = tiny_model(25);
    auto state = OptimizerState::for_model(model, 1e-3);
    auto bad = Gradients::zeros_like(model);
    bad.enc1_w[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(optimizer_step(state, model.param_views(), bad.views()), TrainingDivergence);
}

TEST_CASE("optimizer descends a quadratic") {
    std::vector<double> w{1.0};
    OptimizerState state;
    state.learning_rate = 1e-3;
    state.m.assign(1, 0.0);
    state.v.assign(1, 0.0);
    double prev = w[0] * w[0];
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> grad{2.0 * w[0]};
        optimizer_step(state, {std::span<double>(w)}, {std::span<const double>(grad)});
        const double loss = w[0] * w[0];
        CHECK(loss < prev);
        prev = loss;
    }
    CHECK(state.step_count == 100);
}

TEST_CASE("tiny model learns a one-parameter dataset") {
    // 16 samples on a segment between two fixed corners; the bottleneck only
    // needs to encode the interpolation parameter.
    Rng data_rng(95);
    std::vector<double> a(8), b(8);
    for (auto& v : a) v = data_rng.uniform(0.1, 0.9);
    for (auto& v : b) v = data_rng.uniform(0.1, 0.9);
    std::vector<std::vector<double>> xs;
    for (int j = 0; j < 16; ++j) {
        const double t = static_cast<double>(j) / 15.0;
        std::vector<double> x(8);
        for (int k = 0; k < 8; ++k)
            x[static_cast<std::size_t>(k)] = t * a[static_cast<std::size_t>(k)] +
                                             (1 - t) * b[static_cast<std::size_t>(k)];
        xs.push_back(std::move(x));
    }

    auto model = tiny_model(26);
    auto state = OptimizerState::for_model(model, 0.02);
    auto epoch_loss = [&] {
        double total = 0.0;
        for (const auto& x : xs) total += sample_loss(model, x);
        return total / static_cast<double>(xs.size());
    };
    const double initial = epoch_loss();
    for (int step = 0; step < 200; ++step) {
        Gradients grads = Gradients::zeros_like(model);
        for (const auto& x : xs) grads.accumulate(backward(model, forward(model, x), x));
        grads.scale(1.0 / static_cast<double>(xs.size()));
        optimizer_step(state, model.param_views(), grads.views());
    }
    const double final_loss = epoch_loss();
    CHECK(final_loss <= 0.5 * initial);
}
