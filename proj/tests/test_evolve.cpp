#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "qnas/errors.hpp"
#include "qnas/evolve.hpp"
#include "qnas/rng.hpp"
#include "test_util.hpp"

using namespace qnas;

namespace {

GAConfig small_ga() {
    GAConfig ga;
    ga.population_size = 4;
    ga.elite_k = 2;
    ga.generations = 3;
    ga.epochs_per_generation = 1;
    ga.master_seed = 77;
    return ga;
}

ModelConfig small_model() {
    ModelConfig model;
    model.n_qubits = 2;
    model.depth = 1;
    model.hidden_width = 6;
    return model;
}

TrainConfig fast_train() {
    TrainConfig train;
    train.batch_size = 8;
    train.learning_rate = 1e-2;
    return train;
}

// Smooth low-rank images so a small autoencoder has something to learn.
ImageDataset structured_dataset(std::size_t count, std::uint64_t seed) {
    ImageDataset dataset;
    dataset.count = count;
    dataset.pixels.resize(count * kImagePixels);
    Rng rng(seed);
    for (std::size_t j = 0; j < count; ++j) {
        const double phase = rng.uniform(0.0, 2 * M_PI);
        const double freq = rng.uniform(0.5, 2.0);
        for (int r = 0; r < kImageRows; ++r)
            for (int c = 0; c < kImageCols; ++c) {
                const double v =
                    0.5 + 0.45 * std::sin(freq * (r + c) / 8.0 + phase);
                dataset.pixels[j * kImagePixels + static_cast<std::size_t>(r * kImageCols + c)] = v;
            }
    }
    return dataset;
}

DatasetSplits make_splits(const ImageDataset& dataset) {
    SplitSpec spec;
    spec.train_fraction = 0.6;
    spec.val_fraction = 0.2;
    spec.test_fraction = 0.2;
    spec.shuffle_seed = 5;
    return split(dataset, spec);
}

void assign_fitness(std::vector<Individual>& population, const std::vector<double>& values) {
    REQUIRE(population.size() == values.size());
    for (std::size_t i = 0; i < population.size(); ++i) population[i].fitness = values[i];
}

}  // namespace

TEST_CASE("init_population builds ten founders with eight parameters each") {
    GAConfig ga;  // paper defaults
    ModelConfig model;
    const auto population = init_population(ga, model);
    REQUIRE(population.size() == 10);
    for (std::size_t i = 0; i < population.size(); ++i) {
        CHECK(population[i].id == static_cast<int>(i));
        CHECK(population[i].genome().n_params == 8);
        CHECK_FALSE(population[i].parent_id.has_value());
        CHECK_FALSE(population[i].fitness.has_value());
        CHECK(population[i].birth_generation == 1);
    }
    // same master seed -> identical founders; different individuals differ
    const auto again = init_population(ga, model);
    for (std::size_t i = 0; i < population.size(); ++i) {
        CHECK(population[i].model.q_params == again[i].model.q_params);
        CHECK(population[i].model.enc1.weights == again[i].model.enc1.weights);
    }
    CHECK(population[0].model.q_params != population[1].model.q_params);
}

TEST_CASE("select_elite orders by fitness with id tie-breaks") {
    auto population = init_population(small_ga(), small_model());
    auto ga = small_ga();
    ga.population_size = 10;
    ga.elite_k = 3;
    ModelConfig model = small_model();
    population = init_population(ga, model);

    assign_fitness(population, {0.5, 0.2, 0.9, 0.1, 0.4, 0.3, 0.8, 0.7, 0.6, 1.0});
    CHECK(select_elite(population, 3) == std::vector<int>{3, 1, 5});

    // tie at the boundary: ids 2 and 7 share fitness, the older id wins
    assign_fitness(population, {0.1, 0.2, 0.3, 0.9, 0.9, 0.9, 0.9, 0.3, 0.9, 0.9});
    CHECK(select_elite(population, 3) == std::vector<int>{0, 1, 2});
    CHECK(select_elite(population, 4) == std::vector<int>{0, 1, 2, 7});

    // k = population_size - 1 drops exactly the single worst individual
    assign_fitness(population, {0.5, 0.2, 0.9, 0.1, 0.4, 0.3, 0.8, 0.7, 0.6, 1.0});
    const auto almost_all = select_elite(population, 9);
    CHECK(almost_all.size() == 9);
    CHECK(std::find(almost_all.begin(), almost_all.end(), 9) == almost_all.end());

    population[4].fitness.reset();
    CHECK_THROWS_AS(select_elite(population, 3), ContractError);
}

TEST_CASE("zero-rate mutation is the identity with an empty log") {
    Rng rng(1);
    auto ga = small_ga();
    ga.rot_mutation_rate = 0.0;
    ga.fixed_gate_mutation_rate = 0.0;
    ga.param_perturb_sigma = 0.0;
    const auto genome = build_initial_genome(4, 2);
    const std::vector<double> params(8, 0.25);
    const auto result = mutate(genome, params, rng, ga);
    CHECK(result.genome == genome);
    CHECK(result.q_params == params);
    CHECK(result.log.empty());
}

TEST_CASE("mutation preserves rotation-gene count and n_params") {
    GAConfig ga;  // default 20% rates
    ga.max_genes = 64;
    Rng rng(2);
    CircuitGenome genome = build_initial_genome(4, 2);
    std::vector<double> params(8, 0.0);
    for (int trial = 0; trial < 1000; ++trial) {
        auto result = mutate(genome, params, rng, ga);
        const auto counts = count_gates(result.genome);
        CHECK(counts.rx + counts.ry + counts.rz == 8);
        CHECK(result.genome.n_params == 8);
        CHECK(static_cast<int>(result.genome.genes.size()) <= ga.max_genes);
        genome = std::move(result.genome);  // walk the mutation chain
        params = std::move(result.q_params);
    }
}

TEST_CASE("rotation mutation count matches the binomial mean") {
    GAConfig ga;
    Rng rng(3);
    const auto genome = build_initial_genome(4, 2);  // 8 rotation genes
    const std::vector<double> params(8, 0.0);
    long total = 0;
    const int trials = 1000;
    for (int trial = 0; trial < trials; ++trial) {
        const auto result = mutate(genome, params, rng, ga);
        for (const auto& entry : result.log)
            if (entry.rfind("replace_axis", 0) == 0 || entry.rfind("reassign_qubit", 0) == 0)
                ++total;
    }
    const double mean = static_cast<double>(total) / trials;
    CHECK(mean > 1.6 - 0.25);
    CHECK(mean < 1.6 + 0.25);
}

TEST_CASE("insertion respects the gene cap and deletion handles absence") {
    auto ga = small_ga();
    ga.rot_mutation_rate = 0.0;
    ga.fixed_gate_mutation_rate = 1.0;  // force (c) and (d) every time

    // at the cap: insertion must be skipped and logged
    ga.max_genes = 3;
    Rng rng(4);
    const auto genome = build_initial_genome(2, 1);  // exactly 3 genes
    const std::vector<double> params(2, 0.0);
    const auto capped = mutate(genome, params, rng, ga);
    bool skip_logged = false;
    for (const auto& entry : capped.log)
        if (entry.find("skipped (max_genes") != std::string::npos) skip_logged = true;
    CHECK(skip_logged);

    // no non-parameterized genes and a cap that blocks inserting one:
    // deletion is a logged no-op
    CircuitGenome rotations_only;
    rotations_only.n_qubits = 2;
    rotations_only.n_params = 2;
    rotations_only.genes = {Gene{GeneKind::RotY, 0, -1, 0}, Gene{GeneKind::RotX, 1, -1, 1}};
    ga.max_genes = 2;
    const auto result = mutate(rotations_only, params, rng, ga);
    CHECK(result.genome == rotations_only);
    bool noop_logged = false;
    for (const auto& entry : result.log)
        if (entry.find("no-op") != std::string::npos) noop_logged = true;
    CHECK(noop_logged);
}

TEST_CASE("inserted CNOTs use distinct endpoints and reach non-adjacent pairs") {
    GAConfig ga;
    ga.rot_mutation_rate = 0.0;
    ga.fixed_gate_mutation_rate = 1.0;
    ga.max_genes = 512;
    Rng rng(5);
    CircuitGenome genome = build_initial_genome(4, 1);
    std::vector<double> params(4, 0.0);
    bool saw_non_adjacent = false;
    for (int trial = 0; trial < 200; ++trial) {
        const auto result = mutate(genome, params, rng, ga);
        for (const auto& gene : result.genome.genes) {
            if (gene.kind != GeneKind::Cnot) continue;
            CHECK(gene.control != gene.qubit);
            if (std::abs(gene.control - gene.qubit) > 1) saw_non_adjacent = true;
        }
    }
    CHECK(saw_non_adjacent);
}

TEST_CASE("next_generation carries elites bit-identical and fills with offspring") {
    auto ga = small_ga();
    ga.population_size = 10;
    ga.elite_k = 3;
    ModelConfig model = small_model();
    auto population = init_population(ga, model);
    assign_fitness(population, {0.5, 0.2, 0.9, 0.1, 0.4, 0.3, 0.8, 0.7, 0.6, 1.0});
    const auto elite_ids = select_elite(population, 3);

    const auto next = next_generation(population, ga, 2);
    REQUIRE(next.size() == 10);

    int carried = 0, offspring = 0;
    std::set<int> seen_ids;
    for (const auto& ind : next) {
        CHECK(seen_ids.insert(ind.id).second);
        CHECK(ind.genome().n_params == population[0].genome().n_params);
        if (ind.birth_generation == 2) {
            ++offspring;
            CHECK(ind.id >= 10);  // fresh ids
            CHECK_FALSE(ind.fitness.has_value());
            REQUIRE(ind.parent_id.has_value());
            CHECK(std::find(elite_ids.begin(), elite_ids.end(), *ind.parent_id) !=
                  elite_ids.end());
            CHECK((!ind.mutation_log.empty() ||
                   ind.genome() == population[static_cast<std::size_t>(*ind.parent_id)].genome()));
        } else {
            ++carried;
            const auto& original = population[static_cast<std::size_t>(ind.id)];
            CHECK(ind.fitness == original.fitness);
            CHECK(ind.genome() == original.genome());
            CHECK(ind.model.q_params == original.model.q_params);
            CHECK(ind.model.enc1.weights == original.model.enc1.weights);
            CHECK(ind.model.dec2.weights == original.model.dec2.weights);
        }
    }
    CHECK(carried == 3);
    CHECK(offspring == 7);
}

TEST_CASE("training marks divergence instead of throwing") {
    auto ga = small_ga();
    ModelConfig model = small_model();
    auto population = init_population(ga, model);
    const auto dataset = structured_dataset(20, 8);
    const auto splits = make_splits(dataset);

    population[0].model.enc1.weights[0] = std::numeric_limits<double>::quiet_NaN();
    const auto outcome =
        train_individual(population[0], splits.train, ga, fast_train(), 1);
    CHECK(outcome.diverged);
    CHECK(outcome.diagnostic.find("individual 0") != std::string::npos);
}

TEST_CASE("run_evolution keeps its bookkeeping straight") {
    const auto ga = small_ga();
    const auto model = small_model();
    const auto dataset = structured_dataset(40, 9);
    const auto splits = make_splits(dataset);

    struct Counter : EvolveObserver {
        int epochs = 0;
        int evals = 0;
        std::vector<std::size_t> population_sizes;
        void on_epoch(int, const Individual&, const EpochRecord&) override { ++epochs; }
        void on_evaluated(int, const Individual&, double) override { ++evals; }
        void on_generation(int, const std::vector<Individual>& pop,
                           const GenerationSummary&) override {
            population_sizes.push_back(pop.size());
        }
    } counter;

    const auto report = run_evolution(ga, model, fast_train(), splits, &counter);

    // pop + (gens - 1) * (pop - elite_k) training sessions
    CHECK(report.training_sessions == 4 + 2 * 2);
    CHECK(counter.epochs == report.training_sessions * ga.epochs_per_generation);
    CHECK(counter.evals == ga.population_size * ga.generations);
    CHECK(counter.population_sizes == std::vector<std::size_t>{4, 4, 4});

    REQUIRE(report.generations.size() == 3);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& summary : report.generations) {
        CHECK(summary.best_so_far <= prev + 1e-18);
        prev = summary.best_so_far;
        CHECK(std::isfinite(summary.mean_test_all));  // test split present
    }
    CHECK(report.best.fitness.has_value());
    CHECK(*report.best.fitness == report.generations.back().best_so_far);
}

TEST_CASE("identical seeds reproduce the run exactly, regardless of threads") {
    const auto ga = small_ga();
    const auto model = small_model();
    const auto dataset = structured_dataset(40, 10);
    const auto splits = make_splits(dataset);

    auto one = fast_train();
    one.threads = 1;
    auto two = fast_train();
    two.threads = 2;

    const auto a = run_evolution(ga, model, one, splits);
    const auto b = run_evolution(ga, model, two, splits);

    REQUIRE(a.generations.size() == b.generations.size());
    for (std::size_t g = 0; g < a.generations.size(); ++g) {
        CHECK(a.generations[g].best_id == b.generations[g].best_id);
        CHECK(a.generations[g].best_val == b.generations[g].best_val);
        CHECK(a.generations[g].mean_val_all == b.generations[g].mean_val_all);
    }
    CHECK(a.best.id == b.best.id);
    CHECK(a.best.genome() == b.best.genome());
    CHECK(a.best.model.q_params == b.best.model.q_params);
    CHECK(a.best.model.enc1.weights == b.best.model.enc1.weights);
}

TEST_CASE("elite genomes of one generation are the top genomes of the previous") {
    auto ga = small_ga();
    ga.generations = 3;
    const auto model = small_model();
    const auto dataset = structured_dataset(40, 11);
    const auto splits = make_splits(dataset);

    struct Tracker : EvolveObserver {
        std::vector<std::vector<Individual>> populations;
        void on_generation(int, const std::vector<Individual>& pop,
                           const GenerationSummary&) override {
            populations.push_back(pop);
        }
    } tracker;
    run_evolution(ga, model, fast_train(), splits, &tracker);

    for (std::size_t g = 1; g < tracker.populations.size(); ++g) {
        const auto top_ids = select_elite(tracker.populations[g - 1], ga.elite_k);
        for (int id : top_ids) {
            bool found = false;
            for (const auto& ind : tracker.populations[g])
                if (ind.id == id) found = true;
            CHECK(found);
        }
    }
}

TEST_CASE("the entanglement probe reports both losses") {
    auto ga = small_ga();
    ga.epochs_per_generation = 1;
    const auto model = small_model();
    const auto dataset = structured_dataset(30, 12);
    const auto splits = make_splits(dataset);

    const auto report = run_entanglement_probe(ga, model, fast_train(), splits, 6);
    CHECK(report.extra_cnots == 6);
    CHECK(std::isfinite(report.baseline_val_loss));
    CHECK(std::isfinite(report.entangled_val_loss));
    CHECK(report.baseline_val_loss > 0.0);
    CHECK(report.entangled_val_loss > 0.0);
}
