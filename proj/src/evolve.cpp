#include "qnas/evolve.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "qnas/errors.hpp"

namespace qnas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

}  // namespace

void validate_ga_config(const GAConfig& config) {
    if (config.population_size < 2)
        throw ConfigError("ga: population_size must be >= 2");
    if (config.elite_k <= 0 || config.elite_k >= config.population_size)
        throw ConfigError("ga: elite_k must satisfy 0 < elite_k < population_size");
    if (config.generations < 1) throw ConfigError("ga: generations must be >= 1");
    if (config.epochs_per_generation < 1) throw ConfigError("ga: epochs_per_generation must be >= 1");
    for (double rate : {config.rot_mutation_rate, config.fixed_gate_mutation_rate}) {
        if (rate < 0.0 || rate > 1.0) throw ConfigError("ga: mutation rates must be in [0, 1]");
    }
    if (config.param_perturb_sigma < 0.0) throw ConfigError("ga: param_perturb_sigma must be >= 0");
    if (config.max_genes < 1) throw ConfigError("ga: max_genes must be >= 1");
}

void validate_model_config(const ModelConfig& config) {
    if (config.n_qubits < 2 || config.n_qubits > kMaxQubits)
        throw ConfigError("model: n_qubits must be in [2, " + std::to_string(kMaxQubits) + "]");
    if (config.depth < 1) throw ConfigError("model: depth must be >= 1");
    if (config.hidden_width < 1) throw ConfigError("model: hidden_width must be >= 1");
    if (config.input_dim < 1) throw ConfigError("model: input_dim must be >= 1");
    if (!(config.angle_scale > 0.0)) throw ConfigError("model: angle_scale must be positive");
}

std::vector<Individual> init_population(const GAConfig& ga, const ModelConfig& model) {
    validate_ga_config(ga);
    validate_model_config(model);
    const CircuitGenome genome = build_initial_genome(model.n_qubits, model.depth);
    if (static_cast<int>(genome.genes.size()) > ga.max_genes)
        throw ConfigError("ga: initial genome has " + std::to_string(genome.genes.size()) +
                          " genes, above max_genes = " + std::to_string(ga.max_genes));

    std::vector<Individual> population;
    population.reserve(static_cast<std::size_t>(ga.population_size));
    for (int slot = 0; slot < ga.population_size; ++slot) {
        Rng rng(derive_seed(ga.master_seed, Stream::InitParams, 1,
                            static_cast<std::uint64_t>(slot)));
        Individual ind;
        ind.id = slot;
        ind.birth_generation = 1;
        ind.model = make_autoencoder(model.input_dim, model.hidden_width, genome,
                                     model.angle_scale, rng);
        population.push_back(std::move(ind));
    }
    return population;
}

std::vector<int> select_elite(const std::vector<Individual>& population, int k) {
    if (k <= 0 || k > static_cast<int>(population.size()))
        throw ContractError("select_elite: k out of range");
    std::vector<const Individual*> sorted;
    sorted.reserve(population.size());
    for (const auto& ind : population) {
        if (!ind.fitness.has_value())
            throw ContractError("select_elite: individual " + std::to_string(ind.id) +
                                " has no fitness");
        sorted.push_back(&ind);
    }
    std::sort(sorted.begin(), sorted.end(), [](const Individual* a, const Individual* b) {
        if (*a->fitness != *b->fitness) return *a->fitness < *b->fitness;
        return a->id < b->id;
    });
    std::vector<int> ids;
    ids.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) ids.push_back(sorted[static_cast<std::size_t>(i)]->id);
    return ids;
}

MutationResult mutate(const CircuitGenome& genome, std::span<const double> q_params, Rng& rng,
                      const GAConfig& config) {
    if (static_cast<int>(q_params.size()) != genome.n_params)
        throw ContractError("mutate: q_params size does not match the genome");
    MutationResult result;
    result.genome = genome;
    result.q_params.assign(q_params.begin(), q_params.end());

    // (a) axis replacement or qubit reassignment per rotation gene
    for (std::size_t i = 0; i < result.genome.genes.size(); ++i) {
        Gene& gene = result.genome.genes[i];
        if (!is_rotation(gene.kind)) continue;
        if (rng.uniform() >= config.rot_mutation_rate) continue;
        const auto slot = static_cast<std::size_t>(gene.param_slot);
        if (rng.coin()) {
            const GeneKind axes[3] = {GeneKind::RotX, GeneKind::RotY, GeneKind::RotZ};
            GeneKind choices[2];
            int n = 0;
            for (GeneKind axis : axes)
                if (axis != gene.kind) choices[n++] = axis;
            const GeneKind replacement = choices[rng.uniform_int(2)];
            result.log.push_back("replace_axis: gene " + std::to_string(i) + " " +
                                 gene_kind_name(gene.kind) + "->" + gene_kind_name(replacement) +
                                 " (slot " + std::to_string(gene.param_slot) + " reinit)");
            gene.kind = replacement;
        } else {
            const int new_qubit = rng.uniform_int(genome.n_qubits);
            result.log.push_back("reassign_qubit: gene " + std::to_string(i) + " q" +
                                 std::to_string(gene.qubit) + "->q" + std::to_string(new_qubit) +
                                 " (slot " + std::to_string(gene.param_slot) + " reinit)");
            gene.qubit = new_qubit;
        }
        result.q_params[slot] = rng.uniform(-0.1, 0.1);
    }

    // (b) gaussian parameter perturbation per rotation gene
    for (std::size_t i = 0; i < result.genome.genes.size(); ++i) {
        const Gene& gene = result.genome.genes[i];
        if (!is_rotation(gene.kind)) continue;
        if (rng.uniform() >= config.rot_mutation_rate) continue;
        const double delta = rng.gaussian(0.0, config.param_perturb_sigma);
        result.q_params[static_cast<std::size_t>(gene.param_slot)] += delta;
        result.log.push_back("perturb: slot " + std::to_string(gene.param_slot) + " += " +
                             std::to_string(delta));
    }

    // (c) insert one non-parameterized gate
    if (rng.uniform() < config.fixed_gate_mutation_rate) {
        if (static_cast<int>(result.genome.genes.size()) >= config.max_genes) {
            result.log.push_back("insert: skipped (max_genes cap)");
        } else {
            const auto pos = static_cast<std::size_t>(
                rng.uniform_int(static_cast<int>(result.genome.genes.size()) + 1));
            Gene gene;
            if (rng.coin()) {
                gene = Gene{GeneKind::Hadamard, rng.uniform_int(genome.n_qubits), -1, -1};
                result.log.push_back("insert: H(q" + std::to_string(gene.qubit) + ") at " +
                                     std::to_string(pos));
            } else {
                const int control = rng.uniform_int(genome.n_qubits);
                int target = rng.uniform_int(genome.n_qubits - 1);
                if (target >= control) ++target;
                gene = Gene{GeneKind::Cnot, target, control, -1};
                result.log.push_back("insert: CNOT(q" + std::to_string(control) + "->q" +
                                     std::to_string(target) + ") at " + std::to_string(pos));
            }
            result.genome.genes.insert(result.genome.genes.begin() + static_cast<std::ptrdiff_t>(pos),
                                       gene);
        }
    }

    // (d) delete one non-parameterized gene
    if (rng.uniform() < config.fixed_gate_mutation_rate) {
        std::vector<std::size_t> fixed;
        for (std::size_t i = 0; i < result.genome.genes.size(); ++i)
            if (!is_rotation(result.genome.genes[i].kind)) fixed.push_back(i);
        if (fixed.empty()) {
            result.log.push_back("delete: no-op (no non-parameterized genes)");
        } else {
            const std::size_t victim = fixed[static_cast<std::size_t>(
                rng.uniform_int(static_cast<int>(fixed.size())))];
            result.log.push_back("delete: " + gene_kind_name(result.genome.genes[victim].kind) +
                                 " at " + std::to_string(victim));
            result.genome.genes.erase(result.genome.genes.begin() +
                                      static_cast<std::ptrdiff_t>(victim));
        }
    }

    validate_genome(result.genome);
    return result;
}

std::vector<Individual> next_generation(const std::vector<Individual>& population,
                                        const GAConfig& ga, int new_generation) {
    const auto elite_ids = select_elite(population, ga.elite_k);
    auto by_id = [&](int id) -> const Individual& {
        for (const auto& ind : population)
            if (ind.id == id) return ind;
        throw ContractError("next_generation: id " + std::to_string(id) + " not in population");
    };

    int next_id = 0;
    for (const auto& ind : population) next_id = std::max(next_id, ind.id + 1);

    std::vector<Individual> next;
    next.reserve(population.size());
    for (int id : elite_ids) next.push_back(by_id(id));  // carried over bit-identical

    for (int slot = ga.elite_k; slot < ga.population_size; ++slot) {
        Rng rng(derive_seed(ga.master_seed, Stream::Mutation,
                            static_cast<std::uint64_t>(new_generation),
                            static_cast<std::uint64_t>(slot)));
        const Individual& parent = by_id(elite_ids[static_cast<std::size_t>(
            rng.uniform_int(static_cast<int>(elite_ids.size())))]);
        MutationResult mutated = mutate(parent.genome(), parent.model.q_params, rng, ga);

        Individual child;
        child.id = next_id++;
        child.parent_id = parent.id;
        child.birth_generation = new_generation;
        child.model = parent.model;  // warm start from the trained parent
        child.model.genome = std::move(mutated.genome);
        child.model.q_params = std::move(mutated.q_params);
        child.mutation_log = std::move(mutated.log);
        next.push_back(std::move(child));
    }
    return next;
}

TrainOutcome train_individual(Individual& individual, const DatasetView& train_view,
                              const GAConfig& ga, const TrainConfig& train, int generation) {
    TrainOutcome outcome;
    individual.adam = OptimizerState::for_model(individual.model, train.learning_rate);
    try {
        for (int epoch = 1; epoch <= ga.epochs_per_generation; ++epoch) {
            const auto start = std::chrono::steady_clock::now();
            const auto epoch_seed =
                derive_seed(ga.master_seed, Stream::Shuffle, static_cast<std::uint64_t>(generation),
                            static_cast<std::uint64_t>(individual.id),
                            static_cast<std::uint64_t>(epoch));
            double loss_sum = 0.0;
            for (const auto& batch : batches(train_view.size(), train.batch_size, epoch_seed)) {
                Gradients grads = Gradients::zeros_like(individual.model);
                for (std::size_t row : batch) {
                    const auto x = train_view.row(row);
                    const ForwardCache cache = forward(individual.model, x);
                    loss_sum += squared_error(cache.reconstruction, x);
                    grads.accumulate(backward(individual.model, cache, x));
                }
                grads.scale(1.0 / static_cast<double>(batch.size()));
                optimizer_step(individual.adam, individual.model.param_views(), grads.views());
            }
            outcome.epochs.push_back(EpochRecord{
                epoch, loss_sum / static_cast<double>(train_view.size()), elapsed_ms(start)});
        }
    } catch (const TrainingDivergence& e) {
        outcome.diverged = true;
        outcome.diagnostic = "generation " + std::to_string(generation) + ", individual " +
                             std::to_string(individual.id) + ": " + e.what();
    }
    return outcome;
}

double evaluate_loss(const HybridAutoencoder& model, const DatasetView& view) {
    if (view.size() == 0) throw ContractError("evaluate_loss: empty view");
    double total = 0.0;
    for (std::size_t i = 0; i < view.size(); ++i) {
        const auto x = view.row(i);
        total += squared_error(forward(model, x).reconstruction, x);
    }
    return total / static_cast<double>(view.size());
}

namespace {

// Trains every individual in `todo` (indices into the population), spreading
// the work over `threads` workers. Individuals are independent, so the only
// shared state is the work queue cursor.
std::vector<TrainOutcome> train_many(std::vector<Individual>& population,
                                     const std::vector<std::size_t>& todo,
                                     const DatasetView& train_view, const GAConfig& ga,
                                     const TrainConfig& train, int generation) {
    std::vector<TrainOutcome> outcomes(todo.size());
    unsigned threads = train.threads > 0 ? static_cast<unsigned>(train.threads)
                                         : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min(threads, static_cast<unsigned>(todo.size())));

    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t k = cursor.fetch_add(1);
            if (k >= todo.size()) return;
            outcomes[k] =
                train_individual(population[todo[k]], train_view, ga, train, generation);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return outcomes;
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (double x : xs) total += x;
    return total / static_cast<double>(xs.size());
}

}  // namespace

EvolutionReport run_evolution(const GAConfig& ga, const ModelConfig& model,
                              const TrainConfig& train, const DatasetSplits& splits,
                              EvolveObserver* observer, std::vector<Individual> initial_population,
                              int start_generation) {
    validate_ga_config(ga);
    validate_model_config(model);
    if (model.input_dim != kImagePixels)
        throw ContractError("run_evolution: model input_dim must match the image row width");
    if (splits.train.size() == 0 || splits.val.size() == 0)
        throw ContractError("run_evolution: train and val splits must be non-empty");
    if (start_generation > 1 && initial_population.empty())
        throw ContractError("run_evolution: resuming requires an initial population");

    EvolutionReport report;
    std::vector<Individual> population = std::move(initial_population);

    for (int generation = start_generation; generation <= ga.generations; ++generation) {
        const auto gen_start = std::chrono::steady_clock::now();
        population = generation == 1 ? init_population(ga, model)
                                     : next_generation(population, ga, generation);

        std::vector<std::size_t> todo;
        for (std::size_t i = 0; i < population.size(); ++i)
            if (!population[i].fitness.has_value()) todo.push_back(i);

        auto outcomes = train_many(population, todo, splits.train, ga, train, generation);
        report.training_sessions += static_cast<int>(todo.size());

        // Canonical record order: (individual id, epoch).
        std::vector<std::size_t> order(todo.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return population[todo[a]].id < population[todo[b]].id;
        });
        if (observer) {
            for (std::size_t k : order)
                for (const auto& record : outcomes[k].epochs)
                    observer->on_epoch(generation, population[todo[k]], record);
        }

        GenerationSummary summary;
        summary.generation = generation;
        summary.trained_count = static_cast<int>(todo.size());
        for (std::size_t k : order) {
            Individual& ind = population[todo[k]];
            const auto eval_start = std::chrono::steady_clock::now();
            if (outcomes[k].diverged) {
                ind.fitness = kInf;
                ++summary.diverged_count;
            } else {
                try {
                    ind.fitness = evaluate_loss(ind.model, splits.val);
                } catch (const TrainingDivergence&) {
                    ind.fitness = kInf;
                    ++summary.diverged_count;
                }
            }
            if (observer) observer->on_evaluated(generation, ind, elapsed_ms(eval_start));
        }
        // Elites keep their stored evaluation; report them too, sorted by id.
        if (observer) {
            std::vector<const Individual*> elites;
            for (const auto& ind : population)
                if (std::find_if(todo.begin(), todo.end(), [&](std::size_t i) {
                        return population[i].id == ind.id;
                    }) == todo.end())
                    elites.push_back(&ind);
            std::sort(elites.begin(), elites.end(),
                      [](const Individual* a, const Individual* b) { return a->id < b->id; });
            for (const Individual* ind : elites) observer->on_evaluated(generation, *ind, 0.0);
        }

        std::vector<double> val_all, val_trained, test_all, test_trained;
        const bool have_test = splits.test.size() > 0;
        for (const auto& ind : population) {
            const bool trained_now = ind.birth_generation == generation;
            if (std::isfinite(*ind.fitness)) {
                val_all.push_back(*ind.fitness);
                if (trained_now) val_trained.push_back(*ind.fitness);
            }
            if (have_test && std::isfinite(*ind.fitness)) {
                const double test_loss = evaluate_loss(ind.model, splits.test);
                test_all.push_back(test_loss);
                if (trained_now) test_trained.push_back(test_loss);
            }
        }
        summary.mean_val_all = mean_of(val_all);
        summary.mean_val_trained = mean_of(val_trained);
        summary.mean_test_all = mean_of(test_all);
        summary.mean_test_trained = mean_of(test_trained);

        const auto best_id = select_elite(population, 1)[0];
        for (const auto& ind : population)
            if (ind.id == best_id) {
                summary.best_id = ind.id;
                summary.best_val = *ind.fitness;
            }
        summary.best_so_far = summary.best_val;  // elites retain the historical best
        summary.wall_ms = elapsed_ms(gen_start);
        report.generations.push_back(summary);
        if (observer) observer->on_generation(generation, population, summary);
    }

    const int best_id = select_elite(population, 1)[0];
    for (auto& ind : population)
        if (ind.id == best_id) report.best = ind;
    return report;
}

ProbeReport run_entanglement_probe(const GAConfig& ga, const ModelConfig& model,
                                   const TrainConfig& train, const DatasetSplits& splits,
                                   int extra_cnots) {
    validate_model_config(model);
    CircuitGenome baseline = build_initial_genome(model.n_qubits, model.depth);
    CircuitGenome entangled = baseline;
    Rng wiring(derive_seed(ga.master_seed, Stream::Probe, 0));
    for (int i = 0; i < extra_cnots; ++i) {
        const int control = wiring.uniform_int(model.n_qubits);
        int target = wiring.uniform_int(model.n_qubits - 1);
        if (target >= control) ++target;
        entangled.genes.push_back(Gene{GeneKind::Cnot, target, control, -1});
    }

    // Identical parameter init and batch schedule for the pair: the only
    // difference between the runs is the appended CNOTs.
    auto train_one = [&](const CircuitGenome& genome) {
        Rng rng(derive_seed(ga.master_seed, Stream::Probe, 1));
        Individual ind;
        ind.id = 0;
        ind.model =
            make_autoencoder(model.input_dim, model.hidden_width, genome, model.angle_scale, rng);
        const auto outcome = train_individual(ind, splits.train, ga, train, 0);
        if (outcome.diverged) return std::numeric_limits<double>::infinity();
        return evaluate_loss(ind.model, splits.val);
    };

    ProbeReport report;
    report.extra_cnots = extra_cnots;
    report.epochs = ga.epochs_per_generation;
    report.baseline_val_loss = train_one(baseline);
    report.entangled_val_loss = train_one(entangled);
    return report;
}

}  // namespace qnas
