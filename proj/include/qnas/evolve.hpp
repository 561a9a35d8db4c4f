#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qnas/data.hpp"
#include "qnas/nn.hpp"
#include "qnas/rng.hpp"

namespace qnas {

struct GAConfig {
    int population_size = 10;
    int elite_k = 3;
    int generations = 5;
    int epochs_per_generation = 10;
    double rot_mutation_rate = 0.2;
    double fixed_gate_mutation_rate = 0.2;
    double param_perturb_sigma = 0.1;  // radians
    int max_genes = 64;
    std::uint64_t master_seed = 1;
};

struct ModelConfig {
    int n_qubits = 4;
    int depth = 2;
    int hidden_width = 64;
    double angle_scale = std::numbers::pi;
    int input_dim = kImagePixels;
};

struct TrainConfig {
    std::size_t batch_size = 256;
    double learning_rate = 1e-3;
    int threads = 0;  // 0 = hardware concurrency
};

void validate_ga_config(const GAConfig& config);
void validate_model_config(const ModelConfig& config);

// One population member. The genome lives inside the model; fitness is the
// validation loss (+infinity when training diverged).
struct Individual {
    int id = 0;
    HybridAutoencoder model;
    std::optional<double> fitness;
    std::optional<int> parent_id;
    int birth_generation = 1;
    std::vector<std::string> mutation_log;
    OptimizerState adam;  // state left by the last training session

    const CircuitGenome& genome() const { return model.genome; }
};

// population_size founders, ids 0..n-1, identical initial ansatz, parameters
// drawn from per-individual streams derived from the master seed.
std::vector<Individual> init_population(const GAConfig& ga, const ModelConfig& model);

// k ids with the smallest fitness, ascending; ties keep the smaller id.
// Throws ContractError if any individual is unevaluated.
std::vector<int> select_elite(const std::vector<Individual>& population, int k);

struct MutationResult {
    CircuitGenome genome;
    std::vector<double> q_params;
    std::vector<std::string> log;
};

// Applies, independently:
//  (a) per rotation gene @ rot_mutation_rate: coin flip between replacing the
//      axis (uniformly different) and reassigning the target qubit
//      (uniformly random); the gene's parameter is reinitialized either way;
//  (b) per rotation gene @ rot_mutation_rate: gaussian parameter perturbation;
//  (c) @ fixed_gate_mutation_rate: insert one H or CNOT (coin flip) at a
//      uniform position; CNOT endpoints are a uniform ordered distinct pair;
//      skipped (and logged) at the max_genes cap;
//  (d) @ fixed_gate_mutation_rate: delete one uniformly chosen
//      non-parameterized gene, a logged no-op when none exist.
// Rotation-gene count and n_params never change.
MutationResult mutate(const CircuitGenome& genome, std::span<const double> q_params, Rng& rng,
                      const GAConfig& config);

// elite_k individuals carried over bit-identical; the rest replaced by
// mutated copies of uniformly drawn elites with fresh ids, cleared fitness,
// inherited trained parameters (minus slots reinitialized by mutation).
std::vector<Individual> next_generation(const std::vector<Individual>& population,
                                        const GAConfig& ga, int new_generation);

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double wall_ms = 0.0;
};

struct TrainOutcome {
    std::vector<EpochRecord> epochs;
    bool diverged = false;
    std::string diagnostic;
};

// epochs_per_generation epochs of minibatch training; batch shuffles are
// keyed by (master_seed, generation, individual id, epoch). On divergence the
// outcome reports it instead of throwing.
TrainOutcome train_individual(Individual& individual, const DatasetView& train_view,
                              const GAConfig& ga, const TrainConfig& train, int generation);

// Mean squared reconstruction error over the view, in index order.
double evaluate_loss(const HybridAutoencoder& model, const DatasetView& view);

struct GenerationSummary {
    int generation = 0;
    int best_id = 0;
    double best_val = 0.0;
    double best_so_far = 0.0;
    double mean_val_all = 0.0;      // finite fitnesses only
    double mean_val_trained = 0.0;  // individuals trained this generation
    double mean_test_all = 0.0;     // NaN when there is no test split
    double mean_test_trained = 0.0;
    int trained_count = 0;
    int diverged_count = 0;
    double wall_ms = 0.0;
};

class EvolveObserver {
public:
    virtual ~EvolveObserver() = default;
    virtual void on_epoch(int generation, const Individual& individual,
                          const EpochRecord& record) {
        (void)generation, (void)individual, (void)record;
    }
    virtual void on_evaluated(int generation, const Individual& individual, double wall_ms) {
        (void)generation, (void)individual, (void)wall_ms;
    }
    virtual void on_generation(int generation, const std::vector<Individual>& population,
                               const GenerationSummary& summary) {
        (void)generation, (void)population, (void)summary;
    }
};

struct EvolutionReport {
    std::vector<GenerationSummary> generations;
    Individual best;
    int training_sessions = 0;
};

// Algorithm: generation 1 trains every founder; later generations mutate the
// non-elite slots and train only those offspring; validation loss is the
// fitness; a diverged individual scores +infinity and the run continues.
// Pass a checkpointed population plus start_generation = (checkpoint
// generation + 1) to resume.
EvolutionReport run_evolution(const GAConfig& ga, const ModelConfig& model,
                              const TrainConfig& train, const DatasetSplits& splits,
                              EvolveObserver* observer = nullptr,
                              std::vector<Individual> initial_population = {},
                              int start_generation = 1);

struct ProbeReport {
    int extra_cnots = 0;
    double baseline_val_loss = 0.0;
    double entangled_val_loss = 0.0;
    int epochs = 0;
};

// Trains the initial ansatz against the same ansatz with extra random CNOTs
// appended, same parameter init and batch schedule, and reports both
// validation losses.
ProbeReport run_entanglement_probe(const GAConfig& ga, const ModelConfig& model,
                                   const TrainConfig& train, const DatasetSplits& splits,
                                   int extra_cnots = 12);

}  // namespace qnas
