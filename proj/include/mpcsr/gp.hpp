#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "mpcsr/expr.hpp"
#include "mpcsr/rng.hpp"

namespace mpcsr {

// Fitness assigned when evaluation is non-finite or implausible; loses every
// tournament.
inline constexpr double kWorstFitness = std::numeric_limits<double>::infinity();

struct GpConfig {
    int population_size = 1000;
    int tournament_size = 5;
    double mutation_prob = 0.25;
    double crossover_prob = 0.95;
    int min_subtree_depth = 0;
    int max_subtree_depth = 2;
    int max_depth = 15;
    int max_length = 100;
    int max_generations = 50;
    int elitism_count = 1;
    int n_vars = 2;
    double const_min = -1.0;
    double const_max = 1.0;
    double target_mse = 1e-10;
    u64 rng_seed = 1;

    void validate() const;
};

struct Individual {
    ExprPtr tree;
    std::optional<double> fitness;
};

struct Dataset {
    MatrixXd x;  // m rows, n_vars cols
    VectorXd y;

    int n_vars() const { return static_cast<int>(x.cols()); }
    Eigen::Index rows() const { return x.rows(); }
};

struct GenerationStats {
    double best_fitness;
    double mean_fitness;  // over finite fitness values
};

struct RunResult {
    Individual best;
    std::vector<GenerationStats> history;  // entry 0 is the initial population
    int generations = 0;
};

// Evaluates one generation's new trees in a single batch.
using BatchFitness = std::function<std::vector<double>(const std::vector<ExprPtr>&)>;

ExprPtr random_full_tree(const GpConfig& config, int target_depth, Rng& rng);
std::vector<Individual> init_population(const GpConfig& config, Rng& rng);

double fitness_mse(const Expr& tree, const Dataset& data);
BatchFitness plaintext_oracle(Dataset data);

double metric_rmse(double mse);
double metric_r2(double mse, double sst_over_m);  // throws DegenerateTarget
double sst_over_m(const VectorXd& y);

const Individual& tournament_select(const std::vector<Individual>& pop, int k, Rng& rng);

struct CrossoverOutcome {
    Individual first, second;
    bool first_rejected = false;  // offspring broke a limit; parent returned
    bool second_rejected = false;
};
CrossoverOutcome crossover_ex(const Individual& a, const Individual& b, const GpConfig& config,
                              Rng& rng);
std::pair<Individual, Individual> crossover(const Individual& a, const Individual& b,
                                            const GpConfig& config, Rng& rng);
Individual mutate(const Individual& a, const GpConfig& config, Rng& rng);

RunResult evolve(const GpConfig& config, const BatchFitness& oracle, Rng& rng);

}  // namespace mpcsr
