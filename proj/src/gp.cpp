#include "mpcsr/gp.hpp"

#include <algorithm>
#include <cmath>

namespace mpcsr {

void GpConfig::validate() const {
    if (population_size <= 0 || max_depth <= 0 || max_length <= 0 || max_generations < 0)
        throw MpcError("size limits must be positive");
    if (tournament_size <= 0 || tournament_size > population_size)
        throw MpcError("tournament_size must be in [1, population_size]");
    if (mutation_prob < 0 || mutation_prob > 1 || crossover_prob < 0 || crossover_prob > 1)
        throw MpcError("probabilities must be in [0, 1]");
    if (min_subtree_depth < 0 || max_subtree_depth < min_subtree_depth)
        throw MpcError("bad subtree depth range");
    if (n_vars < 1) throw MpcError("n_vars must be >= 1");
    if (elitism_count < 0 || elitism_count > population_size) throw MpcError("bad elitism_count");
}

namespace {

constexpr Op kFunctions[] = {Op::Add, Op::Sub, Op::Mul, Op::Sin, Op::Cos};

ExprPtr random_leaf(const GpConfig& config, Rng& rng) {
    // one slot for an ephemeral constant next to the variables
    const u64 pick = rng.below(static_cast<u64>(config.n_vars) + 1);
    if (pick < static_cast<u64>(config.n_vars)) return Expr::variable(static_cast<int>(pick) + 1);
    return Expr::constant(rng.uniform(config.const_min, config.const_max));
}

bool within_limits(const Expr& e, const GpConfig& config) {
    return depth(e) <= config.max_depth && node_count(e) <= config.max_length;
}

}  // namespace

ExprPtr random_full_tree(const GpConfig& config, int target_depth, Rng& rng) {
    if (target_depth <= 0) return random_leaf(config, rng);
    const Op op = kFunctions[rng.below(std::size(kFunctions))];
    ExprPtr left = random_full_tree(config, target_depth - 1, rng);
    if (is_unary(op)) return Expr::unary(op, std::move(left));
    ExprPtr right = random_full_tree(config, target_depth - 1, rng);
    return Expr::binary(op, std::move(left), std::move(right));
}

std::vector<Individual> init_population(const GpConfig& config, Rng& rng) {
    config.validate();
    std::vector<Individual> pop;
    pop.reserve(static_cast<std::size_t>(config.population_size));
    // Full method: leaves only at the drawn target depth
    const int lo = 2;
    const int hi = config.max_subtree_depth + 2;
    for (int i = 0; i < config.population_size; ++i) {
        const int d = lo + static_cast<int>(rng.below(static_cast<u64>(hi - lo + 1)));
        ExprPtr tree = random_full_tree(config, d, rng);
        while (!within_limits(*tree, config)) tree = random_full_tree(config, d, rng);
        pop.push_back(Individual{std::move(tree), std::nullopt});
    }
    return pop;
}

double fitness_mse(const Expr& tree, const Dataset& data) {
    const VectorXd yhat = eval_columns(tree, data.x);
    if (!yhat.allFinite()) return kWorstFitness;
    const double mse = (data.y - yhat).squaredNorm() / static_cast<double>(data.rows());
    return std::isfinite(mse) ? mse : kWorstFitness;
}

BatchFitness plaintext_oracle(Dataset data) {
    return [data = std::move(data)](const std::vector<ExprPtr>& trees) {
        std::vector<double> out;
        out.reserve(trees.size());
        for (const ExprPtr& t : trees) out.push_back(fitness_mse(*t, data));
        return out;
    };
}

double metric_rmse(double mse) { return std::sqrt(mse); }

double metric_r2(double mse, double sst_over_m) {
    if (sst_over_m <= 0.0) throw DegenerateTarget("target variance is zero");
    return 1.0 - mse / sst_over_m;
}

double sst_over_m(const VectorXd& y) {
    const double mean = y.mean();
    return (y.array() - mean).matrix().squaredNorm() / static_cast<double>(y.size());
}

const Individual& tournament_select(const std::vector<Individual>& pop, int k, Rng& rng) {
    const Individual* best = nullptr;
    for (int i = 0; i < k; ++i) {
        const Individual& cand = pop[rng.below(pop.size())];
        // strict comparison keeps the first-sampled candidate on ties
        if (best == nullptr || cand.fitness.value() < best->fitness.value()) best = &cand;
    }
    return *best;
}

CrossoverOutcome crossover_ex(const Individual& a, const Individual& b, const GpConfig& config,
                              Rng& rng) {
    const int point_a = static_cast<int>(rng.below(static_cast<u64>(node_count(*a.tree))));
    const int point_b = static_cast<int>(rng.below(static_cast<u64>(node_count(*b.tree))));
    ExprPtr sub_a = subtree_at(a.tree, point_a);
    ExprPtr sub_b = subtree_at(b.tree, point_b);
    ExprPtr child_a = replace_at(a.tree, point_a, std::move(sub_b));
    ExprPtr child_b = replace_at(b.tree, point_b, std::move(sub_a));

    CrossoverOutcome out;
    if (within_limits(*child_a, config)) {
        out.first = Individual{std::move(child_a), std::nullopt};
    } else {
        out.first = a;
        out.first_rejected = true;
    }
    if (within_limits(*child_b, config)) {
        out.second = Individual{std::move(child_b), std::nullopt};
    } else {
        out.second = b;
        out.second_rejected = true;
    }
    return out;
}

std::pair<Individual, Individual> crossover(const Individual& a, const Individual& b,
                                            const GpConfig& config, Rng& rng) {
    CrossoverOutcome out = crossover_ex(a, b, config, rng);
    return {std::move(out.first), std::move(out.second)};
}

Individual mutate(const Individual& a, const GpConfig& config, Rng& rng) {
    const int point = static_cast<int>(rng.below(static_cast<u64>(node_count(*a.tree))));
    const int span = config.max_subtree_depth - config.min_subtree_depth + 1;
    const int d = config.min_subtree_depth + static_cast<int>(rng.below(static_cast<u64>(span)));
    ExprPtr child = replace_at(a.tree, point, random_full_tree(config, d, rng));
    if (!within_limits(*child, config)) return a;
    return Individual{std::move(child), std::nullopt};
}

namespace {

void evaluate_missing(std::vector<Individual>& pop, const BatchFitness& oracle) {
    std::vector<ExprPtr> pending;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (!pop[i].fitness) {
            pending.push_back(pop[i].tree);
            where.push_back(i);
        }
    }
    if (pending.empty()) return;
    const std::vector<double> values = oracle(pending);
    if (values.size() != pending.size()) throw MpcError("fitness batch size mismatch");
    for (std::size_t i = 0; i < where.size(); ++i) {
        const double v = values[i];
        pop[where[i]].fitness = std::isfinite(v) ? v : kWorstFitness;
    }
}

GenerationStats stats_of(const std::vector<Individual>& pop) {
    double best = kWorstFitness;
    double sum = 0.0;
    int finite = 0;
    for (const Individual& ind : pop) {
        const double f = ind.fitness.value();
        best = std::min(best, f);
        if (std::isfinite(f)) {
            sum += f;
            ++finite;
        }
    }
    return GenerationStats{best, finite > 0 ? sum / finite : kWorstFitness};
}

std::size_t best_index(const std::vector<Individual>& pop) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (pop[i].fitness.value() < pop[best].fitness.value()) best = i;
    return best;
}

}  // namespace

RunResult evolve(const GpConfig& config, const BatchFitness& oracle, Rng& rng) {
    config.validate();
    std::vector<Individual> pop = init_population(config, rng);
    evaluate_missing(pop, oracle);

    RunResult result;
    result.history.push_back(stats_of(pop));

    for (int gen = 0; gen < config.max_generations; ++gen) {
        if (result.history.back().best_fitness < config.target_mse) break;

        std::vector<Individual> next;
        next.reserve(pop.size());
        if (config.elitism_count > 0) {
            std::vector<std::size_t> order(pop.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return pop[a].fitness.value() < pop[b].fitness.value();
            });
            for (int i = 0; i < config.elitism_count; ++i) next.push_back(pop[order[i]]);
        }
        while (next.size() < pop.size()) {
            const Individual& p1 = tournament_select(pop, config.tournament_size, rng);
            const Individual& p2 = tournament_select(pop, config.tournament_size, rng);
            Individual c1 = p1, c2 = p2;
            if (rng.chance(config.crossover_prob)) std::tie(c1, c2) = crossover(p1, p2, config, rng);
            if (rng.chance(config.mutation_prob)) c1 = mutate(c1, config, rng);
            if (rng.chance(config.mutation_prob)) c2 = mutate(c2, config, rng);
            next.push_back(std::move(c1));
            if (next.size() < pop.size()) next.push_back(std::move(c2));
        }
        evaluate_missing(next, oracle);
        pop = std::move(next);
        result.history.push_back(stats_of(pop));
        ++result.generations;
    }

    result.best = pop[best_index(pop)];
    return result;
}

}  // namespace mpcsr
