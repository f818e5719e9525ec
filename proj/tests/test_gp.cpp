#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "mpcsr/gp.hpp"

using namespace mpcsr;

namespace {

GpConfig small_config() {
    GpConfig c;
    c.population_size = 64;
    c.max_generations = 10;
    c.n_vars = 2;
    c.rng_seed = 5;
    return c;
}

Dataset nguyen9_data(u64 seed = 3) {
    Rng rng(seed);
    Dataset d;
    d.x.resize(20, 2);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 2; ++j) d.x(i, j) = rng.real01();
    const ExprPtr truth = parse("(+ (sin x1) (sin (* x2 x2)))");
    d.y = eval_columns(*truth, d.x);
    return d;
}

// multiset of node labels, for the crossover conservation check
std::map<std::string, int> node_multiset(const ExprPtr& tree) {
    std::map<std::string, int> out;
    for (int i = 0; i < node_count(*tree); ++i) {
        const ExprPtr n = subtree_at(tree, i);
        std::string label;
        switch (n->op) {
            case Op::Add: label = "+"; break;
            case Op::Sub: label = "-"; break;
            case Op::Mul: label = "*"; break;
            case Op::Sin: label = "sin"; break;
            case Op::Cos: label = "cos"; break;
            case Op::Var: label = "x" + std::to_string(n->var); break;
            case Op::Const: label = "c" + std::to_string(n->value); break;
        }
        ++out[label];
    }
    return out;
}

void add_into(std::map<std::string, int>& acc, const std::map<std::string, int>& more) {
    for (const auto& [k, v] : more) acc[k] += v;
}

}  // namespace

TEST_SUITE_BEGIN("gp");

TEST_CASE("config validation rejects bad settings") {
    GpConfig c = small_config();
    CHECK_NOTHROW(c.validate());
    c.tournament_size = 100;
    CHECK_THROWS_AS(c.validate(), MpcError);
    c = small_config();
    c.mutation_prob = 1.5;
    CHECK_THROWS_AS(c.validate(), MpcError);
    c = small_config();
    c.population_size = 0;
    CHECK_THROWS_AS(c.validate(), MpcError);
}

TEST_CASE("full initialization: exact size, leaves only at the target depth") {
    GpConfig c;
    c.population_size = 1000;
    c.n_vars = 2;
    Rng rng(1);
    const auto pop = init_population(c, rng);
    REQUIRE(pop.size() == 1000);
    for (const Individual& ind : pop) {
        const int d = depth(*ind.tree);
        CHECK(d >= 2);
        CHECK(d <= c.max_subtree_depth + 2);
        CHECK(node_count(*ind.tree) <= c.max_length);
        // Full method: every leaf sits at exactly depth d
        for (int i = 0; i < node_count(*ind.tree); ++i) {
            const ExprPtr n = subtree_at(ind.tree, i);
            if (is_leaf(n->op)) continue;
            if (is_unary(n->op))
                CHECK(depth(*n->left) == depth(*n) - 1);
            else {
                CHECK(depth(*n->left) == depth(*n) - 1);
                CHECK(depth(*n->right) == depth(*n) - 1);
            }
        }
    }
}

TEST_CASE("fixed seed reproduces the population exactly") {
    GpConfig c = small_config();
    Rng a(c.rng_seed), b(c.rng_seed);
    const auto pa = init_population(c, a);
    const auto pb = init_population(c, b);
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i)
        CHECK(format(*pa[i].tree) == format(*pb[i].tree));
}

TEST_CASE("mse fitness") {
    const Dataset data = nguyen9_data();
    SUBCASE("ground truth scores zero") {
        CHECK(fitness_mse(*parse("(+ (sin x1) (sin (* x2 x2)))"), data) <= 1e-12);
    }
    SUBCASE("constant predictor on a zero target") {
        Dataset flat;
        flat.x = MatrixXd::Zero(2, 1);
        flat.y = VectorXd::Zero(2);
        CHECK(fitness_mse(*parse("1"), flat) == 1.0);
        CHECK(fitness_mse(*parse("0"), flat) == 0.0);
    }
    SUBCASE("non-finite evaluation gets the worst fitness") {
        Dataset big;
        big.x = MatrixXd::Constant(1, 1, 1e200);
        big.y = VectorXd::Zero(1);
        // (x*x)*(x*x) overflows double
        CHECK(fitness_mse(*parse("(* (* x1 x1) (* x1 x1))"), big) == kWorstFitness);
    }
}

TEST_CASE("rmse and r2 metrics") {
    CHECK(metric_rmse(0.0) == 0.0);
    CHECK(metric_rmse(4.0) == 2.0);
    CHECK(metric_r2(0.0, 2.5) == 1.0);
    CHECK(metric_r2(2.5, 2.5) == 0.0);
    CHECK_THROWS_AS((void)metric_r2(1.0, 0.0), DegenerateTarget);
}

TEST_CASE("tournament selection replays as argmin with first-sampled ties") {
    GpConfig c = small_config();
    Rng init_rng(2);
    auto pop = init_population(c, init_rng);
    Rng fit_rng(3);
    for (auto& ind : pop) ind.fitness = std::floor(fit_rng.uniform(0, 8));  // many ties

    for (u64 seed = 0; seed < 200; ++seed) {
        Rng select_rng(seed);
        const Individual& got = tournament_select(pop, c.tournament_size, select_rng);
        Rng replay(seed);
        const Individual* want = nullptr;
        for (int i = 0; i < c.tournament_size; ++i) {
            const Individual& cand = pop[replay.below(pop.size())];
            if (want == nullptr || cand.fitness.value() < want->fitness.value()) want = &cand;
        }
        CHECK(&got == want);
    }
}

TEST_CASE("tournament selection pressure beats uniform sampling") {
    std::vector<Individual> pop(100);
    for (int i = 0; i < 100; ++i) pop[i] = Individual{Expr::constant(i), double(i + 1)};
    Rng rng(4);
    double mean_rank = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) mean_rank += tournament_select(pop, 5, rng).fitness.value();
    mean_rank /= trials;
    CHECK(mean_rank < 50.5);  // uniform sampling would average (1+100)/2
    CHECK(mean_rank < 25.0);  // k=5 pulls the expected best-of-five down hard
}

TEST_CASE("crossover of identical single-node parents returns the parents") {
    GpConfig c = small_config();
    Rng rng(5);
    const Individual leaf{Expr::variable(1), std::nullopt};
    const auto [a, b] = crossover(leaf, leaf, c, rng);
    CHECK(format(*a.tree) == "x1");
    CHECK(format(*b.tree) == "x1");
}

TEST_CASE("crossover respects limits and conserves node multisets") {
    GpConfig c = small_config();
    Rng rng(6);
    int clean = 0;
    for (int t = 0; t < 2000; ++t) {
        const Individual p1{random_full_tree(c, 2 + static_cast<int>(rng.below(3)), rng), 0.0};
        const Individual p2{random_full_tree(c, 2 + static_cast<int>(rng.below(3)), rng), 0.0};
        const CrossoverOutcome out = crossover_ex(p1, p2, c, rng);
        CHECK(depth(*out.first.tree) <= c.max_depth);
        CHECK(node_count(*out.first.tree) <= c.max_length);
        CHECK(depth(*out.second.tree) <= c.max_depth);
        CHECK(node_count(*out.second.tree) <= c.max_length);
        if (!out.first_rejected && !out.second_rejected) {
            ++clean;
            std::map<std::string, int> parents, children;
            add_into(parents, node_multiset(p1.tree));
            add_into(parents, node_multiset(p2.tree));
            add_into(children, node_multiset(out.first.tree));
            add_into(children, node_multiset(out.second.tree));
            CHECK(parents == children);
        }
    }
    CHECK(clean > 1500);  // rejection is the exception at these sizes
}

TEST_CASE("mutation respects limits and almost always changes the tree") {
    GpConfig c = small_config();
    Rng rng(7);
    SUBCASE("single-node tree mutates into depth <= max_subtree_depth") {
        for (int t = 0; t < 200; ++t) {
            const Individual leaf{Expr::variable(1), std::nullopt};
            const Individual got = mutate(leaf, c, rng);
            CHECK(depth(*got.tree) <= c.max_subtree_depth);
        }
    }
    SUBCASE("changed fraction above 0.95") {
        int changed = 0;
        const int trials = 10000;
        for (int t = 0; t < trials; ++t) {
            const Individual parent{random_full_tree(c, 2 + static_cast<int>(rng.below(3)), rng),
                                    0.0};
            const Individual child = mutate(parent, c, rng);
            CHECK(depth(*child.tree) <= c.max_depth);
            CHECK(node_count(*child.tree) <= c.max_length);
            if (format(*child.tree) != format(*parent.tree)) ++changed;
        }
        CHECK(changed > static_cast<int>(0.95 * trials));
    }
}

TEST_CASE("evolve: elitism makes the best fitness non-increasing") {
    GpConfig c = small_config();
    c.max_generations = 15;
    Rng rng(c.rng_seed);
    const RunResult rr = evolve(c, plaintext_oracle(nguyen9_data()), rng);
    REQUIRE(!rr.history.empty());
    for (std::size_t g = 1; g < rr.history.size(); ++g)
        CHECK(rr.history[g].best_fitness <= rr.history[g - 1].best_fitness);
    CHECK(rr.best.fitness.value() == rr.history.back().best_fitness);
}

TEST_CASE("evolve: identical seeds reproduce the identical run") {
    GpConfig c = small_config();
    const Dataset data = nguyen9_data();
    Rng r1(c.rng_seed), r2(c.rng_seed);
    const RunResult a = evolve(c, plaintext_oracle(data), r1);
    const RunResult b = evolve(c, plaintext_oracle(data), r2);
    CHECK(format(*a.best.tree) == format(*b.best.tree));
    CHECK(a.generations == b.generations);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t g = 0; g < a.history.size(); ++g) {
        CHECK(a.history[g].best_fitness == b.history[g].best_fitness);
        CHECK(a.history[g].mean_fitness == b.history[g].mean_fitness);
    }
}

TEST_CASE("evolve recovers a trivial target and stops early") {
    GpConfig c;
    c.population_size = 300;
    c.max_generations = 30;
    c.n_vars = 2;
    c.rng_seed = 11;
    Dataset data;
    Rng rng(12);
    data.x.resize(20, 2);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 2; ++j) data.x(i, j) = rng.real01();
    data.y = eval_columns(*parse("(+ x1 x2)"), data.x);
    Rng gp_rng(c.rng_seed);
    const RunResult rr = evolve(c, plaintext_oracle(data), gp_rng);
    CHECK(rr.best.fitness.value() < 1e-10);
    CHECK(rr.generations < c.max_generations);
    CHECK(equivalent(rr.best.tree, parse("(+ x1 x2)"), 2));
}

TEST_SUITE_END();
