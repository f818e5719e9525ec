#pragma once

// fixtures shared by the protocol tests and the acceptance suite

#include <cmath>
#include <utility>
#include <vector>

#include "mpcsr/protocol.hpp"
#include "mpcsr/secure_eval.hpp"

namespace mpcsr::testutil {

inline Dataset make_dataset(const ExprPtr& truth, int n_vars, u64 seed, int rows = 20) {
    Rng rng(seed);
    Dataset d;
    d.x.resize(rows, n_vars);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < n_vars; ++j) d.x(i, j) = rng.real01();
    d.y = eval_columns(*truth, d.x);
    return d;
}

// two clients: C1 holds x1, C2 holds x2 and y
inline std::vector<ClientData> split_two(const Dataset& train, const Dataset& test) {
    std::vector<ClientData> clients(2);
    clients[0].x_train = train.x.col(0);
    clients[0].x_test = test.x.col(0);
    clients[1].x_train = train.x.col(1);
    clients[1].x_test = test.x.col(1);
    clients[1].y_train = train.y;
    clients[1].y_test = test.y;
    return clients;
}

// Checks that every intermediate value a secure evaluation would see sits in
// the domain where the fixed-point pipeline and the trig kernels are
// accurate: |sin/cos argument| <= trig_limit, every node value <= value_limit.
inline bool node_values_in_envelope(const Expr& tree, const MatrixXd& x, VectorXd& out,
                                    double trig_limit, double value_limit) {
    VectorXd left, right;
    switch (tree.op) {
        case Op::Var: out = x.col(tree.var - 1); break;
        case Op::Const: out = VectorXd::Constant(x.rows(), tree.value); break;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
            if (!node_values_in_envelope(*tree.left, x, left, trig_limit, value_limit) ||
                !node_values_in_envelope(*tree.right, x, right, trig_limit, value_limit))
                return false;
            out = tree.op == Op::Add   ? VectorXd(left + right)
                  : tree.op == Op::Sub ? VectorXd(left - right)
                                       : VectorXd(left.cwiseProduct(right));
            break;
        case Op::Sin:
        case Op::Cos:
            if (!node_values_in_envelope(*tree.left, x, left, trig_limit, value_limit))
                return false;
            if (left.cwiseAbs().maxCoeff() > trig_limit) return false;
            out = tree.op == Op::Sin ? VectorXd(left.array().sin())
                                     : VectorXd(left.array().cos());
            break;
    }
    return out.cwiseAbs().maxCoeff() <= value_limit;
}

inline bool within_secure_envelope(const Expr& tree, const MatrixXd& x, double trig_limit = 12.0,
                                   double value_limit = 64.0) {
    VectorXd scratch;
    return node_values_in_envelope(tree, x, scratch, trig_limit, value_limit);
}

// random trees that respect the secure envelope on the given data
inline std::vector<ExprPtr> envelope_corpus(int count, int max_depth, const MatrixXd& x,
                                            u64 seed) {
    GpConfig config;
    config.n_vars = static_cast<int>(x.cols());
    Rng rng(seed);
    std::vector<ExprPtr> out;
    while (static_cast<int>(out.size()) < count) {
        const int d = 1 + static_cast<int>(rng.below(static_cast<u64>(max_depth)));
        ExprPtr tree = random_full_tree(config, d, rng);
        if (within_secure_envelope(*tree, x)) out.push_back(std::move(tree));
    }
    return out;
}

inline double fitness_budget(double plain) { return std::max(1e-2, 1e-2 * plain); }

// Per-generation fitness vectors of a plaintext run, recorded tree by tree.
struct TrackedRun {
    RunResult result;
    std::vector<std::vector<std::pair<std::string, double>>> generations;
};

inline TrackedRun tracked_plaintext_run(const GpConfig& gp, const Dataset& train) {
    TrackedRun out;
    auto oracle = plaintext_oracle(train);
    BatchFitness tracking = [&](const std::vector<ExprPtr>& trees) {
        std::vector<double> values = oracle(trees);
        std::vector<std::pair<std::string, double>> gen;
        for (std::size_t i = 0; i < trees.size(); ++i) gen.emplace_back(format(*trees[i]), values[i]);
        out.generations.push_back(std::move(gen));
        return values;
    };
    Rng rng(gp.rng_seed);
    out.result = evolve(gp, tracking, rng);
    return out;
}

// True when every pair of distinct trees seen anywhere in the run (cached
// elites included) is separated by more than the two-sided fitness noise
// budget, so the secure run must make the same tournament decisions. Also
// requires every tree to stay in a tight value envelope where the noise
// budget is trustworthy.
inline bool decisions_are_noise_robust(const TrackedRun& run, const MatrixXd& x,
                                       double noise_budget) {
    std::vector<std::pair<std::string, double>> all;
    for (const auto& gen : run.generations)
        for (const auto& entry : gen) {
            if (!std::isfinite(entry.second) || entry.second > 1e6) return false;
            if (!within_secure_envelope(*parse(entry.first), x, 12.0, 8.0)) return false;
            all.push_back(entry);
        }
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            if (all[i].first == all[j].first) continue;  // same tree either way
            const double fi = all[i].second, fj = all[j].second;
            const double gap = noise_budget * (2.0 + fi + fj);
            if (std::fabs(fi - fj) <= gap) return false;
        }
    }
    return true;
}

}  // namespace mpcsr::testutil
