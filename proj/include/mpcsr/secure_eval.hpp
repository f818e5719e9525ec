#pragma once

#include "mpcsr/engine.hpp"
#include "mpcsr/expr.hpp"

namespace mpcsr {

// One compute party's share of the joint dataset.
struct SharedDataset {
    RingMatrix x;  // m rows, n columns (client blocks concatenated)
    RingVector y;
};

// Opening rounds a tree evaluation performs: one per Mul node plus the fixed
// kernel cost per Sin/Cos node. The audit tests assert the engine counter
// matches these exactly.
u64 eval_rounds(const Expr& tree);
// evaluation plus the squared-residual round of the MSE
u64 fitness_rounds(const Expr& tree);

// Evaluates the tree on every row of this party's x share; additions and
// public constants are local, each multiplication-type node is one batched
// opening round.
RingVector secure_eval_tree(PartyEngine& eng, const Expr& tree, const RingMatrix& x_share);

// Share of the MSE fitness: (1/m) * sum((y - yhat)^2) as a 1-element vector.
RingVector secure_fitness_mse(PartyEngine& eng, const Expr& tree, const SharedDataset& data);

}  // namespace mpcsr
