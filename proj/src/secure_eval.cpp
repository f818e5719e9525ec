#include "mpcsr/secure_eval.hpp"

#include "mpcsr/kernels.hpp"

namespace mpcsr {

u64 eval_rounds(const Expr& tree) {
    switch (tree.op) {
        case Op::Var:
        case Op::Const: return 0;
        case Op::Add:
        case Op::Sub: return eval_rounds(*tree.left) + eval_rounds(*tree.right);
        case Op::Mul: return 1 + eval_rounds(*tree.left) + eval_rounds(*tree.right);
        case Op::Sin: return kSinRounds + eval_rounds(*tree.left);
        case Op::Cos: return kCosRounds + eval_rounds(*tree.left);
    }
    return 0;
}

u64 fitness_rounds(const Expr& tree) { return eval_rounds(tree) + 1; }

RingVector secure_eval_tree(PartyEngine& eng, const Expr& tree, const RingMatrix& x_share) {
    switch (tree.op) {
        case Op::Var:
            if (tree.var < 1 || tree.var > x_share.cols())
                throw DimensionMismatch("variable index outside the shared dataset");
            return x_share.col(tree.var - 1);
        case Op::Const:
            return eng.constant(tree.value, x_share.rows(), eng.codec().frac_bits);
        case Op::Add:
            return eng.add(secure_eval_tree(eng, *tree.left, x_share),
                           secure_eval_tree(eng, *tree.right, x_share));
        case Op::Sub:
            return eng.sub(secure_eval_tree(eng, *tree.left, x_share),
                           secure_eval_tree(eng, *tree.right, x_share));
        case Op::Mul:
            return eng.mul_fx(secure_eval_tree(eng, *tree.left, x_share),
                              secure_eval_tree(eng, *tree.right, x_share));
        case Op::Sin: return sec_sin(eng, secure_eval_tree(eng, *tree.left, x_share));
        case Op::Cos: return sec_cos(eng, secure_eval_tree(eng, *tree.left, x_share));
    }
    throw MpcError("unreachable node type");
}

RingVector secure_fitness_mse(PartyEngine& eng, const Expr& tree, const SharedDataset& data) {
    const RingVector yhat = secure_eval_tree(eng, tree, data.x);
    const RingVector residual = eng.sub(data.y, yhat);
    const RingVector squared = eng.mul_fx(residual, residual);
    const Ring& r = eng.ring();
    u64 total = 0;
    for (Eigen::Index i = 0; i < squared.size(); ++i) total = r.add(total, squared[i]);
    RingVector sum(1);
    sum[0] = total;
    const unsigned b = eng.codec().frac_bits;
    return eng.scale_public(sum, 1.0 / static_cast<double>(data.x.rows()), b, b);
}

}  // namespace mpcsr
