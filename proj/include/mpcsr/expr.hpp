#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "mpcsr/common.hpp"

namespace mpcsr {

enum class Op : u8 { Add, Sub, Mul, Sin, Cos, Var, Const };

constexpr bool is_binary(Op op) { return op == Op::Add || op == Op::Sub || op == Op::Mul; }
constexpr bool is_unary(Op op) { return op == Op::Sin || op == Op::Cos; }
constexpr bool is_leaf(Op op) { return op == Op::Var || op == Op::Const; }

// Immutable expression node; subtrees are shared freely between trees.
class Expr {
  public:
    using Ptr = std::shared_ptr<const Expr>;

    Op op;
    int var = 0;         // 1-based variable index (Var only)
    double value = 0.0;  // Const only
    Ptr left, right;     // unary ops use left

    static Ptr variable(int index);
    static Ptr constant(double v);
    static Ptr unary(Op op, Ptr child);
    static Ptr binary(Op op, Ptr lhs, Ptr rhs);
    static Ptr add(Ptr l, Ptr r) { return binary(Op::Add, std::move(l), std::move(r)); }
    static Ptr sub(Ptr l, Ptr r) { return binary(Op::Sub, std::move(l), std::move(r)); }
    static Ptr mul(Ptr l, Ptr r) { return binary(Op::Mul, std::move(l), std::move(r)); }
    static Ptr sin(Ptr c) { return unary(Op::Sin, std::move(c)); }
    static Ptr cos(Ptr c) { return unary(Op::Cos, std::move(c)); }
};

using ExprPtr = Expr::Ptr;

int depth(const Expr& e);       // edges: a lone leaf has depth 0
int node_count(const Expr& e);
int max_var_index(const Expr& e);
bool equal_trees(const Expr& a, const Expr& b);

double eval_row(const Expr& e, const VectorXd& row);
VectorXd eval_columns(const Expr& e, const MatrixXd& x);

// Prefix s-expressions: "(+ (sin x1) (* x2 x2))"; constants print with 9
// significant digits.
std::string format(const Expr& e);
ExprPtr parse(std::string_view text);  // throws ParseError with offset

// Constant folding, identity elimination, and commutative-argument canonical
// ordering. The result is functionally equal to the input.
ExprPtr simplify(const ExprPtr& e);

// Functional equality: canonical-form match, or agreement within 1e-7 on 256
// quasi-random points in [0,1]^n plus 256 in [-1,1]^n, after snapping
// constants to nearby simple rationals (denominator <= 64) and +-pi.
bool equivalent(const ExprPtr& f, const ExprPtr& g, int n_vars);

// Preorder node indexing, used by the genetic operators.
ExprPtr subtree_at(const ExprPtr& tree, int index);
ExprPtr replace_at(const ExprPtr& tree, int index, ExprPtr replacement);

}  // namespace mpcsr
