#include <cmath>

#include "doctest.h"
#include "mpcsr/expr.hpp"
#include "mpcsr/gp.hpp"

using namespace mpcsr;

namespace {

ExprPtr nguyen9_tree() {
    return Expr::add(Expr::sin(Expr::variable(1)),
                     Expr::sin(Expr::mul(Expr::variable(2), Expr::variable(2))));
}

GpConfig tree_gen_config(int n_vars = 2) {
    GpConfig c;
    c.n_vars = n_vars;
    return c;
}

}  // namespace

TEST_SUITE_BEGIN("expr");

TEST_CASE("plain evaluation") {
    VectorXd row(2);
    row << 0.0, 0.0;
    CHECK(eval_row(*Expr::constant(3.5), row) == 3.5);
    CHECK(eval_row(*nguyen9_tree(), row) == 0.0);
    row << 0.5, 0.5;
    CHECK(std::fabs(eval_row(*nguyen9_tree(), row) - 0.726829497858726) <= 1e-6);
}

TEST_CASE("column evaluation agrees with row evaluation") {
    Rng rng(21);
    const GpConfig config = tree_gen_config(3);
    for (int t = 0; t < 200; ++t) {
        const ExprPtr tree = random_full_tree(config, 2 + static_cast<int>(rng.below(3)), rng);
        MatrixXd x(8, 3);
        for (int i = 0; i < x.rows(); ++i)
            for (int j = 0; j < x.cols(); ++j) x(i, j) = rng.uniform(-2, 2);
        const VectorXd cols = eval_columns(*tree, x);
        for (int i = 0; i < x.rows(); ++i) {
            const VectorXd row = x.row(i);
            CHECK(cols[i] == doctest::Approx(eval_row(*tree, row)).epsilon(1e-12));
        }
    }
}

TEST_CASE("parse handles the documented forms") {
    CHECK(format(*parse("(+ (sin x1) (sin (* x2 x2)))")) == "(+ (sin x1) (sin (* x2 x2)))");
    const ExprPtr v = parse("x1");
    CHECK(v->op == Op::Var);
    CHECK(v->var == 1);
    const ExprPtr c = parse("-0.25");
    CHECK(c->op == Op::Const);
    CHECK(c->value == -0.25);
}

TEST_CASE("parse errors carry the offending offset") {
    try {
        (void)parse("(sin");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset == 4);
    }
    CHECK_THROWS_AS((void)parse(""), ParseError);
    CHECK_THROWS_AS((void)parse("(foo x1 x2)"), ParseError);
    CHECK_THROWS_AS((void)parse("(+ x1 x2) trailing"), ParseError);
    CHECK_THROWS_AS((void)parse("(+ x1)"), ParseError);
    CHECK_THROWS_AS((void)parse("x0"), ParseError);
}

TEST_CASE("parse/format round-trips on random trees") {
    Rng rng(22);
    const GpConfig config = tree_gen_config(2);
    for (int t = 0; t < 10000; ++t) {
        const ExprPtr tree = random_full_tree(config, static_cast<int>(rng.below(5)), rng);
        const std::string text = format(*tree);
        const ExprPtr back = parse(text);
        // the printed form is a fixed point of parse . format
        CHECK(format(*back) == text);
    }
}

TEST_CASE("simplify applies the identity rules") {
    CHECK(format(*simplify(parse("(+ x1 0)"))) == "x1");
    CHECK(format(*simplify(parse("(+ 0 x1)"))) == "x1");
    CHECK(format(*simplify(parse("(- x1 0)"))) == "x1");
    CHECK(format(*simplify(parse("(- x2 x2)"))) == "0");
    CHECK(format(*simplify(parse("(* x1 1)"))) == "x1");
    CHECK(format(*simplify(parse("(* (sin 0) x2)"))) == "0");
    CHECK(format(*simplify(parse("(* 0 (+ x1 x2))"))) == "0");
    CHECK(format(*simplify(parse("(+ 2 3)"))) == "5");
}

TEST_CASE("commutative arguments reach one canonical form") {
    const ExprPtr a = simplify(parse("(+ (sin x2) (sin x1))"));
    const ExprPtr b = simplify(parse("(+ (sin x1) (sin x2))"));
    CHECK(equal_trees(*a, *b));
    const ExprPtr c = simplify(parse("(* x2 x1)"));
    const ExprPtr d = simplify(parse("(* x1 x2)"));
    CHECK(equal_trees(*c, *d));
}

TEST_CASE("simplify preserves semantics on random trees") {
    Rng rng(23);
    const GpConfig config = tree_gen_config(3);
    MatrixXd x(4, 3);
    for (int t = 0; t < 10000; ++t) {
        const ExprPtr tree = random_full_tree(config, static_cast<int>(rng.below(5)), rng);
        const ExprPtr simple = simplify(tree);
        for (int i = 0; i < x.rows(); ++i)
            for (int j = 0; j < x.cols(); ++j) x(i, j) = rng.uniform(-3, 3);
        const VectorXd before = eval_columns(*tree, x);
        const VectorXd after = eval_columns(*simple, x);
        for (int i = 0; i < x.rows(); ++i)
            CHECK(std::fabs(before[i] - after[i]) <=
                  1e-9 * std::max(1.0, std::fabs(before[i])));
    }
}

TEST_CASE("equivalence: ground truth cases") {
    const ExprPtr truth = nguyen9_tree();
    CHECK(equivalent(truth, truth, 2));
    CHECK(equivalent(truth, parse("(+ (sin (* x2 x2)) (sin x1))"), 2));
    // product-to-sum identity: 2 sin(x1) cos(x2) = sin(x1+x2) + sin(x1-x2)
    CHECK(equivalent(parse("(* (* 2 (sin x1)) (cos x2))"),
                     parse("(+ (sin (+ x1 x2)) (sin (- x1 x2)))"), 2));
    // near misses from the frequently-discovered list
    CHECK_FALSE(equivalent(parse("(+ (sin x1) x2)"), parse("(+ (sin x1) (sin x2))"), 2));
    CHECK_FALSE(equivalent(parse("(+ (sin x1) (* x2 x2))"), truth, 2));
    CHECK_FALSE(equivalent(parse("(+ (sin x1) (* x2 (sin x2)))"), truth, 2));
}

TEST_CASE("equivalence snaps near-rational and near-pi constants") {
    CHECK(equivalent(parse("(* 0.50000001 x1)"), parse("(* 0.5 x1)"), 1));
    CHECK(equivalent(parse("(sin (* 3.14159265 x1))"), parse("(sin (* 3.14159265358979 x1))"), 1));
    CHECK_FALSE(equivalent(parse("(* 0.51 x1)"), parse("(* 0.5 x1)"), 1));
}

TEST_CASE("equivalence is reflexive and symmetric on a random corpus") {
    Rng rng(24);
    const GpConfig config = tree_gen_config(2);
    std::vector<ExprPtr> corpus;
    for (int t = 0; t < 40; ++t)
        corpus.push_back(random_full_tree(config, 1 + static_cast<int>(rng.below(3)), rng));
    for (const ExprPtr& f : corpus) CHECK(equivalent(f, f, 2));
    for (std::size_t i = 0; i < corpus.size(); i += 4)
        for (std::size_t j = 0; j < corpus.size(); j += 4)
            CHECK(equivalent(corpus[i], corpus[j], 2) == equivalent(corpus[j], corpus[i], 2));
}

TEST_CASE("preorder subtree access and replacement") {
    const ExprPtr tree = parse("(+ (sin x1) (* x2 0.5))");
    CHECK(node_count(*tree) == 6);
    CHECK(format(*subtree_at(tree, 0)) == "(+ (sin x1) (* x2 0.5))");
    CHECK(format(*subtree_at(tree, 1)) == "(sin x1)");
    CHECK(format(*subtree_at(tree, 2)) == "x1");
    CHECK(format(*subtree_at(tree, 3)) == "(* x2 0.5)");
    CHECK(format(*subtree_at(tree, 5)) == "0.5");
    const ExprPtr swapped = replace_at(tree, 3, Expr::variable(2));
    CHECK(format(*swapped) == "(+ (sin x1) x2)");
    CHECK(format(*tree) == "(+ (sin x1) (* x2 0.5))");  // original untouched
}

TEST_CASE("depth counts edges") {
    CHECK(depth(*parse("x1")) == 0);
    CHECK(depth(*parse("(sin x1)")) == 1);
    CHECK(depth(*nguyen9_tree()) == 3);
    CHECK(node_count(*nguyen9_tree()) == 7);
    CHECK(max_var_index(*nguyen9_tree()) == 2);
}

TEST_SUITE_END();
