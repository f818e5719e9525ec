#include "mpcsr/expr.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace mpcsr {

ExprPtr Expr::variable(int index) {
    assert(index >= 1);
    auto e = std::make_shared<Expr>();
    e->op = Op::Var;
    e->var = index;
    return e;
}

ExprPtr Expr::constant(double v) {
    auto e = std::make_shared<Expr>();
    e->op = Op::Const;
    e->value = v;
    return e;
}

ExprPtr Expr::unary(Op op, Ptr child) {
    assert(is_unary(op));
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->left = std::move(child);
    return e;
}

ExprPtr Expr::binary(Op op, Ptr lhs, Ptr rhs) {
    assert(is_binary(op));
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->left = std::move(lhs);
    e->right = std::move(rhs);
    return e;
}

int depth(const Expr& e) {
    if (is_leaf(e.op)) return 0;
    if (is_unary(e.op)) return 1 + depth(*e.left);
    return 1 + std::max(depth(*e.left), depth(*e.right));
}

int node_count(const Expr& e) {
    if (is_leaf(e.op)) return 1;
    if (is_unary(e.op)) return 1 + node_count(*e.left);
    return 1 + node_count(*e.left) + node_count(*e.right);
}

int max_var_index(const Expr& e) {
    switch (e.op) {
        case Op::Var: return e.var;
        case Op::Const: return 0;
        default:
            if (is_unary(e.op)) return max_var_index(*e.left);
            return std::max(max_var_index(*e.left), max_var_index(*e.right));
    }
}

bool equal_trees(const Expr& a, const Expr& b) {
    if (a.op != b.op) return false;
    switch (a.op) {
        case Op::Var: return a.var == b.var;
        case Op::Const: return a.value == b.value;
        default:
            if (is_unary(a.op)) return equal_trees(*a.left, *b.left);
            return equal_trees(*a.left, *b.left) && equal_trees(*a.right, *b.right);
    }
}

double eval_row(const Expr& e, const VectorXd& row) {
    switch (e.op) {
        case Op::Add: return eval_row(*e.left, row) + eval_row(*e.right, row);
        case Op::Sub: return eval_row(*e.left, row) - eval_row(*e.right, row);
        case Op::Mul: return eval_row(*e.left, row) * eval_row(*e.right, row);
        case Op::Sin: return std::sin(eval_row(*e.left, row));
        case Op::Cos: return std::cos(eval_row(*e.left, row));
        case Op::Var: return row[e.var - 1];
        case Op::Const: return e.value;
    }
    return 0.0;  // unreachable
}

VectorXd eval_columns(const Expr& e, const MatrixXd& x) {
    switch (e.op) {
        case Op::Add: return eval_columns(*e.left, x) + eval_columns(*e.right, x);
        case Op::Sub: return eval_columns(*e.left, x) - eval_columns(*e.right, x);
        case Op::Mul: return eval_columns(*e.left, x).cwiseProduct(eval_columns(*e.right, x));
        case Op::Sin: return eval_columns(*e.left, x).array().sin().matrix();
        case Op::Cos: return eval_columns(*e.left, x).array().cos().matrix();
        case Op::Var: return x.col(e.var - 1);
        case Op::Const: return VectorXd::Constant(x.rows(), e.value);
    }
    return {};
}

namespace {

const char* op_symbol(Op op) {
    switch (op) {
        case Op::Add: return "+";
        case Op::Sub: return "-";
        case Op::Mul: return "*";
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        default: return "?";
    }
}

void format_to(const Expr& e, std::string& out) {
    switch (e.op) {
        case Op::Var:
            out += 'x';
            out += std::to_string(e.var);
            return;
        case Op::Const: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.9g", e.value);
            out += buf;
            return;
        }
        default:
            out += '(';
            out += op_symbol(e.op);
            out += ' ';
            format_to(*e.left, out);
            if (is_binary(e.op)) {
                out += ' ';
                format_to(*e.right, out);
            }
            out += ')';
    }
}

struct Parser {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos); }

    std::string_view token() {
        const std::size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
               text[pos] != '(' && text[pos] != ')')
            ++pos;
        return text.substr(start, pos - start);
    }

    ExprPtr expr() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        if (text[pos] == '(') {
            ++pos;
            skip_ws();
            const std::size_t op_pos = pos;
            std::string_view sym = token();
            Op op;
            if (sym == "+")
                op = Op::Add;
            else if (sym == "-")
                op = Op::Sub;
            else if (sym == "*")
                op = Op::Mul;
            else if (sym == "sin")
                op = Op::Sin;
            else if (sym == "cos")
                op = Op::Cos;
            else {
                pos = op_pos;
                fail("unknown operator");
            }
            ExprPtr lhs = expr();
            ExprPtr node;
            if (is_binary(op)) {
                ExprPtr rhs = expr();
                node = Expr::binary(op, std::move(lhs), std::move(rhs));
            } else {
                node = Expr::unary(op, std::move(lhs));
            }
            skip_ws();
            if (pos >= text.size() || text[pos] != ')') fail("expected ')'");
            ++pos;
            return node;
        }
        if (text[pos] == ')') fail("unexpected ')'");
        const std::size_t start = pos;
        std::string_view tok = token();
        if (tok.size() >= 2 && tok[0] == 'x' &&
            std::all_of(tok.begin() + 1, tok.end(),
                        [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
            const int index = std::atoi(std::string(tok.substr(1)).c_str());
            if (index < 1) {
                pos = start;
                fail("variable index must be >= 1");
            }
            return Expr::variable(index);
        }
        char* end = nullptr;
        const std::string buf(tok);
        const double v = std::strtod(buf.c_str(), &end);
        if (end != buf.c_str() + buf.size() || buf.empty()) {
            pos = start;
            fail("expected operator, variable or number");
        }
        return Expr::constant(v);
    }
};

}  // namespace

std::string format(const Expr& e) {
    std::string out;
    format_to(e, out);
    return out;
}

ExprPtr parse(std::string_view text) {
    Parser p{text};
    ExprPtr e = p.expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing characters");
    return e;
}

namespace {

int op_rank(Op op) {
    switch (op) {
        case Op::Const: return 0;
        case Op::Var: return 1;
        case Op::Add: return 2;
        case Op::Sub: return 3;
        case Op::Mul: return 4;
        case Op::Sin: return 5;
        case Op::Cos: return 6;
    }
    return 7;
}

// total order used for the commutative-argument canonical form
int compare(const Expr& a, const Expr& b) {
    if (op_rank(a.op) != op_rank(b.op)) return op_rank(a.op) < op_rank(b.op) ? -1 : 1;
    switch (a.op) {
        case Op::Const: return a.value < b.value ? -1 : (a.value > b.value ? 1 : 0);
        case Op::Var: return a.var < b.var ? -1 : (a.var > b.var ? 1 : 0);
        default: {
            if (int c = compare(*a.left, *b.left)) return c;
            if (is_binary(a.op)) return compare(*a.right, *b.right);
            return 0;
        }
    }
}

bool is_const(const Expr& e, double v) { return e.op == Op::Const && e.value == v; }

}  // namespace

ExprPtr simplify(const ExprPtr& e) {
    switch (e->op) {
        case Op::Var:
        case Op::Const: return e;
        case Op::Sin:
        case Op::Cos: {
            ExprPtr child = simplify(e->left);
            if (child->op == Op::Const)
                return Expr::constant(e->op == Op::Sin ? std::sin(child->value)
                                                       : std::cos(child->value));
            if (child == e->left) return e;
            return Expr::unary(e->op, std::move(child));
        }
        default: break;
    }
    ExprPtr l = simplify(e->left);
    ExprPtr r = simplify(e->right);
    if (l->op == Op::Const && r->op == Op::Const) {
        switch (e->op) {
            case Op::Add: return Expr::constant(l->value + r->value);
            case Op::Sub: return Expr::constant(l->value - r->value);
            default: return Expr::constant(l->value * r->value);
        }
    }
    switch (e->op) {
        case Op::Add:
            if (is_const(*l, 0.0)) return r;
            if (is_const(*r, 0.0)) return l;
            break;
        case Op::Sub:
            if (is_const(*r, 0.0)) return l;
            if (equal_trees(*l, *r)) return Expr::constant(0.0);
            break;
        case Op::Mul:
            if (is_const(*l, 0.0) || is_const(*r, 0.0)) return Expr::constant(0.0);
            if (is_const(*l, 1.0)) return r;
            if (is_const(*r, 1.0)) return l;
            break;
        default: break;
    }
    if ((e->op == Op::Add || e->op == Op::Mul) && compare(*l, *r) > 0) std::swap(l, r);
    if (l == e->left && r == e->right) return e;
    return Expr::binary(e->op, std::move(l), std::move(r));
}

namespace {

double snap_constant(double c) {
    for (int q = 1; q <= 64; ++q) {
        const double p = std::nearbyint(c * q);
        if (std::fabs(c - p / q) <= 1e-6) return p / q;
    }
    if (std::fabs(c - std::numbers::pi) <= 1e-6) return std::numbers::pi;
    if (std::fabs(c + std::numbers::pi) <= 1e-6) return -std::numbers::pi;
    return c;
}

ExprPtr snap_constants(const ExprPtr& e) {
    switch (e->op) {
        case Op::Const: {
            const double snapped = snap_constant(e->value);
            return snapped == e->value ? e : Expr::constant(snapped);
        }
        case Op::Var: return e;
        default: {
            ExprPtr l = snap_constants(e->left);
            if (is_unary(e->op))
                return l == e->left ? e : Expr::unary(e->op, std::move(l));
            ExprPtr r = snap_constants(e->right);
            if (l == e->left && r == e->right) return e;
            return Expr::binary(e->op, std::move(l), std::move(r));
        }
    }
}

// Halton low-discrepancy sequence, bases 2,3,5,7,11,...
double radical_inverse(int base, int i) {
    double f = 1.0, out = 0.0;
    while (i > 0) {
        f /= base;
        out += f * (i % base);
        i /= base;
    }
    return out;
}

constexpr int kHaltonBases[] = {2, 3, 5, 7, 11, 13, 17, 19};

}  // namespace

bool equivalent(const ExprPtr& f, const ExprPtr& g, int n_vars) {
    assert(n_vars >= 1 && n_vars <= 8);
    const ExprPtr fc = snap_constants(simplify(f));
    const ExprPtr gc = snap_constants(simplify(g));
    if (equal_trees(*fc, *gc)) return true;

    VectorXd row(n_vars);
    for (int half = 0; half < 2; ++half) {
        for (int i = 1; i <= 256; ++i) {
            for (int k = 0; k < n_vars; ++k) {
                const double u = radical_inverse(kHaltonBases[k], i);
                row[k] = half == 0 ? u : 2.0 * u - 1.0;
            }
            const double a = eval_row(*fc, row);
            const double b = eval_row(*gc, row);
            if (!std::isfinite(a) || !std::isfinite(b)) return false;
            if (std::fabs(a - b) > 1e-7) return false;
        }
    }
    return true;
}

ExprPtr subtree_at(const ExprPtr& tree, int index) {
    if (index == 0) return tree;
    --index;
    if (is_leaf(tree->op)) throw MpcError("subtree index out of range");
    const int left_count = node_count(*tree->left);
    if (index < left_count) return subtree_at(tree->left, index);
    if (is_unary(tree->op)) throw MpcError("subtree index out of range");
    return subtree_at(tree->right, index - left_count);
}

ExprPtr replace_at(const ExprPtr& tree, int index, ExprPtr replacement) {
    if (index == 0) return replacement;
    --index;
    if (is_leaf(tree->op)) throw MpcError("subtree index out of range");
    const int left_count = node_count(*tree->left);
    if (index < left_count) {
        ExprPtr l = replace_at(tree->left, index, std::move(replacement));
        if (is_unary(tree->op)) return Expr::unary(tree->op, std::move(l));
        return Expr::binary(tree->op, std::move(l), tree->right);
    }
    if (is_unary(tree->op)) throw MpcError("subtree index out of range");
    ExprPtr r = replace_at(tree->right, index - left_count, std::move(replacement));
    return Expr::binary(tree->op, tree->left, std::move(r));
}

}  // namespace mpcsr
