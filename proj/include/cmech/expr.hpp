#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmech/dual.hpp"
#include "cmech/errors.hpp"
#include "cmech/linalg.hpp"

namespace cmech {

enum class NodeKind { constant, variable, negate, add, sub, mul, div, pow, call };
enum class Builtin { sin, cos, exp, log, sqrt, pow, abs, tanh };

struct ExprNode {
    NodeKind kind = NodeKind::constant;
    double value = 0.0;    // constant
    std::size_t var = 0;   // variable: index into the chart names
    Builtin fn = Builtin::sin;
    std::vector<std::shared_ptr<const ExprNode>> args;
    SourceSpan span;
};

using NodePtr = std::shared_ptr<const ExprNode>;

/// Parsed scalar expression over an ordered list of chart variables.
/// Immutable; copies share the tree.
class Expr {
public:
    Expr() = default;
    Expr(NodePtr root, std::vector<std::string> variables, std::string source);

    const ExprNode& root() const { return *root_; }
    const NodePtr& root_ptr() const { return root_; }
    const std::vector<std::string>& variables() const { return *vars_; }
    const std::string& source() const { return *source_; }
    bool empty() const { return !root_; }

    /// Evaluate at a chart-ordered point. Throws DomainError outside a function's domain.
    template <class T>
    T eval(std::span<const T> x) const { return eval_node(*root_, x); }
    template <class T>
    T eval(const std::vector<T>& x) const { return eval(std::span<const T>(x)); }

    bool depends_on(std::size_t var) const { return var < used_->size() && (*used_)[var]; }
    bool is_constant() const;

private:
    template <class T>
    static T eval_node(const ExprNode& n, std::span<const T> x);
    template <class T>
    static T eval_pow(const ExprNode& n, const ExprNode& base, const ExprNode& ex, std::span<const T> x);

    NodePtr root_;
    std::shared_ptr<const std::vector<std::string>> vars_;
    std::shared_ptr<const std::string> source_;
    std::shared_ptr<const std::vector<bool>> used_;
};

/// Named values; entries whose keys are not chart variables are ignored.
using Bindings = std::map<std::string, double>;

/// Parse `text` over the chart variable names. Names in `parameters` become constants.
///
/// Grammar (lowest to highest precedence): `+ -`, `* /`, `^` (right-assoc), unary `-`,
/// primary (number, identifier, call, parenthesised). Unary minus binds tighter than `^`,
/// so `-q^2` reads as `(-q)^2`.
Expr parse(std::string_view text, const std::vector<std::string>& chart_vars,
           const std::map<std::string, double>& parameters = {});

/// Fully parenthesised canonical form; constants printed with 17 significant digits.
std::string to_string(const Expr& e);

/// Tree equality (ignores source spans).
bool same_tree(const Expr& a, const Expr& b);

double eval(const Expr& e, const Bindings& b);
std::vector<double> grad(const Expr& e, const Bindings& b);
Matrix<double> hess(const Expr& e, const Bindings& b);

/// Chart-ordered point from bindings; missing chart variables raise UnknownVariable.
std::vector<double> point_from_bindings(const Expr& e, const Bindings& b);

// ==================== derivatives over any scalar type ====================

template <class T>
std::vector<T> grad(const Expr& e, std::span<const T> x) {
    const std::size_t n = x.size();
    std::vector<Dual<T>> xd(x.begin(), x.end());
    std::vector<T> g(n, T(0.0));
    for (std::size_t k = 0; k < n; ++k) {
        if (!e.depends_on(k)) continue;
        xd[k].eps = T(1.0);
        g[k] = e.eval(std::span<const Dual<T>>(xd)).eps;
        xd[k].eps = T(0.0);
    }
    return g;
}
template <class T>
std::vector<T> grad(const Expr& e, const std::vector<T>& x) { return grad(e, std::span<const T>(x)); }

/// Hessian, symmetrised as (H + H^T) / 2.
template <class T>
Matrix<T> hess(const Expr& e, std::span<const T> x) {
    const std::size_t n = x.size();
    Matrix<T> h(n, n);
    std::vector<Dual<T>> xd(x.begin(), x.end());
    for (std::size_t k = 0; k < n; ++k) {
        if (!e.depends_on(k)) continue;
        xd[k].eps = T(1.0);
        auto gk = grad(e, std::span<const Dual<T>>(xd));
        xd[k].eps = T(0.0);
        for (std::size_t j = 0; j < n; ++j) h(k, j) = gk[j].eps;
    }
    Matrix<T> s(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (h(i, j) + h(j, i));
    return s;
}
template <class T>
Matrix<T> hess(const Expr& e, const std::vector<T>& x) { return hess(e, std::span<const T>(x)); }

// ==================== evaluation ====================

template <class T>
T Expr::eval_node(const ExprNode& n, std::span<const T> x) {
    using std::sin; using std::cos; using std::exp; using std::log;
    using std::sqrt; using std::abs; using std::tanh; using std::pow;
    switch (n.kind) {
        case NodeKind::constant: return T(n.value);
        case NodeKind::variable: return x[n.var];
        case NodeKind::negate: return -eval_node(*n.args[0], x);
        case NodeKind::add: return eval_node(*n.args[0], x) + eval_node(*n.args[1], x);
        case NodeKind::sub: return eval_node(*n.args[0], x) - eval_node(*n.args[1], x);
        case NodeKind::mul: return eval_node(*n.args[0], x) * eval_node(*n.args[1], x);
        case NodeKind::div: {
            T d = eval_node(*n.args[1], x);
            if (primal(d) == 0.0) throw DomainError(n.span, "division by zero");
            return eval_node(*n.args[0], x) / d;
        }
        case NodeKind::pow: return eval_pow(n, *n.args[0], *n.args[1], x);
        case NodeKind::call: {
            if (n.fn == Builtin::pow) return eval_pow(n, *n.args[0], *n.args[1], x);
            T a = eval_node(*n.args[0], x);
            switch (n.fn) {
                case Builtin::sin: return sin(a);
                case Builtin::cos: return cos(a);
                case Builtin::exp: return exp(a);
                case Builtin::log:
                    if (primal(a) <= 0.0) throw DomainError(n.span, "log of non-positive value");
                    return log(a);
                case Builtin::sqrt:
                    if (primal(a) < 0.0) throw DomainError(n.span, "sqrt of negative value");
                    return sqrt(a);
                case Builtin::abs: return abs(a);
                case Builtin::tanh: return tanh(a);
                case Builtin::pow: break;
            }
            break;
        }
    }
    throw Error("corrupt expression tree");
}

template <class T>
T Expr::eval_pow(const ExprNode& n, const ExprNode& base_node, const ExprNode& ex, std::span<const T> x) {
    using std::exp; using std::log; using std::pow;
    T base = eval_node(base_node, x);
    bool const_exp = ex.kind == NodeKind::constant ||
                     (ex.kind == NodeKind::negate && ex.args[0]->kind == NodeKind::constant);
    if (const_exp) {
        double c = ex.kind == NodeKind::constant ? ex.value : -ex.args[0]->value;
        double b = primal(base);
        if (b < 0.0 && c != std::floor(c)) throw DomainError(n.span, "negative base with non-integer exponent");
        if (b == 0.0 && c < 0.0) throw DomainError(n.span, "zero base with negative exponent");
        return pow(base, c);
    }
    if (primal(base) <= 0.0) throw DomainError(n.span, "non-positive base with variable exponent");
    return exp(eval_node(ex, x) * log(base));
}

}  // namespace cmech
