#include "cmech/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>

namespace cmech {

namespace {

struct FunctionInfo {
    const char* name;
    Builtin fn;
    std::size_t arity;
};

constexpr FunctionInfo kFunctions[] = {
    {"sin", Builtin::sin, 1},   {"cos", Builtin::cos, 1},   {"exp", Builtin::exp, 1},
    {"log", Builtin::log, 1},   {"sqrt", Builtin::sqrt, 1}, {"pow", Builtin::pow, 2},
    {"abs", Builtin::abs, 1},   {"tanh", Builtin::tanh, 1},
};

const FunctionInfo* find_function(std::string_view name) {
    for (const auto& f : kFunctions)
        if (name == f.name) return &f;
    return nullptr;
}

const char* function_name(Builtin fn) {
    for (const auto& f : kFunctions)
        if (f.fn == fn) return f.name;
    return "?";
}

// ==================== recursive-descent parser ====================

class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& vars, const std::map<std::string, double>& params)
        : text_(text), vars_(vars), params_(params) {}

    NodePtr parse_all() {
        NodePtr e = expression();
        skip_ws();
        if (pos_ < text_.size()) fail({"operator", "end of input"});
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    [[noreturn]] void fail(std::vector<std::string> expected) {
        skip_ws();
        std::string found = pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'" : "end of input";
        throw SyntaxError(pos_, std::move(expected), found);
    }

    static NodePtr make(NodeKind k, std::vector<NodePtr> args, SourceSpan span) {
        auto n = std::make_shared<ExprNode>();
        n->kind = k;
        n->args = std::move(args);
        n->span = span;
        return n;
    }

    NodePtr expression() {
        std::size_t start = (skip_ws(), pos_);
        NodePtr lhs = term();
        for (;;) {
            char c = peek();
            if (c != '+' && c != '-') return lhs;
            ++pos_;
            NodePtr rhs = term();
            lhs = make(c == '+' ? NodeKind::add : NodeKind::sub, {lhs, rhs}, {start, pos_});
        }
    }

    NodePtr term() {
        std::size_t start = (skip_ws(), pos_);
        NodePtr lhs = power();
        for (;;) {
            char c = peek();
            if (c != '*' && c != '/') return lhs;
            ++pos_;
            NodePtr rhs = power();
            lhs = make(c == '*' ? NodeKind::mul : NodeKind::div, {lhs, rhs}, {start, pos_});
        }
    }

    NodePtr power() {
        std::size_t start = (skip_ws(), pos_);
        NodePtr base = unary();
        if (peek() != '^') return base;
        ++pos_;
        NodePtr ex = power();
        return make(NodeKind::pow, {base, ex}, {start, pos_});
    }

    NodePtr unary() {
        std::size_t start = (skip_ws(), pos_);
        if (peek() == '-') {
            ++pos_;
            NodePtr a = unary();
            return make(NodeKind::negate, {a}, {start, pos_});
        }
        return primary();
    }

    NodePtr primary() {
        char c = peek();
        std::size_t start = pos_;
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string name(text_.substr(start, pos_ - start));
            if (peek() == '(') {
                const FunctionInfo* f = find_function(name);
                if (!f) throw UnknownVariable(name, start);
                ++pos_;
                std::vector<NodePtr> args;
                args.push_back(expression());
                for (std::size_t i = 1; i < f->arity; ++i) {
                    if (peek() != ',') fail({"','"});
                    ++pos_;
                    args.push_back(expression());
                }
                if (peek() != ')') fail({"')'"});
                ++pos_;
                auto n = std::make_shared<ExprNode>();
                n->kind = NodeKind::call;
                n->fn = f->fn;
                n->args = std::move(args);
                n->span = {start, pos_};
                return n;
            }
            for (std::size_t i = 0; i < vars_.size(); ++i) {
                if (vars_[i] == name) {
                    auto n = std::make_shared<ExprNode>();
                    n->kind = NodeKind::variable;
                    n->var = i;
                    n->span = {start, pos_};
                    return n;
                }
            }
            if (auto it = params_.find(name); it != params_.end()) {
                auto n = std::make_shared<ExprNode>();
                n->kind = NodeKind::constant;
                n->value = std::abs(it->second);
                n->span = {start, pos_};
                if (it->second < 0.0) return make(NodeKind::negate, {n}, {start, pos_});
                return n;
            }
            throw UnknownVariable(name, start);
        }
        if (c == '(') {
            ++pos_;
            NodePtr e = expression();
            if (peek() != ')') fail({"')'"});
            ++pos_;
            return e;
        }
        fail({"number", "identifier", "'('", "'-'"});
    }

    NodePtr number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        std::string lit(text_.substr(start, pos_ - start));
        char* end = nullptr;
        double v = std::strtod(lit.c_str(), &end);
        if (end != lit.c_str() + lit.size()) {
            pos_ = start;
            fail({"number"});
        }
        auto n = std::make_shared<ExprNode>();
        n->kind = NodeKind::constant;
        n->value = v;
        n->span = {start, pos_};
        return n;
    }

    std::string_view text_;
    const std::vector<std::string>& vars_;
    const std::map<std::string, double>& params_;
    std::size_t pos_ = 0;
};

void mark_used(const ExprNode& n, std::vector<bool>& used) {
    if (n.kind == NodeKind::variable) used[n.var] = true;
    for (const auto& a : n.args) mark_used(*a, used);
}

void print_node(const ExprNode& n, const std::vector<std::string>& vars, std::string& out) {
    switch (n.kind) {
        case NodeKind::constant: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            out += buf;
            return;
        }
        case NodeKind::variable: out += vars[n.var]; return;
        case NodeKind::negate:
            out += "(-";
            print_node(*n.args[0], vars, out);
            out += ")";
            return;
        case NodeKind::call:
            out += function_name(n.fn);
            out += "(";
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ",";
                print_node(*n.args[i], vars, out);
            }
            out += ")";
            return;
        default: break;
    }
    const char* op = n.kind == NodeKind::add ? "+" : n.kind == NodeKind::sub ? "-"
                   : n.kind == NodeKind::mul ? "*" : n.kind == NodeKind::div ? "/" : "^";
    out += "(";
    print_node(*n.args[0], vars, out);
    out += op;
    print_node(*n.args[1], vars, out);
    out += ")";
}

bool same_node(const ExprNode& a, const ExprNode& b) {
    if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
    if (a.kind == NodeKind::constant && a.value != b.value) return false;
    if (a.kind == NodeKind::variable && a.var != b.var) return false;
    if (a.kind == NodeKind::call && a.fn != b.fn) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!same_node(*a.args[i], *b.args[i])) return false;
    return true;
}

}  // namespace

Expr::Expr(NodePtr root, std::vector<std::string> variables, std::string source)
    : root_(std::move(root)),
      vars_(std::make_shared<const std::vector<std::string>>(std::move(variables))),
      source_(std::make_shared<const std::string>(std::move(source))) {
    std::vector<bool> used(vars_->size(), false);
    if (root_) mark_used(*root_, used);
    used_ = std::make_shared<const std::vector<bool>>(std::move(used));
}

bool Expr::is_constant() const {
    for (bool u : *used_)
        if (u) return false;
    return true;
}

Expr parse(std::string_view text, const std::vector<std::string>& chart_vars,
           const std::map<std::string, double>& parameters) {
    Parser p(text, chart_vars, parameters);
    NodePtr root = p.parse_all();
    return Expr(root, chart_vars, std::string(text));
}

std::string to_string(const Expr& e) {
    std::string out;
    print_node(e.root(), e.variables(), out);
    return out;
}

bool same_tree(const Expr& a, const Expr& b) { return same_node(a.root(), b.root()); }

std::vector<double> point_from_bindings(const Expr& e, const Bindings& b) {
    const auto& vars = e.variables();
    std::vector<double> x(vars.size(), 0.0);
    for (std::size_t i = 0; i < vars.size(); ++i) {
        auto it = b.find(vars[i]);
        if (it == b.end()) {
            if (e.depends_on(i)) throw UnknownVariable(vars[i], 0);
            continue;
        }
        x[i] = it->second;
    }
    return x;
}

double eval(const Expr& e, const Bindings& b) {
    auto x = point_from_bindings(e, b);
    return e.eval(std::span<const double>(x));
}

std::vector<double> grad(const Expr& e, const Bindings& b) {
    auto x = point_from_bindings(e, b);
    return grad(e, std::span<const double>(x));
}

Matrix<double> hess(const Expr& e, const Bindings& b) {
    auto x = point_from_bindings(e, b);
    return hess(e, std::span<const double>(x));
}

}  // namespace cmech
