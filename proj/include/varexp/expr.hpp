#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace varexp {

/// Positioned syntax error; `offset` is the byte offset into the source text.
struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(const std::string& what, std::size_t off)
        : std::runtime_error(what + " (at byte " + std::to_string(off) + ")"), offset(off) {}
};

namespace expr_detail {

enum class NodeKind { number, variable, unary_neg, binary, call };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    NodeKind kind = NodeKind::number;
    double value = 0.0;      // number
    char var = 'x';          // variable: x, y, r
    char op = '+';           // binary: + - * / ^
    std::string name;        // call
    std::vector<NodePtr> args;
};

inline std::size_t function_arity(const std::string& name) {
    if (name == "sin" || name == "cos" || name == "exp" || name == "log" || name == "abs")
        return 1;
    if (name == "min" || name == "max") return 2;
    if (name == "clamp") return 3;
    return 0;  // unknown
}

struct Parser {
    const std::string& src;
    std::size_t pos = 0;

    explicit Parser(const std::string& s) : src(s) {}

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    bool peek(char c) {
        skip_ws();
        return pos < src.size() && src[pos] == c;
    }

    bool consume(char c) {
        if (!peek(c)) return false;
        ++pos;
        return true;
    }

    void expect(char c, const char* what) {
        if (!consume(c)) throw ParseError(std::string("expected ") + what, pos);
    }

    // sum := term (('+' | '-') term)*
    NodePtr parse_sum() {
        NodePtr lhs = parse_term();
        for (;;) {
            skip_ws();
            if (pos >= src.size() || (src[pos] != '+' && src[pos] != '-')) return lhs;
            const char op = src[pos++];
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::binary;
            n->op = op;
            n->args = {lhs, parse_term()};
            lhs = n;
        }
    }

    // term := unary (('*' | '/') unary)*
    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            skip_ws();
            if (pos >= src.size() || (src[pos] != '*' && src[pos] != '/')) return lhs;
            const char op = src[pos++];
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::binary;
            n->op = op;
            n->args = {lhs, parse_unary()};
            lhs = n;
        }
    }

    // unary := '-' unary | power    (so ^ binds tighter than unary minus)
    NodePtr parse_unary() {
        skip_ws();
        if (consume('-')) {
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::unary_neg;
            n->args = {parse_unary()};
            return n;
        }
        return parse_power();
    }

    // power := atom ('^' unary)?   (right-associative via the unary recursion)
    NodePtr parse_power() {
        NodePtr base = parse_atom();
        skip_ws();
        if (pos < src.size() && src[pos] == '^') {
            ++pos;
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::binary;
            n->op = '^';
            n->args = {base, parse_unary()};
            return n;
        }
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= src.size()) throw ParseError("unexpected end of input", pos);
        const char c = src[pos];
        if (c == '(') {
            ++pos;
            NodePtr inner = parse_sum();
            expect(')', "')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos);
    }

    NodePtr parse_number() {
        const std::size_t start = pos;
        double value = 0.0;
        const char* first = src.data() + pos;
        const char* last = src.data() + src.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr == first) throw ParseError("malformed number", start);
        pos += static_cast<std::size_t>(ptr - first);
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::number;
        n->value = value;
        return n;
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos;
        while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) ||
                                    src[pos] == '_'))
            ++pos;
        const std::string name = src.substr(start, pos - start);
        if (name == "x" || name == "y" || name == "r") {
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::variable;
            n->var = name[0];
            return n;
        }
        const std::size_t arity = function_arity(name);
        if (arity == 0) throw ParseError("unknown identifier '" + name + "'", start);
        expect('(', "'(' after function name");
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::call;
        n->name = name;
        n->args.push_back(parse_sum());
        while (consume(',')) n->args.push_back(parse_sum());
        expect(')', "')'");
        if (n->args.size() != arity)
            throw ParseError("function '" + name + "' expects " + std::to_string(arity) +
                                 " argument(s), got " + std::to_string(n->args.size()),
                             start);
        return n;
    }
};

inline double eval_node(const Node& n, double x, double y, double r) {
    switch (n.kind) {
        case NodeKind::number: return n.value;
        case NodeKind::variable: return n.var == 'x' ? x : (n.var == 'y' ? y : r);
        case NodeKind::unary_neg: return -eval_node(*n.args[0], x, y, r);
        case NodeKind::binary: {
            const double a = eval_node(*n.args[0], x, y, r);
            const double b = eval_node(*n.args[1], x, y, r);
            switch (n.op) {
                case '+': return a + b;
                case '-': return a - b;
                case '*': return a * b;
                case '/': return a / b;
                default: return std::pow(a, b);
            }
        }
        case NodeKind::call: {
            const double a = eval_node(*n.args[0], x, y, r);
            if (n.name == "sin") return std::sin(a);
            if (n.name == "cos") return std::cos(a);
            if (n.name == "exp") return std::exp(a);
            if (n.name == "log") return std::log(a);
            if (n.name == "abs") return std::abs(a);
            const double b = eval_node(*n.args[1], x, y, r);
            if (n.name == "min") return std::min(a, b);
            if (n.name == "max") return std::max(a, b);
            const double c = eval_node(*n.args[2], x, y, r);
            return std::clamp(a, b, c);
        }
    }
    return 0.0;
}

inline std::string format_number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline int precedence(const Node& n) {
    switch (n.kind) {
        case NodeKind::binary:
            if (n.op == '+' || n.op == '-') return 1;
            if (n.op == '*' || n.op == '/') return 2;
            return 4;  // ^
        case NodeKind::unary_neg: return 3;
        default: return 5;  // atoms
    }
}

inline void print_node(const Node& n, std::string& out);

inline void print_child(const Node& child, int parentPrec, bool tight, std::string& out) {
    const bool parens = precedence(child) < parentPrec || (tight && precedence(child) == parentPrec);
    if (parens) out += '(';
    print_node(child, out);
    if (parens) out += ')';
}

inline void print_node(const Node& n, std::string& out) {
    switch (n.kind) {
        case NodeKind::number: out += format_number(n.value); return;
        case NodeKind::variable: out += n.var; return;
        case NodeKind::unary_neg:
            out += '-';
            print_child(*n.args[0], 3, false, out);
            return;
        case NodeKind::binary: {
            const int p = precedence(n);
            if (n.op == '^') {
                // right-associative: parenthesize a left child at equal level
                print_child(*n.args[0], p, true, out);
                out += " ^ ";
                print_child(*n.args[1], p, false, out);
            } else {
                print_child(*n.args[0], p, false, out);
                out += ' ';
                out += n.op;
                out += ' ';
                // - and / are left-associative: guard equal levels on the right
                print_child(*n.args[1], p, n.op == '-' || n.op == '/', out);
            }
            return;
        }
        case NodeKind::call: {
            out += n.name;
            out += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ", ";
                print_node(*n.args[i], out);
            }
            out += ')';
            return;
        }
    }
}

}  // namespace expr_detail

/// A parsed expression over variables x, y, r.
struct Expression {
    expr_detail::NodePtr root;

    double operator()(double x, double y = 0.0, double r = 0.0) const {
        return expr_detail::eval_node(*root, x, y, r);
    }

    std::string pretty() const {
        std::string out;
        expr_detail::print_node(*root, out);
        return out;
    }

    /// Whether the variable appears anywhere in the tree.
    bool uses(char var) const {
        std::vector<const expr_detail::Node*> stack{root.get()};
        while (!stack.empty()) {
            const auto* n = stack.back();
            stack.pop_back();
            if (n->kind == expr_detail::NodeKind::variable && n->var == var) return true;
            for (const auto& a : n->args) stack.push_back(a.get());
        }
        return false;
    }
};

/// Grammar: sum of terms of unary-signed powers over numbers, variables x, y,
/// r, calls sin/cos/exp/log/abs (1), min/max (2), clamp (3), parentheses.
/// ^ is right-associative and binds tighter than unary minus. Errors carry
/// the byte offset of the offending token.
inline Expression parse_expression(const std::string& text) {
    expr_detail::Parser p(text);
    Expression e{p.parse_sum()};
    p.skip_ws();
    if (p.pos != text.size()) throw ParseError("trailing input", p.pos);
    return e;
}

}  // namespace varexp
