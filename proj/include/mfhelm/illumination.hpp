#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

#include "mfhelm/common.hpp"
#include "mfhelm/mesh.hpp"

namespace mfhelm {

/// Boundary-datum expressions over x1, x2 with +, -, *, sin, cos and
/// numeric constants.
///
/// Grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor ('*' factor)*
///   factor := number | 'x1' | 'x2' | '(' expr ')'
///           | ('sin'|'cos') '(' expr ')' | '-' factor
class Illumination {
public:
    struct Node {
        enum class Kind { number, var_x1, var_x2, add, sub, mul, neg, sin_fn, cos_fn };
        Kind kind;
        double value = 0.0;
        std::shared_ptr<const Node> lhs, rhs;
    };

    Illumination() = default;

    double eval(double x1, double x2) const { return eval_node(root_.get(), x1, x2); }
    double eval(const Point& p) const { return eval(p.x, p.y); }

    /// Value and gradient at (x1, x2), by forward-mode differentiation.
    struct ValueGrad {
        double value, dx1, dx2;
    };
    ValueGrad eval_grad(double x1, double x2) const { return eval_grad_node(root_.get(), x1, x2); }

    const std::string& source() const { return source_; }
    std::string print() const { return print_node(root_.get(), 0); }
    bool empty() const { return root_ == nullptr; }

    bool same_tree(const Illumination& other) const { return same_node(root_.get(), other.root_.get()); }

    static Illumination parse(const std::string& src);
    static Illumination constant(double c)
    {
        Illumination il;
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::number;
        n->value = std::abs(c);
        if (c < 0.0) {
            // negatives are negation nodes, as the parser would build them
            auto neg = std::make_shared<Node>();
            neg->kind = Node::Kind::neg;
            neg->lhs = n;
            il.root_ = neg;
        } else {
            il.root_ = n;
        }
        il.source_ = il.print();
        return il;
    }

private:
    std::shared_ptr<const Node> root_;
    std::string source_;

    static double eval_node(const Node* n, double x1, double x2)
    {
        switch (n->kind) {
            case Node::Kind::number: return n->value;
            case Node::Kind::var_x1: return x1;
            case Node::Kind::var_x2: return x2;
            case Node::Kind::add: return eval_node(n->lhs.get(), x1, x2) + eval_node(n->rhs.get(), x1, x2);
            case Node::Kind::sub: return eval_node(n->lhs.get(), x1, x2) - eval_node(n->rhs.get(), x1, x2);
            case Node::Kind::mul: return eval_node(n->lhs.get(), x1, x2) * eval_node(n->rhs.get(), x1, x2);
            case Node::Kind::neg: return -eval_node(n->lhs.get(), x1, x2);
            case Node::Kind::sin_fn: return std::sin(eval_node(n->lhs.get(), x1, x2));
            case Node::Kind::cos_fn: return std::cos(eval_node(n->lhs.get(), x1, x2));
        }
        return 0.0;
    }

    static ValueGrad eval_grad_node(const Node* n, double x1, double x2)
    {
        switch (n->kind) {
            case Node::Kind::number: return {n->value, 0.0, 0.0};
            case Node::Kind::var_x1: return {x1, 1.0, 0.0};
            case Node::Kind::var_x2: return {x2, 0.0, 1.0};
            case Node::Kind::add: {
                auto a = eval_grad_node(n->lhs.get(), x1, x2), b = eval_grad_node(n->rhs.get(), x1, x2);
                return {a.value + b.value, a.dx1 + b.dx1, a.dx2 + b.dx2};
            }
            case Node::Kind::sub: {
                auto a = eval_grad_node(n->lhs.get(), x1, x2), b = eval_grad_node(n->rhs.get(), x1, x2);
                return {a.value - b.value, a.dx1 - b.dx1, a.dx2 - b.dx2};
            }
            case Node::Kind::mul: {
                auto a = eval_grad_node(n->lhs.get(), x1, x2), b = eval_grad_node(n->rhs.get(), x1, x2);
                return {a.value * b.value, a.dx1 * b.value + a.value * b.dx1,
                        a.dx2 * b.value + a.value * b.dx2};
            }
            case Node::Kind::neg: {
                auto a = eval_grad_node(n->lhs.get(), x1, x2);
                return {-a.value, -a.dx1, -a.dx2};
            }
            case Node::Kind::sin_fn: {
                auto a = eval_grad_node(n->lhs.get(), x1, x2);
                double c = std::cos(a.value);
                return {std::sin(a.value), c * a.dx1, c * a.dx2};
            }
            case Node::Kind::cos_fn: {
                auto a = eval_grad_node(n->lhs.get(), x1, x2);
                double s = -std::sin(a.value);
                return {std::cos(a.value), s * a.dx1, s * a.dx2};
            }
        }
        return {0.0, 0.0, 0.0};
    }

    // Precedence levels: 0 add/sub, 1 mul, 2 neg, 3 atoms.
    static int level(const Node* n)
    {
        switch (n->kind) {
            case Node::Kind::add:
            case Node::Kind::sub: return 0;
            case Node::Kind::mul: return 1;
            case Node::Kind::neg: return 2;
            default: return 3;
        }
    }

    static std::string print_node(const Node* n, int min_level)
    {
        std::string s;
        switch (n->kind) {
            case Node::Kind::number: {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", n->value);
                s = buf;
                break;
            }
            case Node::Kind::var_x1: s = "x1"; break;
            case Node::Kind::var_x2: s = "x2"; break;
            case Node::Kind::add:
                s = print_node(n->lhs.get(), 0) + "+" + print_node(n->rhs.get(), 1);
                break;
            case Node::Kind::sub:
                s = print_node(n->lhs.get(), 0) + "-" + print_node(n->rhs.get(), 1);
                break;
            case Node::Kind::mul:
                s = print_node(n->lhs.get(), 1) + "*" + print_node(n->rhs.get(), 2);
                break;
            case Node::Kind::neg:
                // Operand is parenthesized unless atomic, so the tree reparses
                // identically (neg binds tighter than '*').
                s = "-" + print_node(n->lhs.get(), 3);
                break;
            case Node::Kind::sin_fn: s = "sin(" + print_node(n->lhs.get(), 0) + ")"; break;
            case Node::Kind::cos_fn: s = "cos(" + print_node(n->lhs.get(), 0) + ")"; break;
        }
        if (level(n) < min_level) return "(" + s + ")";
        return s;
    }

    static bool same_node(const Node* a, const Node* b)
    {
        if (a == nullptr || b == nullptr) return a == b;
        if (a->kind != b->kind) return false;
        if (a->kind == Node::Kind::number && a->value != b->value) return false;
        return same_node(a->lhs.get(), b->lhs.get()) && same_node(a->rhs.get(), b->rhs.get());
    }

    class Parser;
};

class Illumination::Parser {
public:
    explicit Parser(const std::string& src) : src_(src) {}

    std::shared_ptr<const Node> run()
    {
        auto e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    const std::string& src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const
    {
        throw validation_error(format_msg("illumination: syntax error at offset ", pos_, ": ", what));
    }

    void skip_ws()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(char c)
    {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek()
    {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    static std::shared_ptr<const Node> make(Node::Kind k, std::shared_ptr<const Node> l = nullptr,
                                            std::shared_ptr<const Node> r = nullptr, double v = 0.0)
    {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->lhs = std::move(l);
        n->rhs = std::move(r);
        n->value = v;
        return n;
    }

    std::shared_ptr<const Node> parse_expr()
    {
        auto lhs = parse_term();
        for (;;) {
            if (eat('+'))
                lhs = make(Node::Kind::add, lhs, parse_term());
            else if (eat('-'))
                lhs = make(Node::Kind::sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    std::shared_ptr<const Node> parse_term()
    {
        auto lhs = parse_factor();
        while (eat('*')) lhs = make(Node::Kind::mul, lhs, parse_factor());
        return lhs;
    }

    std::shared_ptr<const Node> parse_factor()
    {
        char c = peek();
        if (c == '-') {
            ++pos_;
            return make(Node::Kind::neg, parse_factor());
        }
        if (c == '(') {
            ++pos_;
            auto e = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* start = src_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(start, &end);
            if (end == start) fail("malformed number");
            pos_ += static_cast<std::size_t>(end - start);
            return make(Node::Kind::number, nullptr, nullptr, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t ident_pos = pos_;
            std::string id;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                id += src_[pos_++];
            if (id == "x1") return make(Node::Kind::var_x1);
            if (id == "x2") return make(Node::Kind::var_x2);
            if (id == "sin" || id == "cos") {
                if (!eat('(')) fail("expected '(' after " + id);
                auto e = parse_expr();
                if (!eat(')')) fail("expected ')'");
                return make(id == "sin" ? Node::Kind::sin_fn : Node::Kind::cos_fn, e);
            }
            pos_ = ident_pos;
            throw validation_error(
                format_msg("illumination: unknown identifier \"", id, "\" at offset ", ident_pos));
        }
        fail(pos_ < src_.size() ? format_msg("unexpected character '", c, "'")
                                : std::string("unexpected end of input"));
    }
};

inline Illumination Illumination::parse(const std::string& src)
{
    if (src.empty()) throw validation_error("illumination: empty expression");
    Illumination il;
    il.root_ = Parser(src).run();
    il.source_ = src;
    return il;
}

}  // namespace mfhelm
