#include "subell/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>
#include <vector>

namespace subell {

struct Expression::Node {
    enum class Kind { Const, Var, Add, Sub, Mul, Div, Neg, Abs, Sign, Pow };
    Kind kind;
    double cval = 0.0;  // Const
    int var = 0;        // Var, 0-based
    int expo = 0;       // Pow
    NodePtr a, b;
};

namespace {

using Node = Expression::Node;
using Kind = Node::Kind;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto nd = std::make_shared<Node>();
    nd->kind = k;
    nd->a = std::move(a);
    nd->b = std::move(b);
    return nd;
}

NodePtr cnst(double v) {
    auto nd = std::make_shared<Node>();
    nd->kind = Kind::Const;
    nd->cval = v;
    return nd;
}

NodePtr var(int j) {
    auto nd = std::make_shared<Node>();
    nd->kind = Kind::Var;
    nd->var = j;
    return nd;
}

NodePtr powr(NodePtr a, int k) {
    auto nd = std::make_shared<Node>();
    nd->kind = Kind::Pow;
    nd->a = std::move(a);
    nd->expo = k;
    return nd;
}

bool is_const(const NodePtr& n, double v) { return n->kind == Kind::Const && n->cval == v; }

// Smart constructors keep derivative trees from drowning in zero terms.
NodePtr add(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return make(Kind::Add, std::move(a), std::move(b));
}
NodePtr sub(NodePtr a, NodePtr b) {
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return make(Kind::Neg, std::move(b));
    return make(Kind::Sub, std::move(a), std::move(b));
}
NodePtr mul(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0) || is_const(b, 0.0)) return cnst(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return make(Kind::Mul, std::move(a), std::move(b));
}
NodePtr divi(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0)) return cnst(0.0);
    if (is_const(b, 1.0)) return a;
    return make(Kind::Div, std::move(a), std::move(b));
}

double eval(const Node& nd, View x);

double eval_sign(const Node& inner, View x) {
    double v = eval(inner, x);
    if (v == 0.0) {
        // the probe sits exactly on the kink: nudge and record it
        ++diag::kink_perturbations();
        v = 1e-9;
    }
    return v > 0.0 ? 1.0 : -1.0;
}

double eval(const Node& nd, View x) {
    switch (nd.kind) {
        case Kind::Const: return nd.cval;
        case Kind::Var:
            require(nd.var < static_cast<int>(x.size()),
                    "expression: coordinate index beyond point dimension");
            return x[static_cast<std::size_t>(nd.var)];
        case Kind::Add: return eval(*nd.a, x) + eval(*nd.b, x);
        case Kind::Sub: return eval(*nd.a, x) - eval(*nd.b, x);
        case Kind::Mul: return eval(*nd.a, x) * eval(*nd.b, x);
        case Kind::Div: return eval(*nd.a, x) / eval(*nd.b, x);
        case Kind::Neg: return -eval(*nd.a, x);
        case Kind::Abs: return std::fabs(eval(*nd.a, x));
        case Kind::Sign: return eval_sign(*nd.a, x);
        case Kind::Pow: return std::pow(eval(*nd.a, x), nd.expo);
    }
    return 0.0;
}

NodePtr diff(const NodePtr& nd, int j) {
    switch (nd->kind) {
        case Kind::Const: return cnst(0.0);
        case Kind::Var: return cnst(nd->var == j ? 1.0 : 0.0);
        case Kind::Add: return add(diff(nd->a, j), diff(nd->b, j));
        case Kind::Sub: return sub(diff(nd->a, j), diff(nd->b, j));
        case Kind::Mul: return add(mul(diff(nd->a, j), nd->b), mul(nd->a, diff(nd->b, j)));
        case Kind::Div:
            return divi(sub(mul(diff(nd->a, j), nd->b), mul(nd->a, diff(nd->b, j))),
                        powr(nd->b, 2));
        case Kind::Neg: {
            NodePtr da = diff(nd->a, j);
            if (is_const(da, 0.0)) return da;
            return make(Kind::Neg, std::move(da));
        }
        case Kind::Abs: return mul(make(Kind::Sign, nd->a), diff(nd->a, j));
        case Kind::Sign: return cnst(0.0);  // zero off the kink, nudged on it
        case Kind::Pow: {
            const int k = nd->expo;
            if (k == 0) return cnst(0.0);
            NodePtr base = k == 1 ? cnst(1.0) : k == 2 ? nd->a : powr(nd->a, k - 1);
            return mul(mul(cnst(static_cast<double>(k)), std::move(base)), diff(nd->a, j));
        }
    }
    return cnst(0.0);
}

int max_var(const NodePtr& nd) {
    if (!nd) return -1;
    if (nd->kind == Kind::Var) return nd->var;
    return std::max(nd->a ? max_var(nd->a) : -1, nd->b ? max_var(nd->b) : -1);
}

void print(const NodePtr& nd, std::string& out) {
    char buf[40];
    switch (nd->kind) {
        case Kind::Const:
            std::snprintf(buf, sizeof buf, "%.17g", nd->cval);
            out += buf;
            return;
        case Kind::Var:
            std::snprintf(buf, sizeof buf, "x%d", nd->var + 1);
            out += buf;
            return;
        case Kind::Add:
        case Kind::Sub:
        case Kind::Mul:
        case Kind::Div: {
            const char* op = nd->kind == Kind::Add   ? " + "
                             : nd->kind == Kind::Sub ? " - "
                             : nd->kind == Kind::Mul ? " * "
                                                     : " / ";
            out += '(';
            print(nd->a, out);
            out += op;
            print(nd->b, out);
            out += ')';
            return;
        }
        case Kind::Neg:
            out += "(-";
            print(nd->a, out);
            out += ')';
            return;
        case Kind::Abs:
            out += "abs(";
            print(nd->a, out);
            out += ')';
            return;
        case Kind::Sign:
            out += "sign(";
            print(nd->a, out);
            out += ')';
            return;
        case Kind::Pow:
            out += '(';
            print(nd->a, out);
            std::snprintf(buf, sizeof buf, "^%d", nd->expo);
            out += buf;
            out += ')';
            return;
    }
}

class Parser {
public:
    explicit Parser(const std::string& src) : s_(src) {}

    NodePtr run() {
        skip_ws();
        if (i_ >= s_.size()) fail("empty expression");
        NodePtr e = expr();
        skip_ws();
        if (i_ < s_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("expression: " + what + " at position " +
                                    std::to_string(i_ + 1));
    }

    void skip_ws() {
        while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
    }

    bool eat(char c) {
        skip_ws();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr e = term();
        for (;;) {
            if (eat('+'))
                e = make(Kind::Add, e, term());
            else if (eat('-'))
                e = make(Kind::Sub, e, term());
            else
                return e;
        }
    }

    NodePtr term() {
        NodePtr e = factor();
        for (;;) {
            if (eat('*'))
                e = make(Kind::Mul, e, factor());
            else if (eat('/'))
                e = make(Kind::Div, e, factor());
            else
                return e;
        }
    }

    NodePtr factor() {
        skip_ws();
        if (eat('-')) return make(Kind::Neg, factor());
        NodePtr e = primary();
        while (eat('^')) e = powr(e, integer());
        return e;
    }

    int integer() {
        skip_ws();
        bool neg = false;
        if (i_ < s_.size() && s_[i_] == '-') {
            neg = true;
            ++i_;
        }
        if (i_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[i_])))
            fail("expected an integer exponent");
        long v = 0;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
            v = v * 10 + (s_[i_] - '0');
            if (v > 64) fail("exponent out of range");
            ++i_;
        }
        return static_cast<int>(neg ? -v : v);
    }

    NodePtr primary() {
        skip_ws();
        if (i_ >= s_.size()) fail("expected a value");
        const char c = s_[i_];
        if (c == '(') {
            ++i_;
            NodePtr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return word();
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        const std::size_t start = i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        if (i_ < s_.size() && s_[i_] == '.') {
            ++i_;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        }
        if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
            std::size_t mark = i_++;
            if (i_ < s_.size() && (s_[i_] == '+' || s_[i_] == '-')) ++i_;
            if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
                while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
            } else {
                i_ = mark;  // the 'e' belongs to something else
            }
        }
        try {
            return cnst(std::stod(s_.substr(start, i_ - start)));
        } catch (const std::out_of_range&) {
            i_ = start;
            fail("number out of range");
        }
    }

    NodePtr word() {
        const std::size_t start = i_;
        while (i_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[i_]))) ++i_;
        const std::string w = s_.substr(start, i_ - start);
        if (w == "x") {
            if (i_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[i_]))) {
                i_ = start;
                fail("expected digits after 'x'");
            }
            long v = 0;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
                v = v * 10 + (s_[i_] - '0');
                if (v > kMaxDim) break;
                ++i_;
            }
            if (v < 1 || v > kMaxDim) {
                i_ = start;
                fail("coordinate index out of range (x1..x" + std::to_string(kMaxDim) + ")");
            }
            return var(static_cast<int>(v) - 1);
        }
        if (w == "abs" || w == "sign") {
            if (!eat('(')) fail("expected '(' after '" + w + "'");
            NodePtr e = expr();
            if (!eat(')')) fail("expected ')'");
            return make(w == "abs" ? Kind::Abs : Kind::Sign, e);
        }
        i_ = start;
        fail("unknown identifier '" + w + "'");
    }

    const std::string& s_;
    std::size_t i_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& src) {
    return Expression(Parser(src).run());
}

double Expression::value(View x) const {
    if (!root_) return 0.0;
    return eval(*root_, x);
}

Expression Expression::derivative(int j) const {
    require(j >= 0 && j < kMaxDim, "expression: derivative index out of range");
    if (!root_) return Expression();
    return Expression(diff(root_, j));
}

std::string Expression::str() const {
    if (!root_) return "0";
    std::string out;
    print(root_, out);
    return out;
}

int Expression::min_dim() const { return max_var(root_) + 1; }

Coefficient Expression::coefficient(int n) const {
    require(n >= 1 && n <= kMaxDim, "expression: bad ambient dimension");
    require(min_dim() <= n, "expression: coordinate index beyond the frame dimension");
    if (!root_) return Coefficient::zero();
    if (root_->kind == Node::Kind::Const) return Coefficient::constant(root_->cval);

    struct Partial {
        int j;
        Expression e;
    };
    auto partials = std::make_shared<std::vector<Partial>>();
    for (int j = 0; j < n; ++j) {
        Expression d = derivative(j);
        if (!is_const(d.root_, 0.0)) partials->push_back({j, std::move(d)});
    }
    Expression self = *this;
    return Coefficient::analytic(
        [self](View x) { return self.value(x); },
        [partials](View x, std::span<double> g) {
            for (const Partial& p : *partials) g[static_cast<std::size_t>(p.j)] = p.e.value(x);
        },
        str());
}

}  // namespace subell
