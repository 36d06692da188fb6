#pragma once

#include <memory>
#include <string>

#include "subell/frame.hpp"
#include "subell/types.hpp"

namespace subell {

// Closed-form mini-language for frame coefficients:
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := number | 'x' digits | 'abs' '(' expr ')' | '(' expr ')'
//           | factor '^' integer | '-' factor
//
// Coordinates are 1-based in source text ("x1", "x2", ...) and map to the
// 0-based ambient indices. Derivatives are symbolic: abs differentiates to
// sign away from the kink, sign differentiates to zero, and a derivative
// probe landing exactly on a kink is nudged by 1e-9 (counted in
// diag::kink_perturbations, same policy as the built-in nonsmooth frame).
// sign(...) is accepted on input so printed derivatives reparse.
class Expression {
public:
    struct Node;  // opaque; defined in expression.cpp

    Expression() = default;  // the zero expression

    // Throws std::invalid_argument naming the 1-based character position of
    // the first offending token.
    static Expression parse(const std::string& src);

    double value(View x) const;

    // d/dx_j with 0-based j; purely structural, no numerics.
    Expression derivative(int j) const;

    // Parenthesized form that reparses to an equivalent evaluator.
    std::string str() const;

    // 1 + the highest coordinate index referenced (0 for constants).
    int min_dim() const;

    // Value plus gradient bundled for Frame::set_component; n is the ambient
    // dimension the gradient spans. Plain numbers fold to constant kinds.
    Coefficient coefficient(int n) const;

private:
    using NodePtr = std::shared_ptr<const Node>;
    explicit Expression(NodePtr root) : root_(std::move(root)) {}
    NodePtr root_;
};

}  // namespace subell
