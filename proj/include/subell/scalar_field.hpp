#pragma once

#include <functional>
#include <memory>
#include <string>

#include "subell/types.hpp"

namespace subell {

// A scalar function on R^n together with its first and second derivatives.
// Subclasses that know their derivatives in closed form override the
// derivative members; the base class falls back to central finite
// differences of value(), with steps
//   first  derivative: h = eps^(1/3) * max(1, |x_j|)
//   second derivative: h = eps^(1/4) * max(1, |x_j|)
// which balance truncation against cancellation for double precision.
class ScalarField {
public:
    explicit ScalarField(int dim) : dim_(dim) {
        require(dim >= 1 && dim <= kMaxDim, "ScalarField: dimension out of range");
    }
    virtual ~ScalarField() = default;

    int dim() const { return dim_; }

    virtual double value(View x) const = 0;
    virtual double partial(View x, int j) const;
    virtual double partial2(View x, int i, int j) const;

    // Bulk variants used by quadrature caches; defaults loop the scalar ones.
    virtual void gradient(View x, std::span<double> out) const;
    virtual void hessian(View x, std::span<double> out_rowmajor) const;

    virtual std::string describe() const { return "field"; }

private:
    int dim_;
};

using FieldPtr = std::shared_ptr<const ScalarField>;

// Field defined by closures. grad/hess closures are optional; when absent the
// finite-difference fallback of the base class is used (the fallback for
// hessian differentiates the exact gradient if one was given).
class AnalyticField final : public ScalarField {
public:
    using ValueFn = std::function<double(View)>;
    using GradFn = std::function<void(View, std::span<double>)>;
    using HessFn = std::function<void(View, std::span<double>)>;

    AnalyticField(int dim, ValueFn value, GradFn grad = nullptr, HessFn hess = nullptr,
                  std::string label = "analytic")
        : ScalarField(dim),
          value_(std::move(value)),
          grad_(std::move(grad)),
          hess_(std::move(hess)),
          label_(std::move(label)) {}

    double value(View x) const override { return value_(x); }
    double partial(View x, int j) const override;
    double partial2(View x, int i, int j) const override;
    void gradient(View x, std::span<double> out) const override;
    void hessian(View x, std::span<double> out) const override;
    std::string describe() const override { return label_; }

private:
    ValueFn value_;
    GradFn grad_;
    HessFn hess_;
    std::string label_;
};

// Convenience constructors for common shapes.
FieldPtr constant_field(int dim, double c);
FieldPtr coordinate_field(int dim, int j);

// u(x) = g(q), q = |x - z|^2, with g, g', g'' supplied. Covers Gaussians,
// mollified inverse powers and other radial profiles with exact derivatives.
FieldPtr radial_sq_field(Point z, std::function<double(double)> g,
                         std::function<double(double)> dg, std::function<double(double)> d2g,
                         std::string label = "radial");

// u(x) = prod_j f_j(x_j) from per-axis (f, f', f'') triples; exact derivatives
// by the product rule.
struct AxisProfile {
    std::function<double(double)> f, df, d2f;
};
FieldPtr tensor_product_field(std::vector<AxisProfile> axes, std::string label = "tensor");

// u(x) = a(x) b(x); derivatives by the product rule.
FieldPtr product_field(FieldPtr a, FieldPtr b);

// u(x) = c0 + sum_i coeff_i f_i(x).
FieldPtr linear_combination(std::vector<std::pair<double, FieldPtr>> parts, double c0 = 0.0,
                            std::string label = "sum");

// u(x) = p(g(x)) with the profile's (f, f', f'') chained onto g.
FieldPtr compose_field(AxisProfile p, FieldPtr g, std::string label = "compose");

}  // namespace subell
