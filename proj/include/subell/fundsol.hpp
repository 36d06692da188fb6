#pragma once

#include <memory>

#include "subell/frame.hpp"
#include "subell/scalar_field.hpp"
#include "subell/types.hpp"

namespace subell {

// Fundamental solution Gamma of -L with pole y, represented through its gauge:
//   Gamma(x) = c * d(x)^(2 - beta),  d >= 0,  d = 0 exactly at the pole.
// The gauge and its first two derivatives are exact closed forms; everything
// downstream (weights, horizontal gradients, sub-Laplacians of powers of d)
// chains on them.
class FundamentalSolution {
public:
    using GaugeValue = std::function<double(View)>;
    using GaugeGrad = std::function<void(View, std::span<double>)>;
    using GaugeHess = std::function<void(View, std::span<double>)>;

    const Frame& frame() const { return *frame_; }
    const std::shared_ptr<const Frame>& frame_ptr() const { return frame_; }
    const Point& pole() const { return pole_; }
    double beta() const { return beta_; }
    double constant() const { return c_; }
    void set_constant(double c) {
        require(c > 0.0, "FundamentalSolution: constant must be positive");
        c_ = c;
    }

    double gauge(View x) const { return d_(x); }
    double gamma(View x) const;

    // d as a ScalarField with exact derivatives; d^p likewise (chain rule).
    FieldPtr gauge_field() const { return gauge_power_field(1.0); }
    FieldPtr gauge_power_field(double p) const;

    // (X_1 d, ..., X_N d) through the frame.
    void gauge_gradient(View x, std::span<double> out) const;
    // |grad_X d|^2 at x.
    double gauge_gradient_sq(View x) const;

    // Lebesgue measure of {d <= r} when a closed form is known (set by the
    // built-in factories; custom gauges may not have one).
    bool has_gauge_ball_volume() const { return static_cast<bool>(ball_vol_); }
    double gauge_ball_volume(double r) const;

    // Euclidean space: d = |x - y|, beta = n, c = 1/((n-2) omega_{n-1}).
    static FundamentalSolution euclidean(std::shared_ptr<const Frame> fr, Point pole);

    // Heisenberg group H^m: beta = Q = 2m + 2 and, with pole (xi, eta, tau),
    //   d(x,y,t) = ( (|x-xi|^2 + |y-eta|^2)^2 + (t - tau - 2(<x,eta> - <y,xi>))^2 )^(1/4).
    // This is the gauge for which L d^(2-Q) = 0 with the frame convention
    // X_j = d/dx_j + 2 y_j d/dt (checked in the tests); the group translation
    // keeps that exact for every pole. The constant defaults to 1 and is meant
    // to be fixed by calibrate_constant.
    static FundamentalSolution heisenberg(std::shared_ptr<const Frame> fr, Point pole);

    // Escape hatch for custom frames: caller supplies the gauge closures.
    static FundamentalSolution custom(std::shared_ptr<const Frame> fr, Point pole, double beta,
                                      double constant, GaugeValue d, GaugeGrad grad, GaugeHess hess,
                                      std::string label);

    const std::string& label() const { return label_; }

private:
    FundamentalSolution() = default;
    std::shared_ptr<const Frame> frame_;
    Point pole_;
    double beta_ = 0.0;
    double c_ = 1.0;
    GaugeValue d_;
    GaugeGrad dgrad_;   // ambient partials of d
    GaugeHess dhess_;   // ambient second partials of d, row-major n x n
    std::function<double(double)> ball_vol_;
    std::string label_;
};

// Relative residual of the pointwise identity
//   L Gamma^{(alpha-2)/(2-beta)}
//     = (beta+alpha-4)(alpha-2) Gamma^{(alpha-4)/(2-beta)} |grad_X Gamma^{1/(2-beta)}|^2
//       + (alpha-2)/(2-beta) Gamma^{(beta+alpha-4)/(2-beta)} L Gamma
// at a point x off the pole, with the last term evaluated as computed (it is
// itself ~0 off the pole). Scaled by the largest magnitude among the terms.
double key_identity_residual(const FundamentalSolution& fs, double alpha, View x);

// Surface area of the unit sphere S^{n-1}.
double unit_sphere_area(int n);

// Volume of the Euclidean ball of radius r in R^n.
double ball_volume(int n, double r);

}  // namespace subell
