#include "subell/battery.hpp"

#include <cmath>
#include <utility>

namespace subell {

namespace {

// C^2 quintic step: s(0) = 1, s(1) = 0, first and second derivatives zero at
// both ends. The (1-t)^3 form stays exact near t = 1 (no cancellation noise).
double step5(double t) {
    const double s = 1.0 - t;
    return s * s * s * (1.0 + 3.0 * t + 6.0 * t * t);
}
double step5_d(double t) { return -30.0 * t * t * (1.0 - t) * (1.0 - t); }
double step5_d2(double t) { return -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t); }

// 1 on (-inf, a], 0 on [b, inf), quintic in between.
AxisProfile cutoff_profile(double a, double b) {
    const double w = b - a;
    AxisProfile p;
    p.f = [=](double q) {
        if (q <= a) return 1.0;
        if (q >= b) return 0.0;
        return step5((q - a) / w);
    };
    p.df = [=](double q) {
        if (q <= a || q >= b) return 0.0;
        return step5_d((q - a) / w) / w;
    };
    p.d2f = [=](double q) {
        if (q <= a || q >= b) return 0.0;
        return step5_d2((q - a) / w) / (w * w);
    };
    return p;
}

AxisProfile cos_profile(double omega, double phase) {
    AxisProfile p;
    p.f = [=](double x) { return std::cos(omega * x + phase); };
    p.df = [=](double x) { return -omega * std::sin(omega * x + phase); };
    p.d2f = [=](double x) { return -omega * omega * std::cos(omega * x + phase); };
    return p;
}

AxisProfile gauss_profile(double center, double k) {
    AxisProfile p;
    p.f = [=](double x) {
        const double s = x - center;
        return std::exp(-k * s * s);
    };
    p.df = [=](double x) {
        const double s = x - center;
        return -2.0 * k * s * std::exp(-k * s * s);
    };
    p.d2f = [=](double x) {
        const double s = x - center;
        return (4.0 * k * k * s * s - 2.0 * k) * std::exp(-k * s * s);
    };
    return p;
}

AxisProfile poly_profile(double c0, double c1, double c2) {
    AxisProfile p;
    p.f = [=](double x) { return c0 + c1 * x + c2 * x * x; };
    p.df = [=](double x) { return c1 + 2.0 * c2 * x; };
    p.d2f = [=](double) { return 2.0 * c2; };
    return p;
}

// 0 up to a1, rises to 1 on [a1, b1], falls back to 0 on [a2, b2]: an annular
// window whose support stays strictly inside [0, 1].
AxisProfile annulus_profile(double a1, double b1, double a2, double b2) {
    const AxisProfile rise = cutoff_profile(a1, b1);  // used mirrored
    const AxisProfile fall = cutoff_profile(a2, b2);
    AxisProfile p;
    p.f = [=](double q) { return (1.0 - rise.f(q)) * fall.f(q); };
    p.df = [=](double q) { return -rise.df(q) * fall.f(q) + (1.0 - rise.f(q)) * fall.df(q); };
    p.d2f = [=](double q) {
        return -rise.d2f(q) * fall.f(q) - 2.0 * rise.df(q) * fall.df(q) +
               (1.0 - rise.f(q)) * fall.d2f(q);
    };
    return p;
}

// Axis bump on [a, b]: 1 on the middle band, quintic decay, identically zero
// near the endpoints (support fraction 0.95). Built in m = |2s - 1|; the kink
// of m at the midpoint sits inside the plateau where the cutoff is constant.
AxisProfile axis_bump(double a, double b) {
    const double inv = 1.0 / (b - a);
    const AxisProfile cut = cutoff_profile(0.3, 0.95);
    AxisProfile p;
    p.f = [=](double x) {
        const double s = (x - a) * inv;
        return cut.f(std::abs(2.0 * s - 1.0));
    };
    p.df = [=](double x) {
        const double s = (x - a) * inv;
        const double m = 2.0 * s - 1.0;
        const double sign = m >= 0.0 ? 1.0 : -1.0;
        return cut.df(std::abs(m)) * sign * 2.0 * inv;
    };
    p.d2f = [=](double x) {
        const double s = (x - a) * inv;
        return cut.d2f(std::abs(2.0 * s - 1.0)) * 4.0 * inv * inv;
    };
    return p;
}

FieldPtr scaled(double c, FieldPtr f) { return linear_combination({{c, std::move(f)}}, 0.0); }

std::vector<BatteryMember> ball_battery(const FundamentalSolution& fs, const Domain& dom) {
    const int n = dom.n;
    const double r = dom.scale;
    // q = (d / r)^4: polynomial in the coordinates for the built-in gauges, so
    // profiles in q keep exact derivatives and no pole-side kinks. Compact
    // supports end at q = 0.98, strictly inside, so boundary nodes (where
    // rounding puts q at 1 +- ulp) evaluate to exactly zero.
    const FieldPtr q = scaled(1.0 / (r * r * r * r), fs.gauge_power_field(4.0));
    const FieldPtr bump = compose_field(cutoff_profile(0.1296, 0.98), q, "bump");
    const FieldPtr bump_in = compose_field(cutoff_profile(0.0256, 0.64), q, "bump-shifted");
    const Point& pole = fs.pole();

    auto coord = [&](int j) { return coordinate_field(n, j); };
    // 1 + 0.3 (x_0 - pole_0) / r, a tilted plane through the pole
    const FieldPtr tilt = linear_combination({{0.3 / r, coord(0)}}, 1.0 - 0.3 * pole[0] / r);

    std::vector<BatteryMember> out;
    out.push_back({"bump", bump, true});
    out.push_back({"bump-shifted", bump_in, true});
    out.push_back({"bump-quadratic",
                   product_field(bump, compose_field(poly_profile(1.0, 1.0, -1.5), q)), true});
    out.push_back({"gauss-a", compose_field(gauss_profile(0.0, 2.5), q), false});
    out.push_back({"gauss-b", compose_field(gauss_profile(0.15, 5.0), q), false});
    out.push_back({"ring", compose_field(annulus_profile(0.05, 0.3, 0.7, 0.95), q, "ring"), true});
    out.push_back({"const", constant_field(n, 1.0), false});
    out.push_back(
        {"harmonic-mix", product_field(product_field(coord(0), coord(1)), bump), true});
    out.push_back({"peak",
                   product_field(bump, compose_field(
                                           AxisProfile{[](double t) { return std::pow(t + 0.01, -0.25); },
                                                       [](double t) {
                                                           return -0.25 * std::pow(t + 0.01, -1.25);
                                                       },
                                                       [](double t) {
                                                           return 0.3125 * std::pow(t + 0.01, -2.25);
                                                       }},
                                           q, "peak")),
                   true});
    out.push_back({"taper", compose_field(poly_profile(1.0, -0.5, 0.0), q), false});
    out.push_back({"taper-skew",
                   product_field(compose_field(poly_profile(1.0, -0.5, 0.0), q), tilt), false});
    out.push_back({"osc",
                   product_field(bump, compose_field(cos_profile(1.0, 0.0),
                                                     scaled(3.0 / r, coord(0)))),
                   true});
    return out;
}

std::vector<BatteryMember> box_battery(const Domain& dom) {
    const int n = dom.n;
    const Point& lo = dom.bb_lo;
    const Point& hi = dom.bb_hi;

    auto tensor = [&](auto&& make_axis, std::string label) {
        std::vector<AxisProfile> axes;
        axes.reserve(n);
        for (int j = 0; j < n; ++j) axes.push_back(make_axis(j));
        return tensor_product_field(std::move(axes), std::move(label));
    };
    const FieldPtr bump =
        tensor([&](int j) { return axis_bump(lo[j], hi[j]); }, "bump");
    auto coord = [&](int j) { return coordinate_field(n, j); };
    auto mid = [&](int j) { return 0.5 * (lo[j] + hi[j]); };
    auto width = [&](int j) { return hi[j] - lo[j]; };

    // interior anchor kept off cell lattices and domain symmetry planes
    Point anchor(n);
    for (int j = 0; j < n; ++j) anchor[j] = lo[j] + (j % 2 == 0 ? 0.43 : 0.57) * width(j);

    std::vector<BatteryMember> out;
    out.push_back({"bump", bump, true});
    out.push_back({"bump-poly",
                   product_field(bump, linear_combination({{1.0, coord(0)},
                                                           {-1.0, product_field(coord(0), coord(0))}},
                                                          1.0)),
                   true});
    out.push_back({"saddle",
                   linear_combination({{1.0, product_field(coord(0), coord(0))},
                                       {-1.0, product_field(coord(1), coord(1))}},
                                      0.5),
                   false});
    out.push_back({"gauss-a",
                   tensor([&](int j) { return gauss_profile(mid(j), 2.0 / (width(j) * width(j))); },
                          "gauss-a"),
                   false});
    out.push_back({"gauss-b",
                   tensor([&](int j) {
                       return gauss_profile(anchor[j], 5.0 / (width(j) * width(j)));
                   },
                          "gauss-b"),
                   false});
    out.push_back({"const", constant_field(n, 1.0), false});
    out.push_back({"taper",
                   tensor([&](int j) {
                       const double c = mid(j), w = width(j);
                       return poly_profile(1.0 - 0.3 * c * c / (w * w), 0.6 * c / (w * w),
                                           -0.3 / (w * w));
                   },
                          "taper"),
                   false});
    out.push_back({"peak", radial_sq_field(
                               anchor, [](double s) { return std::pow(s + 0.01, -0.5); },
                               [](double s) { return -0.5 * std::pow(s + 0.01, -1.5); },
                               [](double s) { return 0.75 * std::pow(s + 0.01, -2.5); }, "peak"),
                   false});
    out.push_back({"osc",
                   tensor([&](int j) {
                       return cos_profile((2.0 + 0.5 * j) / width(j), 0.3 * (j + 1));
                   },
                          "osc"),
                   false});
    out.push_back({"bump-osc",
                   product_field(bump, compose_field(cos_profile(1.0, 0.0),
                                                     scaled(4.0 / width(0), coord(0)))),
                   true});
    out.push_back({"lifted-bump", linear_combination({{1.0, bump}}, 0.3), false});
    out.push_back({"harmonic-mix", product_field(product_field(coord(0), coord(1)), bump), true});
    return out;
}

}  // namespace

std::vector<BatteryMember> standard_battery(const FundamentalSolution& fs, const Domain& dom) {
    require(dom.n == fs.frame().dim(), "standard_battery: domain/frame dimension mismatch");
    require(dom.n >= 2, "standard_battery: needs dimension >= 2");
    if (dom.kind == "euclidean_ball" || dom.kind == "gauge_ball") {
        // ball profiles live in (d/r)^4, so the ball must be the gauge ball of
        // this fundamental solution (pole at the center)
        if (dom.kind == "euclidean_ball") {
            for (int j = 0; j < dom.n; ++j) {
                const double center = 0.5 * (dom.bb_lo[j] + dom.bb_hi[j]);
                require(std::abs(center - fs.pole()[j]) <= 1e-9 * dom.scale,
                        "standard_battery: ball must be centered at the pole");
            }
        }
        return ball_battery(fs, dom);
    }
    return box_battery(dom);
}

}  // namespace subell
