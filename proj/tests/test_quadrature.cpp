#include <cmath>
#include <numbers>

#include "doctest.h"
#include "subell/quadrature.hpp"

using namespace subell;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const Frame> shared_frame(Frame fr) {
    return std::make_shared<const Frame>(std::move(fr));
}

// flux of the position field through the boundary; equals N * volume because
// X_k x_k = 1 and the fields are divergence free
double divergence_flux(const Frame& fr, const Domain& dom, const QuadratureScheme& sc) {
    const BoundaryNodeSet bs = boundary_nodes(fr, dom, sc);
    return sum_over_boundary(bs, [&](View x, View dens) {
        double s = 0.0;
        for (int k = 0; k < fr.fields(); ++k) s += x[k] * dens[k];
        return s;
    });
}

}  // namespace

TEST_CASE("gauss-legendre rules") {
    const GaussRule& g8 = gauss_legendre(8);
    REQUIRE(g8.nodes.size() == 8);
    double wsum = 0.0, x14 = 0.0, x15 = 0.0;
    for (int i = 0; i < 8; ++i) {
        wsum += g8.weights[i];
        x14 += g8.weights[i] * std::pow(g8.nodes[i], 14);
        x15 += g8.weights[i] * std::pow(g8.nodes[i], 15);
        CHECK(g8.nodes[i] == doctest::Approx(-g8.nodes[7 - i]).epsilon(1e-15));
    }
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(x14 == doctest::Approx(2.0 / 15.0).epsilon(1e-14));  // highest exact degree
    CHECK(std::abs(x15) <= 1e-15);

    const GaussRule& g1 = gauss_legendre(1);
    CHECK(g1.nodes[0] == 0.0);
    CHECK(g1.weights[0] == doctest::Approx(2.0));

    // order 20 integrates cos on [-1,1] to machine precision
    const GaussRule& g20 = gauss_legendre(20);
    double c = 0.0;
    for (int i = 0; i < 20; ++i) c += g20.weights[i] * std::cos(g20.nodes[i]);
    CHECK(c == doctest::Approx(2.0 * std::sin(1.0)).epsilon(1e-15));
}

TEST_CASE("interior integration: exact volumes") {
    QuadratureScheme sc;
    sc.order = 8;
    sc.refine = 4;
    auto one = [](View) { return 1.0; };

    Domain box = build_box({0.0, -1.0, 0.5}, {2.0, 1.0, 1.5});
    CHECK(integrate_interior(box, sc, one).value == doctest::Approx(4.0).epsilon(1e-14));

    Domain b3 = build_euclidean_ball({0.3, -0.2, 0.1}, 1.25);
    CHECK(integrate_interior(b3, sc, one).value ==
          doctest::Approx(*b3.volume_exact).epsilon(1e-13));

    Domain b5 = build_euclidean_ball({0.0, 0.0, 0.0, 0.0, 0.0}, 1.0);
    CHECK(integrate_interior(b5, sc, one).value ==
          doctest::Approx(*b5.volume_exact).epsilon(1e-12));

    auto heis = shared_frame(Frame::heisenberg(1));
    auto fs = FundamentalSolution::heisenberg(heis, {0.7, -0.4, 0.2});
    Domain gb = build_gauge_ball(fs, 1.2);
    CHECK(integrate_interior(gb, sc, one).value ==
          doctest::Approx(*gb.volume_exact).epsilon(1e-13));

    auto heis2 = shared_frame(Frame::heisenberg(2));
    auto fs2 = FundamentalSolution::heisenberg(heis2, {0.0, 0.0, 0.0, 0.0, 0.0});
    QuadratureScheme lean;
    lean.order = 6;
    lean.refine = 3;
    Domain gb2 = build_gauge_ball(fs2, 0.9);
    CHECK(integrate_interior(gb2, lean, one).value ==
          doctest::Approx(*gb2.volume_exact).epsilon(1e-12));
}

TEST_CASE("gauge ball: horizontal gradient of the gauge integrates in closed form") {
    // |grad_X d|^2 = cos(psi) in the chart, so the ball integral is pi r^4.
    auto heis = shared_frame(Frame::heisenberg(1));
    auto fs = FundamentalSolution::heisenberg(heis, {0.5, 1.0, -0.3});
    const double r = 1.3;
    Domain gb = build_gauge_ball(fs, r);
    QuadratureScheme sc;
    sc.order = 8;
    sc.refine = 5;
    const double got =
        integrate_interior(gb, sc, [&](View x) { return fs.gauge_gradient_sq(x); }).value;
    CHECK(got == doctest::Approx(kPi * std::pow(r, 4)).epsilon(1e-12));
}

TEST_CASE("divergence identity ties interior volume to boundary flux") {
    QuadratureScheme sc;
    sc.order = 8;
    sc.refine = 6;

    auto e3 = Frame::euclidean(3);
    Domain box = build_box({-0.5, 0.0, 1.0}, {1.5, 2.0, 3.0});
    CHECK(divergence_flux(e3, box, sc) == doctest::Approx(3.0 * *box.volume_exact).epsilon(1e-13));

    Domain b3 = build_euclidean_ball({0.2, 0.4, -0.1}, 1.1);
    CHECK(divergence_flux(e3, b3, sc) == doctest::Approx(3.0 * *b3.volume_exact).epsilon(1e-12));

    auto e5 = Frame::euclidean(5);
    Domain b5 = build_euclidean_ball({0.0, 0.1, 0.0, -0.1, 0.0}, 0.9);
    CHECK(divergence_flux(e5, b5, sc) == doctest::Approx(5.0 * *b5.volume_exact).epsilon(1e-12));

    auto heis = Frame::heisenberg(1);
    Domain hbox = build_box({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0});
    CHECK(divergence_flux(heis, hbox, sc) ==
          doctest::Approx(2.0 * *hbox.volume_exact).epsilon(1e-13));

    auto heisp = shared_frame(Frame::heisenberg(1));
    auto fs = FundamentalSolution::heisenberg(heisp, {0.3, -0.2, 0.5});
    Domain gb = build_gauge_ball(fs, 1.0);
    CHECK(divergence_flux(*heisp, gb, sc) == doctest::Approx(2.0 * *gb.volume_exact).epsilon(5e-7));

    auto ns = Frame::r3_nonsmooth();
    Domain nbox = build_box({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}, 2);
    CHECK(divergence_flux(ns, nbox, sc) == doctest::Approx(2.0 * *nbox.volume_exact).epsilon(1e-13));
}

TEST_CASE("interior/boundary agreement for a single field (nonsmooth frame)") {
    // integral of X_k u over the box equals the flux of u through the boundary
    auto fr = Frame::r3_nonsmooth();
    auto frp = shared_frame(Frame::r3_nonsmooth());
    QuadratureScheme sc;
    sc.order = 8;

    auto u = std::make_shared<AnalyticField>(
        3, [](View x) { return x[0] * x[0] * x[1] + 0.5 * x[2] * x[1] - x[2] * x[2] * x[0]; },
        [](View x, std::span<double> g) {
            g[0] = 2.0 * x[0] * x[1] - x[2] * x[2];
            g[1] = x[0] * x[0] + 0.5 * x[2];
            g[2] = 0.5 * x[1] - 2.0 * x[2] * x[0];
        },
        nullptr, "poly");

    for (int splits : {1, 2}) {
        // [0,1]^3 is kink free for splits = 1; [-1,1]^3 needs the splits = 2
        // cell edges on the coordinate planes
        Domain dom = splits == 1 ? build_box({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0})
                                 : build_box({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}, 2);
        for (int k = 0; k < 2; ++k) {
            const double lhs =
                integrate_interior(dom, sc, [&](View x) {
                    return directional_derivative(fr, *u, k, x);
                }).value;
            const double rhs =
                integrate_boundary(fr, dom, sc, [&](View x, View dens) {
                    return u->value(x) * dens[k];
                }).value;
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("node enumeration and sums are deterministic (threaded path included)") {
    Domain b5 = build_euclidean_ball({0.0, 0.0, 0.0, 0.0, 0.0}, 1.0);
    QuadratureScheme sc;
    sc.order = 8;
    sc.refine = 4;
    const NodeSet a = interior_nodes(b5, sc);
    const NodeSet b = interior_nodes(b5, sc);
    REQUIRE(a.count() == b.count());
    CHECK(a.count() > 32768);  // exercises the threaded path in sum_over
    CHECK(a.x == b.x);
    CHECK(a.w == b.w);
    auto f = [](View x) { return std::exp(x[0]) * std::cos(3.0 * x[1]) + x[2] * x[3] * x[4]; };
    const double s1 = sum_over(a, f);
    const double s2 = sum_over(a, f);
    const double s3 = sum_over(b, f);
    CHECK(s1 == s2);
    CHECK(s1 == s3);
}

TEST_CASE("excision schedule with exact per-level values and extrapolation") {
    auto fr = shared_frame(Frame::euclidean(3));
    auto fs = FundamentalSolution::euclidean(fr, {0.0, 0.0, 0.0});
    Domain ball = build_euclidean_ball({0.0, 0.0, 0.0}, 1.0);
    attach_pole(ball, fs);
    QuadratureScheme sc;
    sc.order = 8;
    sc.refine = 4;

    SUBCASE("1/|x|: quadratic eps dependence") {
        auto f = [&](View x) { return 1.0 / fs.gauge(x); };
        ExcisionSequence seq = excised_integral(ball, fs, sc, f, 0.2, 6);
        REQUIRE(seq.values.size() == 6);
        for (int j = 0; j < 6; ++j)
            CHECK(seq.values[j] ==
                  doctest::Approx(2.0 * kPi * (1.0 - sq(seq.eps[j]))).epsilon(1e-12));
        CHECK(seq.extrapolated == doctest::Approx(2.0 * kPi).epsilon(1e-10));
        CHECK(seq.rate == doctest::Approx(2.0).epsilon(1e-4));
        CHECK(std::abs(seq.extrapolated - 2.0 * kPi) <= 10.0 * seq.error + 1e-12);
    }

    SUBCASE("|x|^(-5/2): slow sqrt(eps) tail is still extrapolated exactly") {
        auto f = [&](View x) { return std::pow(fs.gauge(x), -2.5); };
        ExcisionSequence seq = excised_integral(ball, fs, sc, f, .1, 8);
        const double exact = 8.0 * kPi;  // 4 pi int_0^1 rho^(-1/2)
        CHECK(seq.values.back() ==
              doctest::Approx(8.0 * kPi * (1.0 - std::sqrt(seq.eps.back()))).epsilon(1e-11));
        CHECK(seq.extrapolated == doctest::Approx(exact).epsilon(1e-9));
        CHECK(seq.rate == doctest::Approx(0.5).epsilon(1e-3));
    }

    SUBCASE("smooth integrand converges without extrapolation drama") {
        auto f = [](View x) { return 1.0 + x[0] + sq(x[1]); };
        ExcisionSequence seq = excised_integral(ball, fs, sc, f, 0.05, 5);
        const double exact = 4.0 / 3.0 * kPi + 4.0 * kPi / 15.0;  // vol + int x1^2
        CHECK(seq.extrapolated == doctest::Approx(exact).epsilon(1e-10));
    }
}

TEST_CASE("monte carlo cross-check") {
    auto f = [](View x) { return 1.0 + x[0] * x[1] + sq(x[2]); };

    Domain box = build_box({0.0, 0.0, 0.0}, {1.0, 2.0, 1.0});
    MonteCarloResult mc = monte_carlo_interior(box, f, 400000, 42);
    // exact on [0,1]x[0,2]x[0,1]: vol 2, int xy = (1/2)(2) = 1, int z^2 = 2/3
    const double exact = 2.0 + 1.0 + 2.0 / 3.0;
    CHECK(std::abs(mc.value - exact) <= 4.0 * mc.std_error);
    CHECK(mc.inside == mc.samples);  // box fills its bounding box

    Domain ball = build_euclidean_ball({0.0, 0.0, 0.0}, 1.0);
    MonteCarloResult mv = monte_carlo_interior(ball, [](View) { return 1.0; }, 400000, 7);
    CHECK(std::abs(mv.volume - *ball.volume_exact) <= 4.0 * mv.volume_std_error);
    CHECK(mv.volume_std_error <= 0.02);

    auto heis = shared_frame(Frame::heisenberg(1));
    auto fs = FundamentalSolution::heisenberg(heis, {0.4, 0.2, -0.1});
    Domain gb = build_gauge_ball(fs, 1.0);
    MonteCarloResult gv = monte_carlo_interior(gb, [](View) { return 1.0; }, 400000, 11);
    CHECK(std::abs(gv.volume - *gb.volume_exact) <= 4.0 * gv.volume_std_error);

    // determinism for a fixed seed
    MonteCarloResult again = monte_carlo_interior(gb, [](View) { return 1.0; }, 400000, 11);
    CHECK(gv.value == again.value);
    CHECK(gv.inside == again.inside);
}

TEST_CASE("scheme hash distinguishes parameters") {
    QuadratureScheme a, b;
    CHECK(a.hash() == b.hash());
    b.order = 10;
    CHECK(a.hash() != b.hash());
    b = a;
    b.refine = 5;
    CHECK(a.hash() != b.hash());
    b = a;
    b.angular_order = 4;
    CHECK(a.hash() != b.hash());
    b = a;
    b.boundary_refine = 2;
    CHECK(a.hash() != b.hash());
}
