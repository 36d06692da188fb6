#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "subell/domain.hpp"

using namespace subell;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const Frame> shared_frame(Frame fr) {
    return std::make_shared<const Frame>(std::move(fr));
}

void check_form_equivalence(const Frame& fr, const Domain& dom, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (const auto& patch : dom.patches) {
        for (int rep = 0; rep < 4; ++rep) {
            Point s(dom.n - 1);
            for (int i = 0; i < dom.n - 1; ++i)
                s[i] = patch.lo[i] + (0.1 + 0.8 * uni(rng)) * (patch.hi[i] - patch.lo[i]);
            for (int k = 0; k < fr.fields(); ++k) {
                const double a = boundary_form_density(fr, patch, k, s);
                const double b = wedge_form_density(fr, patch, k, s);
                CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
            }
        }
    }
}

}  // namespace

TEST_CASE("box builder: cells, faces, metadata") {
    Domain dom = build_box({0.0, 0.0, 0.0}, {1.0, 2.0, 3.0});
    CHECK(dom.n == 3);
    CHECK(dom.cells.size() == 1);
    CHECK(dom.patches.size() == 6);
    CHECK(dom.volume_exact.has_value());
    CHECK(*dom.volume_exact == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(dom.contains(Point{0.5, 1.0, 2.9}));
    CHECK_FALSE(dom.contains(Point{0.5, 2.1, 1.0}));

    Domain split = build_box({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}, 2);
    CHECK(split.cells.size() == 8);
    CHECK(split.patches.size() == 24);
    // cell edges sit on the coordinate hyperplanes through zero
    bool found = false;
    for (const auto& cell : split.cells)
        if (cell.lo[1] == 0.0 || cell.hi[1] == 0.0) found = true;
    CHECK(found);
}

TEST_CASE("box faces measure outward flux of coordinate fields") {
    // orient * det[e_i | tangents] must be +1 on the x_i = hi face and -1 on
    // the x_i = lo face, for every axis.
    Domain dom = build_box({0.0, 0.0, 0.0, 0.0}, {1.0, 1.0, 1.0, 1.0});
    auto fr = Frame::euclidean(4);
    Point s{0.3, 0.6, 0.2};
    int hits = 0;
    for (const auto& patch : dom.patches) {
        Point x(4);
        patch.chart(s, std::span<double>(x.data(), 4));
        for (int i = 0; i < 4; ++i) {
            if (x[i] == 0.0) {
                CHECK(boundary_form_density(fr, patch, i, s) == doctest::Approx(-1.0));
                ++hits;
            } else if (x[i] == 1.0) {
                CHECK(boundary_form_density(fr, patch, i, s) == doctest::Approx(1.0));
                ++hits;
            }
        }
    }
    CHECK(hits == 8);
}

TEST_CASE("euclidean ball builder geometry") {
    Domain dom = build_euclidean_ball({0.5, -0.25, 0.0}, 2.0);
    CHECK(dom.cells.size() == 1);
    CHECK(dom.patches.size() == 1);
    CHECK(*dom.volume_exact == doctest::Approx(4.0 / 3.0 * kPi * 8.0).epsilon(1e-14));
    CHECK(dom.contains(Point{0.5, -0.25, 1.9}));
    CHECK_FALSE(dom.contains(Point{0.5, -0.25, 2.1}));

    // chart lands on the sphere, tangents are orthogonal to the radius
    Point s{1.1, 2.2};
    Point x(3);
    dom.patches[0].chart(s, std::span<double>(x.data(), 3));
    const double rad = std::sqrt(sq(x[0] - 0.5) + sq(x[1] + 0.25) + sq(x[2]));
    CHECK(rad == doctest::Approx(2.0).epsilon(1e-14));
    std::vector<double> tan(3 * 2);
    dom.patches[0].tangents(s, tan);
    for (int a = 0; a < 2; ++a) {
        double dot = 0.0;
        dot += (x[0] - 0.5) * tan[a * 3 + 0];
        dot += (x[1] + 0.25) * tan[a * 3 + 1];
        dot += x[2] * tan[a * 3 + 2];
        CHECK(std::abs(dot) <= 1e-12);
    }
}

TEST_CASE("gauge ball chart: gauge-radial by construction") {
    auto fr = shared_frame(Frame::heisenberg(1));
    auto fs = FundamentalSolution::heisenberg(fr, {0.4, -0.3, 0.8});
    Domain dom = build_gauge_ball(fs, 1.5);
    CHECK(dom.radial_gauge_aligned);
    CHECK(dom.radial_gauge_scale == doctest::Approx(1.5));
    CHECK(dom.pole_inside);
    CHECK(*dom.volume_exact == doctest::Approx(kPi * kPi / 2.0 * std::pow(1.5, 4)).epsilon(1e-14));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const Cell& cell = dom.cells[0];
    for (int rep = 0; rep < 32; ++rep) {
        Point s(3), x(3);
        for (int i = 0; i < 3; ++i) s[i] = cell.lo[i] + uni(rng) * (cell.hi[i] - cell.lo[i]);
        cell.map(s, std::span<double>(x.data(), 3));
        CHECK(fs.gauge(x) == doctest::Approx(s[0] * 1.5).epsilon(1e-12));
        CHECK(dom.contains(x));
    }
    // boundary chart sits at gauge distance exactly r
    Point sb{0.3, 4.0}, xb(3);
    dom.patches[0].chart(sb, std::span<double>(xb.data(), 3));
    CHECK(fs.gauge(xb) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("wedge form agrees with determinant form on every patch type") {
    std::mt19937_64 rng(123);

    auto fr3 = Frame::euclidean(3);
    check_form_equivalence(fr3, build_box({0.0, -1.0, 0.5}, {1.0, 1.0, 2.0}), rng);
    check_form_equivalence(fr3, build_euclidean_ball({0.0, 0.0, 0.0}, 1.0), rng);

    auto fr5 = Frame::euclidean(5);
    check_form_equivalence(fr5, build_euclidean_ball({0.1, 0.0, -0.2, 0.0, 0.3}, 1.25), rng);

    auto heis = shared_frame(Frame::heisenberg(1));
    auto fs = FundamentalSolution::heisenberg(heis, {0.2, 0.1, -0.4});
    check_form_equivalence(*heis, build_gauge_ball(fs, 1.0), rng);
    check_form_equivalence(*heis, build_box({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}, 2), rng);

    auto heis2 = shared_frame(Frame::heisenberg(2));
    auto fs2 = FundamentalSolution::heisenberg(heis2, {0.0, 0.1, -0.1, 0.2, 0.3});
    check_form_equivalence(*heis2, build_gauge_ball(fs2, 0.8), rng);

    check_form_equivalence(Frame::r3_nonsmooth(), build_box({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}), rng);
}

TEST_CASE("attach_pole detects gauge-radial alignment") {
    auto fr = shared_frame(Frame::euclidean(3));

    Domain ball = build_euclidean_ball({0.25, 0.5, -0.75}, 1.0);
    auto centered = FundamentalSolution::euclidean(fr, {0.25, 0.5, -0.75});
    attach_pole(ball, centered);
    CHECK(ball.radial_gauge_aligned);
    CHECK(ball.radial_gauge_scale == doctest::Approx(1.0));
    CHECK(ball.pole_inside);

    Domain ball2 = build_euclidean_ball({0.25, 0.5, -0.75}, 1.0);
    auto off = FundamentalSolution::euclidean(fr, {0.45, 0.5, -0.75});
    attach_pole(ball2, off);
    CHECK_FALSE(ball2.radial_gauge_aligned);
    CHECK(ball2.pole_inside);

    Domain box = build_box({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
    auto inside = FundamentalSolution::euclidean(fr, {0.5, 0.5, 0.5});
    attach_pole(box, inside);
    CHECK_FALSE(box.radial_gauge_aligned);
    CHECK(box.pole_inside);
    auto outside = FundamentalSolution::euclidean(fr, {1.5, 0.5, 0.5});
    attach_pole(box, outside);
    CHECK_FALSE(box.pole_inside);
}

TEST_CASE("excision clips the radial axis exactly on aligned domains") {
    auto fr = shared_frame(Frame::euclidean(3));
    auto fs = FundamentalSolution::euclidean(fr, {0.0, 0.0, 0.0});
    Domain ball = build_euclidean_ball({0.0, 0.0, 0.0}, 1.0);
    attach_pole(ball, fs);

    Domain ann = excise_pole(ball, fs, 0.3);
    CHECK(ann.excised_eps == 0.3);
    CHECK(ann.cells[0].lo[0] == doctest::Approx(0.3));
    CHECK(ann.volume_exact.has_value());
    CHECK(*ann.volume_exact ==
          doctest::Approx(4.0 / 3.0 * kPi * (1.0 - std::pow(0.3, 3))).epsilon(1e-14));
    CHECK_FALSE(ann.contains(Point{0.1, 0.1, 0.1}));
    CHECK(ann.contains(Point{0.5, 0.0, 0.0}));

    auto heis = shared_frame(Frame::heisenberg(1));
    auto hfs = FundamentalSolution::heisenberg(heis, {1.0, 0.5, 0.7});
    Domain gball = build_gauge_ball(hfs, 1.0);
    Domain gann = excise_pole(gball, hfs, 0.25);
    CHECK(gann.cells[0].lo[0] == doctest::Approx(0.25));
    CHECK(*gann.volume_exact ==
          doctest::Approx(kPi * kPi / 2.0 * (1.0 - std::pow(0.25, 4))).epsilon(1e-13));

    CHECK_THROWS_AS(excise_pole(ball, fs, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(excise_pole(ball, fs, -0.1), std::invalid_argument);
    Domain box = build_box({2.0, 2.0, 2.0}, {3.0, 3.0, 3.0});
    CHECK_THROWS_AS(excise_pole(box, fs, 0.1), std::invalid_argument);  // pole outside
}

TEST_CASE("builder argument validation") {
    CHECK_THROWS_AS(build_box({0.0, 0.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_box({0.0, 1.0}, {1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_euclidean_ball({0.0, 0.0, 0.0}, -1.0), std::invalid_argument);
    auto fr = shared_frame(Frame::euclidean(3));
    auto fs = FundamentalSolution::euclidean(fr, {0.0, 0.0, 0.0});
    CHECK_THROWS_AS(build_gauge_ball(fs, 1.0), std::invalid_argument);  // not heisenberg-type
}
