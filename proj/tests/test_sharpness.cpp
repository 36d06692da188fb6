#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "doctest.h"
#include "subell/battery.hpp"
#include "subell/sharpness.hpp"

using namespace subell;

namespace {

std::shared_ptr<const Frame> eucl(int n) {
    return std::make_shared<Frame>(Frame::euclidean(n));
}
std::shared_ptr<const Frame> heis(int m) {
    return std::make_shared<Frame>(Frame::heisenberg(m));
}

FundamentalSolution eucl_fs(int n) {
    return FundamentalSolution::euclidean(eucl(n), Point(static_cast<std::size_t>(n), 0.0));
}
FundamentalSolution heis_fs() {
    return FundamentalSolution::heisenberg(heis(1), Point{0, 0, 0});
}

QuadratureScheme radial_scheme() {
    // Gauge-radial trials factor through the angular average, so a light
    // angular rule loses nothing; the radial octaves carry the information.
    QuadratureScheme sc;
    sc.order = 8;
    sc.angular_order = 6;
    sc.refine = 3;
    return sc;
}

FieldPtr member_at(const TrialFamily& fam, Point theta) {
    REQUIRE(static_cast<int>(theta.size()) == fam.params);
    return fam.make(View(theta.data(), theta.size()));
}

}  // namespace

TEST_CASE("lower bounds are the squared sharp constants") {
    CHECK(ratio_lower_bound("hardy", 0.0, 3.0) == 0.25);
    CHECK(ratio_lower_bound("hardy", 0.0, 4.0) == 1.0);
    CHECK(ratio_lower_bound("uncertainty-weighted", 0.0, 3.0) == 0.25);
    CHECK(ratio_lower_bound("uncertainty-plain", 0.0, 4.0) == 1.0);
    CHECK(ratio_lower_bound("rellich", 0.0, 5.0) == 25.0 / 16.0);
    CHECK(ratio_lower_bound("rellich-grad", 2.0, 5.0) == 2.25);
    CHECK_THROWS_WITH_AS(ratio_lower_bound("hardy-refined", 0.0, 3.0),
                         doctest::Contains("unknown inequality"), std::invalid_argument);
    CHECK_THROWS_AS(ratio_lower_bound("hardy", 0.0, 1.5), std::invalid_argument);
}

TEST_CASE("trial exponent reproduces the formal extremizer power") {
    auto fs3 = eucl_fs(3);
    CHECK(trial_exponent("hardy", fs3, 0.0, 3.0) == 0.5);
    // kappa = (2 - beta0)/(2 - beta): n=3 pole order beta0=3, beta=4 halves it
    CHECK(trial_exponent("hardy", fs3, 1.0, 4.0) == 0.75);
    CHECK(trial_exponent("rellich", eucl_fs(5), 0.0, 5.0) == 0.5);
    CHECK(trial_exponent("rellich-grad", eucl_fs(5), 0.0, 5.0) == 0.5);
    CHECK(trial_exponent("hardy", heis_fs(), 0.0, 4.0) == 1.0);
    CHECK_THROWS_AS(trial_exponent("uncertainty-weighted", fs3, 0.0, 3.0), std::invalid_argument);
    CHECK_THROWS_AS(trial_exponent("hardy", fs3, 0.0, 2.0), std::invalid_argument);
}

// Log-scale bump u = d^(-p) ((log(r/d)/T)(1 - log(r/d)/T))^gamma. For the
// hardy ratio the radial reduction is a Beta-function identity and the ratio
// is exactly constant + C(gamma)/(kappa T)^2 with C = 2g(4g+1)/(2g-1).
TEST_CASE("log bump members land on the closed-form hardy ratio") {
    auto fs = eucl_fs(3);
    Domain ball = build_euclidean_ball(Point{0, 0, 0}, 1.0);
    QuadratureScheme sc = radial_scheme();
    TrialFamily fam = log_bump_family(fs, 1.0, 0.5, 5.0, 38.0, 1.05, 3.5);
    CHECK(fam.params == 2);

    double r1 = rayleigh_ratio("hardy", fs, member_at(fam, {20.0, 2.0}), 0.0, 3.0, ball, sc, 0.0,
                               40);
    CHECK(r1 == doctest::Approx(0.28).epsilon(1e-6));  // 0.25 + 12/20^2

    double r2 = rayleigh_ratio("hardy", fs, member_at(fam, {25.0, 1.5}), 0.0, 3.0, ball, sc, 0.0,
                               45);
    CHECK(r2 == doctest::Approx(0.25 + 10.5 / 625.0).epsilon(2e-6));

    auto hs = heis_fs();
    Domain gball = build_gauge_ball(hs, 1.0);
    TrialFamily hfam = log_bump_family(hs, 1.0, 1.0, 5.0, 26.0, 1.05, 3.5);
    double r3 = rayleigh_ratio("hardy", hs, member_at(hfam, {15.0, 2.0}), 0.0, 4.0, gball, sc,
                               0.0, 35);
    CHECK(r3 == doctest::Approx(1.0 + 12.0 / 225.0).epsilon(1e-6));
}

// Oracles below are 1-D radial quadrature values (plateau integrals in closed
// form, transition zone by Gauss-Legendre at 30 digits).
TEST_CASE("mollified power members match the radial quadrature oracles") {
    auto fs = eucl_fs(3);
    Domain ball = build_euclidean_ball(Point{0, 0, 0}, 1.0);
    QuadratureScheme sc = radial_scheme();
    TrialFamily fam = mollified_power_family(fs, 1.0, 0.5, -420.0, -3.0);
    CHECK(fam.params == 2);

    double shallow = rayleigh_ratio("hardy", fs, member_at(fam, {std::log(1e-12), 0.6}), 0.0, 3.0,
                                    ball, sc, 0.0, 48);
    CHECK(shallow == doctest::Approx(0.35783126592269169).epsilon(2e-4));

    double deep = rayleigh_ratio("hardy", fs, member_at(fam, {-120.0, 0.1}), 0.0, 3.0, ball, sc,
                                 0.0, 185);
    CHECK(deep == doctest::Approx(0.25867497247594163).epsilon(1e-8));
    CHECK(deep < 1.05 * 0.25);  // the depth needed for "within 5 percent"

    // theta0 = -400 underflows eps^2 to zero: u is exactly the formal
    // extremizer d^(-1/2) cut off, and the quadrature truncates the
    // log-divergent integrals at the deepest shell 0.2 * 2^-119. The oracle
    // uses the same cutoff, so the agreement is tight; the value sits within
    // 10 percent of the sharp 1/4.
    double pure = rayleigh_ratio("hardy", fs, member_at(fam, {-400.0, 0.2}), 0.0, 3.0, ball, sc,
                                 0.0, 120);
    CHECK(pure == doctest::Approx(0.26884278068112156).epsilon(1e-8));
    CHECK(pure > 0.25);
    CHECK(pure < 1.1 * 0.25);

    auto hs = heis_fs();
    Domain gball = build_gauge_ball(hs, 1.0);
    TrialFamily hfam = mollified_power_family(hs, 1.0, 1.0, -40.0, -3.0);
    double hval = rayleigh_ratio("hardy", hs, member_at(hfam, {std::log(1e-8), 0.6}), 0.0, 4.0,
                                 gball, sc, 0.0, 35);
    CHECK(hval == doctest::Approx(1.1713004118363402).epsilon(1e-4));
}

TEST_CASE("hardy ratios dominate the sharp constant across the battery") {
    auto fs = eucl_fs(3);
    Domain ball = build_euclidean_ball(Point{0, 0, 0}, 1.0);
    QuadratureScheme sc;
    InequalityContext ctx(fs, ball, sc, 0.0, 8);
    double const_ratio = 0.0;
    for (const BatteryMember& m : standard_battery(fs, ball)) {
        const int f = ctx.add_field(m.u, m.name);
        const double r = rayleigh_ratio("hardy", ctx, f, 0.0, 3.0);
        INFO(m.name);
        CHECK(r >= 0.25);
        if (m.name == "const") const_ratio = r;
    }
    // u = 1: lhs vanishes and the ratio collapses to the boundary/main
    // quotient, which the divergence identity pins at 1/2 on a centered ball.
    CHECK(const_ratio == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("rellich ratios dominate the sharp constant across the battery") {
    auto fs = eucl_fs(5);
    Domain ball = build_euclidean_ball(Point(5, 0.0), 1.0);
    QuadratureScheme sc;
    sc.order = 6;
    sc.angular_order = 8;
    sc.refine = 2;
    InequalityContext ctx(fs, ball, sc, 0.0, 6);
    double const_ratio = 0.0;
    for (const BatteryMember& m : standard_battery(fs, ball)) {
        const int f = ctx.add_field(m.u, m.name);
        const double r = rayleigh_ratio("rellich", ctx, f, 0.0, 5.0);
        INFO(m.name);
        CHECK(r >= 25.0 / 16.0);
        if (m.name == "const") const_ratio = r;
    }
    CHECK(const_ratio == doctest::Approx(3.75).epsilon(1e-9));
}

TEST_CASE("rellich log bump trials approach the sharp constant from above") {
    auto fs = eucl_fs(5);
    Domain ball = build_euclidean_ball(Point(5, 0.0), 1.0);
    QuadratureScheme sc = radial_scheme();
    TrialFamily fam = log_bump_family(fs, 1.0, 0.5, 5.0, 30.0, 2.05, 3.5);
    double prev = std::numeric_limits<double>::infinity();
    for (double T : {10.0, 15.0, 20.0}) {
        const double r = rayleigh_ratio("rellich", fs, member_at(fam, {T, 2.5}), 0.0, 5.0, ball,
                                        sc, 0.0, 45);
        CHECK(r >= 25.0 / 16.0);
        CHECK(r < prev);
        prev = r;
    }
    CHECK(prev - 25.0 / 16.0 < 0.25);
}

TEST_CASE("uncertainty ratios recover the classical gaussian product") {
    auto fs = eucl_fs(3);
    Domain ball = build_euclidean_ball(Point{0, 0, 0}, 3.0);
    QuadratureScheme sc;
    AxisProfile g;
    g.f = [](double s) { return std::exp(-2.0 * s); };
    g.df = [](double s) { return -2.0 * std::exp(-2.0 * s); };
    g.d2f = [](double s) { return 4.0 * std::exp(-2.0 * s); };
    FieldPtr u = compose_field(g, fs.gauge_power_field(2.0), "gaussian");
    // (int |x|^2 u^2)(int |grad u|^2) / (int u^2)^2 = 9/4 at the gaussian.
    const double rw = rayleigh_ratio("uncertainty-weighted", fs, u, 0.0, 3.0, ball, sc, 0.0, 8);
    CHECK(rw == doctest::Approx(2.25).epsilon(1e-6));
    const double rp = rayleigh_ratio("uncertainty-plain", fs, u, 0.0, 3.0, ball, sc, 0.0, 8);
    CHECK(rp == doctest::Approx(2.25).epsilon(1e-6));
    CHECK(rw >= ratio_lower_bound("uncertainty-weighted", 0.0, 3.0));
}

TEST_CASE("rayleigh ratio overloads agree and reject refined ids") {
    auto fs = eucl_fs(3);
    Domain ball = build_euclidean_ball(Point{0, 0, 0}, 1.0);
    QuadratureScheme sc = radial_scheme();
    TrialFamily fam = log_bump_family(fs, 1.0, 0.5, 5.0, 38.0, 1.05, 3.5);
    FieldPtr u = member_at(fam, {12.0, 2.0});

    const double one_shot = rayleigh_ratio("hardy", fs, u, 0.0, 3.0, ball, sc, 0.0, 25);
    InequalityContext ctx(fs, ball, sc, 0.0, 25);
    const int f = ctx.add_field(u, "u");
    CHECK(rayleigh_ratio("hardy", ctx, f, 0.0, 3.0) == one_shot);
    CHECK(rayleigh_ratio(ctx.hardy(f, 0.0, 3.0)) == one_shot);

    CHECK_THROWS_WITH_AS(rayleigh_ratio("hardy-refined", ctx, f, 0.0, 3.0),
                         doctest::Contains("unknown inequality"), std::invalid_argument);
    CHECK_THROWS_AS(rayleigh_ratio("green", ctx, f, 0.0, 3.0), std::invalid_argument);

    // the zero field has no main mass to divide by
    const int z = ctx.add_field(constant_field(3, 0.0), "zero");
    CHECK_THROWS_WITH_AS(rayleigh_ratio("hardy", ctx, z, 0.0, 3.0),
                         doctest::Contains("degenerate"), std::invalid_argument);
}

TEST_CASE("optimizer recovers the euclidean hardy constant within 5 percent") {
    auto fs = eucl_fs(3);
    Domain ball = build_euclidean_ball(Point{0, 0, 0}, 1.0);
    QuadratureScheme sc = radial_scheme();
    TrialFamily fam = log_bump_family(fs, 1.0, 0.5, 5.0, 38.0, 1.05, 3.5);
    SharpnessReport rep = optimize_trial("hardy", fam, fs, 0.0, 3.0, ball, sc, 120, 1, 0.0, 60);

    CHECK(rep.constant == 0.25);
    CHECK(rep.best_ratio >= 0.25);
    CHECK(rep.best_ratio <= 1.05 * 0.25);
    CHECK(rep.evaluations <= 120);
    CHECK(rep.trace.size() == static_cast<std::size_t>(rep.evaluations));
    for (int i = 0; i < 2; ++i) {
        CHECK(rep.best_theta[static_cast<std::size_t>(i)] >= fam.lo[static_cast<std::size_t>(i)]);
        CHECK(rep.best_theta[static_cast<std::size_t>(i)] <= fam.hi[static_cast<std::size_t>(i)]);
    }
    // restart stability: the three descents agree on the infimum within 2%
    for (double b : rep.restart_best) CHECK(b == doctest::Approx(rep.best_ratio).epsilon(0.02));
    // monotone trace: the running best never increases within a restart
    double best[3] = {std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()};
    int last_eval[3] = {-1, -1, -1};
    for (const TraceEntry& te : rep.trace) {
        best[te.restart] = std::min(best[te.restart], te.ratio);
        CHECK(te.best == best[te.restart]);
        CHECK(te.eval == last_eval[te.restart] + 1);  // restart-major merge
        last_eval[te.restart] = te.eval;
    }
}

TEST_CASE("optimizer recovers the heisenberg hardy constant within 10 percent") {
    auto fs = heis_fs();
    Domain ball = build_gauge_ball(fs, 1.0);
    QuadratureScheme sc = radial_scheme();
    TrialFamily fam = log_bump_family(fs, 1.0, 1.0, 5.0, 26.0, 1.05, 3.5);
    SharpnessReport rep = optimize_trial("hardy", fam, fs, 0.0, 4.0, ball, sc, 120, 7, 0.0, 40);
    CHECK(rep.constant == 1.0);
    CHECK(rep.best_ratio >= 0.98);
    CHECK(rep.best_ratio <= 1.1);
    for (double b : rep.restart_best) CHECK(b == doctest::Approx(rep.best_ratio).epsilon(0.02));
}

TEST_CASE("optimizer walks the mollified family to depth") {
    auto fs = eucl_fs(3);
    Domain ball = build_euclidean_ball(Point{0, 0, 0}, 1.0);
    QuadratureScheme sc = radial_scheme();
    TrialFamily fam = mollified_power_family(fs, 1.0, 0.5, -120.0, -3.0);
    SharpnessReport rep = optimize_trial("hardy", fam, fs, 0.0, 3.0, ball, sc, 45, 1, 0.0, 185);
    CHECK(rep.best_ratio >= 0.25);
    CHECK(rep.best_ratio <= 1.05 * 0.25);
    CHECK(rep.family == "mollified-power");
    for (double b : rep.restart_best) CHECK(b == doctest::Approx(rep.best_ratio).epsilon(0.02));
}

TEST_CASE("optimizer is deterministic for a fixed seed") {
    auto fs = eucl_fs(3);
    Domain ball = build_euclidean_ball(Point{0, 0, 0}, 1.0);
    QuadratureScheme sc = radial_scheme();
    TrialFamily fam = log_bump_family(fs, 1.0, 0.5, 5.0, 30.0, 1.05, 3.5);
    SharpnessReport a = optimize_trial("hardy", fam, fs, 0.0, 3.0, ball, sc, 39, 42, 0.0, 45);
    SharpnessReport b = optimize_trial("hardy", fam, fs, 0.0, 3.0, ball, sc, 39, 42, 0.0, 45);
    CHECK(a.best_ratio == b.best_ratio);
    CHECK(a.best_theta == b.best_theta);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].theta == b.trace[i].theta);
        CHECK(a.trace[i].ratio == b.trace[i].ratio);
    }
    SharpnessReport c = optimize_trial("hardy", fam, fs, 0.0, 3.0, ball, sc, 39, 43, 0.0, 45);
    CHECK(c.trace[0].theta != a.trace[0].theta);  // the seed moves the inits
}

TEST_CASE("single member family returns its ratio unchanged") {
    auto fs = eucl_fs(3);
    Domain ball = build_euclidean_ball(Point{0, 0, 0}, 1.0);
    QuadratureScheme sc = radial_scheme();
    TrialFamily wide = log_bump_family(fs, 1.0, 0.5, 5.0, 30.0, 1.05, 3.5);
    FieldPtr fixed = member_at(wide, {14.0, 2.0});

    TrialFamily single;
    single.description = "fixed";
    single.params = 1;
    single.lo = {0.0};
    single.hi = {1.0};
    single.make = [fixed](View) { return fixed; };

    SharpnessReport rep = optimize_trial("hardy", single, fs, 0.0, 3.0, ball, sc, 20, 5, 0.0, 45);
    const double direct = rayleigh_ratio("hardy", fs, fixed, 0.0, 3.0, ball, sc, 0.0, 45);
    CHECK(rep.best_ratio == direct);
    for (double b : rep.restart_best) CHECK(b == direct);
    for (const TraceEntry& te : rep.trace) CHECK(te.ratio == direct);
    CHECK(rep.evaluations < 20);  // a flat simplex converges immediately
}

TEST_CASE("optimizer rejects degenerate families and bad setups") {
    auto fs = eucl_fs(3);
    Domain ball = build_euclidean_ball(Point{0, 0, 0}, 1.0);
    QuadratureScheme sc = radial_scheme();

    TrialFamily zero;
    zero.description = "zero";
    zero.params = 1;
    zero.lo = {0.0};
    zero.hi = {1.0};
    zero.make = [](View) { return constant_field(3, 0.0); };
    CHECK_THROWS_WITH_AS(optimize_trial("hardy", zero, fs, 0.0, 3.0, ball, sc, 20, 1, 0.0, 10),
                         doctest::Contains("degenerate"), std::runtime_error);

    TrialFamily fam = log_bump_family(fs, 1.0, 0.5, 5.0, 30.0, 1.05, 3.5);
    CHECK_THROWS_AS(optimize_trial("hardy", fam, fs, 0.0, 3.0, ball, sc, 19, 1, 0.0, 45),
                    std::invalid_argument);
    CHECK_THROWS_AS(optimize_trial("green", fam, fs, 0.0, 3.0, ball, sc, 20, 1, 0.0, 45),
                    std::invalid_argument);

    TrialFamily bad = fam;
    bad.hi = bad.lo;
    CHECK_THROWS_AS(optimize_trial("hardy", bad, fs, 0.0, 3.0, ball, sc, 20, 1, 0.0, 45),
                    std::invalid_argument);

    // a negative allowance demands ratios a full unit above the bound, which
    // honest hardy trials near the constant cannot meet: the guard trips
    CHECK_THROWS_WITH_AS(
        optimize_trial("hardy", fam, fs, 0.0, 3.0, ball, sc, 21, 1, 0.0, 45, -1.0),
        doctest::Contains("below the theorem bound"), std::runtime_error);
}

TEST_CASE("family constructors validate their boxes") {
    auto fs = eucl_fs(3);
    CHECK_THROWS_AS(mollified_power_family(fs, 0.0, 0.5, -10.0, -3.0), std::invalid_argument);
    CHECK_THROWS_AS(mollified_power_family(fs, 1.0, -0.5, -10.0, -3.0), std::invalid_argument);
    CHECK_THROWS_AS(mollified_power_family(fs, 1.0, 0.5, -3.0, -10.0), std::invalid_argument);
    CHECK_THROWS_AS(log_bump_family(fs, 1.0, 0.5, -1.0, 30.0, 1.05, 3.5), std::invalid_argument);
    CHECK_THROWS_AS(log_bump_family(fs, 1.0, 0.5, 5.0, 30.0, 0.9, 3.5), std::invalid_argument);
}
