#include "subell/quadrature.hpp"

#include "subell/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

namespace subell {

namespace {
constexpr double kPi = std::numbers::pi;
}

const GaussRule& gauss_legendre(int order) {
    static std::map<int, GaussRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    require(order >= 1 && order <= 128, "gauss_legendre: order out of range");

    GaussRule rule;
    rule.nodes.assign(order, 0.0);
    rule.weights.assign(order, 0.0);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
        double dp = 1.0;
        for (int iter = 0; iter < 60; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) <= 1e-15 * std::max(1.0, std::abs(x))) break;
        }
        if (2 * i + 1 == order) x = 0.0;  // middle root of odd orders
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[order - 1 - i] = x;
        rule.weights[order - 1 - i] = w;
        rule.nodes[i] = -x;
        rule.weights[i] = w;
    }
    return cache.emplace(order, std::move(rule)).first->second;
}

std::uint64_t QuadratureScheme::hash() const {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](std::int64_t s) {
        const auto v = static_cast<std::uint64_t>(s);
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xffu;
            h *= 1099511628211ULL;
        }
    };
    mix(order);
    mix(angular_order);
    mix(refine);
    mix(boundary_refine);
    return h;
}

namespace {

struct AxisNodes {
    std::vector<double> pos, wt;
};

void append_gauss(AxisNodes& out, double a, double b, int order) {
    const GaussRule& g = gauss_legendre(order);
    const double h = 0.5 * (b - a), m = 0.5 * (a + b);
    for (int i = 0; i < order; ++i) {
        out.pos.push_back(m + h * g.nodes[i]);
        out.wt.push_back(h * g.weights[i]);
    }
}

AxisNodes axis_nodes(AxisKind kind, double a, double b, const QuadratureScheme& sc,
                     bool boundary) {
    AxisNodes out;
    const int ord = sc.order;
    // sin-power jacobian factors need more angular nodes than typical radial
    // profiles: Gauss at order 8 still carries ~3e-8 relative error on sin^3.
    const int ang = sc.angular_order > 0 ? sc.angular_order : std::max(sc.order, 12);
    const int refine = boundary && sc.boundary_refine >= 0 ? sc.boundary_refine : sc.refine;
    switch (kind) {
        case AxisKind::Linear:
            append_gauss(out, a, b, ord);
            break;
        case AxisKind::Angular:
            append_gauss(out, a, b, ang);
            break;
        case AxisKind::AngularPeriodic: {
            const double h = (b - a) / ang;
            for (int i = 0; i < ang; ++i) {
                out.pos.push_back(a + (i + 0.5) * h);
                out.wt.push_back(h);
            }
            break;
        }
        case AxisKind::RadialGraded: {
            if (a <= 0.0) {
                // dyadic shells toward zero
                append_gauss(out, a, b * std::pow(0.5, refine), ord);
                for (int j = refine; j >= 1; --j)
                    append_gauss(out, b * std::pow(0.5, j), b * std::pow(0.5, j - 1), ord);
            } else {
                // log-uniform shells of ratio <= 2 (excised radial ranges)
                double lo = a;
                while (lo * 2.0 < b) {
                    append_gauss(out, lo, lo * 2.0, ord);
                    lo *= 2.0;
                }
                append_gauss(out, lo, b, ord);
            }
            break;
        }
        case AxisKind::ClusterBoth: {
            const double w = 0.5 * (b - a);
            append_gauss(out, a, a + w * std::pow(0.5, refine), ord);
            for (int j = refine; j >= 1; --j)
                append_gauss(out, a + w * std::pow(0.5, j), a + w * std::pow(0.5, j - 1), ord);
            for (int j = 1; j <= refine; ++j)
                append_gauss(out, b - w * std::pow(0.5, j - 1), b - w * std::pow(0.5, j), ord);
            append_gauss(out, b - w * std::pow(0.5, refine), b, ord);
            break;
        }
    }
    return out;
}

}  // namespace

QuadratureScheme coarser(const QuadratureScheme& sc) {
    QuadratureScheme c = sc;
    c.order = std::max(2, sc.order - 2);
    if (sc.angular_order > 0) c.angular_order = std::max(2, sc.angular_order - 1);
    c.refine = std::max(0, sc.refine - 1);
    if (sc.boundary_refine >= 0) c.boundary_refine = std::max(0, sc.boundary_refine - 1);
    return c;
}

NodeSet interior_nodes(const Domain& dom, const QuadratureScheme& sc) {
    require(dom.n >= 1 && !dom.cells.empty(), "interior_nodes: empty domain");
    NodeSet ns;
    ns.n = dom.n;
    const bool mask = dom.excised_eps > 0.0 && !dom.radial_gauge_aligned;
    require(!mask || static_cast<bool>(dom.gauge), "interior_nodes: excised domain without gauge");
    std::array<double, kMaxDim> s{}, xx{};
    for (const Cell& cell : dom.cells) {
        const int dim = static_cast<int>(cell.lo.size());
        std::vector<AxisNodes> axes(dim);
        for (int i = 0; i < dim; ++i) {
            const AxisKind kind = cell.axes.empty() ? AxisKind::Linear : cell.axes[i];
            axes[i] = axis_nodes(kind, cell.lo[i], cell.hi[i], sc, false);
        }
        std::vector<std::size_t> idx(dim, 0);
        while (true) {
            double w = 1.0;
            for (int i = 0; i < dim; ++i) {
                s[i] = axes[i].pos[idx[i]];
                w *= axes[i].wt[idx[i]];
            }
            const View sv(s.data(), dim);
            if (cell.jacobian) w *= cell.jacobian(sv);
            if (cell.map)
                cell.map(sv, std::span<double>(xx.data(), dom.n));
            else
                std::copy(s.begin(), s.begin() + dim, xx.begin());
            if (!(mask && dom.gauge(View(xx.data(), dom.n)) <= dom.excised_eps)) {
                ns.x.insert(ns.x.end(), xx.begin(), xx.begin() + dom.n);
                ns.w.push_back(w);
            }
            int i = 0;
            for (; i < dim; ++i) {
                if (++idx[i] < axes[i].pos.size()) break;
                idx[i] = 0;
            }
            if (i == dim) break;
        }
    }
    return ns;
}

BoundaryNodeSet boundary_nodes(const Frame& fr, const Domain& dom, const QuadratureScheme& sc) {
    require(fr.dim() == dom.n, "boundary_nodes: frame/domain dimension mismatch");
    require(!dom.patches.empty(), "boundary_nodes: domain has no boundary patches");
    BoundaryNodeSet bs;
    bs.n = dom.n;
    bs.nf = fr.fields();
    std::array<double, kMaxDim> s{}, xx{};
    std::array<double, kMaxDim * kMaxDim> tan{};
    for (const BoundaryPatch& patch : dom.patches) {
        const int dim = dom.n - 1;
        std::vector<AxisNodes> axes(dim);
        for (int i = 0; i < dim; ++i) {
            const AxisKind kind = patch.axes.empty() ? AxisKind::Linear : patch.axes[i];
            axes[i] = axis_nodes(kind, patch.lo[i], patch.hi[i], sc, true);
        }
        std::vector<std::size_t> idx(dim, 0);
        while (true) {
            double w = 1.0;
            for (int i = 0; i < dim; ++i) {
                s[i] = axes[i].pos[idx[i]];
                w *= axes[i].wt[idx[i]];
            }
            const View sv(s.data(), dim);
            patch.chart(sv, std::span<double>(xx.data(), dom.n));
            patch.tangents(sv, std::span<double>(tan.data(), dom.n * dim));
            bs.x.insert(bs.x.end(), xx.begin(), xx.begin() + dom.n);
            bs.w.push_back(w);
            const View xv(xx.data(), dom.n);
            const View tv(tan.data(), dom.n * dim);
            for (int k = 0; k < bs.nf; ++k)
                bs.dens.push_back(boundary_form_density_at(fr, xv, tv, patch.orient, k));
            int i = 0;
            for (; i < dim; ++i) {
                if (++idx[i] < axes[i].pos.size()) break;
                idx[i] = 0;
            }
            if (i == dim) break;
        }
    }
    return bs;
}

double sum_over(const NodeSet& ns, const Integrand& f) {
    std::vector<double> vals(ns.count());
    parallel_for_index(ns.count(), [&](std::int64_t i) { vals[i] = ns.w[i] * f(ns.point(i)); });
    return pairwise_sum(vals);
}

double sum_over_boundary(const BoundaryNodeSet& bs, const BoundaryIntegrand& g) {
    std::vector<double> vals(bs.count());
    parallel_for_index(bs.count(),
                       [&](std::int64_t i) { vals[i] = bs.w[i] * g(bs.point(i), bs.densities(i)); });
    return pairwise_sum(vals);
}

IntegralResult integrate_interior(const Domain& dom, const QuadratureScheme& sc,
                                  const Integrand& f) {
    IntegralResult res;
    const NodeSet fine = interior_nodes(dom, sc);
    res.value = sum_over(fine, f);
    res.nodes = fine.count();
    const QuadratureScheme cs = coarser(sc);
    if (cs.order == sc.order && cs.refine == sc.refine && cs.angular_order == sc.angular_order) {
        res.error = 1e-14 * std::abs(res.value);
    } else {
        res.error = std::abs(res.value - sum_over(interior_nodes(dom, cs), f));
    }
    return res;
}

IntegralResult integrate_boundary(const Frame& fr, const Domain& dom, const QuadratureScheme& sc,
                                  const BoundaryIntegrand& g) {
    IntegralResult res;
    const BoundaryNodeSet fine = boundary_nodes(fr, dom, sc);
    res.value = sum_over_boundary(fine, g);
    res.nodes = fine.count();
    const QuadratureScheme cs = coarser(sc);
    if (cs.order == sc.order && cs.refine == sc.refine && cs.angular_order == sc.angular_order) {
        res.error = 1e-14 * std::abs(res.value);
    } else {
        res.error = std::abs(res.value - sum_over_boundary(boundary_nodes(fr, dom, cs), g));
    }
    return res;
}

ExcisionGroups excision_node_groups(const Domain& dom, const FundamentalSolution& fs,
                                    const QuadratureScheme& sc, double eps0, int levels) {
    require(eps0 > 0.0, "excision_node_groups: eps0 must be positive");
    // Scale-invariant integrands (d^-1 dd in the radial variable) pick up mass
    // over every octave, so trial profiles reaching depth e^-T need T/log(2)
    // shells. Weights stay comfortably normal to 2^-200 in low dimension.
    require(levels >= 2 && levels <= 200, "excision_node_groups: levels out of range");
    Domain base = dom;
    if (!base.gauge) attach_pole(base, fs);
    require(base.excised_eps == 0.0, "excision_node_groups: domain already excised");
    require(base.radial_gauge_aligned,
            "excision_node_groups: domain must be gauge-radially aligned for exact shells");

    ExcisionGroups out;
    Domain outer = excise_pole(base, fs, eps0);
    out.eps.push_back(eps0);
    out.groups.push_back(interior_nodes(outer, sc));
    for (int j = 1; j < levels; ++j) {
        const double ej = eps0 * std::pow(0.5, j);
        Domain shell = base;  // {ej < d <= 2 ej}
        const double a = ej / base.radial_gauge_scale;
        for (auto& cell : shell.cells) {
            cell.lo[0] = a;
            cell.hi[0] = std::min(2.0 * a, cell.hi[0]);
        }
        shell.volume_exact.reset();
        out.eps.push_back(ej);
        out.groups.push_back(interior_nodes(shell, sc));
    }
    return out;
}

ExcisionSequence extrapolate_excision(std::vector<double> eps, std::vector<double> values) {
    require(eps.size() == values.size() && eps.size() >= 2,
            "extrapolate_excision: need matching sequences of length >= 2");
    ExcisionSequence seq;
    seq.eps = std::move(eps);
    seq.values = std::move(values);
    const int last = static_cast<int>(seq.values.size()) - 1;
    const int levels = last + 1;
    const double d_last = seq.values[last] - seq.values[last - 1];
    const double d_prev = levels >= 3 ? seq.values[last - 1] - seq.values[last - 2] : 0.0;
    const double mag =
        std::max({std::abs(seq.values[last]), std::abs(seq.values[0]), 1e-300});
    seq.extrapolated = seq.values[last];
    if (std::abs(d_last) <= 1e-14 * mag) {
        seq.error = std::abs(d_last) + 1e-15 * mag;
    } else if (levels >= 3 && d_prev != 0.0) {
        const double q = d_last / d_prev;
        if (std::abs(q) < 0.95 && q != 0.0) {
            const double tail = d_last * q / (1.0 - q);
            seq.extrapolated += tail;
            seq.rate = -std::log2(std::abs(q));
            seq.error = std::abs(tail) * std::abs(q) + 1e-15 * mag;
        } else {
            seq.error = std::abs(d_last) + std::abs(d_prev);
        }
    } else {
        seq.error = std::abs(d_last);
    }
    return seq;
}

ExcisionSequence excised_integral(const Domain& dom, const FundamentalSolution& fs,
                                  const QuadratureScheme& sc, const Integrand& f, double eps0,
                                  int levels) {
    ExcisionGroups gr = excision_node_groups(dom, fs, sc, eps0, levels);
    std::vector<double> values;
    values.reserve(gr.groups.size());
    double acc = 0.0;
    for (const NodeSet& g : gr.groups) {
        acc += sum_over(g, f);
        values.push_back(acc);
    }
    return extrapolate_excision(std::move(gr.eps), std::move(values));
}

MonteCarloResult monte_carlo_interior(const Domain& dom, const Integrand& f, std::int64_t samples,
                                      std::uint64_t seed) {
    require(samples > 0, "monte_carlo_interior: need samples > 0");
    require(static_cast<bool>(dom.contains), "monte_carlo_interior: domain has no contains test");
    require(static_cast<int>(dom.bb_lo.size()) == dom.n, "monte_carlo_interior: no bounding box");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int n = dom.n;
    double bbvol = 1.0;
    for (int i = 0; i < n; ++i) bbvol *= dom.bb_hi[i] - dom.bb_lo[i];

    double sum = 0.0, sum2 = 0.0;
    std::int64_t inside = 0;
    Point x(n);
    for (std::int64_t s = 0; s < samples; ++s) {
        for (int i = 0; i < n; ++i) x[i] = dom.bb_lo[i] + (dom.bb_hi[i] - dom.bb_lo[i]) * uni(rng);
        double v = 0.0;
        if (dom.contains(x)) {  // excised domains already mask the gauge ball here
            ++inside;
            v = f(x);
        }
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / static_cast<double>(samples);
    const double var = std::max(0.0, sum2 / static_cast<double>(samples) - mean * mean);
    MonteCarloResult r;
    r.samples = samples;
    r.inside = inside;
    r.value = bbvol * mean;
    r.std_error = bbvol * std::sqrt(var / static_cast<double>(samples));
    const double rate = static_cast<double>(inside) / static_cast<double>(samples);
    r.volume = bbvol * rate;
    r.volume_std_error = bbvol * std::sqrt(std::max(0.0, rate * (1.0 - rate)) /
                                           static_cast<double>(samples));
    return r;
}

}  // namespace subell
