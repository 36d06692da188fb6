#include "subell/domain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>

namespace subell {

namespace {
constexpr double kPi = std::numbers::pi;
}

double det_inplace(std::span<double> a, int n) {
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
        if (a[piv * n + c] == 0.0) return 0.0;
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(a[c * n + j], a[piv * n + j]);
            det = -det;
        }
        det *= a[c * n + c];
        for (int r = c + 1; r < n; ++r) {
            const double f = a[r * n + c] / a[c * n + c];
            for (int j = c + 1; j < n; ++j) a[r * n + j] -= f * a[c * n + j];
        }
    }
    return det;
}

void sphere_point(int d, View ang, std::span<double> out) {
    require(static_cast<int>(ang.size()) == d - 1, "sphere_point: need d-1 angles");
    double prefix = 1.0;
    for (int j = 0; j < d - 1; ++j) {
        out[j] = prefix * std::cos(ang[j]);
        prefix *= std::sin(ang[j]);
    }
    out[d - 1] = prefix;
}

void sphere_tangent(int d, View ang, int which, std::span<double> out) {
    require(static_cast<int>(ang.size()) == d - 1, "sphere_tangent: need d-1 angles");
    require(which >= 0 && which < d - 1, "sphere_tangent: angle index out of range");
    for (int j = 0; j < d; ++j) {
        if (j < which) {
            out[j] = 0.0;
            continue;
        }
        double p = 1.0;
        const int nsin = std::min(j, d - 1);  // leading sin factors of component j
        for (int t = 0; t < nsin; ++t) p *= (t == which) ? std::cos(ang[t]) : std::sin(ang[t]);
        if (j <= d - 2) p *= (j == which) ? -std::sin(ang[j]) : std::cos(ang[j]);
        out[j] = p;
    }
}

double boundary_form_density_at(const Frame& fr, View x, View tangents, double orient, int k) {
    const int n = fr.dim();
    std::array<double, kMaxDim> v{};
    fr.field_vector(k, x, std::span<double>(v.data(), n));
    std::array<double, kMaxDim * kMaxDim> mat{};
    for (int r = 0; r < n; ++r) {
        mat[r * n] = v[r];
        for (int c = 0; c < n - 1; ++c) mat[r * n + c + 1] = tangents[c * n + r];
    }
    return orient * det_inplace(std::span<double>(mat.data(), n * n), n);
}

double boundary_form_density(const Frame& fr, const BoundaryPatch& patch, int k, View s) {
    const int n = patch.n;
    require(n == fr.dim(), "boundary_form_density: frame/patch dimension mismatch");
    std::array<double, kMaxDim> x{};
    std::array<double, kMaxDim * kMaxDim> tan{};
    patch.chart(s, std::span<double>(x.data(), n));
    patch.tangents(s, std::span<double>(tan.data(), n * (n - 1)));
    return boundary_form_density_at(fr, View(x.data(), n), View(tan.data(), n * (n - 1)),
                                    patch.orient, k);
}

double wedge_form_density(const Frame& fr, const BoundaryPatch& patch, int k, View s) {
    const int n = patch.n, nf = fr.fields(), d = n - 1;
    require(n == fr.dim(), "wedge_form_density: frame/patch dimension mismatch");
    require(k >= 0 && k < nf, "wedge_form_density: field index out of range");
    std::array<double, kMaxDim> x{};
    std::array<double, kMaxDim * kMaxDim> tan{};
    patch.chart(s, std::span<double>(x.data(), n));
    patch.tangents(s, std::span<double>(tan.data(), n * (n - 1)));
    const View xv(x.data(), n);

    std::array<double, kMaxDim * kMaxDim> mat{};
    int r = 0;
    for (int j = 0; j < nf; ++j) {
        if (j == k) continue;
        for (int c = 0; c < d; ++c) mat[r * d + c] = tan[c * n + j];
        ++r;
    }
    for (int m = nf; m < n; ++m) {
        for (int c = 0; c < d; ++c) {
            double th = tan[c * n + m];
            for (int kp = 0; kp < nf; ++kp) {
                const Coefficient& a = fr.component(kp, m);
                if (a.is_zero()) continue;
                th -= a.value(xv) * tan[c * n + kp];
            }
            mat[r * d + c] = th;
        }
        ++r;
    }
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    return patch.orient * sign * det_inplace(std::span<double>(mat.data(), d * d), d);
}

Domain build_box(Point lo, Point hi, int splits) {
    const int n = static_cast<int>(lo.size());
    require(n >= 2 && n <= kMaxDim, "build_box: dimension out of range");
    require(static_cast<int>(hi.size()) == n, "build_box: lo/hi size mismatch");
    for (int i = 0; i < n; ++i) require(hi[i] > lo[i], "build_box: empty extent");
    require(splits >= 1 && splits <= 8, "build_box: splits out of range");

    Domain dom;
    dom.n = n;
    dom.kind = "box";
    dom.bb_lo = lo;
    dom.bb_hi = hi;
    double vol = 1.0, sc = 0.0;
    for (int i = 0; i < n; ++i) {
        vol *= hi[i] - lo[i];
        sc = std::max(sc, hi[i] - lo[i]);
    }
    dom.volume_exact = vol;
    dom.scale = sc;

    std::vector<std::vector<double>> edges(n);
    for (int i = 0; i < n; ++i)
        for (int s = 0; s <= splits; ++s)
            edges[i].push_back(lo[i] + (hi[i] - lo[i]) * s / splits);

    std::vector<int> idx(n, 0);
    while (true) {
        Cell cell;
        cell.lo.resize(n);
        cell.hi.resize(n);
        for (int i = 0; i < n; ++i) {
            cell.lo[i] = edges[i][idx[i]];
            cell.hi[i] = edges[i][idx[i] + 1];
        }
        dom.cells.push_back(std::move(cell));
        int i = 0;
        for (; i < n; ++i) {
            if (++idx[i] < splits) break;
            idx[i] = 0;
        }
        if (i == n) break;
    }

    for (int i = 0; i < n; ++i) {
        std::vector<int> jmap;
        for (int j = 0; j < n; ++j)
            if (j != i) jmap.push_back(j);
        for (int side = 0; side < 2; ++side) {
            const double xi = side ? hi[i] : lo[i];
            const double orient = ((i % 2 == 0) ? 1.0 : -1.0) * (side ? 1.0 : -1.0);
            std::vector<int> pidx(n - 1, 0);
            while (true) {
                BoundaryPatch p;
                p.n = n;
                p.lo.resize(n - 1);
                p.hi.resize(n - 1);
                for (int a = 0; a < n - 1; ++a) {
                    const int j = jmap[a];
                    p.lo[a] = edges[j][pidx[a]];
                    p.hi[a] = edges[j][pidx[a] + 1];
                }
                p.orient = orient;
                p.chart = [i, xi, jmap](View s, std::span<double> out) {
                    out[i] = xi;
                    for (std::size_t a = 0; a < jmap.size(); ++a) out[jmap[a]] = s[a];
                };
                p.tangents = [n, jmap](View, std::span<double> t) {
                    std::fill(t.begin(), t.end(), 0.0);
                    for (std::size_t a = 0; a < jmap.size(); ++a) t[a * n + jmap[a]] = 1.0;
                };
                dom.patches.push_back(std::move(p));
                int a = 0;
                for (; a < n - 1; ++a) {
                    if (++pidx[a] < splits) break;
                    pidx[a] = 0;
                }
                if (a == n - 1) break;
            }
        }
    }

    auto plo = std::make_shared<Point>(std::move(lo));
    auto phi = std::make_shared<Point>(std::move(hi));
    dom.contains = [plo, phi](View x) {
        for (size_t i = 0; i < plo->size(); ++i)
            if (x[i] < (*plo)[i] || x[i] > (*phi)[i]) return false;
        return true;
    };
    return dom;
}

Domain build_euclidean_ball(Point center, double radius) {
    const int n = static_cast<int>(center.size());
    require(n >= 2 && n <= kMaxDim, "build_euclidean_ball: dimension out of range");
    require(radius > 0.0, "build_euclidean_ball: radius must be positive");

    Domain dom;
    dom.n = n;
    dom.kind = "euclidean_ball";
    dom.scale = radius;
    dom.volume_exact = ball_volume(n, radius);
    dom.bb_lo.resize(n);
    dom.bb_hi.resize(n);
    for (int i = 0; i < n; ++i) {
        dom.bb_lo[i] = center[i] - radius;
        dom.bb_hi[i] = center[i] + radius;
    }
    auto c = std::make_shared<Point>(std::move(center));

    Cell cell;
    cell.lo.assign(n, 0.0);
    cell.hi.assign(n, kPi);
    cell.hi[0] = radius;
    cell.hi[n - 1] = 2.0 * kPi;
    cell.axes.assign(n, AxisKind::Angular);
    cell.axes[0] = AxisKind::RadialGraded;
    cell.axes[n - 1] = AxisKind::AngularPeriodic;
    cell.map = [n, c](View s, std::span<double> out) {
        sphere_point(n, s.subspan(1), out.first(n));
        for (int i = 0; i < n; ++i) out[i] = (*c)[i] + s[0] * out[i];
    };
    cell.jacobian = [n](View s) {
        double j = std::pow(s[0], n - 1);
        for (int i = 1; i <= n - 2; ++i) j *= std::pow(std::sin(s[i]), n - 1 - i);
        return j;
    };
    dom.cells.push_back(std::move(cell));

    BoundaryPatch p;
    p.n = n;
    p.lo.assign(n - 1, 0.0);
    p.hi.assign(n - 1, kPi);
    p.hi[n - 2] = 2.0 * kPi;
    p.axes.assign(n - 1, AxisKind::Angular);
    p.axes[n - 2] = AxisKind::AngularPeriodic;
    p.orient = 1.0;  // det[omega | d omega] = prod sin^(n-1-i) >= 0, omega is outward
    p.chart = [n, c, radius](View s, std::span<double> out) {
        sphere_point(n, s, out.first(n));
        for (int i = 0; i < n; ++i) out[i] = (*c)[i] + radius * out[i];
    };
    p.tangents = [n, radius](View s, std::span<double> t) {
        for (int a = 0; a < n - 1; ++a) {
            sphere_tangent(n, s, a, t.subspan(a * n, n));
            for (int i = 0; i < n; ++i) t[a * n + i] *= radius;
        }
    };
    dom.patches.push_back(std::move(p));

    dom.contains = [c, radius](View x) {
        double s2 = 0.0;
        for (size_t i = 0; i < c->size(); ++i) s2 += sq(x[i] - (*c)[i]);
        return s2 <= radius * radius;
    };
    return dom;
}

Domain build_gauge_ball(const FundamentalSolution& fs, double radius) {
    const Frame& fr = fs.frame();
    const int n = fr.dim();
    require(n % 2 == 1 && fr.fields() == n - 1, "build_gauge_ball: needs a heisenberg-type frame");
    require(radius > 0.0, "build_gauge_ball: radius must be positive");
    const int m = (n - 1) / 2;
    const int zdim = 2 * m;
    const int q = 2 * m + 2;
    const double r = radius;
    const Point pole = fs.pole();

    // Chart around the pole: u has |z_u| = lambda r sqrt(cos psi),
    // t_u = lambda^2 r^2 sin psi, so the gauge of the mapped point is exactly
    // lambda * r; the group translation then moves it to the pole.
    auto map_u = [zdim, r](View s, std::span<double> u) {
        const double lam = s[0], psi = s[1];
        const double rad = lam * r * std::sqrt(std::cos(psi));
        sphere_point(zdim, s.subspan(2), u.first(zdim));
        for (int i = 0; i < zdim; ++i) u[i] *= rad;
        u[zdim] = lam * lam * r * r * std::sin(psi);
    };
    auto translate = [m, zdim, pole](std::span<double> u) {
        double cross = 0.0;
        for (int j = 0; j < m; ++j) cross += u[j] * pole[m + j] - u[m + j] * pole[j];
        u[zdim] += pole[zdim] + 2.0 * cross;
        for (int i = 0; i < zdim; ++i) u[i] += pole[i];
    };
    auto translate_tangent = [m, zdim, pole](std::span<double> du) {
        double cross = 0.0;
        for (int j = 0; j < m; ++j) cross += du[j] * pole[m + j] - du[m + j] * pole[j];
        du[zdim] += 2.0 * cross;
    };

    Domain dom;
    dom.n = n;
    dom.kind = "gauge_ball";
    dom.scale = radius;
    dom.volume_exact = fs.gauge_ball_volume(radius);

    Cell cell;
    cell.lo.assign(n, 0.0);
    cell.hi.assign(n, kPi);
    cell.hi[0] = 1.0;  // lambda
    cell.lo[1] = -kPi / 2;
    cell.hi[1] = kPi / 2;  // psi
    cell.hi[n - 1] = 2.0 * kPi;
    cell.axes.assign(n, AxisKind::Angular);
    cell.axes[0] = AxisKind::RadialGraded;
    cell.axes[1] = AxisKind::ClusterBoth;
    cell.axes[n - 1] = AxisKind::AngularPeriodic;
    cell.map = [map_u, translate, n](View s, std::span<double> out) {
        map_u(s, out.first(n));
        translate(out.first(n));
    };
    cell.jacobian = [m, zdim, r, q](View s) {
        double j = std::pow(s[0], q - 1) * std::pow(r, q) * std::pow(std::cos(s[1]), m - 1);
        for (int i = 0; i < zdim - 2; ++i) j *= std::pow(std::sin(s[2 + i]), zdim - 2 - i);
        return j;
    };
    dom.cells.push_back(std::move(cell));

    // Sanity probe: the fundamental solution's gauge must match the chart.
    {
        Point s(n), x(n);
        for (int i = 0; i < n; ++i) s[i] = 0.5 * (dom.cells[0].lo[i] + dom.cells[0].hi[i]);
        s[0] = 0.6;
        s[1] = 0.4;
        dom.cells[0].map(s, x);
        require(std::abs(fs.gauge(x) - 0.6 * r) <= 1e-9 * r,
                "build_gauge_ball: gauge does not match the heisenberg chart");
    }

    BoundaryPatch p;
    p.n = n;
    p.lo.assign(n - 1, 0.0);
    p.hi.assign(n - 1, kPi);
    p.lo[0] = -kPi / 2;
    p.hi[0] = kPi / 2;  // psi
    p.hi[n - 2] = 2.0 * kPi;
    p.axes.assign(n - 1, AxisKind::Angular);
    p.axes[0] = AxisKind::ClusterBoth;
    p.axes[n - 2] = AxisKind::AngularPeriodic;
    // det[d/dlambda | d/dpsi | d/dangles] = -lambda^(Q-1) r^Q cos^(m-1) psi
    // times the (nonnegative) sphere factor, so outward flux needs the flip.
    p.orient = -1.0;
    p.chart = [map_u, translate, n](View s, std::span<double> out) {
        std::array<double, kMaxDim> sp{};
        sp[0] = 1.0;
        for (int i = 0; i + 1 < n; ++i) sp[i + 1] = s[i];
        map_u(View(sp.data(), n), out.first(n));
        translate(out.first(n));
    };
    p.tangents = [translate_tangent, zdim, r, n](View s, std::span<double> t) {
        const double psi = s[0];
        const double cp = std::cos(psi), sp = std::sin(psi);
        std::array<double, kMaxDim> omega{};
        sphere_point(zdim, s.subspan(1), std::span<double>(omega.data(), zdim));
        // d/dpsi column
        auto col0 = t.subspan(0, n);
        for (int i = 0; i < zdim; ++i) col0[i] = -r * sp / (2.0 * std::sqrt(cp)) * omega[i];
        col0[zdim] = r * r * cp;
        translate_tangent(col0);
        // z-sphere angle columns
        for (int a = 1; a < n - 1; ++a) {
            auto col = t.subspan(a * n, n);
            sphere_tangent(zdim, s.subspan(1), a - 1, col.first(zdim));
            for (int i = 0; i < zdim; ++i) col[i] *= r * std::sqrt(cp);
            col[zdim] = 0.0;
            translate_tangent(col);
        }
    };
    dom.patches.push_back(std::move(p));

    auto fsc = std::make_shared<const FundamentalSolution>(fs);
    dom.gauge = [fsc](View x) { return fsc->gauge(x); };
    dom.contains = [fsc, radius](View x) { return fsc->gauge(x) <= radius; };
    dom.pole_inside = true;
    dom.radial_gauge_aligned = true;
    dom.radial_gauge_scale = radius;

    double znorm = 0.0;
    for (int i = 0; i < zdim; ++i) znorm += sq(pole[i]);
    znorm = std::sqrt(znorm);
    dom.bb_lo.resize(n);
    dom.bb_hi.resize(n);
    for (int i = 0; i < zdim; ++i) {
        dom.bb_lo[i] = pole[i] - r;
        dom.bb_hi[i] = pole[i] + r;
    }
    const double textent = r * r + 2.0 * r * znorm;
    dom.bb_lo[zdim] = pole[zdim] - textent;
    dom.bb_hi[zdim] = pole[zdim] + textent;
    return dom;
}

void attach_pole(Domain& dom, const FundamentalSolution& fs) {
    require(dom.n == fs.frame().dim(), "attach_pole: dimension mismatch");
    auto fsc = std::make_shared<const FundamentalSolution>(fs);
    dom.gauge = [fsc](View x) { return fsc->gauge(x); };
    dom.pole_inside = dom.contains && dom.contains(fs.pole());
    dom.radial_gauge_aligned = false;
    dom.radial_gauge_scale = 1.0;

    // Detect gauge-radial alignment (single mapped cell whose axis 0 starts at
    // the pole and moves linearly in gauge units, independently of the other
    // parameters), so that excision can clip that axis exactly.
    if (dom.cells.size() == 1 && dom.cells[0].map && !dom.cells[0].axes.empty() &&
        dom.cells[0].axes[0] == AxisKind::RadialGraded && dom.cells[0].lo[0] == 0.0) {
        const Cell& cell = dom.cells[0];
        const int n = dom.n;
        auto probe = [&](double t, double bias) {
            Point s(n), x(n);
            for (int i = 0; i < n; ++i) s[i] = cell.lo[i] + (0.5 + bias) * (cell.hi[i] - cell.lo[i]);
            s[0] = t;
            cell.map(s, std::span<double>(x.data(), n));
            return fsc->gauge(x);
        };
        const double h0 = cell.hi[0];
        const double g0 = probe(0.0, 0.0);
        const double ga = probe(0.35 * h0, 0.0);
        const double gb = probe(0.80 * h0, 0.0);
        const double gc = probe(0.35 * h0, 0.17);
        const double sc1 = ga / (0.35 * h0), sc2 = gb / (0.80 * h0);
        if (sc1 > 0.0 && std::abs(g0) <= 1e-12 * dom.scale &&
            std::abs(sc1 - sc2) <= 1e-10 * sc1 && std::abs(ga - gc) <= 1e-10 * ga) {
            dom.radial_gauge_aligned = true;
            dom.radial_gauge_scale = sc1;
        }
    }
}

Domain excise_pole(const Domain& dom, const FundamentalSolution& fs, double eps) {
    require(eps > 0.0, "excise_pole: eps must be positive");
    require(eps < dom.scale, "excise_pole: eps is not small for this domain");
    Domain out = dom;
    if (!out.gauge) attach_pole(out, fs);
    require(out.pole_inside, "excise_pole: pole is not inside the domain");
    require(eps > dom.excised_eps, "excise_pole: eps must exceed the existing excision");

    auto fsc = std::make_shared<const FundamentalSolution>(fs);
    auto base = out.contains;
    out.contains = [base, fsc, eps](View x) { return base(x) && fsc->gauge(x) > eps; };

    if (out.radial_gauge_aligned) {
        const double t = eps / out.radial_gauge_scale;
        for (auto& cell : out.cells) {
            require(t < cell.hi[0], "excise_pole: eps removes the whole domain");
            cell.lo[0] = std::max(cell.lo[0], t);
        }
        if (dom.volume_exact && fs.has_gauge_ball_volume())
            out.volume_exact = *dom.volume_exact - fs.gauge_ball_volume(eps) +
                               fs.gauge_ball_volume(dom.excised_eps);
        else
            out.volume_exact.reset();
    } else {
        // Node-mask mode: the integrator drops nodes with gauge <= eps, an
        // O(cell width) cut. Good enough for probing; the aligned builders are
        // the ones used for extrapolation schedules.
        out.volume_exact.reset();
    }
    out.excised_eps = eps;
    // Patches stay the outer boundary: the eps -> 0 limit of interior
    // integrals is what the excision schedule extrapolates.
    return out;
}

}  // namespace subell
