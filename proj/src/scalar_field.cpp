#include "subell/scalar_field.hpp"

#include <cmath>
#include <limits>

namespace subell {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
const double kStep1 = std::cbrt(kEps);        // ~6.1e-6
const double kStep2 = std::pow(kEps, 0.25);   // ~1.2e-4

double step1(double xj) { return kStep1 * std::max(1.0, std::fabs(xj)); }
double step2(double xj) { return kStep2 * std::max(1.0, std::fabs(xj)); }

}  // namespace

double ScalarField::partial(View x, int j) const {
    require_dim(x, dim(), "partial");
    require(j >= 0 && j < dim(), "partial: axis out of range");
    double buf[kMaxDim];
    for (int i = 0; i < dim(); ++i) buf[i] = x[i];
    const double h = step1(x[j]);
    buf[j] = x[j] + h;
    const double fp = value(View(buf, x.size()));
    buf[j] = x[j] - h;
    const double fm = value(View(buf, x.size()));
    return (fp - fm) / (2.0 * h);
}

double ScalarField::partial2(View x, int i, int j) const {
    require_dim(x, dim(), "partial2");
    require(i >= 0 && i < dim() && j >= 0 && j < dim(), "partial2: axis out of range");
    double buf[kMaxDim];
    for (int k = 0; k < dim(); ++k) buf[k] = x[k];
    View bx(buf, x.size());
    if (i == j) {
        const double h = step2(x[i]);
        const double f0 = value(x);
        buf[i] = x[i] + h;
        const double fp = value(bx);
        buf[i] = x[i] - h;
        const double fm = value(bx);
        return (fp - 2.0 * f0 + fm) / (h * h);
    }
    const double hi = step2(x[i]), hj = step2(x[j]);
    buf[i] = x[i] + hi; buf[j] = x[j] + hj;
    const double fpp = value(bx);
    buf[j] = x[j] - hj;
    const double fpm = value(bx);
    buf[i] = x[i] - hi; buf[j] = x[j] + hj;
    const double fmp = value(bx);
    buf[j] = x[j] - hj;
    const double fmm = value(bx);
    return (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
}

void ScalarField::gradient(View x, std::span<double> out) const {
    for (int j = 0; j < dim(); ++j) out[j] = partial(x, j);
}

void ScalarField::hessian(View x, std::span<double> out) const {
    const int n = dim();
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = partial2(x, i, j);
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
}

double AnalyticField::partial(View x, int j) const {
    if (!grad_) return ScalarField::partial(x, j);
    double g[kMaxDim];
    grad_(x, std::span<double>(g, x.size()));
    return g[j];
}

double AnalyticField::partial2(View x, int i, int j) const {
    if (hess_) {
        double h[kMaxDim * kMaxDim];
        hess_(x, std::span<double>(h, x.size() * x.size()));
        return h[i * dim() + j];
    }
    if (grad_) {
        // central difference of the exact gradient: avoids the double
        // cancellation of differentiating value() twice
        double buf[kMaxDim], gp[kMaxDim], gm[kMaxDim];
        for (int k = 0; k < dim(); ++k) buf[k] = x[k];
        const double h = std::cbrt(std::numeric_limits<double>::epsilon()) *
                         std::max(1.0, std::fabs(x[j]));
        buf[j] = x[j] + h;
        grad_(View(buf, x.size()), std::span<double>(gp, x.size()));
        buf[j] = x[j] - h;
        grad_(View(buf, x.size()), std::span<double>(gm, x.size()));
        return (gp[i] - gm[i]) / (2.0 * h);
    }
    return ScalarField::partial2(x, i, j);
}

void AnalyticField::gradient(View x, std::span<double> out) const {
    if (grad_) {
        grad_(x, out);
        return;
    }
    ScalarField::gradient(x, out);
}

void AnalyticField::hessian(View x, std::span<double> out) const {
    if (hess_) {
        hess_(x, out);
        return;
    }
    if (grad_) {
        const int n = dim();
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double v = partial2(x, i, j);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        return;
    }
    ScalarField::hessian(x, out);
}

FieldPtr constant_field(int dim, double c) {
    return std::make_shared<AnalyticField>(
        dim, [c](View) { return c; },
        [](View, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); },
        [](View x, std::span<double> h) { std::fill(h.begin(), h.begin() + x.size() * x.size(), 0.0); },
        "const(" + std::to_string(c) + ")");
}

FieldPtr coordinate_field(int dim, int j) {
    require(j >= 0 && j < dim, "coordinate_field: axis out of range");
    return std::make_shared<AnalyticField>(
        dim, [j](View x) { return x[j]; },
        [j](View x, std::span<double> g) {
            std::fill(g.begin(), g.end(), 0.0);
            (void)x;
            g[j] = 1.0;
        },
        [](View x, std::span<double> h) { std::fill(h.begin(), h.begin() + x.size() * x.size(), 0.0); },
        "x" + std::to_string(j + 1));
}

FieldPtr radial_sq_field(Point z, std::function<double(double)> g,
                         std::function<double(double)> dg, std::function<double(double)> d2g,
                         std::string label) {
    const int n = static_cast<int>(z.size());
    auto zc = std::make_shared<Point>(std::move(z));
    auto q_of = [zc](View x) {
        double q = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) q += sq(x[i] - (*zc)[i]);
        return q;
    };
    return std::make_shared<AnalyticField>(
        n, [q_of, g](View x) { return g(q_of(x)); },
        [q_of, zc, dg](View x, std::span<double> out) {
            const double dgq = dg(q_of(x));
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = 2.0 * dgq * (x[i] - (*zc)[i]);
        },
        [q_of, zc, dg, d2g](View x, std::span<double> out) {
            const int n2 = static_cast<int>(x.size());
            const double q = q_of(x);
            const double d1 = dg(q), d2 = d2g(q);
            for (int i = 0; i < n2; ++i)
                for (int j = 0; j < n2; ++j) {
                    double v = 4.0 * d2 * (x[i] - (*zc)[i]) * (x[j] - (*zc)[j]);
                    if (i == j) v += 2.0 * d1;
                    out[i * n2 + j] = v;
                }
        },
        std::move(label));
}

FieldPtr tensor_product_field(std::vector<AxisProfile> axes, std::string label) {
    const int n = static_cast<int>(axes.size());
    auto ax = std::make_shared<std::vector<AxisProfile>>(std::move(axes));
    auto values = [ax](View x, double* f) {
        for (std::size_t i = 0; i < x.size(); ++i) f[i] = (*ax)[i].f(x[i]);
    };
    return std::make_shared<AnalyticField>(
        n,
        [ax](View x) {
            double p = 1.0;
            for (std::size_t i = 0; i < x.size(); ++i) p *= (*ax)[i].f(x[i]);
            return p;
        },
        [ax, values](View x, std::span<double> out) {
            double f[kMaxDim];
            values(x, f);
            for (std::size_t j = 0; j < x.size(); ++j) {
                double p = (*ax)[j].df(x[j]);
                for (std::size_t i = 0; i < x.size(); ++i)
                    if (i != j) p *= f[i];
                out[j] = p;
            }
        },
        [ax, values](View x, std::span<double> out) {
            const int n2 = static_cast<int>(x.size());
            double f[kMaxDim];
            values(x, f);
            for (int i = 0; i < n2; ++i)
                for (int j = 0; j < n2; ++j) {
                    double p = 1.0;
                    if (i == j) {
                        p = (*ax)[i].d2f(x[i]);
                        for (int k = 0; k < n2; ++k)
                            if (k != i) p *= f[k];
                    } else {
                        p = (*ax)[i].df(x[i]) * (*ax)[j].df(x[j]);
                        for (int k = 0; k < n2; ++k)
                            if (k != i && k != j) p *= f[k];
                    }
                    out[i * n2 + j] = p;
                }
        },
        std::move(label));
}

FieldPtr product_field(FieldPtr a, FieldPtr b) {
    require(a && b, "product_field: null operand");
    require(a->dim() == b->dim(), "product_field: dimension mismatch");
    const int n = a->dim();
    std::string label = "(" + a->describe() + ")*(" + b->describe() + ")";
    return std::make_shared<AnalyticField>(
        n, [a, b](View x) { return a->value(x) * b->value(x); },
        [a, b](View x, std::span<double> out) {
            double ga[kMaxDim], gb[kMaxDim];
            a->gradient(x, std::span<double>(ga, x.size()));
            b->gradient(x, std::span<double>(gb, x.size()));
            const double va = a->value(x), vb = b->value(x);
            for (std::size_t j = 0; j < x.size(); ++j) out[j] = ga[j] * vb + va * gb[j];
        },
        [a, b](View x, std::span<double> out) {
            const int n2 = static_cast<int>(x.size());
            double ga[kMaxDim], gb[kMaxDim];
            double ha[kMaxDim * kMaxDim], hb[kMaxDim * kMaxDim];
            a->gradient(x, std::span<double>(ga, x.size()));
            b->gradient(x, std::span<double>(gb, x.size()));
            a->hessian(x, std::span<double>(ha, x.size() * x.size()));
            b->hessian(x, std::span<double>(hb, x.size() * x.size()));
            const double va = a->value(x), vb = b->value(x);
            for (int i = 0; i < n2; ++i)
                for (int j = 0; j < n2; ++j)
                    out[i * n2 + j] = ha[i * n2 + j] * vb + va * hb[i * n2 + j] +
                                      ga[i] * gb[j] + ga[j] * gb[i];
        },
        std::move(label));
}

FieldPtr linear_combination(std::vector<std::pair<double, FieldPtr>> parts, double c0,
                            std::string label) {
    require(!parts.empty(), "linear_combination: need at least one part");
    const int n = parts.front().second->dim();
    for (const auto& [c, f] : parts)
        require(f && f->dim() == n, "linear_combination: dimension mismatch");
    auto ps = std::make_shared<std::vector<std::pair<double, FieldPtr>>>(std::move(parts));
    return std::make_shared<AnalyticField>(
        n,
        [ps, c0](View x) {
            double v = c0;
            for (const auto& [c, f] : *ps) v += c * f->value(x);
            return v;
        },
        [ps](View x, std::span<double> out) {
            std::fill(out.begin(), out.end(), 0.0);
            double g[kMaxDim];
            for (const auto& [c, f] : *ps) {
                f->gradient(x, std::span<double>(g, x.size()));
                for (std::size_t j = 0; j < x.size(); ++j) out[j] += c * g[j];
            }
        },
        [ps](View x, std::span<double> out) {
            const std::size_t nn = x.size() * x.size();
            std::fill(out.begin(), out.begin() + nn, 0.0);
            double h[kMaxDim * kMaxDim];
            for (const auto& [c, f] : *ps) {
                f->hessian(x, std::span<double>(h, nn));
                for (std::size_t j = 0; j < nn; ++j) out[j] += c * h[j];
            }
        },
        std::move(label));
}

FieldPtr compose_field(AxisProfile p, FieldPtr g, std::string label) {
    require(static_cast<bool>(g), "compose_field: null inner field");
    require(p.f && p.df && p.d2f, "compose_field: profile needs f, df, d2f");
    const int n = g->dim();
    auto pp = std::make_shared<AxisProfile>(std::move(p));
    return std::make_shared<AnalyticField>(
        n, [pp, g](View x) { return pp->f(g->value(x)); },
        [pp, g](View x, std::span<double> out) {
            const double d1 = pp->df(g->value(x));
            g->gradient(x, out);
            for (std::size_t j = 0; j < x.size(); ++j) out[j] *= d1;
        },
        [pp, g](View x, std::span<double> out) {
            const int n2 = static_cast<int>(x.size());
            const double v = g->value(x);
            const double d1 = pp->df(v), d2 = pp->d2f(v);
            double gg[kMaxDim];
            g->gradient(x, std::span<double>(gg, x.size()));
            g->hessian(x, out);
            for (int i = 0; i < n2; ++i)
                for (int j = 0; j < n2; ++j)
                    out[i * n2 + j] = d1 * out[i * n2 + j] + d2 * gg[i] * gg[j];
        },
        std::move(label));
}

}  // namespace subell
