#include "subell/fundsol.hpp"

#include <cmath>
#include <numbers>

namespace subell {

double unit_sphere_area(int n) {
    // 2 pi^(n/2) / Gamma(n/2)
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double ball_volume(int n, double r) {
    return unit_sphere_area(n) / n * std::pow(r, n);
}

double FundamentalSolution::gauge_ball_volume(double r) const {
    require(static_cast<bool>(ball_vol_), "gauge_ball_volume: no closed form for " + label_);
    require(r >= 0.0, "gauge_ball_volume: negative radius");
    return ball_vol_(r);
}

double FundamentalSolution::gamma(View x) const {
    const double d = d_(x);
    require(d > 0.0, "gamma: evaluation at the pole");
    return c_ * std::pow(d, 2.0 - beta_);
}

FieldPtr FundamentalSolution::gauge_power_field(double p) const {
    auto d = d_;
    auto grad = dgrad_;
    auto hess = dhess_;
    const int n = frame_->dim();
    if (p == 1.0) {
        return std::make_shared<AnalyticField>(
            n, [d](View x) { return d(x); },
            [grad](View x, std::span<double> g) { grad(x, g); },
            [hess](View x, std::span<double> h) { hess(x, h); }, label_ + ":d");
    }
    return std::make_shared<AnalyticField>(
        n, [d, p](View x) { return std::pow(d(x), p); },
        [d, grad, p](View x, std::span<double> g) {
            const double s = p * std::pow(d(x), p - 1.0);
            grad(x, g);
            for (auto& v : g) v *= s;
        },
        [d, grad, hess, p, n](View x, std::span<double> h) {
            // (d^p)'' = p(p-1) d^(p-2) (grad d)(grad d)^T + p d^(p-1) Hess d
            double g[kMaxDim];
            grad(x, std::span<double>(g, n));
            hess(x, h);
            const double dv = d(x);
            const double s1 = p * std::pow(dv, p - 1.0);
            const double s2 = p * (p - 1.0) * std::pow(dv, p - 2.0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) h[i * n + j] = s1 * h[i * n + j] + s2 * g[i] * g[j];
        },
        label_ + ":d^" + std::to_string(p));
}

void FundamentalSolution::gauge_gradient(View x, std::span<double> out) const {
    require(static_cast<int>(out.size()) == frame_->fields(),
            "gauge_gradient: output size must equal field count");
    const int n = frame_->dim();
    double g[kMaxDim];
    dgrad_(x, std::span<double>(g, n));
    for (int k = 0; k < frame_->fields(); ++k) {
        double s = 0.0;
        for (int m : frame_->support(k)) s += frame_->component(k, m).value(x) * g[m];
        out[k] = s;
    }
}

double FundamentalSolution::gauge_gradient_sq(View x) const {
    double g[kMaxDim];
    gauge_gradient(x, std::span<double>(g, frame_->fields()));
    double s = 0.0;
    for (int k = 0; k < frame_->fields(); ++k) s += g[k] * g[k];
    return s;
}

FundamentalSolution FundamentalSolution::euclidean(std::shared_ptr<const Frame> fr, Point pole) {
    require(fr != nullptr, "euclidean: null frame");
    const int n = fr->dim();
    require(fr->fields() == n, "euclidean: frame must have N = n fields");
    require(n >= 3, "euclidean: need n >= 3");
    require_dim(pole, n, "euclidean pole");

    FundamentalSolution fs;
    fs.frame_ = std::move(fr);
    fs.beta_ = n;
    fs.c_ = 1.0 / ((n - 2) * unit_sphere_area(n));
    fs.label_ = "euclidean" + std::to_string(n);
    fs.ball_vol_ = [n](double r) { return ball_volume(n, r); };
    auto y = std::make_shared<Point>(std::move(pole));
    fs.pole_ = *y;
    fs.d_ = [y](View x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += sq(x[i] - (*y)[i]);
        return std::sqrt(s);
    };
    fs.dgrad_ = [y](View x, std::span<double> g) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += sq(x[i] - (*y)[i]);
        const double d = std::sqrt(s);
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = (x[i] - (*y)[i]) / d;
    };
    fs.dhess_ = [y](View x, std::span<double> h) {
        const int n2 = static_cast<int>(x.size());
        double s = 0.0;
        for (int i = 0; i < n2; ++i) s += sq(x[i] - (*y)[i]);
        const double d = std::sqrt(s), d3 = d * s;
        for (int i = 0; i < n2; ++i)
            for (int j = 0; j < n2; ++j) {
                double v = -(x[i] - (*y)[i]) * (x[j] - (*y)[j]) / d3;
                if (i == j) v += 1.0 / d;
                h[i * n2 + j] = v;
            }
    };
    return fs;
}

namespace {

// Heisenberg helpers: A = |z - zeta|^2, w = t - tau - 2(<x,eta> - <y,xi>),
// F = A^2 + w^2, d = F^(1/4).
struct HeisGauge {
    int m;
    Point pole;  // (xi, eta, tau)

    double A(View p) const {
        double a = 0.0;
        for (int i = 0; i < 2 * m; ++i) a += sq(p[i] - pole[i]);
        return a;
    }
    double w(View p) const {
        const int t = 2 * m;
        double s = p[t] - pole[t];
        for (int j = 0; j < m; ++j)
            s -= 2.0 * (p[j] * pole[m + j] - p[m + j] * pole[j]);
        return s;
    }
    // dw/dx_j = -2 eta_j, dw/dy_j = +2 xi_j, dw/dt = 1 (constant in p)
    double wgrad(int i) const {
        if (i < m) return -2.0 * pole[m + i];
        if (i < 2 * m) return 2.0 * pole[i - m];
        return 1.0;
    }
    void Fderivs(View p, double& F, std::span<double> dF, std::span<double> d2F) const {
        const int n = 2 * m + 1;
        const double a = A(p), ww = w(p);
        F = a * a + ww * ww;
        double dA[kMaxDim];
        for (int i = 0; i < n; ++i) dA[i] = (i < 2 * m) ? 2.0 * (p[i] - pole[i]) : 0.0;
        for (int i = 0; i < n; ++i) dF[i] = 2.0 * a * dA[i] + 2.0 * ww * wgrad(i);
        if (d2F.empty()) return;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = 2.0 * dA[i] * dA[j] + 2.0 * wgrad(i) * wgrad(j);
                if (i == j && i < 2 * m) v += 4.0 * a;
                d2F[i * n + j] = v;
            }
    }
};

}  // namespace

FundamentalSolution FundamentalSolution::heisenberg(std::shared_ptr<const Frame> fr, Point pole) {
    require(fr != nullptr, "heisenberg: null frame");
    const int n = fr->dim();
    require(n % 2 == 1 && fr->fields() == n - 1, "heisenberg: frame must be heisenberg(m)");
    const int m = (n - 1) / 2;
    require_dim(pole, n, "heisenberg pole");

    FundamentalSolution fs;
    fs.frame_ = std::move(fr);
    fs.beta_ = 2 * m + 2;  // homogeneous dimension Q
    fs.c_ = 1.0;
    fs.label_ = "heisenberg" + std::to_string(m);
    {
        // |{d <= r}| = r^Q / Q * |S^(2m-1)| * int_{-pi/2}^{pi/2} cos^(m-1),
        // from (|z|, t) = (lambda r sqrt(cos psi), lambda^2 r^2 sin psi).
        double wa = std::numbers::pi, wb = 2.0;  // W(0), W(1); W(k) = (k-1)/k W(k-2)
        for (int k = 2; k <= m - 1; ++k) {
            const double wk = (k - 1.0) / k * wa;
            wa = wb;
            wb = wk;
        }
        const double wallis = (m - 1 == 0) ? std::numbers::pi : wb;
        const int q = 2 * m + 2;
        const double coef = unit_sphere_area(2 * m) * wallis / q;
        fs.ball_vol_ = [coef, q](double r) { return coef * std::pow(r, q); };
    }
    auto hg = std::make_shared<HeisGauge>(HeisGauge{m, pole});
    fs.pole_ = std::move(pole);
    fs.d_ = [hg](View p) {
        const double a = hg->A(p), ww = hg->w(p);
        return std::pow(a * a + ww * ww, 0.25);
    };
    fs.dgrad_ = [hg, n](View p, std::span<double> g) {
        double F;
        hg->Fderivs(p, F, g, {});
        const double s = 0.25 * std::pow(F, -0.75);
        for (int i = 0; i < n; ++i) g[i] *= s;
    };
    fs.dhess_ = [hg, n](View p, std::span<double> h) {
        double F;
        double dF[kMaxDim];
        hg->Fderivs(p, F, std::span<double>(dF, n), h);
        // d = F^(1/4):  Hd = F^(-3/4)/4 * HF - (3/16) F^(-7/4) dF dF^T
        const double s1 = 0.25 * std::pow(F, -0.75);
        const double s2 = (3.0 / 16.0) * std::pow(F, -1.75);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) h[i * n + j] = s1 * h[i * n + j] - s2 * dF[i] * dF[j];
    };
    return fs;
}

FundamentalSolution FundamentalSolution::custom(std::shared_ptr<const Frame> fr, Point pole,
                                                double beta, double constant, GaugeValue d,
                                                GaugeGrad grad, GaugeHess hess, std::string label) {
    require(fr != nullptr, "custom: null frame");
    require(beta > 2.0, "custom: need beta > 2");
    require(constant > 0.0, "custom: need constant > 0");
    require_dim(pole, fr->dim(), "custom pole");
    FundamentalSolution fs;
    fs.frame_ = std::move(fr);
    fs.pole_ = std::move(pole);
    fs.beta_ = beta;
    fs.c_ = constant;
    fs.d_ = std::move(d);
    fs.dgrad_ = std::move(grad);
    fs.dhess_ = std::move(hess);
    fs.label_ = std::move(label);
    return fs;
}

double key_identity_residual(const FundamentalSolution& fs, double alpha, View x) {
    const double beta = fs.beta();
    const double c = fs.constant();
    const double d = fs.gauge(x);
    require(d > 0.0, "key_identity_residual: x must be off the pole");

    const Frame& fr = fs.frame();
    // All Gamma powers as gauge powers: Gamma^s = c^s d^((2-beta)s).
    auto gpow = [&](double s) { return fs.gauge_power_field((2.0 - beta) * s); };

    const double s_main = (alpha - 2.0) / (2.0 - beta);
    const double lhs = std::pow(c, s_main) * sub_laplacian(fr, *gpow(s_main), x);

    // |grad_X Gamma^{1/(2-beta)}|^2 = c^{2/(2-beta)} |grad_X d|^2
    const double grad_gauge_sq = fs.gauge_gradient_sq(x);
    const double rhs1 = (beta + alpha - 4.0) * (alpha - 2.0) *
                        std::pow(c, (alpha - 2.0) / (2.0 - beta)) * std::pow(d, alpha - 4.0) *
                        grad_gauge_sq;

    const double Lgamma = c * sub_laplacian(fr, *gpow(1.0), x);
    const double rhs2 = (alpha - 2.0) / (2.0 - beta) *
                        std::pow(c, (beta + alpha - 4.0) / (2.0 - beta)) *
                        std::pow(d, beta + alpha - 4.0) * Lgamma;

    const double scale =
        std::max({1.0, std::fabs(lhs), std::fabs(rhs1), std::fabs(rhs2)});
    return std::fabs(lhs - rhs1 - rhs2) / scale;
}

}  // namespace subell
