#include "subell/frame.hpp"

#include <cmath>

namespace subell {

namespace diag {
std::atomic<std::uint64_t>& kink_perturbations() {
    static std::atomic<std::uint64_t> count{0};
    return count;
}
}  // namespace diag

Frame::Frame(int n, int N, std::string name) : n_(n), N_(N), name_(std::move(name)) {
    require(n >= 1 && n <= kMaxDim, "Frame: ambient dimension out of range");
    require(N >= 1 && N <= n, "Frame: need 1 <= N <= n");
    rows_.resize(N);
    for (int k = 0; k < N; ++k) {
        rows_[k].reserve(n);
        for (int m = 0; m < n; ++m)
            rows_[k].push_back(m == k ? Coefficient::one() : Coefficient::zero());
    }
    refresh_support();
}

void Frame::set_component(int k, int m, Coefficient c) {
    require(k >= 0 && k < N_, "set_component: field index out of range");
    require(m >= 0 && m < n_, "set_component: component index out of range");
    rows_[k][m] = std::move(c);
    refresh_support();
}

void Frame::refresh_support() {
    support_.assign(N_, {});
    for (int k = 0; k < N_; ++k)
        for (int m = 0; m < n_; ++m)
            if (!rows_[k][m].is_zero()) support_[k].push_back(m);
}

void Frame::field_vector(int k, View x, std::span<double> out) const {
    require(k >= 0 && k < N_, "field_vector: field index out of range");
    require_dim(x, n_, "field_vector");
    for (int m = 0; m < n_; ++m) out[m] = rows_[k][m].value(x);
}

Frame Frame::euclidean(int n) {
    return Frame(n, n, "euclidean" + std::to_string(n));
}

Frame Frame::heisenberg(int m) {
    require(m >= 1, "heisenberg: need m >= 1");
    const int n = 2 * m + 1;
    Frame fr(n, 2 * m, "heisenberg" + std::to_string(m));
    const int t = n - 1;
    for (int j = 0; j < m; ++j) {
        const int yj = m + j;
        fr.set_component(j, t,
                         Coefficient::analytic([yj](View x) { return 2.0 * x[yj]; },
                                               [yj](View, std::span<double> g) { g[yj] = 2.0; },
                                               "2*y" + std::to_string(j + 1)));
        const int xj = j;
        fr.set_component(m + j, t,
                         Coefficient::analytic([xj](View x) { return -2.0 * x[xj]; },
                                               [xj](View, std::span<double> g) { g[xj] = -2.0; },
                                               "-2*x" + std::to_string(j + 1)));
    }
    return fr;
}

Frame Frame::r3_nonsmooth() {
    Frame fr(3, 2, "r3_nonsmooth");
    // a(x) = x2 (1 + |x2|) and b(x) = -x1 (1 + |x1|) are C^1 with Lipschitz
    // first derivatives; the first derivatives (1 + 2|.|) are continuous, so
    // no kink handling is needed at this differentiation order.
    fr.set_component(0, 2,
                     Coefficient::analytic(
                         [](View x) { return x[1] * (1.0 + std::fabs(x[1])); },
                         [](View x, std::span<double> g) { g[1] = 1.0 + 2.0 * std::fabs(x[1]); },
                         "x2*(1+abs(x2))"));
    fr.set_component(1, 2,
                     Coefficient::analytic(
                         [](View x) { return -x[0] * (1.0 + std::fabs(x[0])); },
                         [](View x, std::span<double> g) { g[0] = -(1.0 + 2.0 * std::fabs(x[0])); },
                         "-x1*(1+abs(x1))"));
    return fr;
}

double directional_derivative(const Frame& fr, const ScalarField& u, int k, View x) {
    require(u.dim() == fr.dim(), "directional_derivative: field/frame dimension mismatch");
    require(k >= 0 && k < fr.fields(), "directional_derivative: field index out of range");
    require_dim(x, fr.dim(), "directional_derivative");
    double s = 0.0;
    for (int m : fr.support(k)) s += fr.component(k, m).value(x) * u.partial(x, m);
    return s;
}

void horizontal_gradient(const Frame& fr, const ScalarField& u, View x, std::span<double> out) {
    require(u.dim() == fr.dim(), "horizontal_gradient: field/frame dimension mismatch");
    require(static_cast<int>(out.size()) == fr.fields(),
            "horizontal_gradient: output size must equal field count");
    double g[kMaxDim];
    u.gradient(x, std::span<double>(g, x.size()));
    for (int k = 0; k < fr.fields(); ++k) {
        double s = 0.0;
        for (int m : fr.support(k)) s += fr.component(k, m).value(x) * g[m];
        out[k] = s;
    }
}

double sub_laplacian(const Frame& fr, const ScalarField& u, View x) {
    HorizontalEval he;
    horizontal_eval(fr, u, x, he, true);
    return he.Lu;
}

double tilde_pairing(const Frame& fr, const ScalarField& v, const ScalarField& u, View x) {
    double xv[kMaxDim], xu[kMaxDim];
    horizontal_gradient(fr, v, x, std::span<double>(xv, fr.fields()));
    horizontal_gradient(fr, u, x, std::span<double>(xu, fr.fields()));
    double s = 0.0;
    for (int k = 0; k < fr.fields(); ++k) s += xv[k] * xu[k];
    return s;
}

Point commutator(const Frame& fr, int i, int j, View x) {
    require(i >= 0 && i < fr.fields() && j >= 0 && j < fr.fields(),
            "commutator: field index out of range");
    require_dim(x, fr.dim(), "commutator");
    const int n = fr.dim();
    Point out(n, 0.0);
    double gi[kMaxDim], gj[kMaxDim];
    // [V, W]_m = sum_g V_g dW_m/dx_g - W_g dV_m/dx_g
    for (int m = 0; m < n; ++m) {
        const Coefficient& wm = fr.component(j, m);
        const Coefficient& vm = fr.component(i, m);
        double s = 0.0;
        if (!wm.is_constant()) {
            wm.gradient(x, std::span<double>(gj, n));
            for (int g = 0; g < n; ++g)
                if (gj[g] != 0.0) s += fr.component(i, g).value(x) * gj[g];
        }
        if (!vm.is_constant()) {
            vm.gradient(x, std::span<double>(gi, n));
            for (int g = 0; g < n; ++g)
                if (gi[g] != 0.0) s -= fr.component(j, g).value(x) * gi[g];
        }
        out[m] = s;
    }
    return out;
}

TriangularReport validate_triangular_form(const Frame& fr, const std::vector<Point>& samples,
                                          double tol) {
    TriangularReport rep;
    for (const Point& p : samples) {
        require_dim(p, fr.dim(), "validate_triangular_form");
        for (int k = 0; k < fr.fields(); ++k)
            for (int m = 0; m < fr.fields(); ++m) {
                const double want = (k == m) ? 1.0 : 0.0;
                const double got = fr.component(k, m).value(p);
                const double viol = std::fabs(got - want);
                if (viol > rep.max_violation) rep.max_violation = viol;
                if (viol > tol) {
                    rep.ok = false;
                    if (rep.offenders.size() < 16)
                        rep.offenders.push_back({static_cast<double>(k), static_cast<double>(m), viol});
                }
            }
    }
    return rep;
}

void horizontal_eval(const Frame& fr, const ScalarField& u, View x, HorizontalEval& out,
                     bool need_laplacian) {
    require(u.dim() == fr.dim(), "horizontal_eval: field/frame dimension mismatch");
    const int n = fr.dim();
    const int N = fr.fields();
    out.N = N;
    out.u = u.value(x);

    double g[kMaxDim];
    u.gradient(x, std::span<double>(g, n));

    double V[kMaxDim];
    double H[kMaxDim * kMaxDim];
    if (need_laplacian) u.hessian(x, std::span<double>(H, n * n));

    double cg[kMaxDim];
    out.Lu = 0.0;
    for (int k = 0; k < N; ++k) {
        const auto& supp = fr.support(k);
        double xu = 0.0;
        for (int m : supp) {
            V[m] = fr.component(k, m).value(x);
            xu += V[m] * g[m];
        }
        out.Xu[k] = xu;
        if (!need_laplacian) continue;

        // X_k(X_k u) = sum_{i,j in supp} V_i V_j H_ij + sum_j V_j (d_j V_i) g_i
        double acc = 0.0;
        for (int i : supp)
            for (int j : supp) acc += V[i] * V[j] * H[i * n + j];
        for (int i : supp) {
            const Coefficient& ci = fr.component(k, i);
            if (ci.is_constant()) continue;
            ci.gradient(x, std::span<double>(cg, n));
            double xkci = 0.0;  // X_k applied to the coefficient
            for (int j : supp) xkci += V[j] * cg[j];
            acc += xkci * g[i];
        }
        out.Lu += acc;
    }
}

}  // namespace subell
