#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "subell/scalar_field.hpp"
#include "subell/types.hpp"

namespace subell {

namespace diag {
// Derivative probes that landed exactly on an |.|-kink get nudged by 1e-9 and
// counted here so runs can report it.
std::atomic<std::uint64_t>& kink_perturbations();
}  // namespace diag

// One component function of a frame field, with enough structure to skip
// trivial entries in the hot loops.
class Coefficient {
public:
    using ValueFn = std::function<double(View)>;
    using GradFn = std::function<void(View, std::span<double>)>;

    static Coefficient zero() { return Coefficient(Kind::Zero, 0.0); }
    static Coefficient one() { return Coefficient(Kind::One, 1.0); }
    static Coefficient constant(double c) {
        if (c == 0.0) return zero();
        if (c == 1.0) return one();
        return Coefficient(Kind::Const, c);
    }
    static Coefficient analytic(ValueFn v, GradFn g, std::string label = "coeff") {
        Coefficient c(Kind::Analytic, 0.0);
        c.value_ = std::move(v);
        c.grad_ = std::move(g);
        c.label_ = std::move(label);
        return c;
    }

    double value(View x) const {
        switch (kind_) {
            case Kind::Zero: return 0.0;
            case Kind::One: return 1.0;
            case Kind::Const: return const_;
            default: return value_(x);
        }
    }
    // d(coeff)/dx_j; zero for the constant kinds.
    void gradient(View x, std::span<double> out) const {
        std::fill(out.begin(), out.end(), 0.0);
        if (kind_ == Kind::Analytic) grad_(x, out);
    }
    bool is_zero() const { return kind_ == Kind::Zero; }
    bool is_constant() const { return kind_ != Kind::Analytic; }
    const std::string& label() const { return label_; }

private:
    enum class Kind { Zero, One, Const, Analytic };
    Coefficient(Kind k, double c) : kind_(k), const_(c) {}
    Kind kind_;
    double const_;
    ValueFn value_;
    GradFn grad_;
    std::string label_ = "";
};

// A frame of N vector fields on R^n in triangular form,
//   X_k = d/dx_k + sum_{m=N+1..n} a_{k,m}(x) d/dx_m,   k = 1..N,
// stored as full component rows so that deliberately malformed frames can be
// constructed for validation tests.
class Frame {
public:
    Frame(int n, int N, std::string name);

    int dim() const { return n_; }
    int fields() const { return N_; }
    const std::string& name() const { return name_; }

    // Indices are 0-based throughout the C++ API.
    const Coefficient& component(int k, int m) const { return rows_[k][m]; }
    void set_component(int k, int m, Coefficient c);

    void field_vector(int k, View x, std::span<double> out) const;

    // Component indices m with a (possibly) non-zero entry in row k, in
    // increasing order. Precomputed; keeps sub_laplacian at O(support^2).
    const std::vector<int>& support(int k) const { return support_[k]; }
    void refresh_support();

    static Frame euclidean(int n);
    // H^m with coordinates (x_1..x_m, y_1..y_m, t):
    //   X_j = d/dx_j + 2 y_j d/dt,   Y_j = d/dy_j - 2 x_j d/dt.
    static Frame heisenberg(int m);
    // The C^{1,1} frame on R^3:
    //   X_1 = d/dx_1 + x_2(1+|x_2|) d/dx_3,  X_2 = d/dx_2 - x_1(1+|x_1|) d/dx_3.
    static Frame r3_nonsmooth();

private:
    int n_, N_;
    std::string name_;
    std::vector<std::vector<Coefficient>> rows_;
    std::vector<std::vector<int>> support_;
};

// X_k u at x.
double directional_derivative(const Frame& fr, const ScalarField& u, int k, View x);

// (X_1 u, ..., X_N u); out.size() == N.
void horizontal_gradient(const Frame& fr, const ScalarField& u, View x, std::span<double> out);

// L u = sum_k X_k(X_k u).
double sub_laplacian(const Frame& fr, const ScalarField& u, View x);

// sum_k (X_k v)(X_k u).
double tilde_pairing(const Frame& fr, const ScalarField& v, const ScalarField& u, View x);

// [X_i, X_j] at x as an ambient vector.
Point commutator(const Frame& fr, int i, int j, View x);

struct TriangularReport {
    bool ok = true;
    double max_violation = 0.0;
    // (k, m, |value - delta_km|) for the worst offending entries
    std::vector<std::array<double, 3>> offenders;
};

// Checks that components 1..N of every field equal the Kronecker pattern at
// each sample point.
TriangularReport validate_triangular_form(const Frame& fr, const std::vector<Point>& samples,
                                          double tol = 1e-12);

// Fused evaluation for quadrature caches: value, horizontal gradient and
// sub-Laplacian of u at x from one gradient + one hessian evaluation.
struct HorizontalEval {
    double u = 0.0;
    double Lu = 0.0;
    int N = 0;
    std::array<double, kMaxDim> Xu{};
    double grad_sq() const {
        double s = 0.0;
        for (int k = 0; k < N; ++k) s += Xu[k] * Xu[k];
        return s;
    }
};
void horizontal_eval(const Frame& fr, const ScalarField& u, View x, HorizontalEval& out,
                     bool need_laplacian = true);

}  // namespace subell
