#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "subell/domain.hpp"
#include "subell/fundsol.hpp"
#include "subell/quadrature.hpp"
#include "subell/scalar_field.hpp"

namespace subell {

// ---------------------------------------------------------------------------
// Integration-by-parts identities. These are equalities, so the deliverable is
// a residual: interior side minus boundary side, plus the scale it should be
// compared against.
// ---------------------------------------------------------------------------

struct ResidualReport {
    double residual = 0.0;
    double relative = 0.0;  // residual / scale
    double scale = 0.0;     // largest |term| entering the identity
};

// int_Omega ( sum_k (X_k v)(X_k u) + v Lu )  -  oint v <grad~u, dnu>
ResidualReport green_first_residual(const Frame& fr, const FieldPtr& u, const FieldPtr& v,
                                    const Domain& dom, const QuadratureScheme& sc);

// int_Omega ( u Lv - v Lu )  -  oint ( u <grad~v, dnu> - v <grad~u, dnu> )
ResidualReport green_second_residual(const Frame& fr, const FieldPtr& u, const FieldPtr& v,
                                     const Domain& dom, const QuadratureScheme& sc);

// Componentwise divergence theorem for the frame: int X_k f_k = oint f_k <X_k, dnu>
// for each k, plus the summed identity.
struct StokesReport {
    std::vector<double> interior;        // int X_k f_k
    std::vector<double> boundary;        // oint f_k <X_k, dnu>
    std::vector<double> component_residual;
    double residual = 0.0;               // summed identity
    double relative = 0.0;
    double scale = 0.0;
};
StokesReport stokes_residual(const Frame& fr, const std::vector<FieldPtr>& f, const Domain& dom,
                             const QuadratureScheme& sc);

// oint <grad~Gamma, dnu>. Equals -1 when the pole is strictly inside (after
// calibration) and 0 when it is outside, since Gamma is L-harmonic off the pole.
IntegralResult normalization_flux(const FundamentalSolution& fs, const Domain& dom,
                                  const QuadratureScheme& sc);

// Returns a copy of fs with the constant fixed so that the boundary flux of
// grad~Gamma over dom is exactly -1. Requires the pole strictly inside and a
// non-degenerate flux (|flux/c| >= 1e-12).
FundamentalSolution calibrate_constant(const FundamentalSolution& fs, const Domain& dom,
                                       const QuadratureScheme& sc);

// u(pole)  vs  - int Gamma Lu - oint u <grad~Gamma, dnu> + oint Gamma <grad~u, dnu>.
// The interior integral is pole-excised with Richardson extrapolation; needs
// the pole strictly inside and a gauge-aligned radial axis (ball domains).
struct RepresentationReport {
    double value_at_pole = 0.0;
    double interior = 0.0;      // int Gamma Lu
    double flux_u = 0.0;        // oint u <grad~Gamma, dnu>
    double flux_gamma = 0.0;    // oint Gamma <grad~u, dnu>
    double reconstructed = 0.0; // -interior - flux_u + flux_gamma
    double residual = 0.0;
    double relative = 0.0;
    double scale = 0.0;
};
RepresentationReport representation_residual(const FundamentalSolution& fs, const FieldPtr& u,
                                             const Domain& dom, const QuadratureScheme& sc,
                                             double eps0 = 0.0, int levels = 8);

// ---------------------------------------------------------------------------
// Weighted integral inequalities. All weights are powers of the normalized
// gauge D = d^((2-beta0)/(2-beta)) -- the beta0 of the operator is fixed by
// the fundamental solution, beta is the free weight parameter -- so every
// reported term is invariant under rescaling the constant c of Gamma.
// ---------------------------------------------------------------------------

struct TermBreakdown {
    std::string label;         // "main", "boundary", "log-interior", ...
    double coefficient = 0.0;  // closed-form constant
    double integral = 0.0;     // the quantity it multiplies
    double value = 0.0;        // coefficient * integral
    double error = 0.0;        // absolute error estimate on value
};

struct InequalityReport {
    std::string inequality;    // "hardy", "rellich-grad-refined", ...
    std::string u_label;
    double alpha = 0.0;
    double beta = 0.0;
    double R = 0.0;            // outer radius in refined log weights; 0 = unused
    double lhs = 0.0;
    double lhs_error = 0.0;
    std::vector<TermBreakdown> terms;  // rhs = sum of term values
    double rhs = 0.0;
    double slack = 0.0;        // lhs - rhs
    double error_total = 0.0;  // lhs_error + sum of term errors
    std::string verdict;       // "holds" | "violated_within_error" | "violated"
    double min_grad_gauge_sq = 0.0;  // min |grad_X d|^2 over interior nodes
    double sup_gauge = 0.0;          // max d over all nodes
    std::uint64_t scheme_hash = 0;
};

// holds when slack >= -error_total; violated_within_error down to -4x that;
// violated below.
std::string verdict_for(double slack, double error_total);

enum class UncertaintyForm {
    Weighted,  // gauge-weighted L2 masses on both sides
    Plain      // plain L2 mass against the inverse-weight momentum factor
};

// Parameter wedges. Throw std::invalid_argument naming the violated
// constraint; every inequality additionally needs beta > 2.
void validate_hardy_parameters(double alpha, double beta);
void validate_uncertainty_parameters(double beta);
void validate_rellich_parameters(double alpha, double beta);
void validate_rellich_gradient_parameters(double alpha, double beta);

// Shared node/field caches for evaluating many inequalities on one domain.
// Geometry (gauge values, gauge gradients, boundary flux densities) is
// enumerated once at two resolutions; each added field is evaluated once per
// node. Reported errors combine the fine/coarse difference with the
// pole-excision extrapolation remainder.
class InequalityContext {
public:
    // eps0 <= 0 picks 0.2 * (closest boundary node in gauge distance);
    // levels is the depth of the excision schedule eps0 * 2^-j.
    InequalityContext(const FundamentalSolution& fs, const Domain& dom, const QuadratureScheme& sc,
                      double eps0 = 0.0, int levels = 8);

    // Registers u and returns its handle for the report calls.
    int add_field(FieldPtr u, std::string label);
    // Rebuilds an existing handle's caches in place; the trial optimizer cycles
    // fields through a fixed slot to keep memory flat. Safe to call from
    // several threads only on distinct handles.
    void replace_field(int field, FieldPtr u, std::string label);
    int field_count() const { return static_cast<int>(fields_.size()); }
    const std::string& field_label(int field) const { return fields_[field].label; }

    // int D^alpha |grad_X u|^2  >=  main + boundary (+ log terms when refined).
    InequalityReport hardy(int field, double alpha, double beta, bool refined = false,
                           double R = 0.0) const;

    // Product form: momentum integral times position integral dominates the
    // squared mass plus boundary (and log) corrections.
    InequalityReport uncertainty(int field, double beta, UncertaintyForm form,
                                 bool refined = false, double R = 0.0) const;

    // int D^alpha (Lu)^2 / |grad_X D|^2 >= main + boundary + mixed-boundary
    // (+ log terms when refined).
    InequalityReport rellich(int field, double alpha, double beta, bool refined = false,
                             double R = 0.0) const;

    // Same left side against the weighted gradient energy.
    InequalityReport rellich_gradient(int field, double alpha, double beta, bool refined = false,
                                      double R = 0.0) const;

    // The boundary functional entering the rellich family:
    //   (alpha-2)/(2-beta) * oint u^2 <grad~ D^(alpha-2), dnu>_norm
    //     - 2 oint D^(alpha-2) u <grad~u, dnu>,
    // zero for u with compact support. value + error estimate.
    std::array<double, 2> c_functional(int field, double alpha, double beta) const;

    // Smallest admissible-by-margin outer radius for the refined log weights:
    // 1.05 * e * sup D. A user-supplied R below e * sup D is rejected.
    double auto_R(double beta) const;

    double sup_gauge() const { return sup_d_; }
    double min_grad_gauge_sq() const { return min_gs_; }
    bool pole_inside() const { return pole_inside_; }
    const FundamentalSolution& fundamental_solution() const { return fs_; }
    std::uint64_t scheme_hash() const { return scheme_hash_; }

private:
    struct GroupArrays {
        std::vector<double> d, gs;  // gauge and |grad_X d|^2 per node
    };
    struct Resolution {
        ExcisionGroups groups;  // groups.eps empty => single plain node set
        std::vector<GroupArrays> geo;
        BoundaryNodeSet bn;
        std::vector<double> bd, bpd;  // gauge and sum_k (X_k d) dens_k per boundary node
    };
    struct FieldCache {
        std::string label;
        FieldPtr u;
        // [resolution][group][node]
        std::array<std::vector<std::vector<double>>, 2> u_, ugs_, lap_;
        std::array<std::vector<double>, 2> bu_, bpu_;
    };

    void build_resolution(Resolution& res, const Domain& dom, const QuadratureScheme& sc,
                          double eps0, int levels) const;
    void fill_cache(FieldCache& fc) const;

    template <class Kernel>
    std::array<double, 2> interior_term(int field, Kernel&& kern) const;
    template <class Kernel>
    std::array<double, 2> boundary_term(int field, Kernel&& kern) const;

    InequalityReport start_report(std::string name, int field, double alpha, double beta) const;
    void finalize_report(InequalityReport& rep) const;
    double resolve_R(double beta, double R) const;

    FundamentalSolution fs_;
    bool pole_inside_ = false;
    double sup_d_ = 0.0;
    double min_gs_ = 0.0;
    std::uint64_t scheme_hash_ = 0;
    std::array<Resolution, 2> res_;  // fine, coarse
    std::vector<FieldCache> fields_;
};

}  // namespace subell
