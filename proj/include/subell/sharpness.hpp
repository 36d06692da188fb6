#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "subell/inequalities.hpp"

namespace subell {

// Parametrized trial functions for probing how tight the inequality constants
// are. theta has 1 to 3 coordinates confined to the box [lo, hi]; every
// generated field must be C^1 on the closed domain (C^2 when fed to the
// rellich ratios). interior_only marks families whose members carry exactly
// zero boundary data, so all boundary terms of the reports vanish.
struct TrialFamily {
    std::string description;
    int params = 0;
    Point lo, hi;
    bool interior_only = true;
    std::function<FieldPtr(View)> make;
};

// u = (d^2 + eps^2)^(-p/2) * chi((d/radius)^2), chi a C^2 quintic cutoff equal
// to 1 up to q = theta1^2 and 0 from q = 0.98 on. theta0 = log(eps): the
// mollification scale is walked in orders of magnitude, which is the natural
// axis since the ratio approaches its infimum like 1/log(1/eps). Reaching
// small eps honestly requires an excision schedule deeper than eps.
TrialFamily mollified_power_family(const FundamentalSolution& fs, double radius, double p,
                                   double log_eps_lo, double log_eps_hi);

// u = d^(-p) * (t(1-t))^gamma with t = log(radius/d)/T, supported on the shell
// radius*e^-T <= d <= radius. theta = (T, gamma), T in [t_lo, t_hi], gamma in
// [gamma_lo, gamma_hi] (gamma > 1 keeps u in C^1, gamma > 2 in C^2). In the
// log-radial variable the ratio is exactly
//     constant + C(gamma) / (kappa T)^2,  C(gamma) = 2 gamma (4 gamma + 1) / (2 gamma - 1),
// by the Beta-function identities, so the infimum is approached quadratically
// in 1/T; depth T needs roughly T/log(2) excision levels.
TrialFamily log_bump_family(const FundamentalSolution& fs, double radius, double p, double t_lo,
                            double t_hi, double gamma_lo, double gamma_hi);

// Exponent p of the formal extremizer d^-p: the power for which numerator and
// denominator of the ratio carry the same scale-invariant integrand. Defined
// for "hardy" (kappa (beta+alpha-2)/2), "rellich" and "rellich-grad"
// (kappa (beta+alpha-4)/2).
double trial_exponent(const std::string& inequality, const FundamentalSolution& fs, double alpha,
                      double beta);

// (lhs - all non-main terms) / main integral. By the theorems this dominates
// the main coefficient for every admissible trial. Throws when the main
// integral is below 1e-14 (degenerate trial).
double rayleigh_ratio(const InequalityReport& rep);

// Runs the plain (non-refined) report named by inequality -- "hardy",
// "uncertainty-weighted", "uncertainty-plain", "rellich", "rellich-grad" --
// and reduces it to the ratio. alpha is ignored by the uncertainty forms.
double rayleigh_ratio(const std::string& inequality, const InequalityContext& ctx, int field,
                      double alpha, double beta);
double rayleigh_ratio(const std::string& inequality, const FundamentalSolution& fs,
                      const FieldPtr& u, double alpha, double beta, const Domain& dom,
                      const QuadratureScheme& sc, double eps0 = 0.0, int levels = 8);

// The constant the ratio is bounded below by: the main-term coefficient.
double ratio_lower_bound(const std::string& inequality, double alpha, double beta);

struct TraceEntry {
    int restart = 0;
    int eval = 0;        // evaluation index within the restart
    Point theta;         // as evaluated (clamped into the box)
    double ratio = 0.0;  // +inf marks a degenerate trial
    double best = 0.0;   // running minimum within the restart
};

struct SharpnessReport {
    std::string inequality;
    std::string family;
    double alpha = 0.0;
    double beta = 0.0;
    double constant = 0.0;  // ratio_lower_bound for these parameters
    Point best_theta;
    double best_ratio = 0.0;
    std::array<double, 3> restart_best{};
    std::vector<TraceEntry> trace;  // merged in restart order
    int evaluations = 0;
    std::uint64_t seed = 0;
};

// Derivative-free minimization of the ratio over the family box: simplex
// descent (reflection 1, expansion 2, contraction 0.5, shrink 0.5) from three
// seeded random starts running in parallel, budget evaluations in total
// (>= 20). The per-restart best is non-increasing along the trace. Throws if
// every evaluation is degenerate, or if any finite ratio undershoots
// ratio_lower_bound - allowance (a theorem violation: the quadrature cannot
// be trusted at that resolution).
SharpnessReport optimize_trial(const std::string& inequality, const TrialFamily& family,
                               const FundamentalSolution& fs, double alpha, double beta,
                               const Domain& dom, const QuadratureScheme& sc, int budget = 120,
                               std::uint64_t seed = 1, double eps0 = 0.0, int levels = 8,
                               double allowance = 0.02);

}  // namespace subell
