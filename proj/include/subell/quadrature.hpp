#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "subell/domain.hpp"
#include "subell/fundsol.hpp"
#include "subell/types.hpp"

namespace subell {

// Gauss-Legendre rule on [-1, 1], nodes ascending. Cached per order.
struct GaussRule {
    std::vector<double> nodes, weights;
};
const GaussRule& gauss_legendre(int order);

struct QuadratureScheme {
    int order = 8;             // Gauss nodes per axis (linear / radial axes)
    int angular_order = 0;     // nodes per angular axis; 0 = max(order, 12)
    int refine = 4;            // geometric subdivision levels on graded axes
    int boundary_refine = -1;  // graded levels on boundary patches; -1 = refine
    std::uint64_t hash() const;
};

// One notch down in every resolution knob; used for paired-resolution error bars.
QuadratureScheme coarser(const QuadratureScheme& sc);

// Flat node storage so that many integrands can reuse one enumeration.
struct NodeSet {
    int n = 0;
    std::vector<double> x;  // n per node
    std::vector<double> w;  // weight per node (jacobian included)
    std::int64_t count() const { return static_cast<std::int64_t>(w.size()); }
    View point(std::int64_t i) const { return View(x.data() + i * n, n); }
};

struct BoundaryNodeSet {
    int n = 0, nf = 0;
    std::vector<double> x;     // n per node
    std::vector<double> w;     // parameter weight per node
    std::vector<double> dens;  // nf form densities per node (orientation included)
    std::int64_t count() const { return static_cast<std::int64_t>(w.size()); }
    View point(std::int64_t i) const { return View(x.data() + i * n, n); }
    View densities(std::int64_t i) const { return View(dens.data() + i * nf, nf); }
};

NodeSet interior_nodes(const Domain& dom, const QuadratureScheme& sc);
BoundaryNodeSet boundary_nodes(const Frame& fr, const Domain& dom, const QuadratureScheme& sc);

using Integrand = std::function<double(View)>;
// g(x, form densities of X_1..X_N); the integral is sum w * g.
using BoundaryIntegrand = std::function<double(View, View)>;

// Deterministic sums: node order is fixed by the enumeration, evaluation may
// be threaded (disjoint index blocks), reduction is pairwise on the ordered
// value array, so results are bit-stable run to run.
double sum_over(const NodeSet& ns, const Integrand& f);
double sum_over_boundary(const BoundaryNodeSet& bs, const BoundaryIntegrand& g);

struct IntegralResult {
    double value = 0.0;
    double error = 0.0;  // heuristic: difference against a one-notch-coarser scheme
    std::int64_t nodes = 0;
};

IntegralResult integrate_interior(const Domain& dom, const QuadratureScheme& sc,
                                  const Integrand& f);
IntegralResult integrate_boundary(const Frame& fr, const Domain& dom, const QuadratureScheme& sc,
                                  const BoundaryIntegrand& g);

// Integral over the domain with the gauge ball {d <= eps_j} removed, along the
// schedule eps_j = eps0 * 2^-j, j = 0..levels-1, computed by accumulating
// exact gauge shells. When the level differences decay geometrically the
// eps -> 0 limit is Richardson-extrapolated with the fitted rate.
struct ExcisionSequence {
    std::vector<double> eps;
    std::vector<double> values;
    double extrapolated = 0.0;
    double error = 0.0;
    double rate = 0.0;  // fitted decay exponent p in diff ~ 2^(-p j); 0 if unused
};
ExcisionSequence excised_integral(const Domain& dom, const FundamentalSolution& fs,
                                  const QuadratureScheme& sc, const Integrand& f, double eps0,
                                  int levels);

// The node machinery behind excised_integral, exposed so that many integrands
// can share one enumeration: groups[0] covers {d > eps[0]}, groups[j >= 1] the
// shell {eps[j] < d <= eps[j-1]}.
struct ExcisionGroups {
    std::vector<double> eps;
    std::vector<NodeSet> groups;
};
ExcisionGroups excision_node_groups(const Domain& dom, const FundamentalSolution& fs,
                                    const QuadratureScheme& sc, double eps0, int levels);

// Tail-fit + Richardson step on a cumulative sequence values[j] = integral
// over {d > eps[j]}.
ExcisionSequence extrapolate_excision(std::vector<double> eps, std::vector<double> values);

// Rejection-sampling cross-check, deliberately independent of the node
// machinery above. Deterministic for a fixed seed.
struct MonteCarloResult {
    double value = 0.0;
    double std_error = 0.0;
    double volume = 0.0;
    double volume_std_error = 0.0;
    std::int64_t samples = 0;
    std::int64_t inside = 0;
};
MonteCarloResult monte_carlo_interior(const Domain& dom, const Integrand& f, std::int64_t samples,
                                      std::uint64_t seed);

}  // namespace subell
