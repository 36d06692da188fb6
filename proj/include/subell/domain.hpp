#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "subell/fundsol.hpp"
#include "subell/types.hpp"

namespace subell {

// How integration treats one parameter axis of a cell or patch.
enum class AxisKind {
    Linear,           // plain Gauss nodes
    Angular,          // polar angles: Gauss nodes at the (separate) angular order
    AngularPeriodic,  // full-period angles: equispaced midpoints (exact for low harmonics)
    RadialGraded,     // geometric subdivision toward the lower endpoint
    ClusterBoth,      // geometric subdivision toward both endpoints (chart poles)
};

// Integration cell: an axis-aligned parameter box, optionally pushed through a
// smooth map with known volume distortion. map == nullptr means the parameters
// are the ambient coordinates themselves.
struct Cell {
    Point lo, hi;
    std::function<void(View, std::span<double>)> map;
    std::function<double(View)> jacobian;  // |det D map|; nullptr = 1
    std::vector<AxisKind> axes;            // empty = all Linear
};

// One chart of the boundary: s in [lo, hi] (dimension n-1) -> ambient point,
// with tangent columns d(chart)/d s_i. orient flips the induced form so that
// it measures outward flux.
struct BoundaryPatch {
    int n = 0;
    Point lo, hi;
    std::function<void(View, std::span<double>)> chart;
    std::function<void(View, std::span<double>)> tangents;  // column-major n x (n-1)
    double orient = 1.0;
    std::vector<AxisKind> axes;
};

struct Domain {
    int n = 0;
    std::vector<Cell> cells;
    std::vector<BoundaryPatch> patches;
    std::function<bool(View)> contains;
    Point bb_lo, bb_hi;           // bounding box (for rejection sampling)
    double scale = 1.0;           // characteristic length
    std::optional<double> volume_exact;
    std::string kind;

    // Pole bookkeeping, set when the domain was built around a fundamental
    // solution (or via attach_pole).
    std::function<double(View)> gauge;  // distance-to-pole in gauge units
    bool pole_inside = false;
    double excised_eps = 0.0;  // {gauge <= eps} removed
    // True when cell axis 0 is the gauge-radial coordinate, in which case
    // excision clips that axis exactly instead of masking nodes.
    bool radial_gauge_aligned = false;
    double radial_gauge_scale = 1.0;  // gauge = parameter * scale on that axis
};

// Axis-aligned box [lo, hi]^n. splits subdivides every axis into that many
// equal cells (kinks of piecewise-smooth coefficients on coordinate
// hyperplanes then sit on cell boundaries, never on Gauss nodes).
Domain build_box(Point lo, Point hi, int splits = 1);

// Euclidean ball in polar coordinates; the radial axis is graded.
Domain build_euclidean_ball(Point center, double radius);

// Gauge ball {d <= r} of a Heisenberg fundamental solution, centered at its
// pole. Parameters are (lambda, psi, sphere angles) with
//   |z| = lambda r sqrt(cos psi), t = lambda^2 r^2 sin psi,
// pushed through the group translation; |J| = lambda^(Q-1) r^Q cos^(m-1) psi
// times the z-sphere area factor.
Domain build_gauge_ball(const FundamentalSolution& fs, double radius);

// Wires pole/gauge metadata of fs into a domain built by the plain builders.
void attach_pole(Domain& dom, const FundamentalSolution& fs);

// Domain minus the closed gauge ball {d <= eps}. Exact (parameter clipping)
// when the domain is gauge-radially aligned; otherwise node masking.
Domain excise_pole(const Domain& dom, const FundamentalSolution& fs, double eps);

// Pullback density of the interior product of X_k with the volume form:
// orient * det [ X_k(chart(s)) | tangent columns ]. Integrating f * this over
// the parameter box gives the boundary flux term of X_k.
double boundary_form_density(const Frame& fr, const BoundaryPatch& patch, int k, View s);

// Same, from an already-evaluated chart point and tangent matrix (column-major
// n x (n-1)); what the node caches call in their hot loop.
double boundary_form_density_at(const Frame& fr, View x, View tangents, double orient, int k);

// Same quantity through the explicit (n-1)-form
//   (-1)^k  wedge_{j<N, j != k} dx_j  wedge_{m >= N} theta_m,
//   theta_m = dx_m - sum_{k'} a_{k',m} dx_{k'},
// evaluated on the tangent columns. Independent code path used to cross-check
// boundary_form_density.
double wedge_form_density(const Frame& fr, const BoundaryPatch& patch, int k, View s);

// In-place LU determinant of a dense n x n matrix (row-major), partial pivots.
double det_inplace(std::span<double> a, int n);

// Standard spherical chart of S^(d-1): point from d-1 angles and its
// derivative with respect to one angle.
void sphere_point(int d, View ang, std::span<double> out);
void sphere_tangent(int d, View ang, int which, std::span<double> out);

}  // namespace subell
