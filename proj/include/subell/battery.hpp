#pragma once

#include <string>
#include <vector>

#include "subell/domain.hpp"
#include "subell/fundsol.hpp"
#include "subell/scalar_field.hpp"

namespace subell {

// Fixed, versioned set of test functions for sweeping inequalities on a
// domain. Members never change silently: sweeps archived with these names
// stay comparable across runs.
struct BatteryMember {
    std::string name;
    FieldPtr u;
    bool compact_support = false;  // u and grad u vanish on the boundary
};

// Twelve members per domain kind. Ball-like domains (gauge balls, euclidean
// balls around the pole) get profiles in q = (d/r)^4, which is polynomial in
// the coordinates for the built-in gauges; boxes get tensor products with
// kinks and peaks kept off the node lattice.
std::vector<BatteryMember> standard_battery(const FundamentalSolution& fs, const Domain& dom);

}  // namespace subell
