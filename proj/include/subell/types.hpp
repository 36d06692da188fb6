#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace subell {

// Coordinates of a point in the ambient space. Length always equals the
// ambient dimension of whatever object it is handed to.
using Point = std::vector<double>;

// Non-owning read view used by all evaluation hot paths.
using View = std::span<const double>;

// Hard cap on the ambient dimension. Keeps per-node scratch buffers on the
// stack (a hessian is kMaxDim^2 doubles).
inline constexpr int kMaxDim = 12;

inline double sq(double x) { return x * x; }

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_dim(View x, int n, const char* what) {
    if (static_cast<int>(x.size()) != n)
        throw std::invalid_argument(std::string(what) + ": expected dimension " +
                                    std::to_string(n) + ", got " + std::to_string(x.size()));
}

// Sum with a fixed reduction tree (pairwise halving). The result depends only
// on the order of the inputs, not on chunking or thread count, which is what
// makes integral values bit-reproducible for a fixed scheme.
double pairwise_sum(std::span<const double> v);

}  // namespace subell
