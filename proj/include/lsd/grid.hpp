#pragma once

#include "lsd/common.hpp"

#include <string>
#include <vector>

namespace lsd {

// Uniform odd-size grid on [-K, K] (d = 1). Nodes are symmetric bit-for-bit:
// node(i) == -node(N-1-i).
struct MomentumGrid {
    double cutoff = 12.0;  // K
    int points = 801;      // N, odd
    int dim = 1;

    void validate() const;
    double spacing() const { return 2.0 * cutoff / (points - 1); }
    double node(int i) const { return (i - (points - 1) / 2) * spacing(); }
    std::vector<double> nodes() const;
    std::string id() const;
};

}  // namespace lsd
