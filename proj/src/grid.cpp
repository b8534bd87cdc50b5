#include "lsd/grid.hpp"

namespace lsd {

void MomentumGrid::validate() const {
    require(dim == 1, ErrorKind::InvalidArgument, "momentum grids are one-dimensional");
    require(points >= 3 && points % 2 == 1, ErrorKind::InvalidArgument, "grid size must be odd and >= 3");
    require(std::isfinite(cutoff) && cutoff > 0.0, ErrorKind::InvalidArgument, "grid cutoff must be positive");
}

std::vector<double> MomentumGrid::nodes() const {
    std::vector<double> x(points);
    for (int i = 0; i < points; ++i) x[i] = node(i);
    return x;
}

std::string MomentumGrid::id() const { return "N" + std::to_string(points) + "_K" + fmt17(cutoff) + "_d" + std::to_string(dim); }

}  // namespace lsd
