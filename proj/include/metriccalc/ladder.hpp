#pragma once

#include "metriccalc/space.hpp"

#include <stdexcept>
#include <vector>

namespace mc {

// Strictly decreasing positive radii r_0 > r_1 > ... > r_K: the finite
// stand-in for "from scale r down to 0" on a space with a smallest scale.
struct ScaleLadder {
    std::vector<double> radii;

    double top() const { return radii.front(); }
    double floor() const { return radii.back(); }
    int levels() const { return static_cast<int>(radii.size()); }

    static ScaleLadder geometric(double r0, double ratio, double floor_radius) {
        if (!(floor_radius > 0.0)) throw std::invalid_argument("ladder: floor must be positive");
        if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("ladder: ratio must lie in (0,1)");
        ScaleLadder lad;
        double r = r0;
        while (r > floor_radius * (1.0 + 1e-12)) {
            lad.radii.push_back(r);
            r *= ratio;
        }
        lad.radii.push_back(floor_radius);
        return lad;
    }

    // Default: geometric with ratio 1/2 from diameter/4 down to the median
    // nearest-neighbor distance.
    static ScaleLadder for_space(const Space& space) {
        double floor_radius = space.median_nn_dist();
        if (!(floor_radius > 0.0)) floor_radius = 1.0; // single point or degenerate
        return geometric(space.diameter() / 4.0, 0.5, floor_radius);
    }
};

} // namespace mc
