#pragma once

#include <vector>

#include "viewfuse/image.hpp"

namespace viewfuse {

/// Connected components of a binary mask. Regions are numbered in raster
/// order of their first pixel; pixels outside the mask carry -1.
struct RegionLabeling {
    Image<int> label;
    std::vector<long> sizes;

    int region_count() const { return static_cast<int>(sizes.size()); }
};

/// connectivity is 4 or 8.
RegionLabeling label_regions(const Mask& mask, int connectivity = 4);

/// L1 (4-neighbor) distance to the nearest nonzero pixel of `seeds`,
/// computed up to `max_distance`; farther pixels get max_distance + 1.
Image<int> l1_distance(const Mask& seeds, int max_distance);

}  // namespace viewfuse
