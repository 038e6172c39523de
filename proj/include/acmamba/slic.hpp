#pragma once

#include <cstdint>
#include <vector>

#include "acmamba/cube.hpp"

namespace acmamba {

// Partition of the image plane into contiguous regions. region_of is H*W
// row-major with indices in [0, n_regions); order is the scan sequence
// (centroid row-major) used to unfold regions into a 1-D sequence.
struct RegionMap {
    Index height = 0;
    Index width = 0;
    Index n_regions = 0;
    std::vector<std::int32_t> region_of;
    std::vector<std::int32_t> order;

    std::int32_t at(Index h, Index w) const {
        return region_of[static_cast<std::size_t>(h * width + w)];
    }
    std::vector<Index> regionSizes() const;
};

// SLIC-style clustering over the joint feature (per-band min-max scaled
// spectrum, spatial coordinates weighted by compactness / S with
// S = sqrt(H*W / n_regions_target)). Seeds on a regular grid, `iters`
// assignment/update rounds windowed to 2S x 2S, then connectivity
// enforcement merging orphan components into the largest adjacent region.
// The returned map's order is already the centroid row-major scan order.
RegionMap segmentRegions(const HsiCube& cube, Index n_regions_target,
                         double compactness = 0.1, int iters = 10);

// Regions sorted by centroid (row, then column, ties by smaller index).
std::vector<std::int32_t> regionScanOrder(const RegionMap& map);

// Scatter one scalar per region (indexed by region id) onto the pixel grid.
MatXd projectRegionsToPixels(const VecXd& region_values, const RegionMap& map);

} // namespace acmamba
