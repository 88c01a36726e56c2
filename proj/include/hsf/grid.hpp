#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace hsf {

// Normalized pixel-center coordinates on [-1,1]^2. Row i, column j of an
// H x W raster sits at (-1 + (2i+1)/H, -1 + (2j+1)/W); the same convention is
// shared by the high- and low-resolution rasters so coordinates compare
// directly across scales.
struct CoordGrid {
    int64_t height = 0;
    int64_t width = 0;
    std::vector<double> coords;  // H*W*2, row-major, (row_coord, col_coord)

    std::array<double, 2> at(int64_t i, int64_t j) const {
        const size_t base = static_cast<size_t>((i * width + j) * 2);
        return {coords[base], coords[base + 1]};
    }
};

CoordGrid normalized_grid(int64_t height, int64_t width);

// The 2x2 window of low-resolution pixel centers around one query coordinate.
// Corner order is row-major: top-left, top-right, bottom-left, bottom-right.
// Out-of-range corners are clamped independently, so duplicates occur at the
// borders. `nearest` is the center minimizing Euclidean distance to the
// query, ties broken by smallest row then column.
struct NeighborQuery {
    std::array<double, 2> query{};
    std::array<std::array<int64_t, 2>, 4> neighbors{};
    std::array<int64_t, 2> nearest{};
    std::array<std::array<double, 2>, 4> rel{};  // query - neighbor center
};

NeighborQuery neighbor_query(const std::array<double, 2>& query, int64_t lr_height, int64_t lr_width);

// One query per pixel of the given grid, row-major.
std::vector<NeighborQuery> all_queries(const CoordGrid& grid, int64_t lr_height, int64_t lr_width);

}  // namespace hsf
