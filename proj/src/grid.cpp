#include "hsf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hsf/error.hpp"

namespace hsf {

namespace {

double center_coord(int64_t index, int64_t extent) {
    return -1.0 + static_cast<double>(2 * index + 1) / static_cast<double>(extent);
}

int64_t clamp_index(int64_t i, int64_t extent) { return std::clamp<int64_t>(i, 0, extent - 1); }

}  // namespace

CoordGrid normalized_grid(int64_t height, int64_t width) {
    if (height < 1 || width < 1)
        throw ShapeError("normalized_grid: extents must be positive, got " + std::to_string(height) +
                         "x" + std::to_string(width));
    CoordGrid g;
    g.height = height;
    g.width = width;
    g.coords.resize(static_cast<size_t>(height * width * 2));
    for (int64_t i = 0; i < height; ++i) {
        const double ci = center_coord(i, height);
        for (int64_t j = 0; j < width; ++j) {
            const size_t base = static_cast<size_t>((i * width + j) * 2);
            g.coords[base] = ci;
            g.coords[base + 1] = center_coord(j, width);
        }
    }
    return g;
}

NeighborQuery neighbor_query(const std::array<double, 2>& query, int64_t lr_height, int64_t lr_width) {
    if (lr_height < 1 || lr_width < 1)
        throw ShapeError("neighbor_query: raster extents must be positive");

    NeighborQuery q;
    q.query = query;

    // Fractional index of the query in each axis: center k sits at fractional
    // index k, so the window is floor/floor+1, clamped per corner.
    const double fi = ((query[0] + 1.0) * static_cast<double>(lr_height) - 1.0) / 2.0;
    const double fj = ((query[1] + 1.0) * static_cast<double>(lr_width) - 1.0) / 2.0;
    const int64_t i0 = static_cast<int64_t>(std::floor(fi));
    const int64_t j0 = static_cast<int64_t>(std::floor(fj));

    const int64_t rows[2] = {clamp_index(i0, lr_height), clamp_index(i0 + 1, lr_height)};
    const int64_t cols[2] = {clamp_index(j0, lr_width), clamp_index(j0 + 1, lr_width)};

    int corner = 0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            q.neighbors[corner] = {rows[a], cols[b]};
            q.rel[corner] = {query[0] - center_coord(rows[a], lr_height),
                             query[1] - center_coord(cols[b], lr_width)};
            ++corner;
        }

    // Corner visit order is lexicographic by index, so keeping the first
    // strict minimum implements the smallest-row-then-column tie rule.
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < 4; ++c) {
        const double d2 = q.rel[c][0] * q.rel[c][0] + q.rel[c][1] * q.rel[c][1];
        if (d2 < best) {
            best = d2;
            q.nearest = q.neighbors[c];
        }
    }
    return q;
}

std::vector<NeighborQuery> all_queries(const CoordGrid& grid, int64_t lr_height, int64_t lr_width) {
    std::vector<NeighborQuery> out;
    out.reserve(static_cast<size_t>(grid.height * grid.width));
    for (int64_t i = 0; i < grid.height; ++i)
        for (int64_t j = 0; j < grid.width; ++j)
            out.push_back(neighbor_query(grid.at(i, j), lr_height, lr_width));
    return out;
}

}  // namespace hsf
