#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tactsim/core/types.hpp"

namespace tactsim {

// Regular triangulated grid over the gel surface, row-major vertex order,
// counter-clockwise faces (normal +z). Coordinates are millimetres centred
// on the gel.
struct GelGrid {
    std::shared_ptr<Topology> topology;
    std::vector<float> vertices;  // resting positions, z = 0
    std::int32_t rows = 0;
    std::int32_t cols = 0;
    double extent_x = 0;  // full width in mm
    double extent_y = 0;

    std::int64_t index(std::int32_t i, std::int32_t j) const {
        return std::int64_t(i) * cols + j;
    }
    double x_of(std::int32_t j) const {
        return (double(j) / double(cols - 1) - 0.5) * extent_x;
    }
    double y_of(std::int32_t i) const {
        return (double(i) / double(rows - 1) - 0.5) * extent_y;
    }
    double cell_dx() const { return extent_x / double(cols - 1); }
    double cell_dy() const { return extent_y / double(rows - 1); }
};

inline GelGrid make_gel_grid(std::int32_t rows, std::int32_t cols, double extent_x_mm,
                             double extent_y_mm, const std::string& topology_id) {
    require(rows >= 2 && cols >= 2, "grid/extent", "grid needs at least 2x2 vertices");
    GelGrid g;
    g.rows = rows;
    g.cols = cols;
    g.extent_x = extent_x_mm;
    g.extent_y = extent_y_mm;
    g.topology = std::make_shared<Topology>();
    g.topology->id = topology_id;
    g.topology->vertex_count = std::int64_t(rows) * cols;
    g.vertices.resize(std::size_t(rows) * cols * 3);
    for (std::int32_t i = 0; i < rows; ++i)
        for (std::int32_t j = 0; j < cols; ++j) {
            const std::size_t at = std::size_t(g.index(i, j)) * 3;
            g.vertices[at + 0] = float(g.x_of(j));
            g.vertices[at + 1] = float(g.y_of(i));
            g.vertices[at + 2] = 0.0f;
        }
    for (std::int32_t i = 0; i + 1 < rows; ++i)
        for (std::int32_t j = 0; j + 1 < cols; ++j) {
            const auto v00 = std::uint32_t(g.index(i, j));
            const auto v01 = std::uint32_t(g.index(i, j + 1));
            const auto v10 = std::uint32_t(g.index(i + 1, j));
            const auto v11 = std::uint32_t(g.index(i + 1, j + 1));
            g.topology->faces.insert(g.topology->faces.end(), {v00, v01, v11});
            g.topology->faces.insert(g.topology->faces.end(), {v00, v11, v10});
        }
    return g;
}

}  // namespace tactsim
