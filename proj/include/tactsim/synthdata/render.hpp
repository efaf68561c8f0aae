#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tactsim/core/error.hpp"
#include "tactsim/core/types.hpp"
#include "tactsim/gelphys/grid.hpp"
#include "tactsim/synthdata/style.hpp"

namespace tactsim {

namespace detail {

// Vertical displacement of the gel surface resampled to pixel resolution.
// The camera sits behind the gel, so the image x axis runs opposite to the
// gel x axis (horizontal mirror); rows keep their orientation.
inline std::vector<double> displacement_field(const TriMesh& mesh, const GelGrid& grid,
                                              std::int32_t h, std::int32_t w) {
    std::vector<double> field(std::size_t(h) * std::size_t(w));
    for (std::int32_t y = 0; y < h; ++y) {
        double gi = double(y) / double(h - 1) * double(grid.rows - 1);
        gi = std::clamp(gi, 0.0, double(grid.rows - 1));
        const auto i0 = std::int32_t(gi);
        const std::int32_t i1 = std::min(i0 + 1, grid.rows - 1);
        const double fi = gi - double(i0);
        for (std::int32_t x = 0; x < w; ++x) {
            double gj = (1.0 - double(x) / double(w - 1)) * double(grid.cols - 1);
            gj = std::clamp(gj, 0.0, double(grid.cols - 1));
            const auto j0 = std::int32_t(gj);
            const std::int32_t j1 = std::min(j0 + 1, grid.cols - 1);
            const double fj = gj - double(j0);
            const double z00 = mesh.z(grid.index(i0, j0));
            const double z01 = mesh.z(grid.index(i0, j1));
            const double z10 = mesh.z(grid.index(i1, j0));
            const double z11 = mesh.z(grid.index(i1, j1));
            const double top = z00 + (z01 - z00) * fj;
            const double bot = z10 + (z11 - z10) * fj;
            field[std::size_t(y) * std::size_t(w) + std::size_t(x)] =
                top + (bot - top) * fi;
        }
    }
    return field;
}

}  // namespace detail

// Lambertian shading of the displaced surface under the style's three
// lights, composited over the style background. Only the deviation from the
// flat-surface response is added, so an undeformed mesh reproduces the
// background exactly.
inline TactileImage render_pseudo_image(const TriMesh& mesh, const GelGrid& grid,
                                        const OpticalStyle& style, std::int32_t h,
                                        std::int32_t w) {
    require(grid.topology != nullptr && mesh.topology != nullptr &&
                mesh.topology_id() == grid.topology->id &&
                mesh.vertex_count() == grid.topology->vertex_count,
            "render/topology", "mesh is not on the renderer's gel topology");
    require(h >= 2 && w >= 2, "render/size", "render needs at least 2x2 pixels");

    const std::vector<double> field = detail::displacement_field(mesh, grid, h, w);
    TactileImage im = render_background(style, h, w);
    const double dx_mm = grid.extent_x / double(w - 1);
    const double dy_mm = grid.extent_y / double(h - 1);
    auto at = [&](std::int32_t y, std::int32_t x) {
        return field[std::size_t(y) * std::size_t(w) + std::size_t(x)];
    };
    for (std::int32_t y = 0; y < h; ++y)
        for (std::int32_t x = 0; x < w; ++x) {
            const std::int32_t xl = std::max(x - 1, 0);
            const std::int32_t xr = std::min(x + 1, w - 1);
            const std::int32_t yu = std::max(y - 1, 0);
            const std::int32_t yd = std::min(y + 1, h - 1);
            const double sx = (at(y, xr) - at(y, xl)) / (double(xr - xl) * dx_mm);
            const double sy = (at(yd, x) - at(yu, x)) / (double(yd - yu) * dy_mm);
            const double inv = 1.0 / std::sqrt(sx * sx + sy * sy + 1.0);
            const double nx = -sx * inv;
            const double ny = -sy * inv;
            const double nz = inv;
            for (std::int32_t c = 0; c < 3; ++c) {
                double dev = 0.0;
                for (int l = 0; l < 3; ++l) {
                    const auto& d = style.light_dir[std::size_t(l)];
                    const double lit = std::max(0.0, nx * d[0] + ny * d[1] + nz * d[2]);
                    dev += style.light_color[std::size_t(l)][std::size_t(c)] *
                           (lit - d[2]);
                }
                const double v = double(im.at(y, x, c)) + dev;
                im.at(y, x, c) = float(std::clamp(v, -1.0, 1.0));
            }
        }
    return im;
}

}  // namespace tactsim
