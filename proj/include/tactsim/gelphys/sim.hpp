#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "tactsim/core/types.hpp"
#include "tactsim/gelphys/grid.hpp"
#include "tactsim/gelphys/indenter.hpp"
#include "tactsim/gelphys/material.hpp"

namespace tactsim {

struct GelSimSettings {
    double thickness_mm = 3.0;
    double kernel_scale = 0.5;  // blur sigma as a fraction of gel thickness
};

struct GelContact {
    TriMesh mesh;
    ForceVec force;
};

namespace detail {

// Separable truncated-Gaussian blur; the kernel is normalized, so mass is
// preserved away from the boundary and exact zeros stay exact outside the
// kernel-dilated support.
inline void blur_field(std::vector<double>& field, std::int32_t rows, std::int32_t cols,
                       double sigma_cells_y, double sigma_cells_x) {
    auto pass = [](const std::vector<double>& in, std::vector<double>& out, std::int32_t n,
                   std::int32_t stride, std::int32_t lines, std::int32_t line_stride,
                   double sigma) {
        const std::int32_t radius = std::int32_t(std::ceil(3.0 * sigma));
        std::vector<double> k(std::size_t(radius) + 1);
        double norm = 0.0;
        for (std::int32_t i = 0; i <= radius; ++i) {
            k[std::size_t(i)] = std::exp(-0.5 * double(i) * double(i) / (sigma * sigma));
            norm += (i == 0 ? 1.0 : 2.0) * k[std::size_t(i)];
        }
        for (auto& v : k) v /= norm;
        for (std::int32_t l = 0; l < lines; ++l) {
            const std::int64_t base = std::int64_t(l) * line_stride;
            for (std::int32_t i = 0; i < n; ++i) {
                double acc = k[0] * in[std::size_t(base + std::int64_t(i) * stride)];
                for (std::int32_t d = 1; d <= radius; ++d) {
                    if (i - d >= 0)
                        acc += k[std::size_t(d)] *
                               in[std::size_t(base + std::int64_t(i - d) * stride)];
                    if (i + d < n)
                        acc += k[std::size_t(d)] *
                               in[std::size_t(base + std::int64_t(i + d) * stride)];
                }
                out[std::size_t(base + std::int64_t(i) * stride)] = acc;
            }
        }
    };
    std::vector<double> tmp(field.size());
    if (sigma_cells_x > 0.0)
        pass(field, tmp, cols, 1, rows, cols, sigma_cells_x);
    else
        tmp = field;
    if (sigma_cells_y > 0.0)
        pass(tmp, field, rows, cols, cols, 1, sigma_cells_y);
    else
        field = tmp;
}

}  // namespace detail

// Quasi-static elastic foundation: each surface point sinks by the indenter's
// local penetration (blurred to mimic gel continuity), normal force integrates
// the displacement field, and tangential force is Coulomb-clamped shear from
// the commanded slide.
inline GelContact toy_gel_simulate(const IndenterPose& pose, const GelParams& params,
                                   const GelGrid& grid, const GelSimSettings& s = {}) {
    params.validate();
    require(pose.depth >= 0.0, "pose/depth", "indentation depth must be non-negative");
    require(std::abs(pose.x) <= 0.5 * grid.extent_x && std::abs(pose.y) <= 0.5 * grid.extent_y,
            "pose/outside", "indenter centre is off the gel");
    indenter_height(pose.shape, 0.0, 0.0);  // reject unknown shapes up front

    GelContact out;
    out.mesh.topology = grid.topology;
    out.mesh.vertices = grid.vertices;

    const std::int64_t n = std::int64_t(grid.rows) * grid.cols;
    std::vector<double> pen(static_cast<std::size_t>(n), 0.0);
    bool any = false;
    if (pose.depth > 0.0) {
        const double tx = std::tan(pose.tilt_x), ty = std::tan(pose.tilt_y);
        for (std::int32_t i = 0; i < grid.rows; ++i)
            for (std::int32_t j = 0; j < grid.cols; ++j) {
                const double u = grid.x_of(j) - pose.x;
                const double v = grid.y_of(i) - pose.y;
                const double h = indenter_height(pose.shape, u, v);
                if (h >= 0.5 * kNoContact) continue;
                const double p = pose.depth - (h + u * tx + v * ty);
                if (p > 0.0) {
                    pen[std::size_t(grid.index(i, j))] = p;
                    any = true;
                }
            }
    }

    if (!any) return out;  // no contact: reference mesh, zero force

    const double sigma_mm = s.kernel_scale * s.thickness_mm;
    detail::blur_field(pen, grid.rows, grid.cols, sigma_mm / grid.cell_dy(),
                       sigma_mm / grid.cell_dx());

    const double da = grid.cell_dx() * grid.cell_dy();  // mm^2 per vertex
    double volume = 0.0, contact_area = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double p = pen[std::size_t(i)];
        if (p > 0.0) {
            volume += p * da;
            contact_area += da;
            out.mesh.vertices[std::size_t(i) * 3 + 2] -= float(p);
        }
    }

    // kPa = 1e-3 N/mm^2; foundation stiffness E/((1-nu^2) t) per unit area
    const double e_mm = params.elasticity_kpa * 1e-3;
    const double fz = e_mm / (1.0 - params.poisson_ratio * params.poisson_ratio) /
                      s.thickness_mm * volume;
    out.force.fz = fz;

    const double slide = std::hypot(pose.slide_x, pose.slide_y);
    if (slide > 0.0) {
        const double g_mm = e_mm / (2.0 * (1.0 + params.poisson_ratio));
        const double raw = g_mm * slide / s.thickness_mm * contact_area;
        const double ft = std::min(raw, params.friction * fz);
        out.force.fx = ft * pose.slide_x / slide;
        out.force.fy = ft * pose.slide_y / slide;
    }
    return out;
}

}  // namespace tactsim
