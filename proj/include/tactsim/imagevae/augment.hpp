#pragma once

#include <cmath>

#include "tactsim/core/rng.hpp"
#include "tactsim/nn/tensor.hpp"

namespace tactsim {

struct AugmentParams {
    bool enabled = true;
    double max_rotate_deg = 5.0;
    double flip_prob = 0.5;
    double noise_sigma = 0.02;
    double max_brightness = 0.1;
    double max_contrast = 0.1;
};

// Small-angle rotation by bilinear resampling with edge clamping.
inline Tensor rotate_image_tensor(const Tensor& x, double degrees) {
    const std::int64_t h = x.dim(1), w = x.dim(2);
    const double rad = degrees * 3.14159265358979323846 / 180.0;
    const double cs = std::cos(rad), sn = std::sin(rad);
    const double cy = 0.5 * double(h - 1), cx = 0.5 * double(w - 1);
    Tensor y({3, h, w});
    for (std::int64_t yy = 0; yy < h; ++yy) {
        for (std::int64_t xx = 0; xx < w; ++xx) {
            const double dy = double(yy) - cy, dx = double(xx) - cx;
            // inverse rotation: sample where the output pixel came from
            double sy = cs * dy + sn * dx + cy;
            double sx = -sn * dy + cs * dx + cx;
            sy = std::min(double(h - 1), std::max(0.0, sy));
            sx = std::min(double(w - 1), std::max(0.0, sx));
            const std::int64_t y0 = std::int64_t(sy), x0 = std::int64_t(sx);
            const std::int64_t y1 = std::min(h - 1, y0 + 1), x1 = std::min(w - 1, x0 + 1);
            const double fy = sy - double(y0), fx = sx - double(x0);
            for (int c = 0; c < 3; ++c) {
                const double v = (1 - fy) * ((1 - fx) * x.at3(c, y0, x0) + fx * x.at3(c, y0, x1)) +
                                 fy * ((1 - fx) * x.at3(c, y1, x0) + fx * x.at3(c, y1, x1));
                y.at3(c, yy, xx) = v;
            }
        }
    }
    return y;
}

inline Tensor flip_horizontal(const Tensor& x) {
    const std::int64_t h = x.dim(1), w = x.dim(2);
    Tensor y({3, h, w});
    for (int c = 0; c < 3; ++c)
        for (std::int64_t yy = 0; yy < h; ++yy)
            for (std::int64_t xx = 0; xx < w; ++xx) y.at3(c, yy, xx) = x.at3(c, yy, w - 1 - xx);
    return y;
}

inline Tensor flip_vertical(const Tensor& x) {
    const std::int64_t h = x.dim(1), w = x.dim(2);
    Tensor y({3, h, w});
    for (int c = 0; c < 3; ++c)
        for (std::int64_t yy = 0; yy < h; ++yy)
            for (std::int64_t xx = 0; xx < w; ++xx) y.at3(c, yy, xx) = x.at3(c, h - 1 - yy, xx);
    return y;
}

// Training-time perturbations; the draw order below is part of the stream
// contract. Output stays inside [-1, 1].
inline Tensor augment_image(const Tensor& x, const AugmentParams& p, Rng& rng) {
    if (!p.enabled) return x;
    Tensor y = x;
    if (p.max_rotate_deg > 0) {
        const double angle = rng.uniform(-p.max_rotate_deg, p.max_rotate_deg);
        y = rotate_image_tensor(y, angle);
    }
    if (p.flip_prob > 0) {
        if (rng.bernoulli(p.flip_prob)) y = flip_horizontal(y);
        if (rng.bernoulli(p.flip_prob)) y = flip_vertical(y);
    }
    const double contrast = p.max_contrast > 0 ? rng.uniform(-p.max_contrast, p.max_contrast) : 0;
    const double brightness =
        p.max_brightness > 0 ? rng.uniform(-p.max_brightness, p.max_brightness) : 0;
    const bool noisy = p.noise_sigma > 0;
    for (auto& v : y.v) {
        v = v * (1.0 + contrast) + brightness;
        if (noisy) v += rng.normal(0.0, p.noise_sigma);
        v = std::min(1.0, std::max(-1.0, v));
    }
    return y;
}

}  // namespace tactsim
