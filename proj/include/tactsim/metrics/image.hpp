#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "tactsim/core/error.hpp"
#include "tactsim/core/io.hpp"
#include "tactsim/core/types.hpp"

namespace tactsim {

// Image fidelity on the 8-bit-equivalent [0, 255] scale.
struct ImageFidelityReport {
    double l1 = 0.0;
    double mse = 0.0;
    double ssim = 0.0;
    double psnr = 0.0;

    json to_json() const {
        json j;
        j["l1"] = l1;
        j["mse"] = mse;
        j["ssim"] = ssim;
        if (std::isinf(psnr))
            j["psnr"] = "inf";
        else
            j["psnr"] = psnr;
        return j;
    }
};

inline double psnr_from_mse(double mse) {
    if (mse <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace detail {

inline double px255(float p) { return (double(p) + 1.0) * 127.5; }

// Gaussian-weighted moment image over valid windows, as two separable
// passes. in is h*w; out is (h-2r)*(w-2r).
inline std::vector<double> window_mean(const std::vector<double>& in, std::int32_t h,
                                       std::int32_t w, const std::vector<double>& g) {
    const auto r = std::int32_t(g.size() / 2);
    const std::int32_t wo = w - 2 * r, ho = h - 2 * r;
    std::vector<double> mid(std::size_t(h) * std::size_t(wo));
    for (std::int32_t y = 0; y < h; ++y)
        for (std::int32_t x = 0; x < wo; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k)
                acc += g[k] * in[std::size_t(y) * std::size_t(w) + std::size_t(x) + k];
            mid[std::size_t(y) * std::size_t(wo) + std::size_t(x)] = acc;
        }
    std::vector<double> out(std::size_t(ho) * std::size_t(wo));
    for (std::int32_t y = 0; y < ho; ++y)
        for (std::int32_t x = 0; x < wo; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k)
                acc += g[k] * mid[(std::size_t(y) + k) * std::size_t(wo) + std::size_t(x)];
            out[std::size_t(y) * std::size_t(wo) + std::size_t(x)] = acc;
        }
    return out;
}

}  // namespace detail

// Channel-averaged SSIM with the standard 11x11 Gaussian window (sigma 1.5)
// over valid positions only.
inline double ssim(const TactileImage& a, const TactileImage& b) {
    require(a.height == b.height && a.width == b.width &&
                a.pixels.size() == b.pixels.size(),
            "metrics/shape", "image shapes differ");
    constexpr std::int32_t kRadius = 5;
    require(a.height >= 2 * kRadius + 1 && a.width >= 2 * kRadius + 1, "metrics/window",
            "image smaller than the 11x11 ssim window");

    std::vector<double> g(std::size_t(2 * kRadius + 1));
    double norm = 0.0;
    for (std::int32_t i = -kRadius; i <= kRadius; ++i) {
        g[std::size_t(i + kRadius)] = std::exp(-0.5 * double(i) * double(i) / (1.5 * 1.5));
        norm += g[std::size_t(i + kRadius)];
    }
    for (auto& v : g) v /= norm;

    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    const std::size_t n = std::size_t(a.height) * std::size_t(a.width);
    std::vector<double> xa(n), xb(n), xaa(n), xbb(n), xab(n);

    double total = 0.0;
    for (std::int32_t c = 0; c < 3; ++c) {
        for (std::int32_t y = 0; y < a.height; ++y)
            for (std::int32_t x = 0; x < a.width; ++x) {
                const std::size_t i = std::size_t(y) * std::size_t(a.width) + std::size_t(x);
                xa[i] = detail::px255(a.at(y, x, c));
                xb[i] = detail::px255(b.at(y, x, c));
                xaa[i] = xa[i] * xa[i];
                xbb[i] = xb[i] * xb[i];
                xab[i] = xa[i] * xb[i];
            }
        const auto mu_a = detail::window_mean(xa, a.height, a.width, g);
        const auto mu_b = detail::window_mean(xb, a.height, a.width, g);
        const auto m_aa = detail::window_mean(xaa, a.height, a.width, g);
        const auto m_bb = detail::window_mean(xbb, a.height, a.width, g);
        const auto m_ab = detail::window_mean(xab, a.height, a.width, g);

        double acc = 0.0;
        for (std::size_t i = 0; i < mu_a.size(); ++i) {
            const double va = m_aa[i] - mu_a[i] * mu_a[i];
            const double vb = m_bb[i] - mu_b[i] * mu_b[i];
            const double cov = m_ab[i] - mu_a[i] * mu_b[i];
            acc += ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2)) /
                   ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
        }
        total += acc / double(mu_a.size());
    }
    return total / 3.0;
}

inline ImageFidelityReport image_metrics(const TactileImage& a, const TactileImage& b) {
    require(a.height == b.height && a.width == b.width &&
                a.pixels.size() == b.pixels.size(),
            "metrics/shape", "image shapes differ");
    ImageFidelityReport r;
    double l1 = 0.0, mse = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = detail::px255(a.pixels[i]) - detail::px255(b.pixels[i]);
        l1 += std::abs(d);
        mse += d * d;
    }
    r.l1 = l1 / double(a.pixels.size());
    r.mse = mse / double(a.pixels.size());
    r.ssim = ssim(a, b);
    r.psnr = psnr_from_mse(r.mse);
    return r;
}

}  // namespace tactsim
