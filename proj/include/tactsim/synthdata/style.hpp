#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tactsim/core/error.hpp"
#include "tactsim/core/io.hpp"
#include "tactsim/core/rng.hpp"
#include "tactsim/core/types.hpp"

namespace tactsim {

// Per-sensor optical appearance: a diagonal background gradient with a
// mean-zero vignette and grain texture, plus three colored directional
// lights that shade the deformed surface. Contrast scales deviations
// around the gradient mean, so the background mean is exactly
// (corner0 + corner1)/2 + brightness before pixel quantization.
struct OpticalStyle {
    std::array<double, 3> corner0{};  // gradient color at the top-left
    std::array<double, 3> corner1{};  // gradient color at the bottom-right
    std::array<std::array<double, 3>, 3> light_color{};
    std::array<std::array<double, 3>, 3> light_dir{};  // unit vectors, z > 0
    double vignette = 0.0;
    std::uint64_t noise_seed = 0;
    double noise_amp = 0.0;
    double brightness = 0.0;
    double contrast = 1.0;

    json to_json() const {
        json j;
        j["corner0"] = corner0;
        j["corner1"] = corner1;
        j["light_color"] = light_color;
        j["light_dir"] = light_dir;
        j["vignette"] = vignette;
        j["noise_seed"] = noise_seed;
        j["noise_amp"] = noise_amp;
        j["brightness"] = brightness;
        j["contrast"] = contrast;
        return j;
    }

    static OpticalStyle from_json(const json& j, const std::string& origin) {
        require(j.is_object(), "style/bad-json", "style is not an object in " + origin);
        OpticalStyle s;
        auto vec3 = [&](const char* key, std::array<double, 3>& dst) {
            const auto& a = j.at(key);
            require(a.is_array() && a.size() == 3, "style/bad-json",
                    std::string(key) + " must be a 3-vector in " + origin);
            for (int c = 0; c < 3; ++c) dst[std::size_t(c)] = a[std::size_t(c)].get<double>();
        };
        try {
            vec3("corner0", s.corner0);
            vec3("corner1", s.corner1);
            const auto& lc = j.at("light_color");
            const auto& ld = j.at("light_dir");
            require(lc.is_array() && lc.size() == 3 && ld.is_array() && ld.size() == 3,
                    "style/bad-json", "expected three lights in " + origin);
            for (int l = 0; l < 3; ++l)
                for (int c = 0; c < 3; ++c) {
                    s.light_color[std::size_t(l)][std::size_t(c)] =
                        lc[std::size_t(l)][std::size_t(c)].get<double>();
                    s.light_dir[std::size_t(l)][std::size_t(c)] =
                        ld[std::size_t(l)][std::size_t(c)].get<double>();
                }
            s.vignette = j.at("vignette").get<double>();
            s.noise_seed = j.at("noise_seed").get<std::uint64_t>();
            s.noise_amp = j.at("noise_amp").get<double>();
            s.brightness = j.at("brightness").get<double>();
            s.contrast = j.at("contrast").get<double>();
        } catch (const json::exception& e) {
            raise("style/bad-json", "malformed style in " + origin + ": " + e.what());
        }
        return s;
    }
};

// Deterministic per seed; parameter ranges are chosen so an un-shaded
// background never reaches the [-1, 1] clamp.
inline OpticalStyle make_style(std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x57a13));
    OpticalStyle s;
    for (auto& c : s.corner0) c = rng.uniform(-0.55, 0.55);
    for (auto& c : s.corner1) c = rng.uniform(-0.55, 0.55);
    for (int l = 0; l < 3; ++l) {
        for (auto& c : s.light_color[std::size_t(l)]) c = rng.uniform(0.05, 0.35);
        double dx = rng.uniform(-0.8, 0.8);
        double dy = rng.uniform(-0.8, 0.8);
        double dz = rng.uniform(0.5, 1.2);
        const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
        s.light_dir[std::size_t(l)] = {dx / len, dy / len, dz / len};
    }
    s.vignette = rng.uniform(0.05, 0.15);
    s.noise_amp = rng.uniform(0.01, 0.05);
    s.brightness = rng.uniform(-0.08, 0.08);
    s.contrast = rng.uniform(0.92, 1.08);
    s.noise_seed = rng.bits();
    return s;
}

namespace detail {

// Vignette + grain, both constructed with (empirical) zero mean over the
// pixel lattice so they never shift the background level.
inline std::vector<double> style_texture(const OpticalStyle& style, std::int32_t h,
                                         std::int32_t w) {
    const std::size_t n = std::size_t(h) * std::size_t(w);
    std::vector<double> tex(n);
    const double cy = 0.5 * double(h - 1);
    const double cx = 0.5 * double(w - 1);
    double r2_sum = 0.0;
    for (std::int32_t y = 0; y < h; ++y)
        for (std::int32_t x = 0; x < w; ++x) {
            const double ry = cy > 0 ? (double(y) - cy) / cy : 0.0;
            const double rx = cx > 0 ? (double(x) - cx) / cx : 0.0;
            const double r2 = rx * rx + ry * ry;
            tex[std::size_t(y) * std::size_t(w) + std::size_t(x)] = r2;
            r2_sum += r2;
        }
    const double r2_mean = r2_sum / double(n);

    Rng noise(style.noise_seed);
    std::vector<double> grain(n);
    double g_sum = 0.0;
    for (auto& g : grain) {
        g = style.noise_amp * noise.uniform(-1.0, 1.0);
        g_sum += g;
    }
    const double g_mean = g_sum / double(n);

    for (std::size_t i = 0; i < n; ++i)
        tex[i] = style.vignette * (r2_mean - tex[i]) + (grain[i] - g_mean);
    return tex;
}

}  // namespace detail

inline TactileImage render_background(const OpticalStyle& style, std::int32_t h,
                                      std::int32_t w) {
    require(h >= 2 && w >= 2, "render/size", "background needs at least 2x2 pixels");
    const std::vector<double> tex = detail::style_texture(style, h, w);
    TactileImage im = TactileImage::zeros(h, w);
    for (std::int32_t y = 0; y < h; ++y)
        for (std::int32_t x = 0; x < w; ++x) {
            const double t =
                0.5 * (double(x) / double(w - 1) + double(y) / double(h - 1));
            const double dev = tex[std::size_t(y) * std::size_t(w) + std::size_t(x)];
            for (std::int32_t c = 0; c < 3; ++c) {
                const double mid = 0.5 * (style.corner0[std::size_t(c)] +
                                          style.corner1[std::size_t(c)]);
                const double grad = style.corner0[std::size_t(c)] +
                                    (style.corner1[std::size_t(c)] -
                                     style.corner0[std::size_t(c)]) * t;
                const double v =
                    mid + style.contrast * ((grad - mid) + dev) + style.brightness;
                im.at(y, x, c) = float(std::clamp(v, -1.0, 1.0));
            }
        }
    return im;
}

}  // namespace tactsim
