#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "tactsim/core/convert.hpp"
#include "tactsim/core/error.hpp"
#include "tactsim/core/io.hpp"
#include "tactsim/core/rng.hpp"
#include "tactsim/core/types.hpp"
#include "tactsim/metrics/image.hpp"
#include "tactsim/nn/layers.hpp"

namespace tactsim {

struct AlignmentReport {
    double histogram_intersection = 0.0;
    double style_distance = 0.0;

    json to_json() const {
        json j;
        j["histogram_intersection"] = histogram_intersection;
        j["style_distance"] = style_distance;
        return j;
    }
};

namespace detail {

// Normalized per-channel histograms over [0, 255], pooled across the set.
inline std::array<std::vector<double>, 3> channel_histograms(
    const std::vector<TactileImage>& set, std::int32_t bins) {
    std::array<std::vector<double>, 3> h;
    for (auto& v : h) v.assign(std::size_t(bins), 0.0);
    std::array<double, 3> count{};
    for (const auto& im : set)
        for (std::int32_t y = 0; y < im.height; ++y)
            for (std::int32_t x = 0; x < im.width; ++x)
                for (std::int32_t c = 0; c < 3; ++c) {
                    const double v = std::clamp(px255(im.at(y, x, c)), 0.0, 255.0);
                    const auto b = std::min<std::int32_t>(
                        bins - 1, std::int32_t(v * double(bins) / 256.0));
                    h[std::size_t(c)][std::size_t(b)] += 1.0;
                    count[std::size_t(c)] += 1.0;
                }
    for (std::int32_t c = 0; c < 3; ++c)
        for (auto& v : h[std::size_t(c)]) v /= count[std::size_t(c)];
    return h;
}

}  // namespace detail

// Channel-averaged histogram intersection: 1 iff the normalized histograms
// coincide, 0 for disjoint supports.
inline double histogram_intersection(const std::vector<TactileImage>& a,
                                     const std::vector<TactileImage>& b,
                                     std::int32_t bins = 32) {
    require(!a.empty() && !b.empty(), "metrics/empty", "histogram over an empty set");
    require(bins >= 1, "metrics/bins", "need at least one histogram bin");
    const auto ha = detail::channel_histograms(a, bins);
    const auto hb = detail::channel_histograms(b, bins);
    double total = 0.0;
    for (std::int32_t c = 0; c < 3; ++c)
        for (std::int32_t i = 0; i < bins; ++i)
            total += std::min(ha[std::size_t(c)][std::size_t(i)],
                              hb[std::size_t(c)][std::size_t(i)]);
    return total / 3.0;
}

// Pearson correlation of the same histograms; exposed alongside the
// intersection because published tables sometimes report either.
inline double histogram_correlation(const std::vector<TactileImage>& a,
                                    const std::vector<TactileImage>& b,
                                    std::int32_t bins = 32) {
    require(!a.empty() && !b.empty(), "metrics/empty", "histogram over an empty set");
    require(bins >= 2, "metrics/bins", "correlation needs at least two bins");
    const auto ha = detail::channel_histograms(a, bins);
    const auto hb = detail::channel_histograms(b, bins);
    double total = 0.0;
    for (std::int32_t c = 0; c < 3; ++c) {
        const double mean = 1.0 / double(bins);  // histograms sum to 1
        double num = 0.0, da = 0.0, db = 0.0;
        for (std::int32_t i = 0; i < bins; ++i) {
            const double xa = ha[std::size_t(c)][std::size_t(i)] - mean;
            const double xb = hb[std::size_t(c)][std::size_t(i)] - mean;
            num += xa * xb;
            da += xa * xa;
            db += xb * xb;
        }
        if (da == 0.0 || db == 0.0)
            total += (da == db) ? 1.0 : 0.0;
        else
            total += num / std::sqrt(da * db);
    }
    return total / 3.0;
}

// Fixed-random-weight convolutional stack standing in for a pretrained
// feature network. Gram statistics through it are meaningful relatively
// (same extractor on both sides), which is all the style metric needs.
class StyleExtractor {
public:
    explicit StyleExtractor(std::uint64_t seed = 0x57a7e) {
        Rng rng(mix_seed(seed, 0x6a3fb));
        std::int64_t cin = 3;
        const std::int64_t widths[3] = {8, 16, 16};
        for (int l = 0; l < 3; ++l) {
            const std::int64_t stride = l < 2 ? 2 : 1;
            layers_.emplace_back(store_, "style.conv" + std::to_string(l), cin,
                                 widths[l], 3, stride, 1, rng);
            names_.push_back("conv" + std::to_string(l));
            cin = widths[l];
        }
    }

    const std::vector<std::string>& layer_names() const { return names_; }

    // ReLU feature maps of every layer, keyed by layer name.
    std::map<std::string, Tensor> features(const TactileImage& im) {
        Tensor x = image_to_tensor(im);
        std::map<std::string, Tensor> out;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            x = layers_[l].forward(x);
            for (std::int64_t i = 0; i < x.numel(); ++i)
                x.data()[i] = std::max(0.0, x.data()[i]);
            out.emplace(names_[l], x);
        }
        return out;
    }

private:
    ParamStore store_;
    std::vector<Conv2d> layers_;
    std::vector<std::string> names_;
};

namespace detail {

// Gram matrix of a C x H x W feature map, normalized by C*H*W.
inline std::vector<double> gram(const Tensor& f) {
    const std::int64_t c = f.dim(0), hw = f.dim(1) * f.dim(2);
    std::vector<double> g(std::size_t(c) * std::size_t(c), 0.0);
    for (std::int64_t i = 0; i < c; ++i)
        for (std::int64_t j = i; j < c; ++j) {
            double acc = 0.0;
            const double* fi = f.data() + i * hw;
            const double* fj = f.data() + j * hw;
            for (std::int64_t k = 0; k < hw; ++k) acc += fi[k] * fj[k];
            acc /= double(c * hw);
            g[std::size_t(i * c + j)] = acc;
            g[std::size_t(j * c + i)] = acc;
        }
    return g;
}

inline std::map<std::string, std::vector<double>> mean_grams(
    const std::vector<TactileImage>& set, StyleExtractor& fx,
    const std::vector<std::string>& layers) {
    std::map<std::string, std::vector<double>> mean;
    for (const auto& im : set) {
        auto feats = fx.features(im);
        for (const auto& name : layers) {
            auto it = feats.find(name);
            require(it != feats.end(), "metrics/layer",
                    "extractor has no layer named '" + name + "'");
            const auto g = gram(it->second);
            auto& acc = mean[name];
            if (acc.empty()) acc.assign(g.size(), 0.0);
            require(acc.size() == g.size(), "metrics/layer",
                    "inconsistent feature shapes for layer '" + name + "'");
            for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
        }
    }
    for (auto& [name, acc] : mean)
        for (auto& v : acc) v /= double(set.size());
    return mean;
}

}  // namespace detail

// Mean squared difference between the two sets' mean Gram matrices,
// averaged over the requested layers (all layers when none are named).
inline double style_distance(const std::vector<TactileImage>& a,
                             const std::vector<TactileImage>& b, StyleExtractor& fx,
                             std::vector<std::string> layers = {}) {
    require(!a.empty() && !b.empty(), "metrics/empty", "style distance of an empty set");
    if (layers.empty()) layers = fx.layer_names();
    const auto ga = detail::mean_grams(a, fx, layers);
    const auto gb = detail::mean_grams(b, fx, layers);
    double total = 0.0;
    for (const auto& name : layers) {
        const auto& va = ga.at(name);
        const auto& vb = gb.at(name);
        require(va.size() == vb.size(), "metrics/layer",
                "inconsistent feature shapes for layer '" + name + "'");
        double acc = 0.0;
        for (std::size_t i = 0; i < va.size(); ++i) {
            const double d = va[i] - vb[i];
            acc += d * d;
        }
        total += acc / double(va.size());
    }
    return total / double(layers.size());
}

}  // namespace tactsim
