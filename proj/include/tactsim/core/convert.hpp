#pragma once

#include "tactsim/core/types.hpp"
#include "tactsim/nn/tensor.hpp"

namespace tactsim {

// TactileImage stores interleaved rgb rows; the network side wants channel
// planes {3, H, W} in double.
inline Tensor image_to_tensor(const TactileImage& im) {
    im.validate();
    Tensor t({3, im.height, im.width});
    for (std::int32_t y = 0; y < im.height; ++y)
        for (std::int32_t x = 0; x < im.width; ++x)
            for (std::int32_t c = 0; c < 3; ++c) t.at3(c, y, x) = double(im.at(y, x, c));
    return t;
}

inline TactileImage tensor_to_image(const Tensor& t, bool clamp = true) {
    require(t.rank() == 3 && t.dim(0) == 3, "image/shape", "expected a {3, H, W} tensor");
    TactileImage im = TactileImage::zeros(std::int32_t(t.dim(1)), std::int32_t(t.dim(2)));
    for (std::int32_t y = 0; y < im.height; ++y)
        for (std::int32_t x = 0; x < im.width; ++x)
            for (std::int32_t c = 0; c < 3; ++c) {
                double v = t.at3(c, y, x);
                if (clamp) v = std::min(1.0, std::max(-1.0, v));
                im.at(y, x, c) = float(v);
            }
    return im;
}

}  // namespace tactsim
