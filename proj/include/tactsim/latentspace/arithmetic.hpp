#pragma once

#include "tactsim/core/types.hpp"
#include "tactsim/imagevae/model.hpp"

namespace tactsim {

// Deformation codes are differences of image-space codes, so they live in the
// image space themselves and compose back by plain addition.
inline LatentVec extract_deformation(const LatentVec& z_image, const LatentVec& z_base) {
    require(z_image.space == LatentSpace::Image, "latent/space-mismatch",
            "extract_deformation expects image-space operands");
    require_compatible(z_image, z_base, "extract_deformation");
    LatentVec d = z_image;
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= z_base.values[i];
    return d;
}

inline LatentVec compose(const LatentVec& z_deform, const LatentVec& z_base) {
    require(z_deform.space == LatentSpace::Image, "latent/space-mismatch",
            "compose expects image-space operands");
    require_compatible(z_deform, z_base, "compose");
    LatentVec z = z_deform;
    for (std::size_t i = 0; i < z.values.size(); ++i) z.values[i] += z_base.values[i];
    return z;
}

// Posterior mean of the encoded resting image, cached on the profile. Means,
// not samples: background references must be stable across calls.
inline LatentVec background_vector(SensorProfile& profile, ImageVae& encoder) {
    if (profile.z_base) return *profile.z_base;
    require(profile.background.height > 0 && profile.background.width > 0,
            "profile/no-background", "sensor profile has no background image");
    Posterior q = encode_image(encoder, profile.background);
    profile.z_base = posterior_mean(q, LatentSpace::Image);
    return *profile.z_base;
}

}  // namespace tactsim
