#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tactsim/core/error.hpp"

namespace tactsim {

// Rigid probes as height profiles: h(u, v) is the lower surface's height in
// mm above the shape's lowest point, in indenter-local coordinates. Where the
// probe has no material the profile is effectively infinite.
inline constexpr double kNoContact = 1e9;

struct IndenterPose {
    std::string shape;
    double x = 0.0, y = 0.0;          // mm, centre on the gel plane
    double depth = 0.0;               // mm pressed into the gel
    double tilt_x = 0.0, tilt_y = 0.0;  // radians, small-angle rocking
    double slide_x = 0.0, slide_y = 0.0;  // mm of tangential displacement
};

namespace detail {

inline double sphere_profile(double rho2, double r) {
    if (rho2 > r * r) return kNoContact;
    return r - std::sqrt(r * r - rho2);
}

}  // namespace detail

inline const std::vector<std::string>& indenter_catalog() {
    static const std::vector<std::string> names = {
        "sphere_small", "sphere_large", "cylinder_flat", "cone",    "ridge",
        "ring",         "box",          "wedge",         "capsule", "ellipsoid",
        "pyramid",      "hex",          "cross",
    };
    return names;
}

inline double indenter_height(const std::string& shape, double u, double v) {
    const double rho2 = u * u + v * v;
    if (shape == "sphere_small") return detail::sphere_profile(rho2, 1.5);
    if (shape == "sphere_large") return detail::sphere_profile(rho2, 3.0);
    if (shape == "cylinder_flat") return rho2 <= 2.0 * 2.0 ? 0.0 : kNoContact;
    if (shape == "cone") {
        const double rho = std::sqrt(rho2);
        return rho <= 3.0 ? 1.2 * rho : kNoContact;
    }
    if (shape == "ridge") {
        if (std::abs(u) > 3.5 || std::abs(v) > 1.5) return kNoContact;
        return detail::sphere_profile(v * v, 1.5);
    }
    if (shape == "ring") {
        const double w = std::sqrt(rho2) - 2.2;
        return detail::sphere_profile(w * w, 0.8);
    }
    if (shape == "box") return std::max(std::abs(u), std::abs(v)) <= 1.8 ? 0.0 : kNoContact;
    if (shape == "wedge") {
        if (std::abs(u) > 2.0 || std::abs(v) > 3.0) return kNoContact;
        return std::abs(u);
    }
    if (shape == "capsule") {
        const double du = std::max(0.0, std::abs(u) - 2.0);  // distance to axis segment
        return detail::sphere_profile(du * du + v * v, 1.2);
    }
    if (shape == "ellipsoid") {
        const double q = (u / 3.0) * (u / 3.0) + (v / 1.8) * (v / 1.8);
        return q <= 1.0 ? 1.5 * (1.0 - std::sqrt(1.0 - q)) : kNoContact;
    }
    if (shape == "pyramid") {
        const double m = std::max(std::abs(u), std::abs(v));
        return m <= 3.0 ? 0.9 * m : kNoContact;
    }
    if (shape == "hex") {
        const double a = 2.0 * 0.8660254037844386;  // apothem of circumradius 2
        const bool inside = std::abs(u) <= a &&
                            std::abs(0.5 * u + 0.8660254037844386 * v) <= a &&
                            std::abs(-0.5 * u + 0.8660254037844386 * v) <= a;
        return inside ? 0.0 : kNoContact;
    }
    if (shape == "cross") {
        const bool inside = (std::abs(u) <= 2.4 && std::abs(v) <= 0.8) ||
                            (std::abs(u) <= 0.8 && std::abs(v) <= 2.4);
        return inside ? 0.0 : kNoContact;
    }
    throw Error("indenter/unknown", "unknown indenter shape: " + shape);
}

}  // namespace tactsim
