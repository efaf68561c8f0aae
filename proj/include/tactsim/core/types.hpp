#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tactsim/core/error.hpp"

namespace tactsim {

// Face connectivity, stored once and shared by every mesh with the same
// wiring. `faces` may be empty for meshes loaded standalone (the sidecar
// carries the triangles); operations that need triangles must check.
struct Topology {
    std::string id;
    std::int64_t vertex_count = 0;
    std::vector<std::uint32_t> faces;  // F*3 vertex indices

    std::int64_t face_count() const { return std::int64_t(faces.size()) / 3; }
    bool has_faces() const { return !faces.empty(); }

    void validate() const {
        require(vertex_count > 0, "mesh/empty", "topology has no vertices");
        require(faces.size() % 3 == 0, "mesh/bad-faces", "face array not a multiple of 3");
        for (std::uint32_t idx : faces)
            require(idx < std::uint64_t(vertex_count), "mesh/face-index",
                    "face index " + std::to_string(idx) + " out of range");
    }
};

// Vertex positions in millimetres. Stored in float32, the on-disk precision,
// so file round-trips are bit-exact; algorithms lift to double internally.
struct TriMesh {
    std::shared_ptr<const Topology> topology;
    std::vector<float> vertices;  // V*3, xyz interleaved

    std::int64_t vertex_count() const { return std::int64_t(vertices.size()) / 3; }

    const std::string& topology_id() const {
        static const std::string none;
        return topology ? topology->id : none;
    }

    float x(std::int64_t v) const { return vertices[3 * v + 0]; }
    float y(std::int64_t v) const { return vertices[3 * v + 1]; }
    float z(std::int64_t v) const { return vertices[3 * v + 2]; }

    void validate() const {
        require(topology != nullptr, "mesh/no-topology", "mesh has no topology");
        require(vertices.size() % 3 == 0, "mesh/bad-vertices", "vertex array not a multiple of 3");
        require(vertex_count() == topology->vertex_count, "mesh/vertex-count",
                "vertex array does not match topology vertex count");
        topology->validate();
    }
};

// Tactile frame, channels interleaved (r,g,b per pixel), values in [-1, 1].
// The physical sensor is 240x320; smaller sizes are used by reduced presets.
struct TactileImage {
    std::int32_t height = 0;
    std::int32_t width = 0;
    std::vector<float> pixels;  // height*width*3
    std::string sensor_id;

    static constexpr std::int32_t kCanonicalHeight = 240;
    static constexpr std::int32_t kCanonicalWidth = 320;

    static TactileImage zeros(std::int32_t h, std::int32_t w) {
        TactileImage im;
        im.height = h;
        im.width = w;
        im.pixels.assign(std::size_t(h) * w * 3, 0.0f);
        return im;
    }

    std::size_t index(std::int32_t y, std::int32_t x, std::int32_t c) const {
        return (std::size_t(y) * width + x) * 3 + c;
    }
    float at(std::int32_t y, std::int32_t x, std::int32_t c) const {
        return pixels[index(y, x, c)];
    }
    float& at(std::int32_t y, std::int32_t x, std::int32_t c) {
        return pixels[index(y, x, c)];
    }

    void validate() const {
        require(height > 0 && width > 0, "image/empty", "image has zero extent");
        require(pixels.size() == std::size_t(height) * width * 3, "image/shape",
                "pixel array does not match height*width*3");
    }
};

// Diagonal Gaussian over a latent space.
struct Posterior {
    std::vector<double> mean;
    std::vector<double> log_variance;

    std::size_t dim() const { return mean.size(); }

    void validate() const {
        require(mean.size() == log_variance.size(), "posterior/shape",
                "mean and log-variance sizes differ");
        require(!mean.empty(), "posterior/empty", "posterior has zero dimensions");
    }
};

enum class LatentSpace { Mesh, Image };

inline const char* to_string(LatentSpace s) {
    return s == LatentSpace::Mesh ? "mesh" : "image";
}

// Full-scale latent widths; reduced presets use narrower codes.
inline std::size_t canonical_dim(LatentSpace s) {
    return s == LatentSpace::Mesh ? 128 : 256;
}

// Vector in a tagged latent space. Arithmetic between vectors from different
// spaces or of different widths is refused.
struct LatentVec {
    LatentSpace space = LatentSpace::Image;
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }

    static LatentVec zeros(LatentSpace s, std::size_t d) {
        return LatentVec{s, std::vector<double>(d, 0.0)};
    }
};

inline void require_compatible(const LatentVec& a, const LatentVec& b, const char* op) {
    require(a.space == b.space, "latent/space-mismatch",
            std::string(op) + ": operands live in different latent spaces");
    require(a.dim() == b.dim(), "latent/dim-mismatch",
            std::string(op) + ": operand widths differ (" + std::to_string(a.dim()) +
                " vs " + std::to_string(b.dim()) + ")");
}

// Contact wrench components in newtons, gel frame: z normal, x/y tangential.
struct ForceVec {
    double fx = 0.0;
    double fy = 0.0;
    double fz = 0.0;

    double norm() const { return std::sqrt(fx * fx + fy * fy + fz * fz); }
};

// One recorded frame. Mesh/image payloads are optional: split logic and
// bookkeeping only touch the identifiers.
struct TrajectorySample {
    std::string trajectory_id;
    std::string sensor_id;
    std::string indenter_id;
    std::int32_t frame = 0;
    ForceVec force;
    std::shared_ptr<const TriMesh> mesh;
    std::shared_ptr<const TactileImage> image;
    bool training_eligible = true;
};

// Trajectory-level partition. A trajectory id lives in at most one part.
struct DatasetSplit {
    std::set<std::string> train;
    std::set<std::string> val;
    std::set<std::string> test_a;  // unseen interactions, seen hardware
    std::set<std::string> test_b;  // held-out sensor/indenter hardware

    bool contains(const std::string& traj) const {
        return train.count(traj) || val.count(traj) || test_a.count(traj) ||
               test_b.count(traj);
    }

    void validate() const {
        auto disjoint = [](const std::set<std::string>& a, const std::set<std::string>& b) {
            for (const auto& x : a)
                if (b.count(x)) return false;
            return true;
        };
        require(disjoint(train, val) && disjoint(train, test_a) && disjoint(train, test_b) &&
                    disjoint(val, test_a) && disjoint(val, test_b) && disjoint(test_a, test_b),
                "split/overlap", "split parts overlap");
    }
};

// Per-sensor optics: the resting (no contact) appearance, its cached latent,
// and, for synthetic sensors, the generating style as an opaque JSON blob so
// core stays independent of the renderer.
struct SensorProfile {
    std::string sensor_id;
    TactileImage background;
    std::optional<LatentVec> z_base;
    std::string style_json;
};

}  // namespace tactsim
