#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tactsim/core/rng.hpp"
#include "tactsim/core/types.hpp"
#include "tactsim/nn/mlp.hpp"
#include "tactsim/nn/train.hpp"

namespace tactsim {

// SPLIT trains against background-subtracted image codes; NOSPLIT against the
// raw ones. The network shape is identical, only the data semantics differ.
enum class PipelineMode { Split, NoSplit };

inline const char* to_string(PipelineMode m) {
    return m == PipelineMode::Split ? "split" : "nosplit";
}

inline PipelineMode parse_pipeline_mode(const std::string& s) {
    if (s == "split") return PipelineMode::Split;
    if (s == "nosplit") return PipelineMode::NoSplit;
    throw Error("mode/unknown", "unknown pipeline mode: " + s);
}

enum class ProjectionDirection { MeshToImage, ImageToMesh };

inline const char* to_string(ProjectionDirection d) {
    return d == ProjectionDirection::MeshToImage ? "m2i" : "i2m";
}

inline ProjectionDirection parse_projection_direction(const std::string& s) {
    if (s == "m2i") return ProjectionDirection::MeshToImage;
    if (s == "i2m") return ProjectionDirection::ImageToMesh;
    throw Error("direction/unknown", "unknown projection direction: " + s);
}

struct ProjectionParams {
    std::vector<std::int64_t> hidden{512, 1024, 1024};
    std::vector<double> dropout{0.2, 0.4, 0.0};  // after the first two layers only
    std::int64_t batch_size = 512;
    double weight_decay = 0.0;

    void validate() const {
        require(!hidden.empty(), "projection/config", "projection needs at least one hidden layer");
        require(dropout.empty() || dropout.size() == hidden.size(), "projection/config",
                "dropout list does not match hidden layer count");
        for (auto h : hidden)
            require(h > 0, "projection/config", "hidden widths must be positive");
        for (auto p : dropout)
            require(p >= 0.0 && p < 1.0, "projection/config", "dropout rates must be in [0,1)");
        require(batch_size > 0, "projection/config", "batch size must be positive");
    }
};

// Cross-modal latent map. One instance covers one direction in one mode; the
// mode tag travels with the weights so downstream code knows whether the image
// side is a raw code or a background-subtracted one.
class Projection {
public:
    Projection(ProjectionDirection dir, PipelineMode mode, std::int64_t mesh_dim,
               std::int64_t image_dim, const ProjectionParams& params, std::uint64_t seed)
        : dir_(dir), mode_(mode), mesh_dim_(mesh_dim), image_dim_(image_dim) {
        params.validate();
        require(mesh_dim > 0 && image_dim > 0, "projection/config",
                "latent widths must be positive");
        Rng rng(mix_seed(seed, 0x9a0c));
        const std::int64_t in = dir == ProjectionDirection::MeshToImage ? mesh_dim : image_dim;
        const std::int64_t out = dir == ProjectionDirection::MeshToImage ? image_dim : mesh_dim;
        mlp_ = Mlp(store, "proj", in, params.hidden, out, params.dropout, rng);
    }

    ProjectionDirection direction() const { return dir_; }
    PipelineMode mode() const { return mode_; }
    std::int64_t mesh_dim() const { return mesh_dim_; }
    std::int64_t image_dim() const { return image_dim_; }
    std::int64_t in_dim() const { return mlp_.in_dim(); }
    std::int64_t out_dim() const { return mlp_.out_dim(); }

    Tensor forward(const Tensor& x, bool train, Rng& rng) { return mlp_.forward(x, train, rng); }
    Tensor backward(const Tensor& dy) { return mlp_.backward(dy); }
    void freeze_dropout(bool on) { mlp_.freeze_dropout(on); }

    // Inference: dropout off, no randomness consumed — a pure function of the
    // weights and the input.
    LatentVec project(const LatentVec& z) {
        const LatentSpace in_space =
            dir_ == ProjectionDirection::MeshToImage ? LatentSpace::Mesh : LatentSpace::Image;
        require(z.space == in_space, "latent/space-mismatch",
                std::string("projection expects a ") + to_string(in_space) + "-space input");
        require(std::int64_t(z.dim()) == in_dim(), "latent/dim-mismatch",
                "latent width does not match the projection input");
        Tensor x({in_dim()});
        std::copy(z.values.begin(), z.values.end(), x.v.begin());
        Rng unused(0);
        Tensor y = mlp_.forward(x, false, unused);
        LatentVec outv;
        outv.space = dir_ == ProjectionDirection::MeshToImage ? LatentSpace::Image
                                                              : LatentSpace::Mesh;
        outv.values.assign(y.v.begin(), y.v.end());
        return outv;
    }

    ParamStore store;

private:
    Mlp mlp_;
    ProjectionDirection dir_ = ProjectionDirection::MeshToImage;
    PipelineMode mode_ = PipelineMode::Split;
    std::int64_t mesh_dim_ = 0, image_dim_ = 0;
};

inline LatentVec project_mesh_to_image(Projection& proj, const LatentVec& z_mesh) {
    require(proj.direction() == ProjectionDirection::MeshToImage, "projection/direction",
            "this projection maps images to meshes");
    return proj.project(z_mesh);
}

inline LatentVec project_image_to_mesh(Projection& proj, const LatentVec& z) {
    require(proj.direction() == ProjectionDirection::ImageToMesh, "projection/direction",
            "this projection maps meshes to images");
    return proj.project(z);
}

// One training example: matched codes for the same frame. Codes are posterior
// means; backgrounds are looked up per sensor at training time.
struct LatentPair {
    LatentVec z_mesh;
    LatentVec z_image;
    std::string sensor_id;
};

namespace detail {

// Input/target vectors for the projection under its mode. SPLIT replaces the
// image code by (code - background of the pair's sensor).
inline void projection_rows(const Projection& proj,
                            const std::vector<LatentPair>& pairs,
                            const std::map<std::string, LatentVec>& backgrounds,
                            std::vector<Tensor>& xs, std::vector<Tensor>& ys) {
    xs.clear();
    ys.clear();
    xs.reserve(pairs.size());
    ys.reserve(pairs.size());
    for (const LatentPair& p : pairs) {
        require(p.z_mesh.space == LatentSpace::Mesh &&
                    std::int64_t(p.z_mesh.dim()) == proj.mesh_dim(),
                "projection/pair", "mesh code has the wrong space or width");
        require(p.z_image.space == LatentSpace::Image &&
                    std::int64_t(p.z_image.dim()) == proj.image_dim(),
                "projection/pair", "image code has the wrong space or width");
        std::vector<double> image_side = p.z_image.values;
        if (proj.mode() == PipelineMode::Split) {
            auto it = backgrounds.find(p.sensor_id);
            require(it != backgrounds.end(), "projection/missing-background",
                    "no background code for sensor " + p.sensor_id);
            require(it->second.space == LatentSpace::Image &&
                        std::int64_t(it->second.dim()) == proj.image_dim(),
                    "projection/pair", "background code has the wrong space or width");
            for (std::size_t i = 0; i < image_side.size(); ++i)
                image_side[i] -= it->second.values[i];
        }
        const bool m2i = proj.direction() == ProjectionDirection::MeshToImage;
        const std::vector<double>& in_row = m2i ? p.z_mesh.values : image_side;
        const std::vector<double>& out_row = m2i ? image_side : p.z_mesh.values;
        Tensor x({proj.in_dim()}), y({proj.out_dim()});
        std::copy(in_row.begin(), in_row.end(), x.v.begin());
        std::copy(out_row.begin(), out_row.end(), y.v.begin());
        xs.push_back(std::move(x));
        ys.push_back(std::move(y));
    }
}

}  // namespace detail

// MSE regression between frozen-encoder codes. The VAEs never see gradients
// from here; only the projection weights move.
inline TrainResult train_projection(Projection& proj,
                                    const std::vector<LatentPair>& train_pairs,
                                    const std::vector<LatentPair>& val_pairs,
                                    const std::map<std::string, LatentVec>& backgrounds,
                                    const ProjectionParams& params,
                                    TrainSettings settings, std::uint64_t seed) {
    require(!train_pairs.empty(), "projection/empty", "no training pairs");
    require(!val_pairs.empty(), "projection/empty", "no validation pairs");
    settings.batch_size = params.batch_size;
    settings.weight_decay = params.weight_decay;

    std::vector<Tensor> xt, yt, xv, yv;
    detail::projection_rows(proj, train_pairs, backgrounds, xt, yt);
    detail::projection_rows(proj, val_pairs, backgrounds, xv, yv);

    auto batch_fn = [&](const std::vector<std::size_t>& batch, std::int64_t, Rng& rng) {
        double loss_sum = 0.0;
        const double scale = 1.0 / double(batch.size());
        for (std::size_t idx : batch) {
            Tensor pred = proj.forward(xt[idx], true, rng);
            loss_sum += mse(pred, yt[idx]);
            Tensor dy = pred;
            const double g = scale * 2.0 / double(pred.numel());
            for (std::size_t i = 0; i < dy.v.size(); ++i)
                dy.v[i] = g * (pred.v[i] - yt[idx].v[i]);
            proj.backward(dy);
        }
        return loss_sum / double(batch.size());
    };
    auto val_fn = [&](std::int64_t) {
        Rng unused(0);
        double sum = 0.0;
        for (std::size_t i = 0; i < xv.size(); ++i)
            sum += mse(proj.forward(xv[i], false, unused), yv[i]);
        return sum / double(xv.size());
    };
    return run_training(proj.store, settings, train_pairs.size(), batch_fn, val_fn, seed);
}

}  // namespace tactsim
