#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tactsim/core/convert.hpp"
#include "tactsim/core/dataset.hpp"
#include "tactsim/latentspace/arithmetic.hpp"
#include "tactsim/latentspace/projection.hpp"
#include "tactsim/metrics/image.hpp"
#include "tactsim/metrics/mesh.hpp"
#include "tactsim/pipeline/checkpoint.hpp"

namespace tactsim {

inline std::filesystem::path checkpoint_file(const std::filesystem::path& dir,
                                             const std::string& stem) {
    return dir / (stem + ".ckpt");
}

inline std::string projection_stem(ProjectionDirection dir, PipelineMode mode) {
    return std::string(to_string(dir)) + "_" + to_string(mode);
}

// The trained components one inference pipeline needs: both VAEs plus the two
// cross-modal projections of a single mode. Models carry interior pointers,
// so the bundle owns them on the heap and never moves them.
struct PipelineModels {
    std::unique_ptr<MeshVae> mesh_vae;
    std::unique_ptr<ImageVae> image_vae;
    std::unique_ptr<Projection> m2i;
    std::unique_ptr<Projection> i2m;

    PipelineMode mode() const {
        require(m2i != nullptr && i2m != nullptr, "pipeline/missing-checkpoint",
                "pipeline bundle has no projections");
        require(m2i->mode() == i2m->mode(), "pipeline/mode-mismatch",
                "the two projections disagree about the pipeline mode");
        return m2i->mode();
    }
};

inline PipelineModels load_pipeline(const std::filesystem::path& dir, PipelineMode mode) {
    auto need = [&](const std::string& stem) {
        const auto path = checkpoint_file(dir, stem);
        require(std::filesystem::exists(path), "pipeline/missing-checkpoint",
                "missing checkpoint: " + path.string());
        return load_checkpoint(path);
    };
    PipelineModels m;
    m.mesh_vae = load_mesh_vae(need("mesh_vae"));
    m.image_vae = load_image_vae(need("image_vae"));
    m.m2i = load_projection(need(projection_stem(ProjectionDirection::MeshToImage, mode)));
    m.i2m = load_projection(need(projection_stem(ProjectionDirection::ImageToMesh, mode)));
    require(m.m2i->mode() == mode && m.i2m->mode() == mode, "pipeline/mode-mismatch",
            "stored projection mode does not match the requested one");
    return m;
}

inline SensorProfile sensor_profile(const Dataset& ds, const std::string& sensor_id) {
    SensorProfile p;
    p.sensor_id = sensor_id;
    p.background = ds.background_image(sensor_id);
    p.style_json = ds.sensor(sensor_id).style.dump();
    return p;
}

// Background posterior means for every sensor of the dataset, keyed by id.
inline std::map<std::string, LatentVec> sensor_backgrounds(const Dataset& ds,
                                                           ImageVae& image_vae) {
    std::map<std::string, LatentVec> out;
    for (const auto& s : ds.meta().sensors) {
        SensorProfile p = sensor_profile(ds, s.id);
        out[s.id] = background_vector(p, image_vae);
    }
    return out;
}

// mesh -> mesh code -> image side. SPLIT projections predict deformation
// codes and need the target's background code added before decoding;
// NOSPLIT projections predict raw image codes and ignore the profile.
inline TactileImage simulate_image(PipelineModels& m, const TriMesh& mesh,
                                   SensorProfile& target) {
    LatentVec z_mesh = posterior_mean(encode_mesh(*m.mesh_vae, mesh), LatentSpace::Mesh);
    LatentVec z = project_mesh_to_image(*m.m2i, z_mesh);
    if (m.m2i->mode() == PipelineMode::Split)
        z = compose(z, background_vector(target, *m.image_vae));
    return decode_image(*m.image_vae, z);
}

// image -> image code -> mesh side. SPLIT subtracts the source background
// code before projecting.
inline TriMesh reconstruct_mesh(PipelineModels& m, const TactileImage& image,
                                SensorProfile& source) {
    LatentVec z = posterior_mean(encode_image(*m.image_vae, image), LatentSpace::Image);
    if (m.i2m->mode() == PipelineMode::Split)
        z = extract_deformation(z, background_vector(source, *m.image_vae));
    LatentVec z_mesh = project_image_to_mesh(*m.i2m, z);
    return decode_mesh(*m.mesh_vae, z_mesh);
}

// Background swap in the image code space; no projections involved.
inline TactileImage style_transfer(ImageVae& image_vae, const TactileImage& image,
                                   SensorProfile& source, SensorProfile& target) {
    LatentVec z = posterior_mean(encode_image(image_vae, image), LatentSpace::Image);
    LatentVec d = extract_deformation(z, background_vector(source, image_vae));
    LatentVec composed = compose(d, background_vector(target, image_vae));
    return decode_image(image_vae, composed);
}

struct CyclicResult {
    std::vector<TriMesh> meshes;
    std::vector<TactileImage> images;
    DriftReport drift;
};

// Alternates reconstruct/simulate starting from a real image, always within
// one sensor profile. Cycle k's step metrics compare against cycle k-1
// (the input image, and for the first mesh the cycle itself: no earlier mesh
// exists, so its step RMSE is zero by definition).
inline CyclicResult cyclic_reconstruction(PipelineModels& m, const TactileImage& start,
                                          SensorProfile& profile, std::int64_t n_cycles) {
    require(n_cycles >= 0, "pipeline/cycles", "cycle count must be non-negative");
    CyclicResult r;
    if (n_cycles == 0) return r;
    r.meshes.reserve(std::size_t(n_cycles));
    r.images.reserve(std::size_t(n_cycles));

    const TactileImage* prev_image = &start;
    for (std::int64_t k = 0; k < n_cycles; ++k) {
        TriMesh mesh = reconstruct_mesh(m, *prev_image, profile);
        TactileImage image = simulate_image(m, mesh, profile);

        r.drift.ssim_abs.push_back(ssim(image, start));
        r.drift.rmse_abs.push_back(mesh_metrics(mesh, r.meshes.empty() ? mesh : r.meshes.front()).rmse);
        r.drift.ssim_step.push_back(ssim(image, *prev_image));
        r.drift.rmse_step.push_back(
            r.meshes.empty() ? 0.0 : mesh_metrics(mesh, r.meshes.back()).rmse);

        r.meshes.push_back(std::move(mesh));
        r.images.push_back(std::move(image));
        prev_image = &r.images.back();
    }
    return r;
}

}  // namespace tactsim
