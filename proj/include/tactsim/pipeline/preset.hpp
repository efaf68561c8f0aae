#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tactsim/core/error.hpp"
#include "tactsim/imagevae/augment.hpp"
#include "tactsim/imagevae/model.hpp"
#include "tactsim/latentspace/projection.hpp"
#include "tactsim/meshvae/model.hpp"
#include "tactsim/nn/train.hpp"
#include "tactsim/synthdata/generate.hpp"

namespace tactsim {

// One named scale for the whole stack: dataset shape, model widths, and the
// training budgets that go with them. `tiny` exists for fast mechanical
// tests, `desk` for single-core experiment runs, `full` mirrors the
// deployment-scale architecture and is config-validated only.
struct Preset {
    std::string name;

    std::int32_t sensors = 2;
    std::int32_t indenters = 2;
    std::int32_t trajectories_per_pair = 2;
    std::int32_t frames_per_trajectory = 4;
    GenerateConfig gen;

    MeshVaeParams mesh_vae;
    ImageVaeParams image_vae;
    ProjectionParams projection;
    AugmentParams augment;

    TrainSettings mesh_train, image_train, projection_train, force_train;
    std::vector<std::uint64_t> force_seeds{1, 2, 3, 4, 5};
    std::int64_t cycle_n = 40;

    void validate() const {
        require(sensors >= 1 && indenters >= 1 && trajectories_per_pair >= 1 &&
                    frames_per_trajectory >= 1,
                "preset/config", "dataset counts must be positive");
        require(gen.image_height == image_vae.height && gen.image_width == image_vae.width,
                "preset/config", "generated image extent must match the image model");
        require(!force_seeds.empty(), "preset/config", "at least one force seed");
        gen.validate();
        image_vae.validate();
        projection.validate();
    }
};

inline Preset make_preset(const std::string& name) {
    Preset p;
    p.name = name;
    if (name == "tiny") {
        p.sensors = 2;
        p.indenters = 2;
        p.trajectories_per_pair = 2;
        p.frames_per_trajectory = 5;
        p.gen.grid_rows = 9;
        p.gen.grid_cols = 12;
        p.gen.image_height = 48;
        p.gen.image_width = 64;
        p.gen.depth_step_mm = 0.2;
        p.mesh_vae.filters = {8, 8};
        p.mesh_vae.cheb_order = 3;
        p.mesh_vae.latent = 16;
        p.image_vae.height = 48;
        p.image_vae.width = 64;
        p.image_vae.blocks = {1, 1, 1};
        p.image_vae.factors = {2, 2, 4};
        p.image_vae.widths = {8, 12, 16};
        p.image_vae.latent = 32;
        p.image_vae.anneal_epochs = 4;
        p.projection.hidden = {64, 64};
        p.projection.dropout = {};
        p.projection.batch_size = 128;
        p.augment.enabled = false;
        p.mesh_train = {12, 6, 16, 1e-3, 0.99, 0.0};
        p.image_train = {10, 5, 16, 1e-3, 0.99, 0.0};
        p.projection_train = {40, 10, 128, 1e-3, 0.99, 0.0};
        p.force_train = {30, 8, 512, 1e-3, 0.99, 0.0};
        p.force_seeds = {1, 2};
        p.cycle_n = 8;
    } else if (name == "desk") {
        p.sensors = 5;
        p.indenters = 3;
        p.trajectories_per_pair = 4;
        p.frames_per_trajectory = 10;
        // gen defaults already describe the desk sensor: 24x32 grid and image
        p.mesh_vae.filters = {8, 8, 16};
        p.mesh_vae.cheb_order = 3;
        p.mesh_vae.latent = 16;
        p.image_vae.height = 24;
        p.image_vae.width = 32;
        p.image_vae.blocks = {1, 1, 1};
        p.image_vae.factors = {2, 2};
        p.image_vae.widths = {8, 12, 16};
        p.image_vae.latent = 24;
        p.image_vae.anneal_epochs = 15;
        p.projection.hidden = {128, 256, 128};
        p.projection.dropout = {};
        p.projection.batch_size = 64;
        p.augment.enabled = false;
        p.mesh_train = {60, 10, 32, 1e-3, 0.99, 0.0};
        p.image_train = {60, 10, 32, 1e-3, 0.99, 0.0};
        p.projection_train = {200, 30, 64, 1e-3, 0.995, 0.0};
        p.force_train = {300, 40, 512, 1e-3, 0.995, 0.0};
        p.force_seeds = {1, 2, 3, 4, 5};
        p.cycle_n = 40;
    } else if (name == "full") {
        p.sensors = 10;
        p.indenters = std::int32_t(indenter_catalog().size());
        p.trajectories_per_pair = 40;
        p.frames_per_trajectory = 60;
        p.gen.grid_rows = 60;
        p.gen.grid_cols = 80;
        p.gen.image_height = 240;
        p.gen.image_width = 320;
        p.mesh_vae = MeshVaeParams{};       // filters {16,16,16,32}, order 6, latent 128
        p.image_vae = ImageVaeParams{};     // 240x320, latent 256
        p.projection = ProjectionParams{};  // hidden {512,1024,1024}
        p.augment.enabled = true;
        p.mesh_train = {300, 20, 128, 1e-3, 0.99, 0.0};
        p.image_train = {300, 20, 128, 1e-3, 0.99, 1e-5};
        p.projection_train = {300, 20, 512, 1e-3, 0.99, 0.0};
        p.force_train = {300, 20, 512, 1e-3, 0.99, 0.0};
        p.force_seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10,
                         11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
        p.cycle_n = 40;
    } else {
        raise("preset/unknown", "unknown preset '" + name + "'");
    }
    p.validate();
    return p;
}

}  // namespace tactsim
