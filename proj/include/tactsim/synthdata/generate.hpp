#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "tactsim/core/dataset.hpp"
#include "tactsim/core/rng.hpp"
#include "tactsim/core/split.hpp"
#include "tactsim/gelphys/indenter.hpp"
#include "tactsim/gelphys/sim.hpp"
#include "tactsim/synthdata/render.hpp"
#include "tactsim/synthdata/style.hpp"

namespace tactsim {

struct GenerateConfig {
    std::int32_t grid_rows = 24;
    std::int32_t grid_cols = 32;
    double extent_x_mm = 16.0;
    double extent_y_mm = 12.0;
    std::int32_t image_height = 24;
    std::int32_t image_width = 32;
    GelParams gel;
    GelSimSettings sim;
    double depth_step_mm = 0.1;  // indenter advance between frames
    double margin_mm = 4.0;      // keeps indenter centres away from the rim
    double tilt_max = 0.06;      // radians
    double slide_max = 0.25;     // mm
    std::int32_t holdout_sensors = 1;    // trailing sensors reserved for test_b
    std::int32_t holdout_indenters = 1;  // trailing indenters reserved for test_b
    SplitFractions fractions;
    std::string name = "synthetic";

    void validate() const {
        require(grid_rows >= 2 && grid_cols >= 2, "generate/config", "grid too small");
        require(image_height >= 2 && image_width >= 2, "generate/config",
                "image too small");
        require(extent_x_mm > 0 && extent_y_mm > 0, "generate/config",
                "gel extents must be positive");
        require(depth_step_mm > 0, "generate/config", "depth step must be positive");
        require(margin_mm >= 0 && 2.0 * margin_mm < extent_x_mm &&
                    2.0 * margin_mm < extent_y_mm,
                "generate/config", "margin leaves no room for indenter centres");
        require(tilt_max >= 0 && tilt_max < 1.0, "generate/config", "bad tilt range");
        require(slide_max >= 0, "generate/config", "bad slide range");
        require(holdout_sensors >= 0 && holdout_indenters >= 0, "generate/config",
                "holdout counts must be non-negative");
        gel.validate();
        fractions.validate();
    }
};

namespace detail {

inline std::string two_digit(const char* prefix, std::int32_t n) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%s%02d", prefix, int(n));
    return buf;
}

}  // namespace detail

// Procedural multi-sensor dataset: every (sensor, indenter) pair gets
// `trajectories_per_pair` depth ramps at random placements; each ramp starts
// at zero depth (so frame 0 doubles as the sensor background) and advances
// by depth_step_mm per frame. The trailing holdout sensors/indenters are
// routed to test_b by the stored split.
inline DatasetMeta generate_dataset(std::int32_t n_sensors, std::int32_t n_indenters,
                                    std::int32_t trajectories_per_pair,
                                    std::int32_t frames_per_trajectory,
                                    std::uint64_t seed,
                                    const std::filesystem::path& out_dir,
                                    const GenerateConfig& cfg = {}) {
    cfg.validate();
    require(n_sensors >= 1 && n_indenters >= 1 && trajectories_per_pair >= 1 &&
                frames_per_trajectory >= 1,
            "generate/counts", "all generation counts must be at least 1");
    const auto catalog = indenter_catalog();
    require(std::size_t(n_indenters) <= catalog.size(), "generate/counts",
            "only " + std::to_string(catalog.size()) + " indenter shapes available");

    const GelGrid grid =
        make_gel_grid(cfg.grid_rows, cfg.grid_cols, cfg.extent_x_mm, cfg.extent_y_mm,
                      "gel" + std::to_string(cfg.grid_rows) + "x" +
                          std::to_string(cfg.grid_cols));
    DatasetWriter writer(out_dir);
    writer.write_topology(*grid.topology);

    DatasetMeta meta;
    meta.name = cfg.name;
    meta.seed = seed;
    meta.image_height = cfg.image_height;
    meta.image_width = cfg.image_width;

    std::vector<OpticalStyle> styles;
    for (std::int32_t s = 0; s < n_sensors; ++s) {
        styles.push_back(make_style(mix_seed(seed, 0x0b71c, std::uint64_t(s))));
        SensorMeta sm;
        sm.id = detail::two_digit("s", s);
        sm.background_trajectory = sm.id + "-i00-t000";
        sm.background_frame = 0;
        sm.style = styles.back().to_json();
        meta.sensors.push_back(std::move(sm));
    }
    for (std::int32_t k = 0; k < n_indenters; ++k) meta.indenters.push_back(catalog[std::size_t(k)]);

    const double mx = 0.5 * cfg.extent_x_mm - cfg.margin_mm;
    const double my = 0.5 * cfg.extent_y_mm - cfg.margin_mm;
    std::vector<TrajectorySample> samples;
    std::uint64_t traj_index = 0;
    for (std::int32_t s = 0; s < n_sensors; ++s)
        for (std::int32_t k = 0; k < n_indenters; ++k)
            for (std::int32_t t = 0; t < trajectories_per_pair; ++t, ++traj_index) {
                TrajectoryMeta tm;
                char suffix[16];
                std::snprintf(suffix, sizeof(suffix), "-t%03d", int(t));
                tm.id = detail::two_digit("s", s) + detail::two_digit("-i", k) + suffix;
                tm.sensor_id = meta.sensors[std::size_t(s)].id;
                tm.indenter_id = catalog[std::size_t(k)];
                tm.frames = frames_per_trajectory;
                tm.topology_id = grid.topology->id;

                Rng rng(mix_seed(seed, 0x7a0c7, traj_index));
                IndenterPose pose;
                pose.shape = tm.indenter_id;
                pose.x = rng.uniform(-mx, mx);
                pose.y = rng.uniform(-my, my);
                pose.tilt_x = rng.uniform(-cfg.tilt_max, cfg.tilt_max);
                pose.tilt_y = rng.uniform(-cfg.tilt_max, cfg.tilt_max);
                pose.slide_x = rng.uniform(-cfg.slide_max, cfg.slide_max);
                pose.slide_y = rng.uniform(-cfg.slide_max, cfg.slide_max);

                for (std::int32_t f = 0; f < frames_per_trajectory; ++f) {
                    pose.depth = cfg.depth_step_mm * double(f);
                    GelContact contact = toy_gel_simulate(pose, cfg.gel, grid, cfg.sim);
                    TactileImage im =
                        render_pseudo_image(contact.mesh, grid, styles[std::size_t(s)],
                                            cfg.image_height, cfg.image_width);
                    im.sensor_id = tm.sensor_id;
                    writer.write_frame(tm.id, f, contact.mesh, im, contact.force);

                    TrajectorySample sample;
                    sample.trajectory_id = tm.id;
                    sample.sensor_id = tm.sensor_id;
                    sample.indenter_id = tm.indenter_id;
                    sample.frame = f;
                    sample.force = contact.force;
                    sample.training_eligible = meta.training_eligible(contact.force);
                    samples.push_back(std::move(sample));
                }
                meta.trajectories.push_back(std::move(tm));
            }

    std::set<std::string> held_sensors, held_indenters;
    const std::int32_t hs = std::min(cfg.holdout_sensors, n_sensors - 1);
    const std::int32_t hi = std::min(cfg.holdout_indenters, n_indenters - 1);
    for (std::int32_t s = n_sensors - hs; s < n_sensors; ++s)
        held_sensors.insert(meta.sensors[std::size_t(s)].id);
    for (std::int32_t k = n_indenters - hi; k < n_indenters; ++k)
        held_indenters.insert(catalog[std::size_t(k)]);
    meta.split = split_dataset(samples, cfg.fractions, held_sensors, held_indenters,
                               mix_seed(seed, 0x5b117));

    writer.finalize(meta);
    return meta;
}

}  // namespace tactsim
