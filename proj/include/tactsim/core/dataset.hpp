#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tactsim/core/error.hpp"
#include "tactsim/core/io.hpp"
#include "tactsim/core/types.hpp"

namespace tactsim {

// On-disk layout, all paths relative to the dataset root:
//   meta.json                      index: sensors, trajectories, split
//   topologies/<topology_id>.faces shared face connectivity
//   meshes/<trajectory>/<fff>.vtx  per-frame vertex positions
//   images/<trajectory>/<fff>.png  per-frame tactile images
//   forces.csv                     per-frame contact forces

struct SensorMeta {
    std::string id;
    std::string background_trajectory;
    std::int32_t background_frame = 0;
    json style;  // renderer parameters for synthetic sensors, else null
};

struct TrajectoryMeta {
    std::string id;
    std::string sensor_id;
    std::string indenter_id;
    std::int32_t frames = 0;
    std::string topology_id;
};

struct DatasetMeta {
    std::int32_t format_version = 1;
    std::string name;
    std::uint64_t seed = 0;
    std::int32_t image_height = 0;
    std::int32_t image_width = 0;
    double force_min_z = 1.0;   // training eligibility window on fz, newtons
    double force_max_z = 13.0;
    double force_max_xy = 3.0;  // |fx|, |fy| bound for training samples
    std::vector<SensorMeta> sensors;
    std::vector<std::string> indenters;
    std::vector<TrajectoryMeta> trajectories;
    std::optional<DatasetSplit> split;

    bool training_eligible(const ForceVec& f) const {
        return f.fz >= force_min_z && f.fz <= force_max_z &&
               std::abs(f.fx) <= force_max_xy && std::abs(f.fy) <= force_max_xy;
    }

    json to_json() const {
        json j;
        j["format_version"] = format_version;
        j["name"] = name;
        j["seed"] = seed;
        j["image_height"] = image_height;
        j["image_width"] = image_width;
        j["force_min_z"] = force_min_z;
        j["force_max_z"] = force_max_z;
        j["force_max_xy"] = force_max_xy;
        j["sensors"] = json::array();
        for (const auto& s : sensors) {
            json js;
            js["id"] = s.id;
            js["background_trajectory"] = s.background_trajectory;
            js["background_frame"] = s.background_frame;
            js["style"] = s.style;
            j["sensors"].push_back(js);
        }
        j["indenters"] = indenters;
        j["trajectories"] = json::array();
        for (const auto& t : trajectories) {
            json jt;
            jt["id"] = t.id;
            jt["sensor_id"] = t.sensor_id;
            jt["indenter_id"] = t.indenter_id;
            jt["frames"] = t.frames;
            jt["topology_id"] = t.topology_id;
            j["trajectories"].push_back(jt);
        }
        if (split) {
            json js;
            js["train"] = std::vector<std::string>(split->train.begin(), split->train.end());
            js["val"] = std::vector<std::string>(split->val.begin(), split->val.end());
            js["test_a"] = std::vector<std::string>(split->test_a.begin(), split->test_a.end());
            js["test_b"] = std::vector<std::string>(split->test_b.begin(), split->test_b.end());
            j["split"] = js;
        }
        return j;
    }

    static DatasetMeta from_json(const json& j, const std::string& origin) {
        require(j.is_object(), "dataset/bad-meta", "meta.json is not an object in " + origin);
        require(j.value("format_version", 0) == 1, "dataset/bad-meta",
                "unsupported dataset format_version in " + origin);
        DatasetMeta m;
        m.name = j.value("name", std::string());
        m.seed = j.value("seed", std::uint64_t(0));
        m.image_height = j.value("image_height", 0);
        m.image_width = j.value("image_width", 0);
        m.force_min_z = j.value("force_min_z", 1.0);
        m.force_max_z = j.value("force_max_z", 13.0);
        m.force_max_xy = j.value("force_max_xy", 3.0);
        for (const auto& js : j.value("sensors", json::array())) {
            SensorMeta s;
            s.id = js.value("id", std::string());
            s.background_trajectory = js.value("background_trajectory", std::string());
            s.background_frame = js.value("background_frame", 0);
            s.style = js.value("style", json());
            m.sensors.push_back(std::move(s));
        }
        m.indenters = j.value("indenters", std::vector<std::string>());
        for (const auto& jt : j.value("trajectories", json::array())) {
            TrajectoryMeta t;
            t.id = jt.value("id", std::string());
            t.sensor_id = jt.value("sensor_id", std::string());
            t.indenter_id = jt.value("indenter_id", std::string());
            t.frames = jt.value("frames", 0);
            t.topology_id = jt.value("topology_id", std::string());
            m.trajectories.push_back(std::move(t));
        }
        if (j.contains("split")) {
            DatasetSplit s;
            const auto& js = j["split"];
            auto read = [&](const char* key, std::set<std::string>& dst) {
                for (const auto& id : js.value(key, std::vector<std::string>())) dst.insert(id);
            };
            read("train", s.train);
            read("val", s.val);
            read("test_a", s.test_a);
            read("test_b", s.test_b);
            m.split = std::move(s);
        }
        return m;
    }
};

inline std::string frame_name(std::int32_t frame) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d", int(frame));
    return buf;
}

// Read access to a dataset directory. Meshes and images are loaded on
// demand; the force table and topologies are held in memory.
class Dataset {
public:
    static Dataset open(const std::filesystem::path& root) {
        Dataset d;
        d.root_ = root;
        d.meta_ = DatasetMeta::from_json(
            json::parse(read_text_file(root / "meta.json"), nullptr, true),
            (root / "meta.json").string());
        for (const auto& t : d.meta_.trajectories) d.traj_index_[t.id] = &t;

        std::set<std::string> topo_ids;
        for (const auto& t : d.meta_.trajectories) topo_ids.insert(t.topology_id);
        for (const auto& id : topo_ids)
            d.topologies_[id] = load_faces(root / "topologies" / (id + ".faces"));

        for (auto& r : forces_from_csv(read_text_file(root / "forces.csv"),
                                       (root / "forces.csv").string()))
            d.forces_[{r.trajectory_id, r.frame}] = r.force;
        return d;
    }

    const std::filesystem::path& root() const { return root_; }
    const DatasetMeta& meta() const { return meta_; }

    const TrajectoryMeta& trajectory(const std::string& id) const {
        auto it = traj_index_.find(id);
        require(it != traj_index_.end(), "dataset/unknown-trajectory",
                "unknown trajectory '" + id + "'");
        return *it->second;
    }

    std::shared_ptr<const Topology> topology(const std::string& id) const {
        auto it = topologies_.find(id);
        require(it != topologies_.end(), "dataset/unknown-topology",
                "unknown topology '" + id + "'");
        return it->second;
    }

    TriMesh mesh(const std::string& traj, std::int32_t frame) const {
        TriMesh m = load_mesh(root_ / "meshes" / traj / (frame_name(frame) + ".vtx"));
        auto topo = topology(m.topology_id());
        require(topo->vertex_count == m.vertex_count(), "mesh/vertex-count",
                "mesh/topology vertex count mismatch for " + traj);
        m.topology = topo;
        return m;
    }

    TactileImage image(const std::string& traj, std::int32_t frame) const {
        TactileImage im = load_image(root_ / "images" / traj / (frame_name(frame) + ".png"));
        im.sensor_id = trajectory(traj).sensor_id;
        return im;
    }

    ForceVec force(const std::string& traj, std::int32_t frame) const {
        auto it = forces_.find({traj, frame});
        require(it != forces_.end(), "dataset/missing-force",
                "no force record for " + traj + " frame " + std::to_string(frame));
        return it->second;
    }

    bool training_eligible(const ForceVec& f) const { return meta_.training_eligible(f); }

    // Identifier-level view of every frame (no payloads loaded).
    std::vector<TrajectorySample> all_samples() const {
        std::vector<TrajectorySample> out;
        for (const auto& t : meta_.trajectories) {
            for (std::int32_t f = 0; f < t.frames; ++f) {
                TrajectorySample s;
                s.trajectory_id = t.id;
                s.sensor_id = t.sensor_id;
                s.indenter_id = t.indenter_id;
                s.frame = f;
                s.force = force(t.id, f);
                s.training_eligible = training_eligible(s.force);
                out.push_back(std::move(s));
            }
        }
        return out;
    }

    // Frames of one split part; eligible_only filters by the fz window.
    std::vector<TrajectorySample> part_samples(const std::set<std::string>& part,
                                               bool eligible_only) const {
        std::vector<TrajectorySample> out;
        for (const auto& t : meta_.trajectories) {
            if (!part.count(t.id)) continue;
            for (std::int32_t f = 0; f < t.frames; ++f) {
                TrajectorySample s;
                s.trajectory_id = t.id;
                s.sensor_id = t.sensor_id;
                s.indenter_id = t.indenter_id;
                s.frame = f;
                s.force = force(t.id, f);
                s.training_eligible = training_eligible(s.force);
                if (eligible_only && !s.training_eligible) continue;
                out.push_back(std::move(s));
            }
        }
        return out;
    }

    const SensorMeta& sensor(const std::string& id) const {
        for (const auto& s : meta_.sensors)
            if (s.id == id) return s;
        raise("dataset/unknown-sensor", "unknown sensor '" + id + "'");
    }

    // The designated resting frame for a sensor.
    TactileImage background_image(const std::string& sensor_id) const {
        const auto& s = sensor(sensor_id);
        require(!s.background_trajectory.empty(), "dataset/no-background",
                "sensor '" + sensor_id + "' has no designated background frame");
        TactileImage im = image(s.background_trajectory, s.background_frame);
        im.sensor_id = sensor_id;
        return im;
    }

    const DatasetSplit& split() const {
        require(meta_.split.has_value(), "dataset/no-split", "dataset has no stored split");
        return *meta_.split;
    }

private:
    std::filesystem::path root_;
    DatasetMeta meta_;
    std::map<std::string, const TrajectoryMeta*> traj_index_;
    std::map<std::string, std::shared_ptr<Topology>> topologies_;
    std::map<std::pair<std::string, std::int32_t>, ForceVec> forces_;
};

// Incremental writer used by the generator.
class DatasetWriter {
public:
    explicit DatasetWriter(std::filesystem::path root) : root_(std::move(root)) {
        std::filesystem::create_directories(root_);
    }

    const std::filesystem::path& root() const { return root_; }

    void write_topology(const Topology& topo) {
        save_faces(root_ / "topologies" / (topo.id + ".faces"), topo);
    }

    void write_frame(const std::string& traj, std::int32_t frame, const TriMesh& mesh,
                     const TactileImage& image, const ForceVec& force) {
        save_mesh(root_ / "meshes" / traj / (frame_name(frame) + ".vtx"), mesh);
        save_image(root_ / "images" / traj / (frame_name(frame) + ".png"), image);
        records_.push_back({traj, frame, force});
    }

    void finalize(const DatasetMeta& meta) {
        write_file(root_ / "forces.csv", forces_to_csv(records_));
        write_file(root_ / "meta.json", meta.to_json().dump(2) + "\n");
    }

private:
    std::filesystem::path root_;
    std::vector<ForceRecord> records_;
};

}  // namespace tactsim
