#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tactsim/core/convert.hpp"
#include "tactsim/core/dataset.hpp"
#include "tactsim/metrics/mesh.hpp"
#include "tactsim/nn/mlp.hpp"
#include "tactsim/nn/train.hpp"
#include "tactsim/pipeline/flows.hpp"

namespace tactsim {

// The seven force-estimation input variants. The two raw configs feed a
// frozen VAE encoder trunk into the head; the rest feed fixed latent codes.
enum class ForceConfig {
    RawVertices,
    RawImages,
    MeshLatent,
    ImageLatentNoSplit,
    ImageLatentSplit,
    ProjectedMeshNoSplit,
    ProjectedMeshSplit,
};

inline const std::vector<ForceConfig>& force_configs() {
    static const std::vector<ForceConfig> all = {
        ForceConfig::RawVertices,        ForceConfig::RawImages,
        ForceConfig::MeshLatent,         ForceConfig::ImageLatentNoSplit,
        ForceConfig::ImageLatentSplit,   ForceConfig::ProjectedMeshNoSplit,
        ForceConfig::ProjectedMeshSplit,
    };
    return all;
}

inline const char* to_string(ForceConfig c) {
    switch (c) {
        case ForceConfig::RawVertices: return "raw_vertices";
        case ForceConfig::RawImages: return "raw_images";
        case ForceConfig::MeshLatent: return "mesh_latent";
        case ForceConfig::ImageLatentNoSplit: return "image_latent_nosplit";
        case ForceConfig::ImageLatentSplit: return "image_latent_split";
        case ForceConfig::ProjectedMeshNoSplit: return "projected_mesh_nosplit";
        case ForceConfig::ProjectedMeshSplit: return "projected_mesh_split";
    }
    raise("force/config", "unreachable force config");
}

inline ForceConfig parse_force_config(const std::string& s) {
    for (ForceConfig c : force_configs())
        if (s == to_string(c)) return c;
    raise("force/config", "unknown force config '" + s + "'");
}

// Regression head shared by every config: [128, 512, 512, 128] with ELU and
// dropout 0.2 after the first two layers, three linear outputs. Inputs are
// standardized with training-set statistics fitted by train_force_head.
class ForceHead {
public:
    ForceHead(std::int64_t in, std::uint64_t seed) : in_(in) {
        require(in > 0, "force/config", "feature width must be positive");
        Rng rng(mix_seed(seed, 0xf0ace));
        mlp_ = Mlp(store, "force", in, {128, 512, 512, 128}, 3, {0.2, 0.2, 0.0, 0.0}, rng);
        feat_mean.assign(std::size_t(in), 0.0);
        feat_std.assign(std::size_t(in), 1.0);
    }

    std::int64_t in_dim() const { return in_; }

    Tensor standardize(const Tensor& x) const {
        Tensor s = x;
        for (std::size_t i = 0; i < s.v.size(); ++i)
            s.v[i] = (s.v[i] - feat_mean[i]) / feat_std[i];
        return s;
    }

    Tensor forward(const Tensor& x_std, bool train, Rng& rng) {
        return mlp_.forward(x_std, train, rng);
    }
    Tensor backward(const Tensor& dy) { return mlp_.backward(dy); }

    ForceVec predict(const Tensor& x) {
        Rng unused(0);
        Tensor y = mlp_.forward(standardize(x), false, unused);
        return ForceVec{y.v[0], y.v[1], y.v[2]};
    }

    ParamStore store;
    std::vector<double> feat_mean, feat_std;

private:
    Mlp mlp_;
    std::int64_t in_ = 0;
};

// Feature vectors plus targets for one split part.
struct ForceFeatureSet {
    std::vector<Tensor> x;
    std::vector<ForceVec> y;

    std::int64_t dim() const { return x.empty() ? 0 : x.front().dim(0); }
};

struct ForceData {
    ForceConfig config = ForceConfig::MeshLatent;
    ForceFeatureSet train, val, test;
};

namespace detail {

inline Tensor from_values(const std::vector<double>& v) {
    Tensor t({std::int64_t(v.size())});
    t.v = v;
    return t;
}

}  // namespace detail

// Fixed per-sample inputs for one config. Encoders run frozen: nothing here
// is trainable, so features are computed once and reused across seeds.
inline ForceFeatureSet build_force_features(const Dataset& ds,
                                            const std::vector<TrajectorySample>& samples,
                                            ForceConfig cfg, MeshVae* mesh_vae,
                                            ImageVae* image_vae, Projection* i2m_split,
                                            Projection* i2m_nosplit,
                                            const std::map<std::string, LatentVec>* backgrounds) {
    const bool needs_mesh = cfg == ForceConfig::RawVertices || cfg == ForceConfig::MeshLatent;
    const bool needs_image = !needs_mesh;
    const bool needs_background =
        cfg == ForceConfig::ImageLatentSplit || cfg == ForceConfig::ProjectedMeshSplit;
    require(!needs_mesh || mesh_vae != nullptr, "force/missing-checkpoint",
            "this config needs the mesh model");
    require(!needs_image || image_vae != nullptr, "force/missing-checkpoint",
            "this config needs the image model");
    require(cfg != ForceConfig::ProjectedMeshSplit || i2m_split != nullptr,
            "force/missing-checkpoint", "this config needs the split image-to-mesh projection");
    require(cfg != ForceConfig::ProjectedMeshNoSplit || i2m_nosplit != nullptr,
            "force/missing-checkpoint",
            "this config needs the nosplit image-to-mesh projection");
    require(!needs_background || backgrounds != nullptr, "force/missing-checkpoint",
            "this config needs per-sensor background codes");

    ForceFeatureSet out;
    out.x.reserve(samples.size());
    out.y.reserve(samples.size());
    for (const auto& s : samples) {
        Tensor feat;
        switch (cfg) {
            case ForceConfig::RawVertices: {
                TriMesh mesh = ds.mesh(s.trajectory_id, s.frame);
                Tensor d = mesh_displacement(mesh, mesh_vae->stack().levels.front().vertices);
                feat = mesh_vae->trunk(mesh_vae->normalizer.apply(d));
                break;
            }
            case ForceConfig::RawImages: {
                feat = image_vae->trunk(image_to_tensor(ds.image(s.trajectory_id, s.frame)));
                break;
            }
            case ForceConfig::MeshLatent: {
                TriMesh mesh = ds.mesh(s.trajectory_id, s.frame);
                feat = detail::from_values(encode_mesh(*mesh_vae, mesh).mean);
                break;
            }
            case ForceConfig::ImageLatentNoSplit:
            case ForceConfig::ImageLatentSplit:
            case ForceConfig::ProjectedMeshNoSplit:
            case ForceConfig::ProjectedMeshSplit: {
                Posterior q = encode_image(*image_vae, ds.image(s.trajectory_id, s.frame));
                LatentVec z = posterior_mean(q, LatentSpace::Image);
                if (needs_background) {
                    auto it = backgrounds->find(s.sensor_id);
                    require(it != backgrounds->end(), "force/missing-checkpoint",
                            "no background code for sensor " + s.sensor_id);
                    z = extract_deformation(z, it->second);
                }
                if (cfg == ForceConfig::ProjectedMeshNoSplit)
                    z = project_image_to_mesh(*i2m_nosplit, z);
                else if (cfg == ForceConfig::ProjectedMeshSplit)
                    z = project_image_to_mesh(*i2m_split, z);
                feat = detail::from_values(z.values);
                break;
            }
        }
        out.x.push_back(std::move(feat));
        out.y.push_back(s.force);
    }
    return out;
}

// Train/val/test feature sets under the stored split; training-eligible
// frames only, so every target sits inside the calibrated force windows.
inline ForceData build_force_data(const Dataset& ds, ForceConfig cfg, MeshVae* mesh_vae,
                                  ImageVae* image_vae, Projection* i2m_split,
                                  Projection* i2m_nosplit,
                                  const std::map<std::string, LatentVec>* backgrounds) {
    const DatasetSplit& split = ds.split();
    ForceData data;
    data.config = cfg;
    data.train = build_force_features(ds, ds.part_samples(split.train, true), cfg, mesh_vae,
                                      image_vae, i2m_split, i2m_nosplit, backgrounds);
    data.val = build_force_features(ds, ds.part_samples(split.val, true), cfg, mesh_vae,
                                    image_vae, i2m_split, i2m_nosplit, backgrounds);
    data.test = build_force_features(ds, ds.part_samples(split.test_b, true), cfg, mesh_vae,
                                     image_vae, i2m_split, i2m_nosplit, backgrounds);
    return data;
}

inline TrainResult train_force_head(ForceHead& head, const ForceFeatureSet& train,
                                    const ForceFeatureSet& val, const TrainSettings& settings,
                                    std::uint64_t seed) {
    require(!train.x.empty() && !val.x.empty(), "force/empty", "empty force training data");
    require(train.dim() == head.in_dim() && val.dim() == head.in_dim(), "force/config",
            "feature width does not match the head");

    const std::size_t d = std::size_t(head.in_dim());
    std::vector<double> mean(d, 0.0), sq(d, 0.0);
    for (const auto& x : train.x)
        for (std::size_t i = 0; i < d; ++i) {
            mean[i] += x.v[i];
            sq[i] += x.v[i] * x.v[i];
        }
    for (std::size_t i = 0; i < d; ++i) {
        mean[i] /= double(train.x.size());
        const double var = sq[i] / double(train.x.size()) - mean[i] * mean[i];
        head.feat_mean[i] = mean[i];
        head.feat_std[i] = std::max(std::sqrt(std::max(var, 0.0)), 1e-8);
    }

    std::vector<Tensor> xt, xv;
    xt.reserve(train.x.size());
    for (const auto& x : train.x) xt.push_back(head.standardize(x));
    xv.reserve(val.x.size());
    for (const auto& x : val.x) xv.push_back(head.standardize(x));
    auto target = [](const ForceVec& f) {
        Tensor t({3});
        t.v = {f.fx, f.fy, f.fz};
        return t;
    };

    auto batch_fn = [&](const std::vector<std::size_t>& batch, std::int64_t, Rng& rng) {
        double loss_sum = 0.0;
        const double scale = 1.0 / double(batch.size());
        for (std::size_t idx : batch) {
            Tensor pred = head.forward(xt[idx], true, rng);
            Tensor want = target(train.y[idx]);
            Tensor dy = pred;
            double loss = 0.0;
            for (std::size_t i = 0; i < 3; ++i) {
                const double e = pred.v[i] - want.v[i];
                loss += e * e / 3.0;
                dy.v[i] = scale * 2.0 * e / 3.0;
            }
            loss_sum += loss;
            head.backward(dy);
        }
        return loss_sum / double(batch.size());
    };

    auto val_fn = [&](std::int64_t) {
        Rng unused(0);
        double sum = 0.0;
        for (std::size_t i = 0; i < xv.size(); ++i) {
            Tensor pred = head.forward(xv[i], false, unused);
            Tensor want = target(val.y[i]);
            for (std::size_t k = 0; k < 3; ++k) {
                const double e = pred.v[k] - want.v[k];
                sum += e * e / 3.0;
            }
        }
        return sum / double(xv.size());
    };

    return run_training(head.store, settings, xt.size(), batch_fn, val_fn, seed);
}

inline ForceMae evaluate_force_head(ForceHead& head, const ForceFeatureSet& test) {
    require(!test.x.empty(), "force/empty", "empty force test data");
    std::vector<ForceVec> preds;
    preds.reserve(test.x.size());
    for (const auto& x : test.x) preds.push_back(head.predict(x));
    return force_mae(preds, test.y);
}

struct ForceSeedResult {
    std::uint64_t seed = 0;
    ForceMae test_mae;
    double best_val_loss = 0.0;
};

struct ForceTable {
    ForceConfig config = ForceConfig::MeshLatent;
    std::vector<ForceSeedResult> seeds;

    ForceMae mean() const {
        require(!seeds.empty(), "force/empty", "no seed results");
        ForceMae m{0, 0, 0, 0};
        for (const auto& s : seeds) {
            m.fx += s.test_mae.fx;
            m.fy += s.test_mae.fy;
            m.fz += s.test_mae.fz;
            m.magnitude += s.test_mae.magnitude;
        }
        const double n = double(seeds.size());
        return ForceMae{m.fx / n, m.fy / n, m.fz / n, m.magnitude / n};
    }

    ForceMae stddev() const {
        require(!seeds.empty(), "force/empty", "no seed results");
        const ForceMae mu = mean();
        ForceMae v{0, 0, 0, 0};
        for (const auto& s : seeds) {
            v.fx += (s.test_mae.fx - mu.fx) * (s.test_mae.fx - mu.fx);
            v.fy += (s.test_mae.fy - mu.fy) * (s.test_mae.fy - mu.fy);
            v.fz += (s.test_mae.fz - mu.fz) * (s.test_mae.fz - mu.fz);
            v.magnitude +=
                (s.test_mae.magnitude - mu.magnitude) * (s.test_mae.magnitude - mu.magnitude);
        }
        const double n = double(seeds.size());
        return ForceMae{std::sqrt(v.fx / n), std::sqrt(v.fy / n), std::sqrt(v.fz / n),
                        std::sqrt(v.magnitude / n)};
    }
};

inline Checkpoint force_head_checkpoint(const ForceHead& head, ForceConfig cfg,
                                        json extra = json::object()) {
    Checkpoint c;
    c.kind = "force-head";
    c.manifest["config"] = to_string(cfg);
    c.manifest["in_dim"] = head.in_dim();
    for (auto it = extra.begin(); it != extra.end(); ++it) c.manifest[it.key()] = it.value();
    c.f64["weights"] = head.store.values;
    c.f64["feat.mean"] = head.feat_mean;
    c.f64["feat.std"] = head.feat_std;
    return c;
}

inline std::unique_ptr<ForceHead> load_force_head(const Checkpoint& c) {
    c.expect_kind("force-head");
    const auto in = c.manifest.at("in_dim").get<std::int64_t>();
    auto head = std::make_unique<ForceHead>(in, 0);
    detail::copy_weights(head->store, c.array("weights"), "force head");
    const auto& mean = c.array("feat.mean");
    const auto& stdv = c.array("feat.std");
    require(mean.size() == std::size_t(in) && stdv.size() == std::size_t(in),
            "checkpoint/weights", "standardization arrays must match the input width");
    head->feat_mean = mean;
    head->feat_std = stdv;
    return head;
}

// One row of the force experiment: train the head once per seed on fixed
// features and score each on the held-out-sensor part.
inline ForceTable train_force(const ForceData& data, const TrainSettings& settings,
                              const std::vector<std::uint64_t>& seeds) {
    require(!seeds.empty(), "force/config", "need at least one seed");
    ForceTable table;
    table.config = data.config;
    for (std::uint64_t seed : seeds) {
        ForceHead head(data.train.dim(), seed);
        TrainResult tr = train_force_head(head, data.train, data.val, settings, seed);
        ForceSeedResult r;
        r.seed = seed;
        r.test_mae = evaluate_force_head(head, data.test);
        r.best_val_loss = tr.best_val_loss;
        table.seeds.push_back(r);
    }
    return table;
}

}  // namespace tactsim
