#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tactsim/core/io.hpp"
#include "tactsim/imagevae/model.hpp"
#include "tactsim/latentspace/projection.hpp"
#include "tactsim/meshvae/decimate.hpp"
#include "tactsim/meshvae/model.hpp"

namespace tactsim {

inline constexpr const char* kCheckpointMagic = "TSCKPT";

// One trained artifact on disk: a JSON manifest plus named numeric arrays.
// The manifest carries everything needed to rebuild the architecture, the
// arrays carry weights and whatever reference data makes the file
// self-contained (a mesh checkpoint embeds its topology, for instance).
struct Checkpoint {
    std::string kind;
    json manifest;
    std::map<std::string, std::vector<double>> f64;
    std::map<std::string, std::vector<std::int64_t>> i64;

    const std::vector<double>& array(const std::string& name) const {
        auto it = f64.find(name);
        require(it != f64.end(), "checkpoint/missing-array",
                "checkpoint has no f64 array '" + name + "'");
        return it->second;
    }

    const std::vector<std::int64_t>& iarray(const std::string& name) const {
        auto it = i64.find(name);
        require(it != i64.end(), "checkpoint/missing-array",
                "checkpoint has no i64 array '" + name + "'");
        return it->second;
    }

    void expect_kind(const std::string& want) const {
        require(kind == want, "checkpoint/kind",
                "expected a " + want + " checkpoint, found " + kind);
    }
};

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    require(!c.kind.empty(), "checkpoint/kind", "checkpoint kind must be set");
    json h;
    h["magic"] = kCheckpointMagic;
    h["version"] = 1;
    h["kind"] = c.kind;
    h["manifest"] = c.manifest.is_null() ? json::object() : c.manifest;
    h["f64"] = json::array();
    for (const auto& [name, v] : c.f64)
        h["f64"].push_back({{"name", name}, {"n", v.size()}});
    h["i64"] = json::array();
    for (const auto& [name, v] : c.i64)
        h["i64"].push_back({{"name", name}, {"n", v.size()}});

    std::string header = h.dump();
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.push_back('\n');
    for (const auto& [name, v] : c.f64)
        for (double x : v) put_f64le(out, x);
    for (const auto& [name, v] : c.i64)
        for (std::int64_t x : v) put_u64le(out, std::uint64_t(x));
    write_file(path, out.data(), out.size());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    auto bytes = read_file(path);
    ByteReader r(bytes);
    json h = detail::read_header_line(r, path, kCheckpointMagic);
    require(h.value("version", 0) == 1, "checkpoint/version",
            "unsupported checkpoint version in " + path.string());
    Checkpoint c;
    c.kind = h.value("kind", std::string());
    require(!c.kind.empty(), "checkpoint/kind", "checkpoint kind missing in " + path.string());
    c.manifest = h.value("manifest", json::object());

    std::size_t payload = 0;
    for (const auto& e : h.value("f64", json::array()))
        payload += e.value("n", std::size_t(0)) * 8;
    for (const auto& e : h.value("i64", json::array()))
        payload += e.value("n", std::size_t(0)) * 8;
    require(r.remaining() == payload, "io/truncated",
            "checkpoint payload size mismatch in " + path.string());

    for (const auto& e : h.value("f64", json::array())) {
        const auto name = e.value("name", std::string());
        const auto n = e.value("n", std::size_t(0));
        std::vector<double> v(n);
        for (auto& x : v) x = r.f64le();
        c.f64[name] = std::move(v);
    }
    for (const auto& e : h.value("i64", json::array())) {
        const auto name = e.value("name", std::string());
        const auto n = e.value("n", std::size_t(0));
        std::vector<std::int64_t> v(n);
        for (auto& x : v) x = std::int64_t(r.u64le());
        c.i64[name] = std::move(v);
    }
    return c;
}

namespace detail {

inline void copy_weights(ParamStore& store, const std::vector<double>& weights,
                         const std::string& what) {
    require(store.size() == weights.size(), "checkpoint/weights",
            what + " weight count does not match the architecture");
    store.values = weights;
}

}  // namespace detail

// ---- mesh VAE ----

inline Checkpoint mesh_vae_checkpoint(const MeshVae& model, const json& extra = json::object()) {
    Checkpoint c;
    c.kind = "mesh-vae";
    const auto& p = model.params();
    const auto& base = model.stack().levels.front();
    c.manifest["filters"] = p.filters;
    c.manifest["cheb_order"] = p.cheb_order;
    c.manifest["latent"] = p.latent;
    c.manifest["beta"] = p.beta;
    c.manifest["topology_id"] = base.topology->id;
    c.manifest["vertex_count"] = base.topology->vertex_count;
    for (auto& [k, v] : extra.items()) c.manifest[k] = v;

    c.f64["weights"] = model.store.values;
    c.f64["norm.mean"] = {model.normalizer.mean[0], model.normalizer.mean[1],
                          model.normalizer.mean[2]};
    c.f64["norm.std"] = {model.normalizer.std[0], model.normalizer.std[1],
                         model.normalizer.std[2]};
    std::vector<double> ref(base.vertices.begin(), base.vertices.end());
    c.f64["reference"] = std::move(ref);
    std::vector<std::int64_t> faces(base.topology->faces.begin(), base.topology->faces.end());
    c.i64["faces"] = std::move(faces);
    return c;
}

inline std::unique_ptr<MeshVae> load_mesh_vae(const Checkpoint& c) {
    c.expect_kind("mesh-vae");
    MeshVaeParams p;
    p.filters = c.manifest.at("filters").get<std::vector<std::int64_t>>();
    p.cheb_order = c.manifest.at("cheb_order").get<std::int64_t>();
    p.latent = c.manifest.at("latent").get<std::int64_t>();
    p.beta = c.manifest.value("beta", p.beta);

    auto topo = std::make_shared<Topology>();
    topo->id = c.manifest.at("topology_id").get<std::string>();
    topo->vertex_count = c.manifest.at("vertex_count").get<std::int64_t>();
    for (std::int64_t f : c.iarray("faces")) topo->faces.push_back(std::uint32_t(f));

    const auto& ref64 = c.array("reference");
    require(std::int64_t(ref64.size()) == topo->vertex_count * 3, "checkpoint/weights",
            "reference vertex array does not match the topology");
    std::vector<float> ref(ref64.size());
    for (std::size_t i = 0; i < ref64.size(); ++i) ref[i] = float(ref64[i]);

    auto stack = std::make_shared<MeshGraphStack>(
        build_graph_stack(topo, ref, std::int64_t(p.filters.size())));
    auto model = std::make_unique<MeshVae>(stack, p, 0);
    detail::copy_weights(model->store, c.array("weights"), "mesh-vae");

    const auto& mean = c.array("norm.mean");
    const auto& stdv = c.array("norm.std");
    require(mean.size() == 3 && stdv.size() == 3, "checkpoint/weights",
            "normalizer arrays must have three entries");
    for (int a = 0; a < 3; ++a) {
        model->normalizer.mean[std::size_t(a)] = mean[std::size_t(a)];
        model->normalizer.std[std::size_t(a)] = stdv[std::size_t(a)];
    }
    return model;
}

// ---- image VAE ----

inline Checkpoint image_vae_checkpoint(const ImageVae& model,
                                       const json& extra = json::object()) {
    Checkpoint c;
    c.kind = "image-vae";
    const auto& p = model.params();
    c.manifest["height"] = p.height;
    c.manifest["width"] = p.width;
    c.manifest["blocks"] = p.blocks;
    c.manifest["factors"] = p.factors;
    c.manifest["widths"] = p.widths;
    c.manifest["latent"] = p.latent;
    c.manifest["beta_final"] = p.beta_final;
    c.manifest["anneal_epochs"] = p.anneal_epochs;
    c.manifest["weight_decay"] = p.weight_decay;
    for (auto& [k, v] : extra.items()) c.manifest[k] = v;
    c.f64["weights"] = model.store.values;
    return c;
}

inline std::unique_ptr<ImageVae> load_image_vae(const Checkpoint& c) {
    c.expect_kind("image-vae");
    ImageVaeParams p;
    p.height = c.manifest.at("height").get<std::int64_t>();
    p.width = c.manifest.at("width").get<std::int64_t>();
    p.blocks = c.manifest.at("blocks").get<std::vector<std::int64_t>>();
    p.factors = c.manifest.at("factors").get<std::vector<std::int64_t>>();
    p.widths = c.manifest.at("widths").get<std::vector<std::int64_t>>();
    p.latent = c.manifest.at("latent").get<std::int64_t>();
    p.beta_final = c.manifest.value("beta_final", p.beta_final);
    p.anneal_epochs = c.manifest.value("anneal_epochs", p.anneal_epochs);
    p.weight_decay = c.manifest.value("weight_decay", p.weight_decay);
    auto model = std::make_unique<ImageVae>(p, 0);
    detail::copy_weights(model->store, c.array("weights"), "image-vae");
    return model;
}

// ---- latent projection ----

inline Checkpoint projection_checkpoint(const Projection& proj,
                                        const ProjectionParams& params,
                                        const json& extra = json::object()) {
    Checkpoint c;
    c.kind = "projection";
    c.manifest["direction"] = to_string(proj.direction());
    c.manifest["mode"] = to_string(proj.mode());
    c.manifest["mesh_dim"] = proj.mesh_dim();
    c.manifest["image_dim"] = proj.image_dim();
    c.manifest["hidden"] = params.hidden;
    c.manifest["dropout"] = params.dropout;
    c.manifest["batch_size"] = params.batch_size;
    c.manifest["weight_decay"] = params.weight_decay;
    for (auto& [k, v] : extra.items()) c.manifest[k] = v;
    c.f64["weights"] = proj.store.values;
    return c;
}

inline std::unique_ptr<Projection> load_projection(const Checkpoint& c) {
    c.expect_kind("projection");
    ProjectionParams params;
    params.hidden = c.manifest.at("hidden").get<std::vector<std::int64_t>>();
    params.dropout = c.manifest.value("dropout", params.dropout);
    params.batch_size = c.manifest.value("batch_size", params.batch_size);
    params.weight_decay = c.manifest.value("weight_decay", params.weight_decay);
    auto proj = std::make_unique<Projection>(
        parse_projection_direction(c.manifest.at("direction").get<std::string>()),
        parse_pipeline_mode(c.manifest.at("mode").get<std::string>()),
        c.manifest.at("mesh_dim").get<std::int64_t>(),
        c.manifest.at("image_dim").get<std::int64_t>(), params, 0);
    detail::copy_weights(proj->store, c.array("weights"), "projection");
    return proj;
}

}  // namespace tactsim
