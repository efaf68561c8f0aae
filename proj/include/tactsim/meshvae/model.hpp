#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "tactsim/core/types.hpp"
#include "tactsim/meshvae/cheb.hpp"
#include "tactsim/meshvae/decimate.hpp"
#include "tactsim/nn/distributions.hpp"
#include "tactsim/nn/layers.hpp"

namespace tactsim {

struct MeshVaeParams {
    std::vector<std::int64_t> filters{16, 16, 16, 32};
    std::int64_t cheb_order = 6;
    std::int64_t latent = 128;
    double beta = 0.005;
};

// Per-axis z-scoring of vertex displacements. The gel deforms mostly along
// z; the floor keeps the nearly-rigid axes from exploding.
struct DisplacementNormalizer {
    std::array<double, 3> mean{0, 0, 0};
    std::array<double, 3> std{1, 1, 1};

    static DisplacementNormalizer fit(const std::vector<Tensor>& displacements) {
        require(!displacements.empty(), "norm/empty", "no samples to fit normalizer");
        DisplacementNormalizer n;
        std::array<double, 3> sum{0, 0, 0}, sq{0, 0, 0};
        std::int64_t count = 0;
        for (const auto& d : displacements) {
            const std::int64_t v = d.dim(0);
            for (std::int64_t i = 0; i < v; ++i)
                for (int a = 0; a < 3; ++a) {
                    const double x = d.v[std::size_t(3 * i + a)];
                    sum[std::size_t(a)] += x;
                    sq[std::size_t(a)] += x * x;
                }
            count += v;
        }
        for (int a = 0; a < 3; ++a) {
            n.mean[std::size_t(a)] = sum[std::size_t(a)] / double(count);
            const double var = sq[std::size_t(a)] / double(count) -
                               n.mean[std::size_t(a)] * n.mean[std::size_t(a)];
            n.std[std::size_t(a)] = std::sqrt(std::max(var, 0.0));
            if (n.std[std::size_t(a)] < 1e-6) n.std[std::size_t(a)] = 1e-6;
        }
        return n;
    }

    Tensor apply(const Tensor& d) const {
        Tensor out = d;
        const std::int64_t v = d.dim(0);
        for (std::int64_t i = 0; i < v; ++i)
            for (int a = 0; a < 3; ++a) {
                auto& x = out.v[std::size_t(3 * i + a)];
                x = (x - mean[std::size_t(a)]) / std[std::size_t(a)];
            }
        return out;
    }

    Tensor invert(const Tensor& d) const {
        Tensor out = d;
        const std::int64_t v = d.dim(0);
        for (std::int64_t i = 0; i < v; ++i)
            for (int a = 0; a < 3; ++a) {
                auto& x = out.v[std::size_t(3 * i + a)];
                x = x * std[std::size_t(a)] + mean[std::size_t(a)];
            }
        return out;
    }
};

// MSE over every coordinate plus beta-weighted KL over latent dimensions.
inline VaeLoss mesh_vae_loss(const Tensor& x, const Tensor& recon, const Posterior& q,
                             double beta) {
    return vae_gaussian_loss(x, recon, q, beta);
}

// Graph-spectral VAE over vertex displacements. Encoder: ChebConv + ReLU,
// pool, repeated; dense heads for mean/log-variance. Decoder mirrors with
// barycentric unpooling and a linear final filter.
class MeshVae {
public:
    MeshVae(std::shared_ptr<const MeshGraphStack> stack, const MeshVaeParams& params,
            std::uint64_t seed)
        : stack_(std::move(stack)), params_(params) {
        const auto n = std::int64_t(params_.filters.size());
        require(stack_->pool_steps() == n, "meshvae/stack",
                "graph stack depth does not match filter count");
        Rng rng(mix_seed(seed, 0xabcdef));
        std::int64_t cin = 3;
        for (std::int64_t i = 0; i < n; ++i) {
            enc_convs_.emplace_back(store, "enc.conv" + std::to_string(i), params_.cheb_order,
                                    cin, params_.filters[std::size_t(i)], rng);
            cin = params_.filters[std::size_t(i)];
        }
        flat_dim_ = bottom_vertices() * params_.filters.back();
        enc_mu_ = Dense(store, "enc.mu", flat_dim_, params_.latent, rng);
        enc_lv_ = Dense(store, "enc.lv", flat_dim_, params_.latent, rng);
        dec_dense_ = Dense(store, "dec.fc", params_.latent, flat_dim_, rng);
        for (std::int64_t i = n; i-- > 0;) {
            const std::int64_t in_c = params_.filters[std::size_t(i)];
            const std::int64_t out_c = i > 0 ? params_.filters[std::size_t(i - 1)] : 3;
            dec_convs_.emplace(dec_convs_.begin(),
                               ChebConv(store, "dec.conv" + std::to_string(i),
                                        params_.cheb_order, in_c, out_c, rng));
        }
    }

    const MeshVaeParams& params() const { return params_; }
    const MeshGraphStack& stack() const { return *stack_; }
    std::shared_ptr<const MeshGraphStack> stack_ptr() const { return stack_; }
    std::int64_t latent_dim() const { return params_.latent; }
    std::int64_t vertex_count() const { return stack_->levels.front().topology->vertex_count; }
    std::int64_t bottom_vertices() const {
        return stack_->levels.back().topology->vertex_count;
    }

    // x: normalized displacement {V, 3}
    std::int64_t trunk_dim() const { return flat_dim_; }

    // Flattened pre-bottleneck activation — the posterior heads' input, also
    // consumed directly by frozen-trunk force models.
    Tensor trunk(const Tensor& x) {
        require(x.rank() == 2 && x.dim(0) == vertex_count() && x.dim(1) == 3, "meshvae/shape",
                "encoder input must be {V, 3}");
        const auto n = std::int64_t(enc_convs_.size());
        enc_pre_.resize(std::size_t(n));
        Tensor h = x;
        for (std::int64_t i = 0; i < n; ++i) {
            h = enc_convs_[std::size_t(i)].forward(stack_->levels[std::size_t(i)].lap, h);
            enc_pre_[std::size_t(i)] = h;
            relu_forward(h);
            h = stack_->levels[std::size_t(i)].down.mul(h);
        }
        Tensor flat = h;
        flat.shape = {flat_dim_};
        return flat;
    }

    Posterior encode(const Tensor& x) {
        Tensor flat = trunk(x);
        Tensor mu = enc_mu_.forward(flat);
        Tensor lv = enc_lv_.forward(flat);
        Posterior q;
        q.mean.assign(mu.v.begin(), mu.v.end());
        q.log_variance.assign(lv.v.begin(), lv.v.end());
        return q;
    }

    // z -> normalized displacement {V, 3}
    Tensor decode(const std::vector<double>& z) {
        require(std::int64_t(z.size()) == params_.latent, "latent/dim-mismatch",
                "latent width does not match the decoder");
        Tensor zt({params_.latent});
        zt.v = z;
        Tensor h = dec_dense_.forward(zt);
        h.shape = {bottom_vertices(), params_.filters.back()};
        const auto n = std::int64_t(dec_convs_.size());
        dec_pre_.resize(std::size_t(n));
        for (std::int64_t i = n; i-- > 0;) {
            h = stack_->levels[std::size_t(i)].up.mul(h);
            h = dec_convs_[std::size_t(i)].forward(stack_->levels[std::size_t(i)].lap, h);
            if (i > 0) {
                dec_pre_[std::size_t(i)] = h;
                relu_forward(h);
            }
        }
        return h;
    }

    // Reverse pass for d(loss)/d(recon) plus direct posterior gradients.
    // Must follow an encode + decode pair on the same sample.
    void backward(const Tensor& drecon, const std::vector<double>& dmu_direct,
                  const std::vector<double>& dlv_direct) {
        const auto n = std::int64_t(dec_convs_.size());
        Tensor d = drecon;
        for (std::int64_t i = 0; i < n; ++i) {
            if (i > 0) relu_backward(dec_pre_[std::size_t(i)], d);
            d = dec_convs_[std::size_t(i)].backward(d);
            d = stack_->levels[std::size_t(i)].up_t.mul(d);
        }
        Tensor dflat = d;
        dflat.shape = {flat_dim_};
        Tensor dz = dec_dense_.backward(dflat);

        // dz joins the reparameterization gradient prepared by the caller
        Tensor dmu({params_.latent}), dlv({params_.latent});
        for (std::int64_t i = 0; i < params_.latent; ++i) {
            dmu.v[std::size_t(i)] = dmu_direct[std::size_t(i)] + dz.v[std::size_t(i)] * dz_to_mu_;
            dlv.v[std::size_t(i)] =
                dlv_direct[std::size_t(i)] + dz.v[std::size_t(i)] * dz_to_lv_[std::size_t(i)];
        }
        Tensor dflat_enc = enc_mu_.backward(dmu);
        dflat_enc.vec() += enc_lv_.backward(dlv).vec();
        Tensor dh = dflat_enc;
        dh.shape = {bottom_vertices(), params_.filters.back()};
        for (std::int64_t i = n; i-- > 0;) {
            dh = stack_->levels[std::size_t(i)].down_t.mul(dh);
            relu_backward(enc_pre_[std::size_t(i)], dh);
            dh = enc_convs_[std::size_t(i)].backward(dh);
        }
    }

    // Configure how dz maps onto the posterior before calling backward():
    // z = mu + exp(lv/2) * eps, so dz/dmu = 1 and dz/dlv = eps/2 exp(lv/2).
    void set_reparam_path(const Posterior& q, const LatentSample& s) {
        dz_to_mu_ = 1.0;
        dz_to_lv_.assign(q.mean.size(), 0.0);
        for (std::size_t i = 0; i < q.mean.size(); ++i)
            if (q.log_variance[i] > kCollapsedLogVar)
                dz_to_lv_[i] = s.eps[i] * 0.5 * std::exp(0.5 * q.log_variance[i]);
    }

    // Mean-decoding path (no sampling): dz flows into dmu only.
    void set_mean_path(std::size_t dim) {
        dz_to_mu_ = 1.0;
        dz_to_lv_.assign(dim, 0.0);
    }

    ParamStore store;
    DisplacementNormalizer normalizer;

private:
    std::shared_ptr<const MeshGraphStack> stack_;
    MeshVaeParams params_;
    std::vector<ChebConv> enc_convs_;
    std::vector<ChebConv> dec_convs_;
    Dense enc_mu_, enc_lv_, dec_dense_;
    std::int64_t flat_dim_ = 0;
    std::vector<Tensor> enc_pre_, dec_pre_;
    double dz_to_mu_ = 1.0;
    std::vector<double> dz_to_lv_;
};

// ---------------------------------------------------------------------------
// mesh-level ops

inline Tensor mesh_displacement(const TriMesh& mesh, const std::vector<float>& reference) {
    require(mesh.vertices.size() == reference.size(), "mesh/vertex-count",
            "mesh does not match the reference vertex count");
    Tensor d({mesh.vertex_count(), 3});
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        d.v[i] = double(mesh.vertices[i]) - double(reference[i]);
    return d;
}

inline Posterior encode_mesh(MeshVae& model, const TriMesh& mesh) {
    mesh.validate();
    require(mesh.topology_id() == model.stack().base_topology().id, "meshvae/topology",
            "mesh topology '" + mesh.topology_id() + "' does not match the trained model");
    Tensor d = mesh_displacement(mesh, model.stack().levels.front().vertices);
    return model.encode(model.normalizer.apply(d));
}

inline TriMesh decode_mesh(MeshVae& model, const LatentVec& z) {
    require(z.space == LatentSpace::Mesh, "latent/space-mismatch",
            "decode_mesh expects a mesh-space latent");
    require(std::int64_t(z.dim()) == model.latent_dim(), "latent/dim-mismatch",
            "latent width does not match the decoder");
    Tensor d = model.normalizer.invert(model.decode(z.values));
    const auto& level0 = model.stack().levels.front();
    TriMesh mesh;
    mesh.topology = level0.topology;
    mesh.vertices.resize(level0.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        mesh.vertices[i] = float(double(level0.vertices[i]) + d.v[i]);
    return mesh;
}

}  // namespace tactsim
