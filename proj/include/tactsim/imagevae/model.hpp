#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tactsim/core/convert.hpp"
#include "tactsim/core/types.hpp"
#include "tactsim/nn/distributions.hpp"
#include "tactsim/nn/layers.hpp"

namespace tactsim {

struct ImageVaeParams {
    std::int64_t height = 240;
    std::int64_t width = 320;
    std::vector<std::int64_t> blocks{3, 3, 5, 5, 3, 3};   // res blocks per stage
    std::vector<std::int64_t> factors{2, 2, 2, 2, 5};     // downsample after stage i
    std::vector<std::int64_t> widths{16, 32, 64, 128, 256, 256};
    std::int64_t latent = 256;
    double beta_final = 0.001;
    std::int64_t anneal_epochs = 50;
    double weight_decay = 1e-5;

    void validate() const {
        require(!blocks.empty() && blocks.size() == widths.size(), "imagevae/params",
                "blocks and widths must align");
        require(factors.size() == blocks.size() || factors.size() + 1 == blocks.size(),
                "imagevae/params", "factor list must cover all stages or all but the last");
        std::int64_t den = 1;
        for (auto f : factors) {
            require(f >= 2, "imagevae/params", "downsampling factors must be at least 2");
            den *= f;
        }
        require(height % den == 0 && width % den == 0, "imagevae/params",
                "image extent must be divisible by the factor product");
        require(latent > 0, "imagevae/params", "latent width must be positive");
    }

    std::int64_t bottom_height() const {
        std::int64_t den = 1;
        for (auto f : factors) den *= f;
        return height / den;
    }
    std::int64_t bottom_width() const {
        std::int64_t den = 1;
        for (auto f : factors) den *= f;
        return width / den;
    }
};

// Annealing keeps early epochs reconstruction-driven:
// beta(e) = beta_final * min(1, e / anneal_epochs), flat once reached.
inline double beta_schedule(std::int64_t epoch, double beta_final,
                            std::int64_t anneal_epochs) {
    require(epoch >= 0, "imagevae/schedule", "negative epoch");
    if (anneal_epochs <= 0) return beta_final;
    const double t = double(epoch) / double(anneal_epochs);
    return beta_final * std::min(1.0, t);
}

// Pre-activation residual block: x + conv(tanh(conv(tanh(x)))), with a 1x1
// projection on the skip when the channel count changes.
class ResBlock {
public:
    ResBlock() = default;

    ResBlock(ParamStore& store, const std::string& name, std::int64_t cin, std::int64_t cout,
             Rng& rng)
        : c1_(store, name + ".c1", cin, cout, 3, 1, 1, rng),
          c2_(store, name + ".c2", cout, cout, 3, 1, 1, rng),
          has_proj_(cin != cout) {
        if (has_proj_) proj_ = Conv2d(store, name + ".proj", cin, cout, 1, 1, 0, rng);
    }

    Tensor forward(const Tensor& x) {
        a0_ = x;
        tanh_forward(a0_);
        Tensor h = c1_.forward(a0_);
        tanh_forward(h);
        a1_ = h;
        h = c2_.forward(h);
        Tensor skip = has_proj_ ? proj_.forward(x) : x;
        h.vec() += skip.vec();
        return h;
    }

    Tensor backward(const Tensor& dy) {
        Tensor dskip = has_proj_ ? proj_.backward(dy) : dy;
        Tensor d = c2_.backward(dy);
        tanh_backward(a1_, d);
        d = c1_.backward(d);
        tanh_backward(a0_, d);
        d.vec() += dskip.vec();
        return d;
    }

private:
    Conv2d c1_, c2_, proj_;
    bool has_proj_ = false;
    Tensor a0_, a1_;
};

// Convolutional residual VAE over tactile frames. tanh activations
// throughout; strided convolutions downsample, nearest-neighbour resize +
// convolution upsamples; the output layer is tanh, so decoded pixels stay
// inside (-1, 1).
class ImageVae {
public:
    ImageVae(const ImageVaeParams& params, std::uint64_t seed) : params_(params) {
        params_.validate();
        Rng rng(mix_seed(seed, 0xfeed));
        const auto stages = std::int64_t(params_.blocks.size());
        const bool tail_down = params_.factors.size() == params_.blocks.size();

        stem_ = Conv2d(store, "enc.stem", 3, params_.widths[0], 3, 1, 1, rng);
        enc_blocks_.resize(std::size_t(stages));
        for (std::int64_t s = 0; s < stages; ++s) {
            for (std::int64_t b = 0; b < params_.blocks[std::size_t(s)]; ++b)
                enc_blocks_[std::size_t(s)].emplace_back(
                    store, "enc.s" + std::to_string(s) + ".b" + std::to_string(b),
                    params_.widths[std::size_t(s)], params_.widths[std::size_t(s)], rng);
            if (s < std::int64_t(params_.factors.size())) {
                const std::int64_t next =
                    params_.widths[std::size_t(std::min(s + 1, stages - 1))];
                enc_down_.emplace_back(store, "enc.down" + std::to_string(s),
                                       params_.widths[std::size_t(s)], next, 3,
                                       params_.factors[std::size_t(s)], 1, rng);
            }
        }
        bottom_c_ = params_.widths.back();
        flat_dim_ = bottom_c_ * params_.bottom_height() * params_.bottom_width();
        enc_mu_ = Dense(store, "enc.mu", flat_dim_, params_.latent, rng);
        enc_lv_ = Dense(store, "enc.lv", flat_dim_, params_.latent, rng);

        dec_dense_ = Dense(store, "dec.fc", params_.latent, flat_dim_, rng);
        if (tail_down)
            dec_tail_up_ = Conv2d(store, "dec.up_tail", bottom_c_, bottom_c_, 3, 1, 1, rng);
        dec_blocks_.resize(std::size_t(stages));
        for (std::int64_t s = stages; s-- > 0;) {
            for (std::int64_t b = 0; b < params_.blocks[std::size_t(s)]; ++b)
                dec_blocks_[std::size_t(s)].emplace_back(
                    store, "dec.s" + std::to_string(s) + ".b" + std::to_string(b),
                    params_.widths[std::size_t(s)], params_.widths[std::size_t(s)], rng);
            if (s > 0)
                dec_up_.emplace(dec_up_.begin(),
                                Conv2d(store, "dec.up" + std::to_string(s - 1),
                                       params_.widths[std::size_t(s)],
                                       params_.widths[std::size_t(s - 1)], 3, 1, 1, rng));
        }
        head_ = Conv2d(store, "dec.head", params_.widths[0], 3, 3, 1, 1, rng);
        tail_down_ = tail_down;
    }

    const ImageVaeParams& params() const { return params_; }
    std::int64_t latent_dim() const { return params_.latent; }

    std::int64_t trunk_dim() const { return flat_dim_; }

    // Flattened pre-bottleneck activation — the posterior heads' input, also
    // consumed directly by frozen-trunk force models.
    Tensor trunk(const Tensor& x) {
        require(x.rank() == 3 && x.dim(0) == 3 && x.dim(1) == params_.height &&
                    x.dim(2) == params_.width,
                "imagevae/shape", "encoder input does not match the configured extent");
        const auto stages = std::int64_t(params_.blocks.size());
        enc_tanh_.clear();
        Tensor h = stem_.forward(x);
        tanh_forward(h);
        enc_tanh_.push_back(h);
        for (std::int64_t s = 0; s < stages; ++s) {
            for (auto& blk : enc_blocks_[std::size_t(s)]) h = blk.forward(h);
            if (s < std::int64_t(enc_down_.size())) {
                h = enc_down_[std::size_t(s)].forward(h);
                tanh_forward(h);
                enc_tanh_.push_back(h);
            }
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

    Tensor decode(const std::vector<double>& z) {
        require(std::int64_t(z.size()) == params_.latent, "latent/dim-mismatch",
                "latent width does not match the decoder");
        const auto stages = std::int64_t(params_.blocks.size());
        dec_tanh_.clear();
        Tensor zt({params_.latent});
        zt.v = z;
        Tensor h = dec_dense_.forward(zt);
        h.shape = {bottom_c_, params_.bottom_height(), params_.bottom_width()};
        if (tail_down_) {
            tail_upsample_ = Upsample2d(params_.factors.back());
            h = tail_upsample_.forward(h);
            h = dec_tail_up_.forward(h);
            tanh_forward(h);
            dec_tanh_.push_back(h);
        }
        for (std::int64_t s = stages; s-- > 0;) {
            for (auto& blk : dec_blocks_[std::size_t(s)]) h = blk.forward(h);
            if (s > 0) {
                up_ops_[std::size_t(s - 1)] = Upsample2d(params_.factors[std::size_t(s - 1)]);
                h = up_ops_[std::size_t(s - 1)].forward(h);
                h = dec_up_[std::size_t(s - 1)].forward(h);
                tanh_forward(h);
                dec_tanh_.push_back(h);
            }
        }
        h = head_.forward(h);
        tanh_forward(h);
        dec_out_ = h;
        return h;
    }

    void backward(const Tensor& drecon, const std::vector<double>& dmu_direct,
                  const std::vector<double>& dlv_direct) {
        const auto stages = std::int64_t(params_.blocks.size());
        std::size_t tanh_at = dec_tanh_.size();
        Tensor d = drecon;
        tanh_backward(dec_out_, d);
        d = head_.backward(d);
        for (std::int64_t s = 0; s < stages; ++s) {
            if (s > 0) {
                tanh_backward(dec_tanh_[--tanh_at], d);
                d = dec_up_[std::size_t(s - 1)].backward(d);
                d = up_ops_[std::size_t(s - 1)].backward(d);
            }
            for (std::size_t b = dec_blocks_[std::size_t(s)].size(); b-- > 0;)
                d = dec_blocks_[std::size_t(s)][b].backward(d);
        }
        if (tail_down_) {
            tanh_backward(dec_tanh_[--tanh_at], d);
            d = dec_tail_up_.backward(d);
            d = tail_upsample_.backward(d);
        }
        Tensor dflat = d;
        dflat.shape = {flat_dim_};
        Tensor dz = dec_dense_.backward(dflat);

        Tensor dmu({params_.latent}), dlv({params_.latent});
        for (std::int64_t i = 0; i < params_.latent; ++i) {
            dmu.v[std::size_t(i)] = dmu_direct[std::size_t(i)] + dz.v[std::size_t(i)] * 1.0;
            dlv.v[std::size_t(i)] =
                dlv_direct[std::size_t(i)] + dz.v[std::size_t(i)] * dz_to_lv_[std::size_t(i)];
        }
        Tensor dh = enc_mu_.backward(dmu);
        dh.vec() += enc_lv_.backward(dlv).vec();
        dh.shape = {bottom_c_, params_.bottom_height(), params_.bottom_width()};

        std::size_t enc_at = enc_tanh_.size();
        for (std::int64_t s = stages; s-- > 0;) {
            if (s < std::int64_t(enc_down_.size())) {
                tanh_backward(enc_tanh_[--enc_at], dh);
                dh = enc_down_[std::size_t(s)].backward(dh);
            }
            for (std::size_t b = enc_blocks_[std::size_t(s)].size(); b-- > 0;)
                dh = enc_blocks_[std::size_t(s)][b].backward(dh);
        }
        tanh_backward(enc_tanh_[--enc_at], dh);
        stem_.backward(dh);
    }

    void set_reparam_path(const Posterior& q, const LatentSample& s) {
        dz_to_lv_.assign(q.mean.size(), 0.0);
        for (std::size_t i = 0; i < q.mean.size(); ++i)
            if (q.log_variance[i] > kCollapsedLogVar)
                dz_to_lv_[i] = s.eps[i] * 0.5 * std::exp(0.5 * q.log_variance[i]);
    }

    void set_mean_path() { dz_to_lv_.assign(std::size_t(params_.latent), 0.0); }

    ParamStore store;

private:
    ImageVaeParams params_;
    Conv2d stem_, head_, dec_tail_up_;
    std::vector<std::vector<ResBlock>> enc_blocks_, dec_blocks_;
    std::vector<Conv2d> enc_down_, dec_up_;
    std::map<std::size_t, Upsample2d> up_ops_;
    Upsample2d tail_upsample_;
    Dense enc_mu_, enc_lv_, dec_dense_;
    bool tail_down_ = false;
    std::int64_t bottom_c_ = 0, flat_dim_ = 0;
    std::vector<Tensor> enc_tanh_, dec_tanh_;
    Tensor dec_out_;
    std::vector<double> dz_to_lv_;
};

// Same decomposition as the mesh side: pixel MSE plus beta-weighted KL.
inline VaeLoss image_vae_loss(const Tensor& x, const Tensor& recon, const Posterior& q,
                              double beta) {
    return vae_gaussian_loss(x, recon, q, beta);
}

inline Posterior encode_image(ImageVae& model, const TactileImage& im) {
    return model.encode(image_to_tensor(im));
}

inline TactileImage decode_image(ImageVae& model, const LatentVec& z) {
    require(z.space == LatentSpace::Image, "latent/space-mismatch",
            "decode_image expects an image-space latent");
    require(std::int64_t(z.dim()) == model.latent_dim(), "latent/dim-mismatch",
            "latent width does not match the decoder");
    return tensor_to_image(model.decode(z.values));
}

}  // namespace tactsim
