#pragma once

#include <vector>

#include "tactsim/imagevae/augment.hpp"
#include "tactsim/imagevae/model.hpp"
#include "tactsim/nn/train.hpp"

namespace tactsim {

namespace detail {

// Shared loop for fresh training and finetuning; only the beta schedule
// differs. Validation decodes the posterior mean and scores against the
// final beta, so the early-stopping objective is stationary even while the
// training beta is still annealing.
inline TrainResult train_image_vae_impl(ImageVae& model, const std::vector<Tensor>& train,
                                        const std::vector<Tensor>& val,
                                        const TrainSettings& settings_in,
                                        const AugmentParams& augment, std::uint64_t seed,
                                        bool anneal) {
    require(!train.empty(), "train/empty", "no training images");
    require(!val.empty(), "train/empty", "no validation images");
    const auto& p = model.params();
    for (const auto& t : train)
        require(t.rank() == 3 && t.dim(0) == 3 && t.dim(1) == p.height && t.dim(2) == p.width,
                "imagevae/shape", "training image extent does not match the model");

    TrainSettings settings = settings_in;
    settings.weight_decay = p.weight_decay;

    auto batch_fn = [&](const std::vector<std::size_t>& batch, std::int64_t epoch, Rng& rng) {
        const double beta =
            anneal ? beta_schedule(epoch, p.beta_final, p.anneal_epochs) : p.beta_final;
        double loss_sum = 0.0;
        const double scale = 1.0 / double(batch.size());
        for (std::size_t idx : batch) {
            Tensor x = augment_image(train[idx], augment, rng);
            Posterior q = model.encode(x);
            LatentSample s = reparameterize(q, rng);
            Tensor recon = model.decode(s.z);
            VaeLoss l = image_vae_loss(x, recon, q, beta);
            loss_sum += l.total;

            Tensor drecon = recon;
            drecon.vec() = scale * 2.0 * (recon.vec() - x.vec()) / double(x.numel());
            std::vector<double> dmu, dlv;
            kl_backward(q, scale * beta, dmu, dlv);
            model.set_reparam_path(q, s);
            model.backward(drecon, dmu, dlv);
        }
        return loss_sum / double(batch.size());
    };

    auto val_fn = [&](std::int64_t) {
        double sum = 0.0;
        for (const auto& x : val) {
            Posterior q = model.encode(x);
            Tensor recon = model.decode(q.mean);
            sum += image_vae_loss(x, recon, q, p.beta_final).total;
        }
        return sum / double(val.size());
    };

    return run_training(model.store, settings, train.size(), batch_fn, val_fn, seed);
}

}  // namespace detail

inline TrainResult train_image_vae(ImageVae& model, const std::vector<Tensor>& train,
                                   const std::vector<Tensor>& val,
                                   const TrainSettings& settings, const AugmentParams& augment,
                                   std::uint64_t seed) {
    return detail::train_image_vae_impl(model, train, val, settings, augment, seed, true);
}

// Continues optimization of an already trained model on new frames. The
// anneal is not restarted: beta stays at its final value throughout.
inline TrainResult finetune_image_vae(ImageVae& model, const std::vector<Tensor>& train,
                                      const std::vector<Tensor>& val,
                                      const TrainSettings& settings,
                                      const AugmentParams& augment, std::uint64_t seed) {
    return detail::train_image_vae_impl(model, train, val, settings, augment, seed, false);
}

}  // namespace tactsim
