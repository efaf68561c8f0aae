#pragma once

#include <vector>

#include "tactsim/meshvae/model.hpp"
#include "tactsim/nn/train.hpp"

namespace tactsim {

// Fits the displacement normalizer on the training set, then optimizes the
// usual reconstruction + beta*KL objective. Displacements arrive raw; both
// sets are normalized with training statistics. Validation decodes the
// posterior mean, so the early-stopping signal carries no sampling noise.
inline TrainResult train_mesh_vae(MeshVae& model, const std::vector<Tensor>& train_disp,
                                  const std::vector<Tensor>& val_disp,
                                  const TrainSettings& settings, std::uint64_t seed) {
    require(!train_disp.empty(), "train/empty", "no training displacements");
    require(!val_disp.empty(), "train/empty", "no validation displacements");

    model.normalizer = DisplacementNormalizer::fit(train_disp);
    std::vector<Tensor> train, val;
    train.reserve(train_disp.size());
    for (const auto& d : train_disp) train.push_back(model.normalizer.apply(d));
    val.reserve(val_disp.size());
    for (const auto& d : val_disp) val.push_back(model.normalizer.apply(d));

    const double beta = model.params().beta;

    auto batch_fn = [&](const std::vector<std::size_t>& batch, std::int64_t, Rng& rng) {
        double loss_sum = 0.0;
        const double scale = 1.0 / double(batch.size());
        for (std::size_t idx : batch) {
            const Tensor& x = train[idx];
            Posterior q = model.encode(x);
            LatentSample s = reparameterize(q, rng);
            Tensor recon = model.decode(s.z);
            VaeLoss l = mesh_vae_loss(x, recon, q, beta);
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
            sum += mesh_vae_loss(x, recon, q, beta).total;
        }
        return sum / double(val.size());
    };

    return run_training(model.store, settings, train.size(), batch_fn, val_fn, seed);
}

}  // namespace tactsim
