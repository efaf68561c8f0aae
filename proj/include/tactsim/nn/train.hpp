#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "tactsim/core/error.hpp"
#include "tactsim/core/rng.hpp"
#include "tactsim/nn/params.hpp"

namespace tactsim {

struct TrainSettings {
    std::int64_t max_epochs = 300;
    std::int64_t patience = 20;     // epochs without val improvement before stopping
    std::int64_t batch_size = 128;
    double lr = 1e-3;
    double lr_decay = 0.99;         // multiplicative, per epoch
    double weight_decay = 0.0;
};

struct TrainResult {
    std::int64_t epochs_run = 0;
    std::int64_t best_epoch = -1;
    double best_val_loss = std::numeric_limits<double>::infinity();
    std::vector<double> train_losses;
    std::vector<double> val_losses;
};

// Shared optimization loop: epoch shuffling, Adam with per-epoch lr decay,
// best-weights early stopping, divergence abort. batch_fn must compute the
// mean loss of the index slice and accumulate the matching mean gradient
// into the store; val_fn scores the model without touching gradients.
inline TrainResult run_training(
    ParamStore& store, const TrainSettings& s, std::size_t n_train,
    const std::function<double(const std::vector<std::size_t>&, std::int64_t, Rng&)>& batch_fn,
    const std::function<double(std::int64_t)>& val_fn, std::uint64_t seed) {
    require(s.batch_size > 0, "train/settings", "batch size must be positive");
    require(s.max_epochs >= 0, "train/settings", "negative epoch count");

    TrainResult result;
    if (s.max_epochs == 0 || n_train == 0) return result;

    Adam adam(store.size(), s.lr, s.weight_decay);
    std::vector<std::size_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

    std::vector<double> best_params;
    for (std::int64_t epoch = 0; epoch < s.max_epochs; ++epoch) {
        Rng erng(mix_seed(seed, 0x5e55u, std::uint64_t(epoch)));
        erng.shuffle(order);
        adam.set_lr(s.lr * std::pow(s.lr_decay, double(epoch)));

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t at = 0; at < n_train; at += std::size_t(s.batch_size)) {
            const std::size_t end = std::min(n_train, at + std::size_t(s.batch_size));
            std::vector<std::size_t> batch(order.begin() + std::ptrdiff_t(at),
                                           order.begin() + std::ptrdiff_t(end));
            store.zero_grad();
            const double loss = batch_fn(batch, epoch, erng);
            require(std::isfinite(loss), "train/diverged",
                    "training loss became non-finite at epoch " + std::to_string(epoch));
            adam.step(store);
            epoch_loss += loss;
            ++batches;
        }
        result.train_losses.push_back(epoch_loss / double(batches));

        const double val = val_fn(epoch);
        require(std::isfinite(val), "train/diverged",
                "validation loss became non-finite at epoch " + std::to_string(epoch));
        result.val_losses.push_back(val);
        result.epochs_run = epoch + 1;

        if (val < result.best_val_loss) {
            result.best_val_loss = val;
            result.best_epoch = epoch;
            best_params = store.values;
        } else if (s.patience > 0 && epoch - result.best_epoch >= s.patience) {
            break;
        }
    }
    if (!best_params.empty()) store.values = best_params;
    return result;
}

}  // namespace tactsim
