#pragma once

#include <string>
#include <vector>

#include "tactsim/nn/layers.hpp"

namespace tactsim {

// Fully connected trunk: Dense -> ELU -> Dropout per hidden layer, linear
// output. Used by the latent projections and the force heads.
class Mlp {
public:
    Mlp() = default;

    Mlp(ParamStore& store, const std::string& name, std::int64_t in,
        const std::vector<std::int64_t>& hidden, std::int64_t out,
        const std::vector<double>& dropout_rates, Rng& rng) {
        require(dropout_rates.empty() || dropout_rates.size() == hidden.size(),
                "mlp/dropout", "dropout rate list does not match hidden layer count");
        std::int64_t prev = in;
        for (std::size_t i = 0; i < hidden.size(); ++i) {
            layers_.emplace_back(store, name + ".fc" + std::to_string(i), prev, hidden[i], rng);
            drops_.emplace_back(dropout_rates.empty() ? 0.0 : dropout_rates[i]);
            prev = hidden[i];
        }
        out_layer_ = Dense(store, name + ".out", prev, out, rng);
        in_ = in;
        out_ = out;
    }

    std::int64_t in_dim() const { return in_; }
    std::int64_t out_dim() const { return out_; }

    Tensor forward(const Tensor& x, bool train, Rng& rng) {
        acts_.resize(layers_.size());
        Tensor h = x;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            h = layers_[i].forward(h);
            elu_forward(h);
            acts_[i] = h;  // post-activation, what elu_backward needs
            h = drops_[i].forward(h, train, rng);
        }
        return out_layer_.forward(h);
    }

    Tensor backward(const Tensor& dy) {
        Tensor d = out_layer_.backward(dy);
        for (std::size_t i = layers_.size(); i-- > 0;) {
            d = drops_[i].backward(d);
            elu_backward(acts_[i], d);
            d = layers_[i].backward(d);
        }
        return d;
    }

    void freeze_dropout(bool on) {
        for (auto& d : drops_) d.freeze(on);
    }

private:
    std::vector<Dense> layers_;
    std::vector<Dropout> drops_;
    std::vector<Tensor> acts_;
    Dense out_layer_;
    std::int64_t in_ = 0, out_ = 0;
};

}  // namespace tactsim
