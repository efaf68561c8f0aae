#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tactsim/core/error.hpp"
#include "tactsim/core/rng.hpp"

namespace tactsim {

// All learnable parameters of a model live in one flat array, with gradients
// in a parallel array. Layers hold offsets into the store; the optimizer and
// the checkpoint writer see the whole vector. Registration order is fixed by
// model construction, which makes checkpoints and gradient checks stable.
class ParamStore {
public:
    struct Entry {
        std::string name;
        std::vector<std::int64_t> shape;
        std::size_t offset = 0;
        std::size_t size = 0;
    };

    std::size_t add(const std::string& name, std::vector<std::int64_t> shape) {
        require(!index_.count(name), "params/duplicate", "duplicate parameter '" + name + "'");
        std::size_t n = 1;
        for (auto d : shape) n *= std::size_t(d);
        Entry e{name, std::move(shape), values.size(), n};
        index_[name] = entries.size();
        entries.push_back(e);
        values.resize(values.size() + n, 0.0);
        grads.resize(values.size(), 0.0);
        return e.offset;
    }

    double* value_ptr(std::size_t offset) { return values.data() + offset; }
    const double* value_ptr(std::size_t offset) const { return values.data() + offset; }
    double* grad_ptr(std::size_t offset) { return grads.data() + offset; }

    double* value_ptr(const std::string& name) { return values.data() + entry(name).offset; }
    const double* value_ptr(const std::string& name) const {
        return values.data() + entry(name).offset;
    }
    double* grad_ptr(const std::string& name) { return grads.data() + entry(name).offset; }

    const Entry& entry(const std::string& name) const {
        auto it = index_.find(name);
        require(it != index_.end(), "params/unknown", "unknown parameter '" + name + "'");
        return entries[it->second];
    }

    bool has(const std::string& name) const { return index_.count(name) != 0; }

    void zero_grad() { std::fill(grads.begin(), grads.end(), 0.0); }

    std::size_t size() const { return values.size(); }

    // Xavier-uniform init over a [fan_in, fan_out] pair, biases untouched.
    void init_uniform(std::size_t offset, std::size_t n, double limit, Rng& rng) {
        for (std::size_t i = 0; i < n; ++i) values[offset + i] = rng.uniform(-limit, limit);
    }

    std::vector<Entry> entries;
    std::vector<double> values;
    std::vector<double> grads;

private:
    std::map<std::string, std::size_t> index_;
};

// Adam with optional decoupled-from-nothing L2 (added straight to the
// gradient, matching the classic formulation).
class Adam {
public:
    explicit Adam(std::size_t n, double lr = 1e-3, double weight_decay = 0.0)
        : lr_(lr), weight_decay_(weight_decay), m_(n, 0.0), v_(n, 0.0) {}

    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }

    void step(ParamStore& p) {
        require(p.size() == m_.size(), "adam/size", "optimizer/parameter size mismatch");
        ++t_;
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double c1 = 1.0 - std::pow(b1, double(t_));
        const double c2 = 1.0 - std::pow(b2, double(t_));
        for (std::size_t i = 0; i < m_.size(); ++i) {
            double g = p.grads[i] + weight_decay_ * p.values[i];
            m_[i] = b1 * m_[i] + (1.0 - b1) * g;
            v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
            p.values[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
        }
    }

private:
    double lr_;
    double weight_decay_;
    std::int64_t t_ = 0;
    std::vector<double> m_, v_;
};

}  // namespace tactsim
