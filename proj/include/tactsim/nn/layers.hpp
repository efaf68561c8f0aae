#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tactsim/core/rng.hpp"
#include "tactsim/nn/params.hpp"
#include "tactsim/nn/tensor.hpp"

namespace tactsim {

// Layers process one sample at a time (batching is an outer loop; the
// machine this targets has one core, so sample loops and GEMMs are the whole
// story). Each layer caches its forward inputs for the matching backward;
// param gradients accumulate into the store until zero_grad.

// ---------------------------------------------------------------------------
// activations

inline void relu_forward(Tensor& x) {
    for (auto& t : x.v) t = t > 0.0 ? t : 0.0;
}

// x: pre-activation input, dy mutated into dx
inline void relu_backward(const Tensor& x, Tensor& dy) {
    for (std::size_t i = 0; i < x.v.size(); ++i)
        if (x.v[i] <= 0.0) dy.v[i] = 0.0;
}

inline void tanh_forward(Tensor& x) {
    for (auto& t : x.v) t = std::tanh(t);
}

// y: tanh output, dy mutated into dx
inline void tanh_backward(const Tensor& y, Tensor& dy) {
    for (std::size_t i = 0; i < y.v.size(); ++i) dy.v[i] *= 1.0 - y.v[i] * y.v[i];
}

inline void elu_forward(Tensor& x) {
    for (auto& t : x.v) t = t > 0.0 ? t : std::expm1(t);
}

// y: elu output, dy mutated into dx
inline void elu_backward(const Tensor& y, Tensor& dy) {
    for (std::size_t i = 0; i < y.v.size(); ++i)
        if (y.v[i] <= 0.0) dy.v[i] *= y.v[i] + 1.0;
}

// ---------------------------------------------------------------------------
// dense

class Dense {
public:
    Dense() = default;

    Dense(ParamStore& store, const std::string& name, std::int64_t in, std::int64_t out,
          Rng& rng)
        : store_(&store), in_(in), out_(out) {
        w_ = store.add(name + ".w", {out, in});
        b_ = store.add(name + ".b", {out});
        const double limit = std::sqrt(6.0 / double(in + out));
        store.init_uniform(w_, std::size_t(out * in), limit, rng);
    }

    std::int64_t in_dim() const { return in_; }
    std::int64_t out_dim() const { return out_; }

    Tensor forward(const Tensor& x) {
        require(x.numel() == in_, "dense/shape", "dense input width mismatch");
        x_cache_ = x;
        Tensor y({out_});
        Eigen::Map<const MatRM> W(store_->value_ptr(w_), out_, in_);
        Eigen::Map<const VecX> b(store_->value_ptr(b_), out_);
        y.vec() = W * x.vec() + b;
        return y;
    }

    Tensor backward(const Tensor& dy) {
        Eigen::Map<const MatRM> W(store_->value_ptr(w_), out_, in_);
        Eigen::Map<MatRM> dW(store_->grad_ptr(w_), out_, in_);
        Eigen::Map<VecX> db(store_->grad_ptr(b_), out_);
        dW.noalias() += dy.vec() * x_cache_.vec().transpose();
        db += dy.vec();
        Tensor dx({in_});
        dx.vec() = W.transpose() * dy.vec();
        return dx;
    }

private:
    ParamStore* store_ = nullptr;
    std::int64_t in_ = 0, out_ = 0;
    std::size_t w_ = 0, b_ = 0;
    Tensor x_cache_;
};

// ---------------------------------------------------------------------------
// 2d convolution via im2col + GEMM

class Conv2d {
public:
    Conv2d() = default;

    Conv2d(ParamStore& store, const std::string& name, std::int64_t cin, std::int64_t cout,
           std::int64_t k, std::int64_t stride, std::int64_t pad, Rng& rng)
        : store_(&store), cin_(cin), cout_(cout), k_(k), stride_(stride), pad_(pad) {
        w_ = store.add(name + ".w", {cout, cin, k, k});
        b_ = store.add(name + ".b", {cout});
        const double fan_in = double(cin * k * k), fan_out = double(cout * k * k);
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        store.init_uniform(w_, std::size_t(cout * cin * k * k), limit, rng);
    }

    std::int64_t out_extent(std::int64_t in) const { return (in + 2 * pad_ - k_) / stride_ + 1; }
    std::int64_t cout() const { return cout_; }

    Tensor forward(const Tensor& x) {
        require(x.rank() == 3 && x.dim(0) == cin_, "conv/shape", "conv input shape mismatch");
        h_ = x.dim(1);
        w_in_ = x.dim(2);
        ho_ = out_extent(h_);
        wo_ = out_extent(w_in_);
        require(ho_ > 0 && wo_ > 0, "conv/shape", "conv output has zero extent");

        im2col(x);
        Tensor y({cout_, ho_, wo_});
        const std::int64_t n = ho_ * wo_, rows = cin_ * k_ * k_;
        Eigen::Map<const MatRM> W(store_->value_ptr(w_), cout_, rows);
        Eigen::Map<const MatCM> P(cols_.data(), rows, n);
        Eigen::Map<const VecX> b(store_->value_ptr(b_), cout_);
        Eigen::Map<MatRM> Y(y.data(), cout_, n);
        Y.noalias() = W * P;
        Y.colwise() += b;
        return y;
    }

    Tensor backward(const Tensor& dy) {
        const std::int64_t n = ho_ * wo_, rows = cin_ * k_ * k_;
        Eigen::Map<const MatRM> dY(dy.data(), cout_, n);
        Eigen::Map<const MatCM> P(cols_.data(), rows, n);
        Eigen::Map<MatRM> dW(store_->grad_ptr(w_), cout_, rows);
        Eigen::Map<VecX> db(store_->grad_ptr(b_), cout_);
        dW.noalias() += dY * P.transpose();
        db += dY.rowwise().sum();

        Eigen::Map<const MatRM> W(store_->value_ptr(w_), cout_, rows);
        dcols_.assign(std::size_t(rows * n), 0.0);
        Eigen::Map<MatCM> dP(dcols_.data(), rows, n);
        dP.noalias() = W.transpose() * dY;
        return col2im();
    }

private:
    void im2col(const Tensor& x) {
        const std::int64_t rows = cin_ * k_ * k_, n = ho_ * wo_;
        cols_.assign(std::size_t(rows * n), 0.0);
        for (std::int64_t oy = 0; oy < ho_; ++oy) {
            for (std::int64_t ox = 0; ox < wo_; ++ox) {
                double* col = cols_.data() + std::size_t(oy * wo_ + ox) * rows;
                std::int64_t r = 0;
                for (std::int64_t c = 0; c < cin_; ++c) {
                    for (std::int64_t ky = 0; ky < k_; ++ky) {
                        const std::int64_t iy = oy * stride_ - pad_ + ky;
                        for (std::int64_t kx = 0; kx < k_; ++kx, ++r) {
                            const std::int64_t ix = ox * stride_ - pad_ + kx;
                            if (iy >= 0 && iy < h_ && ix >= 0 && ix < w_in_)
                                col[r] = x.at3(c, iy, ix);
                        }
                    }
                }
            }
        }
    }

    Tensor col2im() const {
        Tensor dx({cin_, h_, w_in_});
        const std::int64_t rows = cin_ * k_ * k_;
        for (std::int64_t oy = 0; oy < ho_; ++oy) {
            for (std::int64_t ox = 0; ox < wo_; ++ox) {
                const double* col = dcols_.data() + std::size_t(oy * wo_ + ox) * rows;
                std::int64_t r = 0;
                for (std::int64_t c = 0; c < cin_; ++c) {
                    for (std::int64_t ky = 0; ky < k_; ++ky) {
                        const std::int64_t iy = oy * stride_ - pad_ + ky;
                        for (std::int64_t kx = 0; kx < k_; ++kx, ++r) {
                            const std::int64_t ix = ox * stride_ - pad_ + kx;
                            if (iy >= 0 && iy < h_ && ix >= 0 && ix < w_in_)
                                dx.at3(c, iy, ix) += col[r];
                        }
                    }
                }
            }
        }
        return dx;
    }

    ParamStore* store_ = nullptr;
    std::int64_t cin_ = 0, cout_ = 0, k_ = 0, stride_ = 0, pad_ = 0;
    std::size_t w_ = 0, b_ = 0;
    std::int64_t h_ = 0, w_in_ = 0, ho_ = 0, wo_ = 0;
    std::vector<double> cols_, dcols_;
};

// ---------------------------------------------------------------------------
// nearest-neighbour upsampling

class Upsample2d {
public:
    Upsample2d() = default;
    explicit Upsample2d(std::int64_t factor) : f_(factor) {}

    Tensor forward(const Tensor& x) {
        require(x.rank() == 3, "upsample/shape", "upsample expects {C,H,W}");
        c_ = x.dim(0);
        h_ = x.dim(1);
        w_ = x.dim(2);
        Tensor y({c_, h_ * f_, w_ * f_});
        for (std::int64_t c = 0; c < c_; ++c)
            for (std::int64_t yy = 0; yy < h_ * f_; ++yy)
                for (std::int64_t xx = 0; xx < w_ * f_; ++xx)
                    y.at3(c, yy, xx) = x.at3(c, yy / f_, xx / f_);
        return y;
    }

    Tensor backward(const Tensor& dy) {
        Tensor dx({c_, h_, w_});
        for (std::int64_t c = 0; c < c_; ++c)
            for (std::int64_t yy = 0; yy < h_ * f_; ++yy)
                for (std::int64_t xx = 0; xx < w_ * f_; ++xx)
                    dx.at3(c, yy / f_, xx / f_) += dy.at3(c, yy, xx);
        return dx;
    }

private:
    std::int64_t f_ = 1, c_ = 0, h_ = 0, w_ = 0;
};

// ---------------------------------------------------------------------------
// inverted dropout

class Dropout {
public:
    Dropout() = default;
    explicit Dropout(double p) : p_(p) {}

    double rate() const { return p_; }

    // train=false is the identity. When frozen, the previous mask is reused
    // (gradient checks re-evaluate the loss under a fixed mask).
    Tensor forward(const Tensor& x, bool train, Rng& rng) {
        if (!train || p_ <= 0.0) {
            active_ = false;
            return x;
        }
        active_ = true;
        if (!frozen_) {
            mask_.resize(x.v.size());
            const double keep = 1.0 - p_;
            for (auto& m : mask_) m = rng.uniform() < keep ? 1.0 / keep : 0.0;
        }
        require(mask_.size() == x.v.size(), "dropout/shape", "frozen mask shape mismatch");
        Tensor y = x;
        for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] *= mask_[i];
        return y;
    }

    Tensor backward(const Tensor& dy) {
        if (!active_) return dy;
        Tensor dx = dy;
        for (std::size_t i = 0; i < dx.v.size(); ++i) dx.v[i] *= mask_[i];
        return dx;
    }

    void freeze(bool on) { frozen_ = on; }

private:
    double p_ = 0.0;
    bool active_ = false;
    bool frozen_ = false;
    std::vector<double> mask_;
};

}  // namespace tactsim
