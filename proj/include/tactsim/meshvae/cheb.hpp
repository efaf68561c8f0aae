#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tactsim/meshvae/graph.hpp"
#include "tactsim/nn/params.hpp"
#include "tactsim/nn/tensor.hpp"

namespace tactsim {

// Chebyshev basis of the input, stacked column-blockwise:
//   S = [T_0(L~)X | T_1(L~)X | ... | T_{K-1}(L~)X],  {V, K*Cin}
// with T_0 = X, T_1 = L~ X, T_k = 2 L~ T_{k-1} - T_{k-2}.
inline Tensor cheb_basis(const Csr& lap, const Tensor& x, std::int64_t order) {
    require(x.rank() == 2, "cheb/shape", "cheb input must be {V, C}");
    require(lap.rows == lap.cols && lap.rows == x.dim(0), "cheb/shape",
            "laplacian does not match vertex count");
    require(order >= 1, "cheb/order", "chebyshev order must be positive");
    const std::int64_t v = x.dim(0), c = x.dim(1);
    Tensor s({v, order * c});
    auto copy_block = [&](std::int64_t k, const Tensor& t) {
        for (std::int64_t i = 0; i < v; ++i)
            std::copy(t.data() + i * c, t.data() + (i + 1) * c,
                      s.data() + i * order * c + k * c);
    };
    Tensor prev2 = x;
    copy_block(0, prev2);
    if (order == 1) return s;
    Tensor prev1 = lap.mul(x);
    copy_block(1, prev1);
    Tensor cur;
    for (std::int64_t k = 2; k < order; ++k) {
        lap.mul(prev1, cur);
        cur.vec() = 2.0 * cur.vec() - prev2.vec();
        copy_block(k, cur);
        prev2 = prev1;
        prev1 = cur;
    }
    return s;
}

// Standalone spectral filter: Y = sum_k T_k(L~) X W_k + b.
// w points at {K, Cin, Cout}, b at {Cout}.
inline Tensor cheb_conv(const Csr& lap, const Tensor& x, const double* w, const double* b,
                        std::int64_t order, std::int64_t cin, std::int64_t cout) {
    require(x.dim(1) == cin, "cheb/shape", "input channel mismatch");
    Tensor s = cheb_basis(lap, x, order);
    const std::int64_t v = x.dim(0);
    Tensor y({v, cout});
    Eigen::Map<const MatRM> S(s.data(), v, order * cin);
    Eigen::Map<const MatRM> W(w, order * cin, cout);
    Eigen::Map<MatRM> Y(y.data(), v, cout);
    Y.noalias() = S * W;
    if (b != nullptr) {
        Eigen::Map<const VecX> bias(b, cout);
        Y.rowwise() += bias.transpose();
    }
    return y;
}

// Learnable layer wrapper with the matching backward pass.
class ChebConv {
public:
    ChebConv() = default;

    ChebConv(ParamStore& store, const std::string& name, std::int64_t order, std::int64_t cin,
             std::int64_t cout, Rng& rng)
        : store_(&store), order_(order), cin_(cin), cout_(cout) {
        w_ = store.add(name + ".w", {order, cin, cout});
        b_ = store.add(name + ".b", {cout});
        const double limit = std::sqrt(6.0 / double(order * cin + cout));
        store.init_uniform(w_, std::size_t(order * cin * cout), limit, rng);
    }

    std::int64_t cout() const { return cout_; }

    Tensor forward(const Csr& lap, const Tensor& x) {
        lap_ = &lap;
        v_ = x.dim(0);
        basis_ = cheb_basis(lap, x, order_);
        Tensor y({v_, cout_});
        Eigen::Map<const MatRM> S(basis_.data(), v_, order_ * cin_);
        Eigen::Map<const MatRM> W(store_->value_ptr(w_), order_ * cin_, cout_);
        Eigen::Map<const VecX> b(store_->value_ptr(b_), cout_);
        Eigen::Map<MatRM> Y(y.data(), v_, cout_);
        Y.noalias() = S * W;
        Y.rowwise() += b.transpose();
        return y;
    }

    Tensor backward(const Tensor& dy) {
        Eigen::Map<const MatRM> dY(dy.data(), v_, cout_);
        Eigen::Map<const MatRM> S(basis_.data(), v_, order_ * cin_);
        Eigen::Map<MatRM> dW(store_->grad_ptr(w_), order_ * cin_, cout_);
        Eigen::Map<VecX> db(store_->grad_ptr(b_), cout_);
        dW.noalias() += S.transpose() * dY;
        db += dY.colwise().sum();

        // dS blocks, then the adjoint of the Chebyshev recurrence
        Eigen::Map<const MatRM> W(store_->value_ptr(w_), order_ * cin_, cout_);
        Tensor ds({v_, order_ * cin_});
        Eigen::Map<MatRM> dS(ds.data(), v_, order_ * cin_);
        dS.noalias() = dY * W.transpose();

        std::vector<Tensor> blocks(static_cast<std::size_t>(order_));
        for (std::int64_t k = 0; k < order_; ++k) {
            blocks[std::size_t(k)] = Tensor({v_, cin_});
            for (std::int64_t i = 0; i < v_; ++i)
                std::copy(ds.data() + i * order_ * cin_ + k * cin_,
                          ds.data() + i * order_ * cin_ + (k + 1) * cin_,
                          blocks[std::size_t(k)].data() + i * cin_);
        }
        Tensor tmp;
        for (std::int64_t k = order_ - 1; k >= 2; --k) {
            lap_->mul(blocks[std::size_t(k)], tmp);
            blocks[std::size_t(k - 1)].vec() += 2.0 * tmp.vec();
            blocks[std::size_t(k - 2)].vec() -= blocks[std::size_t(k)].vec();
        }
        Tensor dx = blocks[0];
        if (order_ >= 2) {
            lap_->mul(blocks[1], tmp);
            dx.vec() += tmp.vec();
        }
        return dx;
    }

private:
    ParamStore* store_ = nullptr;
    const Csr* lap_ = nullptr;
    std::int64_t order_ = 0, cin_ = 0, cout_ = 0, v_ = 0;
    std::size_t w_ = 0, b_ = 0;
    Tensor basis_;
};

}  // namespace tactsim
