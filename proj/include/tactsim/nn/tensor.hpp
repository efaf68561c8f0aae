#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <numeric>
#include <vector>

#include "tactsim/core/error.hpp"

namespace tactsim {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatCM = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

// Dense row-major tensor of doubles. Rank 1 for vectors, {C,H,W} for feature
// maps, {V,C} for per-vertex features.
struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(std::vector<std::int64_t> s) : shape(std::move(s)) {
        v.assign(std::size_t(numel_of(shape)), 0.0);
    }

    static std::int64_t numel_of(const std::vector<std::int64_t>& s) {
        std::int64_t n = 1;
        for (auto d : s) n *= d;
        return n;
    }

    static Tensor zeros(std::vector<std::int64_t> s) { return Tensor(std::move(s)); }

    std::int64_t numel() const { return std::int64_t(v.size()); }
    std::int64_t dim(std::size_t i) const { return shape.at(i); }
    std::size_t rank() const { return shape.size(); }

    double* data() { return v.data(); }
    const double* data() const { return v.data(); }

    void fill(double x) { std::fill(v.begin(), v.end(), x); }

    // {C,H,W} accessor
    double& at3(std::int64_t c, std::int64_t y, std::int64_t x) {
        return v[std::size_t((c * shape[1] + y) * shape[2] + x)];
    }
    double at3(std::int64_t c, std::int64_t y, std::int64_t x) const {
        return v[std::size_t((c * shape[1] + y) * shape[2] + x)];
    }

    Eigen::Map<MatRM> mat(std::int64_t rows, std::int64_t cols) {
        require(rows * cols == numel(), "tensor/shape", "matrix view size mismatch");
        return Eigen::Map<MatRM>(v.data(), rows, cols);
    }
    Eigen::Map<const MatRM> mat(std::int64_t rows, std::int64_t cols) const {
        require(rows * cols == numel(), "tensor/shape", "matrix view size mismatch");
        return Eigen::Map<const MatRM>(v.data(), rows, cols);
    }
    Eigen::Map<VecX> vec() { return Eigen::Map<VecX>(v.data(), numel()); }
    Eigen::Map<const VecX> vec() const { return Eigen::Map<const VecX>(v.data(), numel()); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

inline double mse(const Tensor& a, const Tensor& b) {
    require(a.same_shape(b), "tensor/shape", "mse over mismatched shapes");
    require(a.numel() > 0, "tensor/empty", "mse over empty tensors");
    return (a.vec() - b.vec()).squaredNorm() / double(a.numel());
}

}  // namespace tactsim
