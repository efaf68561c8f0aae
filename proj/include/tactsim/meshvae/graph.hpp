#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "tactsim/core/error.hpp"
#include "tactsim/core/rng.hpp"
#include "tactsim/core/types.hpp"
#include "tactsim/nn/tensor.hpp"

namespace tactsim {

// Compressed sparse row matrix, the workhorse for graph filtering and the
// sampling operators.
struct Csr {
    std::int64_t rows = 0, cols = 0;
    std::vector<std::int64_t> rowptr;  // rows+1
    std::vector<std::int64_t> col;
    std::vector<double> val;

    static Csr from_triplets(std::int64_t rows, std::int64_t cols,
                             std::vector<std::tuple<std::int64_t, std::int64_t, double>> t) {
        std::sort(t.begin(), t.end());
        Csr m;
        m.rows = rows;
        m.cols = cols;
        m.rowptr.assign(std::size_t(rows) + 1, 0);
        for (const auto& [i, j, v] : t) {
            require(i >= 0 && i < rows && j >= 0 && j < cols, "csr/range",
                    "triplet out of range");
            (void)v;
            m.rowptr[std::size_t(i) + 1]++;
        }
        for (std::int64_t i = 0; i < rows; ++i) m.rowptr[i + 1] += m.rowptr[i];
        m.col.resize(t.size());
        m.val.resize(t.size());
        for (std::size_t n = 0; n < t.size(); ++n) {
            m.col[n] = std::get<1>(t[n]);
            m.val[n] = std::get<2>(t[n]);
        }
        return m;
    }

    // y {rows, C} = this * x {cols, C}
    void mul(const Tensor& x, Tensor& y) const {
        const std::int64_t c = x.dim(1);
        require(x.dim(0) == cols, "csr/shape", "sparse multiply width mismatch");
        if (y.shape != std::vector<std::int64_t>{rows, c}) y = Tensor({rows, c});
        for (std::int64_t i = 0; i < rows; ++i) {
            double* out = y.data() + i * c;
            std::fill(out, out + c, 0.0);
            for (std::int64_t n = rowptr[i]; n < rowptr[i + 1]; ++n) {
                const double a = val[n];
                const double* in = x.data() + col[n] * c;
                for (std::int64_t k = 0; k < c; ++k) out[k] += a * in[k];
            }
        }
    }

    Tensor mul(const Tensor& x) const {
        Tensor y;
        mul(x, y);
        return y;
    }

    Csr transpose() const {
        std::vector<std::tuple<std::int64_t, std::int64_t, double>> t;
        t.reserve(val.size());
        for (std::int64_t i = 0; i < rows; ++i)
            for (std::int64_t n = rowptr[i]; n < rowptr[i + 1]; ++n)
                t.emplace_back(col[n], i, val[n]);
        return from_triplets(cols, rows, std::move(t));
    }

    MatRM dense() const {
        MatRM m = MatRM::Zero(rows, cols);
        for (std::int64_t i = 0; i < rows; ++i)
            for (std::int64_t n = rowptr[i]; n < rowptr[i + 1]; ++n) m(i, col[n]) += val[n];
        return m;
    }

    double row_sum(std::int64_t i) const {
        double s = 0;
        for (std::int64_t n = rowptr[i]; n < rowptr[i + 1]; ++n) s += val[n];
        return s;
    }
};

// Unique undirected edges from a face list.
inline std::vector<std::pair<std::int64_t, std::int64_t>> topology_edges(const Topology& topo) {
    std::set<std::pair<std::int64_t, std::int64_t>> edges;
    for (std::size_t f = 0; f + 2 < topo.faces.size(); f += 3) {
        std::int64_t a = topo.faces[f], b = topo.faces[f + 1], c = topo.faces[f + 2];
        edges.insert({std::min(a, b), std::max(a, b)});
        edges.insert({std::min(b, c), std::max(b, c)});
        edges.insert({std::min(a, c), std::max(a, c)});
    }
    return {edges.begin(), edges.end()};
}

inline bool topology_connected(const Topology& topo) {
    const std::int64_t v = topo.vertex_count;
    if (v <= 1) return true;
    std::vector<std::vector<std::int64_t>> adj(static_cast<std::size_t>(v));
    for (const auto& [a, b] : topology_edges(topo)) {
        adj[std::size_t(a)].push_back(b);
        adj[std::size_t(b)].push_back(a);
    }
    std::vector<char> seen(std::size_t(v), 0);
    std::vector<std::int64_t> stack{0};
    seen[0] = 1;
    std::int64_t count = 1;
    while (!stack.empty()) {
        std::int64_t u = stack.back();
        stack.pop_back();
        for (std::int64_t w : adj[std::size_t(u)])
            if (!seen[std::size_t(w)]) {
                seen[std::size_t(w)] = 1;
                ++count;
                stack.push_back(w);
            }
    }
    return count == v;
}

// Scaled symmetric-normalized graph Laplacian. With L = I - D^-1/2 A D^-1/2
// and the spectral bound lambda_max <= 2, the Chebyshev rescale
// 2 L / lambda_max - I collapses to -D^-1/2 A D^-1/2: symmetric, zero
// diagonal, spectral radius <= 1. Degree-zero vertices get empty rows.
inline Csr scaled_laplacian(const Topology& topo) {
    const std::int64_t v = topo.vertex_count;
    std::vector<double> degree(std::size_t(v), 0.0);
    auto edges = topology_edges(topo);
    for (const auto& [a, b] : edges) {
        degree[std::size_t(a)] += 1.0;
        degree[std::size_t(b)] += 1.0;
    }
    std::vector<std::tuple<std::int64_t, std::int64_t, double>> t;
    t.reserve(edges.size() * 2);
    for (const auto& [a, b] : edges) {
        const double w = -1.0 / std::sqrt(degree[std::size_t(a)] * degree[std::size_t(b)]);
        t.emplace_back(a, b, w);
        t.emplace_back(b, a, w);
    }
    return Csr::from_triplets(v, v, std::move(t));
}

// Largest-magnitude eigenvalue estimate by power iteration; used by tests to
// confirm the Chebyshev domain.
inline double spectral_radius(const Csr& m, int iters = 200, std::uint64_t seed = 7) {
    require(m.rows == m.cols, "csr/shape", "spectral radius of a non-square matrix");
    Tensor x({m.rows, 1});
    Rng rng(seed);
    for (auto& v : x.v) v = rng.uniform(-1, 1);
    double norm = x.vec().norm();
    if (norm == 0) return 0;
    x.vec() /= norm;
    double lambda = 0;
    Tensor y;
    for (int i = 0; i < iters; ++i) {
        m.mul(x, y);
        lambda = y.vec().norm();
        if (lambda < 1e-300) return 0;
        x.v = y.v;
        x.vec() /= lambda;
    }
    return lambda;
}

}  // namespace tactsim
