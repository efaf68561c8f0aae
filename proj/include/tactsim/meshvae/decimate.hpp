#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "tactsim/core/types.hpp"
#include "tactsim/meshvae/graph.hpp"

namespace tactsim {

namespace detail {

// Symmetric 4x4 quadric, upper triangle.
struct Quadric {
    std::array<double, 10> q{};

    void add_plane(double a, double b, double c, double d, double w) {
        const double p[4] = {a, b, c, d};
        int n = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) q[std::size_t(n++)] += w * p[i] * p[j];
    }

    void add(const Quadric& o) {
        for (std::size_t i = 0; i < q.size(); ++i) q[i] += o.q[i];
    }

    double eval(double x, double y, double z) const {
        const double p[4] = {x, y, z, 1.0};
        double s = 0;
        int n = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) {
                const double term = q[std::size_t(n++)] * p[i] * p[j];
                s += i == j ? term : 2.0 * term;
            }
        return s;
    }
};

struct Vec3 {
    double x = 0, y = 0, z = 0;
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
};

inline Vec3 vertex_at(const std::vector<float>& verts, std::int64_t i) {
    return {double(verts[std::size_t(3 * i)]), double(verts[std::size_t(3 * i + 1)]),
            double(verts[std::size_t(3 * i + 2)])};
}

// Closest point on triangle abc to p, returned as barycentric weights.
// Ericson, Real-Time Collision Detection, 5.1.5.
inline std::array<double, 3> closest_point_barycentric(const Vec3& p, const Vec3& a,
                                                       const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return {1, 0, 0};
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return {0, 1, 0};
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) {
        const double v = d1 / (d1 - d3);
        return {1 - v, v, 0};
    }
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return {0, 0, 1};
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) {
        const double w = d2 / (d2 - d6);
        return {1 - w, 0, w};
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return {0, 1 - w, w};
    }
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    return {1 - v - w, v, w};
}

}  // namespace detail

struct DecimationLevel {
    std::shared_ptr<Topology> topology;  // coarse connectivity
    std::vector<float> vertices;         // coarse positions (a subset of the fine ones)
    std::vector<std::int64_t> kept;      // fine index of each coarse vertex, ascending
    Csr down;                            // Vc x V binary selection, rows sum to 1
    Csr up;                              // V x Vc barycentric, rows sum to 1
};

// Quadric-error edge collapse to ceil(V/2) vertices. Collapses never move
// vertices: one endpoint survives at its original position, so the
// downsampling operator is a pure row-selection. A small edge-length term
// regularizes flat regions, where pure quadric cost is identically zero and
// would otherwise leave the collapse order to index ties.
inline DecimationLevel decimate_half(const Topology& topo, const std::vector<float>& verts,
                                     const std::string& coarse_id) {
    using detail::Quadric;
    using detail::Vec3;
    const std::int64_t v_count = topo.vertex_count;
    require(std::int64_t(verts.size()) == v_count * 3, "mesh/vertex-count",
            "vertex array does not match topology");
    const std::int64_t target = (v_count + 1) / 2;

    std::vector<Quadric> quadrics(static_cast<std::size_t>(v_count));
    for (std::size_t f = 0; f + 2 < topo.faces.size(); f += 3) {
        const std::int64_t ia = topo.faces[f], ib = topo.faces[f + 1], ic = topo.faces[f + 2];
        const Vec3 a = detail::vertex_at(verts, ia), b = detail::vertex_at(verts, ib),
                   c = detail::vertex_at(verts, ic);
        Vec3 n = (b - a).cross(c - a);
        const double area2 = n.norm();
        if (area2 < 1e-18) continue;
        n = n * (1.0 / area2);
        const double d = -n.dot(a);
        const double w = 0.5 * area2;  // face area
        quadrics[std::size_t(ia)].add_plane(n.x, n.y, n.z, d, w);
        quadrics[std::size_t(ib)].add_plane(n.x, n.y, n.z, d, w);
        quadrics[std::size_t(ic)].add_plane(n.x, n.y, n.z, d, w);
    }

    std::vector<std::set<std::int64_t>> adj(static_cast<std::size_t>(v_count));
    for (const auto& [a, b] : topology_edges(topo)) {
        adj[std::size_t(a)].insert(b);
        adj[std::size_t(b)].insert(a);
    }

    std::vector<char> alive(std::size_t(v_count), 1);
    std::vector<std::int64_t> version(std::size_t(v_count), 0);
    std::vector<std::int64_t> merged_into(std::size_t(v_count), -1);

    struct Candidate {
        double cost;
        std::int64_t keep, drop;
        std::int64_t version_keep, version_drop;
        bool operator>(const Candidate& o) const {
            if (cost != o.cost) return cost > o.cost;
            if (keep != o.keep) return keep > o.keep;
            return drop > o.drop;
        }
    };
    std::priority_queue<Candidate, std::vector<Candidate>, std::greater<Candidate>> heap;

    const double kLengthWeight = 1e-6;
    auto push_edge = [&](std::int64_t u, std::int64_t w) {
        Quadric q = quadrics[std::size_t(u)];
        q.add(quadrics[std::size_t(w)]);
        const Vec3 pu = detail::vertex_at(verts, u), pw = detail::vertex_at(verts, w);
        const double len2 = (pu - pw).dot(pu - pw);
        const double cost_u = std::max(0.0, q.eval(pu.x, pu.y, pu.z)) + kLengthWeight * len2;
        const double cost_w = std::max(0.0, q.eval(pw.x, pw.y, pw.z)) + kLengthWeight * len2;
        std::int64_t keep = cost_u <= cost_w ? u : w;
        std::int64_t drop = keep == u ? w : u;
        heap.push({std::min(cost_u, cost_w), keep, drop, version[std::size_t(keep)],
                   version[std::size_t(drop)]});
    };
    for (const auto& [a, b] : topology_edges(topo)) push_edge(a, b);

    std::int64_t alive_count = v_count;
    while (alive_count > target && !heap.empty()) {
        Candidate c = heap.top();
        heap.pop();
        const auto k = std::size_t(c.keep), d = std::size_t(c.drop);
        if (!alive[k] || !alive[d]) continue;
        if (version[k] != c.version_keep || version[d] != c.version_drop) {
            if (adj[k].count(c.drop)) push_edge(c.keep, c.drop);  // recompute once
            continue;
        }
        // collapse drop into keep
        alive[d] = 0;
        merged_into[d] = c.keep;
        quadrics[k].add(quadrics[d]);
        for (std::int64_t nb : adj[d]) {
            adj[std::size_t(nb)].erase(c.drop);
            if (nb != c.keep) {
                adj[std::size_t(nb)].insert(c.keep);
                adj[k].insert(nb);
            }
        }
        adj[d].clear();
        adj[k].erase(c.drop);
        version[k] += 1;
        for (std::int64_t nb : adj[k]) push_edge(c.keep, nb);
        --alive_count;
    }

    // resolve collapse chains
    auto find_root = [&](std::int64_t i) {
        while (merged_into[std::size_t(i)] >= 0) i = merged_into[std::size_t(i)];
        return i;
    };

    DecimationLevel out;
    std::vector<std::int64_t> coarse_index(std::size_t(v_count), -1);
    for (std::int64_t i = 0; i < v_count; ++i)
        if (alive[std::size_t(i)]) {
            coarse_index[std::size_t(i)] = std::int64_t(out.kept.size());
            out.kept.push_back(i);
        }

    out.topology = std::make_shared<Topology>();
    out.topology->id = coarse_id;
    out.topology->vertex_count = std::int64_t(out.kept.size());
    std::set<std::array<std::uint32_t, 3>> seen_faces;
    for (std::size_t f = 0; f + 2 < topo.faces.size(); f += 3) {
        std::int64_t a = find_root(topo.faces[f]);
        std::int64_t b = find_root(topo.faces[f + 1]);
        std::int64_t c = find_root(topo.faces[f + 2]);
        if (a == b || b == c || a == c) continue;
        std::uint32_t ca = std::uint32_t(coarse_index[std::size_t(a)]);
        std::uint32_t cb = std::uint32_t(coarse_index[std::size_t(b)]);
        std::uint32_t cc = std::uint32_t(coarse_index[std::size_t(c)]);
        // canonical rotation keeps orientation while deduplicating
        std::array<std::uint32_t, 3> face{ca, cb, cc};
        std::size_t lo = 0;
        for (std::size_t i = 1; i < 3; ++i)
            if (face[i] < face[lo]) lo = i;
        std::array<std::uint32_t, 3> canon{face[lo], face[(lo + 1) % 3], face[(lo + 2) % 3]};
        if (seen_faces.insert(canon).second) {
            out.topology->faces.insert(out.topology->faces.end(), canon.begin(), canon.end());
        }
    }

    out.vertices.resize(out.kept.size() * 3);
    for (std::size_t i = 0; i < out.kept.size(); ++i)
        for (int d = 0; d < 3; ++d)
            out.vertices[3 * i + std::size_t(d)] = verts[std::size_t(3 * out.kept[i] + d)];

    // down: select kept rows
    {
        std::vector<std::tuple<std::int64_t, std::int64_t, double>> t;
        for (std::size_t i = 0; i < out.kept.size(); ++i)
            t.emplace_back(std::int64_t(i), out.kept[i], 1.0);
        out.down = Csr::from_triplets(out.topology->vertex_count, v_count, std::move(t));
    }

    // up: kept vertices map to themselves; removed ones get barycentric
    // weights of the closest point on the coarse surface
    {
        std::vector<std::tuple<std::int64_t, std::int64_t, double>> t;
        for (std::int64_t i = 0; i < v_count; ++i) {
            if (alive[std::size_t(i)]) {
                t.emplace_back(i, coarse_index[std::size_t(i)], 1.0);
                continue;
            }
            const Vec3 p = detail::vertex_at(verts, i);
            double best_d2 = std::numeric_limits<double>::infinity();
            std::array<std::int64_t, 3> best_idx{-1, -1, -1};
            std::array<double, 3> best_w{1, 0, 0};
            const auto& cf = out.topology->faces;
            for (std::size_t f = 0; f + 2 < cf.size(); f += 3) {
                const Vec3 a = detail::vertex_at(out.vertices, cf[f]);
                const Vec3 b = detail::vertex_at(out.vertices, cf[f + 1]);
                const Vec3 c = detail::vertex_at(out.vertices, cf[f + 2]);
                auto w = detail::closest_point_barycentric(p, a, b, c);
                const Vec3 q = a * w[0] + b * w[1] + c * w[2];
                const double d2 = (p - q).dot(p - q);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best_idx = {std::int64_t(cf[f]), std::int64_t(cf[f + 1]),
                                std::int64_t(cf[f + 2])};
                    best_w = w;
                }
            }
            if (best_idx[0] < 0) {
                // no coarse faces at all: fall back to the collapse target
                t.emplace_back(i, coarse_index[std::size_t(find_root(i))], 1.0);
                continue;
            }
            double wsum = best_w[0] + best_w[1] + best_w[2];
            std::map<std::int64_t, double> row;  // merge duplicate columns
            for (int k = 0; k < 3; ++k)
                if (best_w[std::size_t(k)] > 1e-12)
                    row[best_idx[std::size_t(k)]] += best_w[std::size_t(k)] / wsum;
            for (const auto& [j, w] : row) t.emplace_back(i, j, w);
        }
        out.up = Csr::from_triplets(v_count, out.topology->vertex_count, std::move(t));
    }
    return out;
}

// One resolution level of the mesh filter pyramid.
struct GraphLevel {
    std::shared_ptr<const Topology> topology;
    std::vector<float> vertices;
    Csr lap;  // scaled laplacian at this level
    // to the next coarser level (absent on the last entry)
    Csr down, down_t;
    Csr up, up_t;
};

struct MeshGraphStack {
    std::vector<GraphLevel> levels;  // levels.size() == pool steps + 1

    std::int64_t pool_steps() const { return std::int64_t(levels.size()) - 1; }
    const Topology& base_topology() const { return *levels.front().topology; }
};

// Builds the pyramid: reference topology plus `steps` halvings, with the
// scaled Laplacian of every level and the transfer operators between them.
inline MeshGraphStack build_graph_stack(std::shared_ptr<const Topology> topo,
                                        const std::vector<float>& reference_vertices,
                                        std::int64_t steps) {
    require(topo != nullptr && topo->vertex_count > 0, "mesh/empty", "empty topology");
    topo->validate();
    require(topo->has_faces(), "mesh/no-faces", "graph stack needs face connectivity");
    require(topology_connected(*topo), "mesh/disconnected",
            "disconnected topology rejected");
    require(steps >= 1, "graph/levels", "graph stack needs at least one pooling step");

    MeshGraphStack stack;
    GraphLevel base;
    base.topology = topo;
    base.vertices = reference_vertices;
    base.lap = scaled_laplacian(*topo);
    stack.levels.push_back(std::move(base));

    for (std::int64_t s = 0; s < steps; ++s) {
        GraphLevel& fine = stack.levels.back();
        auto dec = decimate_half(*fine.topology, fine.vertices,
                                 topo->id + "_d" + std::to_string(s + 1));
        fine.down = dec.down;
        fine.down_t = dec.down.transpose();
        fine.up = dec.up;
        fine.up_t = dec.up.transpose();
        GraphLevel next;
        next.topology = dec.topology;
        next.vertices = dec.vertices;
        next.lap = scaled_laplacian(*dec.topology);
        stack.levels.push_back(std::move(next));
    }
    return stack;
}

}  // namespace tactsim
