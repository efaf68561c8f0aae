#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tactsim/core/error.hpp"
#include "tactsim/core/io.hpp"
#include "tactsim/core/types.hpp"

namespace tactsim {

// Geometry error in millimetres.
struct MeshErrorReport {
    double rmse = 0.0;       // over all coordinates
    double l1 = 0.0;         // over all coordinates
    double euclidean = 0.0;  // mean per-vertex displacement norm

    json to_json() const {
        json j;
        j["rmse"] = rmse;
        j["l1"] = l1;
        j["euclidean"] = euclidean;
        return j;
    }
};

inline MeshErrorReport mesh_metrics(const TriMesh& a, const TriMesh& b) {
    require(a.topology != nullptr && b.topology != nullptr &&
                a.topology_id() == b.topology_id() &&
                a.vertices.size() == b.vertices.size(),
            "metrics/topology", "meshes are not on the same topology");
    require(!a.vertices.empty(), "metrics/topology", "meshes have no vertices");

    MeshErrorReport r;
    double sq = 0.0, l1 = 0.0, euc = 0.0;
    const std::int64_t v_count = a.vertex_count();
    for (std::int64_t v = 0; v < v_count; ++v) {
        double n2 = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double d = double(a.vertices[std::size_t(3 * v + c)]) -
                             double(b.vertices[std::size_t(3 * v + c)]);
            sq += d * d;
            l1 += std::abs(d);
            n2 += d * d;
        }
        euc += std::sqrt(n2);
    }
    const double coords = double(v_count) * 3.0;
    r.rmse = std::sqrt(sq / coords);
    r.l1 = l1 / coords;
    r.euclidean = euc / double(v_count);
    return r;
}

struct ForceMae {
    double fx = 0.0;
    double fy = 0.0;
    double fz = 0.0;
    double magnitude = 0.0;

    json to_json() const {
        json j;
        j["fx"] = fx;
        j["fy"] = fy;
        j["fz"] = fz;
        j["magnitude"] = magnitude;
        return j;
    }
};

inline ForceMae force_mae(const std::vector<ForceVec>& pred,
                          const std::vector<ForceVec>& truth) {
    require(pred.size() == truth.size() && !pred.empty(), "metrics/length",
            "force lists must be non-empty and of equal length");
    ForceMae r;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        r.fx += std::abs(pred[i].fx - truth[i].fx);
        r.fy += std::abs(pred[i].fy - truth[i].fy);
        r.fz += std::abs(pred[i].fz - truth[i].fz);
        r.magnitude += std::abs(pred[i].norm() - truth[i].norm());
    }
    const double n = double(pred.size());
    r.fx /= n;
    r.fy /= n;
    r.fz /= n;
    r.magnitude /= n;
    return r;
}

// Cyclic mesh->image->mesh experiment trace: per cycle, similarity to the
// original and change against the previous cycle.
struct DriftReport {
    std::vector<double> ssim_abs;   // cycle image vs original image
    std::vector<double> rmse_abs;   // cycle mesh vs original mesh, mm
    std::vector<double> ssim_step;  // cycle image vs previous cycle's image
    std::vector<double> rmse_step;  // cycle mesh vs previous cycle's mesh, mm

    std::size_t cycles() const { return ssim_abs.size(); }

    void validate() const {
        require(ssim_abs.size() == rmse_abs.size() &&
                    ssim_abs.size() == ssim_step.size() &&
                    ssim_abs.size() == rmse_step.size(),
                "metrics/length", "drift series lengths differ");
    }

    json to_json() const {
        validate();
        json j;
        j["ssim_abs"] = ssim_abs;
        j["rmse_abs"] = rmse_abs;
        j["ssim_step"] = ssim_step;
        j["rmse_step"] = rmse_step;
        return j;
    }

    std::string to_csv() const {
        validate();
        std::string out = "cycle,ssim_abs,rmse_abs,ssim_step,rmse_step\n";
        for (std::size_t i = 0; i < cycles(); ++i) {
            out += std::to_string(i + 1);
            out += ',';
            out += fmt_double(ssim_abs[i]);
            out += ',';
            out += fmt_double(rmse_abs[i]);
            out += ',';
            out += fmt_double(ssim_step[i]);
            out += ',';
            out += fmt_double(rmse_step[i]);
            out += '\n';
        }
        return out;
    }
};

}  // namespace tactsim
