#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tactsim/core/error.hpp"
#include "tactsim/core/io.hpp"
#include "tactsim/core/types.hpp"

namespace tactsim {

// Latent embedding dump for external analysis, one row per vector:
//   label,space,z0,...,z{D-1}
inline std::string latents_to_csv(const std::vector<LatentVec>& latents,
                                  const std::vector<std::string>& labels) {
    require(!latents.empty() && latents.size() == labels.size(), "export/shape",
            "need one label per latent vector");
    const std::size_t d = latents.front().dim();
    require(d > 0, "export/shape", "latent vectors are empty");
    for (const auto& z : latents)
        require(z.dim() == d, "export/shape", "latent dimensions differ across rows");
    for (const auto& l : labels)
        require(l.find(',') == std::string::npos && l.find('\n') == std::string::npos,
                "export/label", "labels must not contain commas or newlines");

    std::string out = "label,space";
    for (std::size_t i = 0; i < d; ++i) out += ",z" + std::to_string(i);
    out += '\n';
    for (std::size_t r = 0; r < latents.size(); ++r) {
        out += labels[r];
        out += ',';
        out += to_string(latents[r].space);
        for (const double v : latents[r].values) {
            out += ',';
            out += fmt_double(v);
        }
        out += '\n';
    }
    return out;
}

inline void export_latents(const std::vector<LatentVec>& latents,
                           const std::vector<std::string>& labels,
                           const std::filesystem::path& path) {
    write_file(path, latents_to_csv(latents, labels));
}

}  // namespace tactsim
