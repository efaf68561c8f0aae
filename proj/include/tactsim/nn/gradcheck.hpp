#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tactsim/core/error.hpp"

namespace tactsim {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

// Central-difference check of `analytic` against `loss`, which must read the
// live contents of `theta`. When theta is large, a deterministic stride
// subsample of at most max_checks coordinates is used.
template <typename LossFn>
GradCheckReport check_gradients(std::vector<double>& theta, LossFn&& loss,
                                const std::vector<double>& analytic,
                                std::size_t max_checks = 512, double eps_scale = 1e-5) {
    require(theta.size() == analytic.size(), "gradcheck/size",
            "analytic gradient size mismatch");
    require(!theta.empty(), "gradcheck/size", "nothing to check");

    GradCheckReport rep;
    const std::size_t n = theta.size();
    const std::size_t step = n <= max_checks ? 1 : (n + max_checks - 1) / max_checks;
    for (std::size_t i = 0; i < n; i += step) {
        const double orig = theta[i];
        const double eps = eps_scale * std::max(1.0, std::abs(orig));
        theta[i] = orig + eps;
        const double up = loss();
        theta[i] = orig - eps;
        const double down = loss();
        theta[i] = orig;
        const double numeric = (up - down) / (2.0 * eps);
        const double a = analytic[i];
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
        const double rel = std::abs(a - numeric) / denom;
        ++rep.checked;
        if (rel > rep.max_rel_err) {
            rep.max_rel_err = rel;
            rep.worst_index = i;
            rep.worst_analytic = a;
            rep.worst_numeric = numeric;
        }
    }
    return rep;
}

}  // namespace tactsim
