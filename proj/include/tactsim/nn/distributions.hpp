#pragma once

#include <cmath>
#include <vector>

#include "tactsim/core/rng.hpp"
#include "tactsim/core/types.hpp"
#include "tactsim/nn/tensor.hpp"

namespace tactsim {

struct VaeLoss {
    double total = 0, mse = 0, kl = 0;
};

// KL(q || N(0, I)) for a diagonal Gaussian, summed over dimensions:
//   -0.5 * sum(1 + log_var - mean^2 - exp(log_var))
inline double kl_divergence(const Posterior& q) {
    q.validate();
    double kl = 0.0;
    for (std::size_t i = 0; i < q.mean.size(); ++i) {
        const double m = q.mean[i], lv = q.log_variance[i];
        kl += 1.0 + lv - m * m - std::exp(lv);
    }
    return -0.5 * kl;
}

// Reconstruction + beta-weighted KL. MSE averages over every element of the
// reconstruction target; KL sums over latent dimensions.
inline VaeLoss vae_gaussian_loss(const Tensor& x, const Tensor& recon, const Posterior& q,
                                 double beta) {
    VaeLoss l;
    l.mse = mse(x, recon);
    l.kl = kl_divergence(q);
    l.total = l.mse + beta * l.kl;
    return l;
}

// d KL / d mean and d KL / d log_var, scaled by `weight`.
inline void kl_backward(const Posterior& q, double weight, std::vector<double>& dmean,
                        std::vector<double>& dlogvar) {
    dmean.resize(q.mean.size());
    dlogvar.resize(q.mean.size());
    for (std::size_t i = 0; i < q.mean.size(); ++i) {
        dmean[i] = weight * q.mean[i];
        dlogvar[i] = weight * 0.5 * (std::exp(q.log_variance[i]) - 1.0);
    }
}

// Log-variance at or below this is treated as a collapsed (deterministic)
// dimension: the sample is the mean and no noise is drawn for it.
inline constexpr double kCollapsedLogVar = -80.0;

struct LatentSample {
    std::vector<double> z;
    std::vector<double> eps;  // noise actually used, 0 for collapsed dims
};

inline LatentSample reparameterize(const Posterior& q, Rng& rng) {
    q.validate();
    LatentSample s;
    s.z.resize(q.mean.size());
    s.eps.resize(q.mean.size());
    for (std::size_t i = 0; i < q.mean.size(); ++i) {
        if (q.log_variance[i] <= kCollapsedLogVar) {
            s.eps[i] = 0.0;
            s.z[i] = q.mean[i];
        } else {
            s.eps[i] = rng.normal();
            s.z[i] = q.mean[i] + std::exp(0.5 * q.log_variance[i]) * s.eps[i];
        }
    }
    return s;
}

// dz -> (dmean accumulated, dlogvar accumulated)
inline void reparameterize_backward(const Posterior& q, const LatentSample& s,
                                    const std::vector<double>& dz, std::vector<double>& dmean,
                                    std::vector<double>& dlogvar) {
    for (std::size_t i = 0; i < dz.size(); ++i) {
        dmean[i] += dz[i];
        if (q.log_variance[i] > kCollapsedLogVar)
            dlogvar[i] += dz[i] * s.eps[i] * 0.5 * std::exp(0.5 * q.log_variance[i]);
    }
}

// One reparameterized draw; collapsed dimensions pass the mean through.
inline LatentVec sample_latent(const Posterior& q, LatentSpace space, Rng& rng) {
    LatentVec z;
    z.space = space;
    z.values = reparameterize(q, rng).z;
    return z;
}

inline LatentVec posterior_mean(const Posterior& q, LatentSpace space) {
    LatentVec z;
    z.space = space;
    z.values = q.mean;
    return z;
}

}  // namespace tactsim
