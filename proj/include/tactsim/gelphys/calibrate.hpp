#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tactsim/core/io.hpp"
#include "tactsim/core/rng.hpp"
#include "tactsim/gelphys/indenter.hpp"
#include "tactsim/gelphys/material.hpp"

namespace tactsim {

// Mean over trajectories of the mean absolute force-norm residual per frame.
inline double force_matching_loss(const std::vector<std::vector<double>>& real,
                                  const std::vector<std::vector<double>>& sim) {
    require(!real.empty() && real.size() == sim.size(), "force/shape",
            "trajectory counts differ");
    double acc = 0.0;
    for (std::size_t n = 0; n < real.size(); ++n) {
        require(!real[n].empty() && real[n].size() == sim[n].size(), "force/shape",
                "frame counts differ in trajectory " + std::to_string(n));
        double traj = 0.0;
        for (std::size_t t = 0; t < real[n].size(); ++t)
            traj += std::abs(real[n][t] - sim[n][t]);
        acc += traj / double(real[n].size());
    }
    return acc / double(real.size());
}

// Black-box simulator: force norms for a pose sequence under trial parameters.
using ForceSimulator = std::function<std::vector<double>(const std::vector<IndenterPose>&,
                                                         const GelParams&)>;

struct CalibrationTrial {
    std::int64_t trial = 0;
    GelParams params;
    double loss = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
};

struct CalibrationResult {
    GelParams best;
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<CalibrationTrial> log;
};

// Budgeted uniform random search within the bounds. Each trial draws its own
// parameter sample and trajectory subset from a trial-indexed stream, so a
// parallel run merged in trial order would reproduce the serial log. A trial
// whose simulation throws is logged as failed and skipped, not fatal.
// Degenerate (collapsed) bounds are allowed and pin the axis.
inline CalibrationResult calibrate(const ForceSimulator& sim,
                                   const std::vector<std::vector<IndenterPose>>& poses,
                                   const std::vector<std::vector<double>>& real_norms,
                                   const CalibrationBounds& bounds, std::int64_t trials,
                                   std::int64_t trajectories_per_trial, std::uint64_t seed) {
    require(trials >= 1, "calibration/trials", "need at least one trial");
    require(trajectories_per_trial >= 1, "calibration/trials",
            "need at least one trajectory per trial");
    require(!poses.empty() && poses.size() == real_norms.size(), "calibration/data",
            "pose and force trajectory counts differ");
    require(bounds.e_lo <= bounds.e_hi && bounds.nu_lo <= bounds.nu_hi &&
                bounds.mu_lo <= bounds.mu_hi,
            "calibration/bounds", "each bound needs lower <= upper");

    CalibrationResult result;
    const std::size_t subset =
        std::min<std::size_t>(poses.size(), std::size_t(trajectories_per_trial));

    for (std::int64_t t = 0; t < trials; ++t) {
        Rng rng(mix_seed(seed, 0xca11b, std::uint64_t(t)));
        CalibrationTrial trial;
        trial.trial = t;
        trial.params.elasticity_kpa = rng.uniform(bounds.e_lo, bounds.e_hi);
        trial.params.poisson_ratio = rng.uniform(bounds.nu_lo, bounds.nu_hi);
        trial.params.friction = rng.uniform(bounds.mu_lo, bounds.mu_hi);

        std::vector<std::size_t> order(poses.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        order.resize(subset);

        try {
            std::vector<std::vector<double>> real, simulated;
            real.reserve(subset);
            simulated.reserve(subset);
            for (std::size_t idx : order) {
                real.push_back(real_norms[idx]);
                simulated.push_back(sim(poses[idx], trial.params));
            }
            trial.loss = force_matching_loss(real, simulated);
            trial.ok = true;
        } catch (const Error&) {
            trial.ok = false;
        }

        if (trial.ok && trial.loss < result.best_loss) {
            result.best_loss = trial.loss;
            result.best = trial.params;
        }
        result.log.push_back(trial);
    }
    require(std::isfinite(result.best_loss), "calibration/all-failed",
            "every calibration trial failed");
    return result;
}

inline std::string trial_log_csv(const std::vector<CalibrationTrial>& log) {
    std::string out = "trial,E_kPa,nu,mu,loss\n";
    for (const auto& t : log) {
        out += std::to_string(t.trial) + ',' + fmt_double(t.params.elasticity_kpa) + ',' +
               fmt_double(t.params.poisson_ratio) + ',' + fmt_double(t.params.friction) +
               ',' + fmt_double(t.ok ? t.loss : std::numeric_limits<double>::quiet_NaN()) +
               '\n';
    }
    return out;
}

inline void write_trial_log_csv(const std::filesystem::path& path,
                                const std::vector<CalibrationTrial>& log) {
    write_file(path, trial_log_csv(log));
}

inline void write_calibration_json(const std::filesystem::path& path,
                                   const CalibrationResult& result) {
    json j;
    j["best"] = {{"E_kPa", result.best.elasticity_kpa},
                 {"nu", result.best.poisson_ratio},
                 {"mu", result.best.friction}};
    j["best_loss"] = result.best_loss;
    j["trials"] = result.log.size();
    std::int64_t failed = 0;
    for (const auto& t : result.log)
        if (!t.ok) ++failed;
    j["failed_trials"] = failed;
    write_file(path, j.dump(2) + "\n");
}

}  // namespace tactsim
