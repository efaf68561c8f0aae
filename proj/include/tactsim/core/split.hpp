#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tactsim/core/error.hpp"
#include "tactsim/core/rng.hpp"
#include "tactsim/core/types.hpp"

namespace tactsim {

struct SplitFractions {
    double train = 0.8;
    double val = 0.1;
    double test_a = 0.1;
    double test_b = 0.0;

    void validate() const {
        for (double f : {train, val, test_a, test_b})
            require(f >= 0.0, "split/fraction", "split fractions must be non-negative");
        const double sum = train + val + test_a + test_b;
        require(std::abs(sum - 1.0) <= 1e-9, "split/fraction",
                "split fractions must sum to 1 (got " + std::to_string(sum) + ")");
    }
};

// Trajectory-level split. Any trajectory touching a held-out sensor or
// indenter goes to test_b in full; the remaining pool is shuffled with the
// seed and divided by the first three fractions (renormalized, rounded by
// largest remainder). Whole trajectories move together, so no interaction
// leaks across parts.
inline DatasetSplit split_dataset(const std::vector<TrajectorySample>& samples,
                                  const SplitFractions& fractions,
                                  const std::set<std::string>& holdout_sensors,
                                  const std::set<std::string>& holdout_indenters,
                                  std::uint64_t seed) {
    require(!samples.empty(), "split/empty", "cannot split an empty sample list");
    fractions.validate();
    if (fractions.test_b > 0.0)
        require(!holdout_sensors.empty() || !holdout_indenters.empty(), "split/holdout",
                "test_b fraction is positive but no holdout sensors or indenters given");

    // insertion-ordered trajectory list, first appearance wins
    std::vector<std::string> order;
    std::map<std::string, bool> held;
    for (const auto& s : samples) {
        require(!s.trajectory_id.empty(), "split/bad-id", "sample with empty trajectory id");
        auto [it, inserted] = held.emplace(s.trajectory_id, false);
        if (inserted) order.push_back(s.trajectory_id);
        if (holdout_sensors.count(s.sensor_id) || holdout_indenters.count(s.indenter_id))
            it->second = true;
    }

    DatasetSplit split;
    std::vector<std::string> pool;
    for (const auto& id : order) {
        if (held[id])
            split.test_b.insert(id);
        else
            pool.push_back(id);
    }

    const double wsum = fractions.train + fractions.val + fractions.test_a;
    if (pool.empty()) {
        require(wsum == 0.0 || fractions.train == 0.0, "split/unsatisfiable",
                "train fraction is positive but every trajectory is held out");
        split.validate();
        return split;
    }
    require(wsum > 0.0, "split/unsatisfiable",
            "no fraction assigned to the non-held-out trajectory pool");

    Rng rng(seed);
    rng.shuffle(pool);

    const std::size_t m = pool.size();
    std::array<double, 3> w = {fractions.train / wsum, fractions.val / wsum,
                               fractions.test_a / wsum};
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        double exact = w[i] * double(m);
        counts[i] = std::size_t(std::floor(exact + 1e-12));
        frac[i] = exact - double(counts[i]);
        assigned += counts[i];
    }
    while (assigned < m) {  // largest remainder, ties to the earlier part
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (frac[i] > frac[best] + 1e-15) best = i;
        counts[best] += 1;
        frac[best] = -1.0;
        assigned += 1;
    }

    std::size_t at = 0;
    for (std::size_t i = 0; i < counts[0]; ++i) split.train.insert(pool[at++]);
    for (std::size_t i = 0; i < counts[1]; ++i) split.val.insert(pool[at++]);
    for (std::size_t i = 0; i < counts[2]; ++i) split.test_a.insert(pool[at++]);

    split.validate();
    return split;
}

}  // namespace tactsim
