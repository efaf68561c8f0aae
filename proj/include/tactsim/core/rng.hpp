#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace tactsim {

// splitmix64 finalizer; combines seeds into decorrelated child seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a + 0x9e3779b97f4a7c15ull * (b + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

// Deterministic random stream. Every random choice in the toolkit flows
// through this class. mt19937_64 output is pinned by the standard, and the
// uniform/normal transforms below replace the std:: distribution classes,
// whose output is implementation-defined; streams are therefore identical
// across compilers and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Floor method: bias < n * 2^-53.
    std::uint64_t below(std::uint64_t n) {
        return std::min<std::uint64_t>(n - 1, std::uint64_t(uniform() * double(n)));
    }

    // Standard normal via Box-Muller; the pair is cached, so draw order is
    // part of the stream contract.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925287 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    // Child stream derived from a tag; does not disturb this stream.
    Rng fork(std::uint64_t tag) const { return Rng(mix_seed(base_seed_tag(), tag)); }

private:
    std::uint64_t base_seed_tag() const {
        // Engine state is opaque; reserve a copy to derive a stable tag.
        std::mt19937_64 copy = engine_;
        return copy();
    }

    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace tactsim
