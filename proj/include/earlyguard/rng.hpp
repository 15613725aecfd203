#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace earlyguard {

// Seed mixing (splitmix64). Used to derive independent child streams from a
// master seed so that work items can run in any order, on any number of
// threads, without changing results.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

/// FNV-1a 64-bit digest, used for run-manifest file fingerprints.
std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Deterministic random stream. The engine is mt19937_64 (fully specified by
/// the standard); all value mappings are implemented here rather than with
/// std distributions, whose output sequences are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi], both inclusive. Mask rejection, no modulo bias.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Standard normal via Box-Muller. Two engine draws per call, no cached state.
    double normal();

    double normal(double mu, double sd) { return mu + sd * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    template <typename C>
    typename C::value_type pick(const C& c) {
        return c[static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(c.size()) - 1))];
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace earlyguard
