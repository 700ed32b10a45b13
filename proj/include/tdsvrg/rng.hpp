#pragma once

// Counter-based splittable random streams. A stream is keyed by a sequence of
// 64-bit identifiers (seed, epoch, purpose, ...) mixed through splitmix64, so
// every (run, epoch, purpose) tuple gets an independent, reproducible stream
// regardless of how much randomness the other streams consume.

#include <cstdint>
#include <vector>

#include "tdsvrg/linalg.hpp"

namespace tdsvrg {

namespace detail {
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
} // namespace detail

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix_key(0x6a09e667f3bcc908ULL, seed)) {}

    // Derive an independent stream; the parent stream is not advanced.
    Rng split(std::uint64_t key) const { return Rng(mix_key(state_, key), 0); }
    Rng split(std::uint64_t key1, std::uint64_t key2) const {
        return Rng(mix_key(mix_key(state_, key1), key2), 0);
    }

    std::uint64_t next_u64() { return detail::splitmix64_next(state_); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in {0, ..., n-1}
    std::size_t uniform_index(std::size_t n) {
        // modulo bias is negligible for the desk-scale n used here, but the
        // rejection loop keeps draws exact anyway
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return static_cast<std::size_t>(v % n);
    }

    double normal() {
        // Marsaglia polar method
        for (;;) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    // Draw an index from an explicit probability vector by inverse CDF.
    std::size_t discrete(const Vector& probs) {
        const double u = uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return probs.size() - 1;
    }

    // k distinct indices from {0,...,n-1} via partial Fisher-Yates.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        if (k > n) k = n;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + uniform_index(n - i);
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

private:
    Rng(std::uint64_t raw_state, int) : state_(raw_state) {}

    static std::uint64_t mix_key(std::uint64_t state, std::uint64_t key) {
        std::uint64_t s = state ^ (key + 0x9E3779B97F4A7C15ULL);
        detail::splitmix64_next(s);
        return s;
    }

    std::uint64_t state_;
};

// Stream purposes, used as split keys so the sub-streams of one epoch are
// independently reproducible.
enum class StreamPurpose : std::uint64_t {
    InnerLoop = 1,
    Estimation = 2,
    SnapshotPick = 3,
    Trajectory = 4,
    Instance = 5,
};

inline Rng stream_for(std::uint64_t run_seed, std::uint64_t epoch, StreamPurpose purpose) {
    return Rng(run_seed).split(epoch, static_cast<std::uint64_t>(purpose));
}

} // namespace tdsvrg
