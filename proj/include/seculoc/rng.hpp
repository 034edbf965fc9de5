#pragma once
// Seeded random draws with a fixed engine (std::mt19937_64) and hand-rolled
// value mappings, so a given seed replays the exact same sequence everywhere.
// The standard library distributions are deliberately avoided: their output
// is implementation-defined and would break replay across toolchains.
//
// Draw accounting (number of raw 64-bit engine words consumed):
//   uniform01            1 word
//   uniform(lo, hi)      1 word
//   uniform_int(lo, hi)  1 word per rejection round (usually 1)
//   normal()             2 words per polar round (accepted with prob pi/4)
//   exponential(scale)   1 word
// Consumers document their own draw order on top of these primitives.

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace seculoc {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent substream seed from a master seed, e.g. one stream
/// per Monte Carlo trial.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
    std::uint64_t s = master ^ (0x6a09e667f3bcc909ULL + stream_id * 0x9e3779b97f4a7c15ULL);
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng stream(std::uint64_t master, std::uint64_t stream_id) {
        return Rng(derive_seed(master, stream_id));
    }

    std::uint64_t next_word() { return engine_(); }

    /// Uniform on [0, 1) with 53 random mantissa bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Uniform integer on [lo, hi], inclusive, unbiased (rejection sampling).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit range
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
        std::uint64_t w;
        do { w = engine_(); } while (w >= limit);
        return lo + static_cast<std::int64_t>(w % span);
    }

    /// Standard normal via the Marsaglia polar method (no caching: each call
    /// computes a fresh pair and keeps the first coordinate).
    double normal() {
        for (;;) {
            const double u = 2.0 * uniform01() - 1.0;
            const double v = 2.0 * uniform01() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) {
                return u * std::sqrt(-2.0 * std::log(s) / s);
            }
        }
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Exponential with the given scale (mean). scale = 0 yields 0.
    double exponential(double scale) {
        return -scale * std::log1p(-uniform01());
    }

    /// Uniform subset of size k from {0, .., n-1}, returned in ascending order.
    /// Partial Fisher-Yates: consumes exactly k uniform_int draws.
    std::vector<int> sample_without_replacement(int n, int k) {
        if (k < 0 || k > n) throw std::invalid_argument("sample_without_replacement: bad k");
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        for (int i = 0; i < k; ++i) {
            const auto j = uniform_int(i, n - 1);
            std::swap(pool[i], pool[static_cast<int>(j)]);
        }
        std::vector<int> out(pool.begin(), pool.begin() + k);
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace seculoc
