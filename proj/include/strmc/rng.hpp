#pragma once

#include <cmath>
#include <cstdint>

namespace strmc {

// Counter-keyed random streams.
//
// Every trajectory (and every auxiliary draw site, e.g. resampling) gets its
// own generator whose state is derived from the tuple
//   (seed, purpose, iteration, stratum, replica)
// by a splitmix64-style hash.  Streams are therefore independent of thread
// scheduling: the same tuple always yields the same sample path, so runs are
// bitwise reproducible for any thread count.

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// Draw-site tags, folded into the stream key so that different uses of the
// same (iteration, stratum, replica) counters never share a stream.
enum class StreamPurpose : std::uint64_t {
    trajectory = 1,
    resample = 2,
    init = 3,
    benchmark = 4,
    preset = 5,
    test = 900,
};

class RngStream {
public:
    RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t iteration,
              std::uint64_t stratum, std::uint64_t replica) {
        std::uint64_t key = detail::mix64(seed);
        key = detail::mix64(key ^ static_cast<std::uint64_t>(purpose));
        key = detail::mix64(key ^ iteration);
        key = detail::mix64(key ^ stratum);
        key = detail::mix64(key ^ replica);
        // Expand the key into xoshiro256++ state.
        for (auto& w : s_) {
            key = detail::mix64(key);
            w = key;
        }
        s_[0] |= 1;  // never all-zero
    }

    explicit RngStream(std::uint64_t seed)
        : RngStream(seed, StreamPurpose::test, 0, 0, 0) {}

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).  n is tiny here (strata counts, state
    // counts), so the multiply-shift bias of a plain scaling is acceptable
    // only if we reject; do the rejection properly.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Marsaglia's polar method with one cached value.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, q;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            q = u * u + v * v;
        } while (q >= 1.0 || q == 0.0);
        const double f = std::sqrt(-2.0 * std::log(q) / q);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

private:
    std::uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace strmc
