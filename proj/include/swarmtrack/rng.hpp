#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace swarmtrack {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Splittable pseudo-random stream. Substreams are derived by hashing
/// (seed, stream, substream), so per-run and per-sensor streams are
/// independent of evaluation order. Gaussian variates use the Marsaglia
/// polar method on top of mt19937_64 to keep output platform-stable.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t substream = 0)
        : gen_(derive_key(seed, stream, substream)) {}

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Standard normal variate.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        double v = 0.0;
        double s = 0.0;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    std::uint64_t raw() { return gen_(); }

    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
        std::uint64_t k = detail::splitmix64(seed);
        k = detail::splitmix64(k ^ (stream + 0xA511E9B3ULL));
        k = detail::splitmix64(k ^ (substream + 0xD96EB1A8ULL));
        return k;
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Well-known stream ids so every consumer derives a disjoint substream.
namespace streams {
inline constexpr std::uint64_t kProcessNoise = 1;
inline constexpr std::uint64_t kInitialState = 2;
inline constexpr std::uint64_t kMeasurementNoiseBase = 100;   // + sensor index
inline constexpr std::uint64_t kCompensationBase = 10000;     // + sensor index
}  // namespace streams

}  // namespace swarmtrack
