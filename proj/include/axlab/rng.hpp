#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace axlab {

/// 64-bit base seed. Every random stream in the library is derived from one of these.
struct Seed {
    std::uint64_t value = 0;

    friend bool operator==(Seed, Seed) = default;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of replica `index` under base seed `base`. Independent of how replicas are
/// scheduled, so serial and parallel runs see the same per-replica streams.
constexpr Seed replica_seed(Seed base, std::uint64_t index) noexcept
{
    return Seed{mix64(mix64(base.value) ^ mix64(index + 0x632be59bd9b4e019ULL))};
}

/// Thin wrapper over mt19937_64. The conversions to uniform reals, bounded integers and
/// exponentials are written out here instead of using <random> distributions, whose
/// output sequences differ between standard library implementations.
class Rng {
public:
    explicit Rng(Seed seed) : engine_(mix64(seed.value)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Lemire's multiply-and-reject; n must be positive.
    std::uint64_t below(std::uint64_t n)
    {
        std::uint64_t x = engine_();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                x = engine_();
                m = static_cast<__uint128_t>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool coin() { return (engine_() >> 63) != 0; }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    /// Number of trials up to and including the first success (support 1, 2, ...).
    std::uint64_t geometric(double p)
    {
        if (p >= 1.0) return 1;
        const double u = 1.0 - uniform();  // (0, 1]
        return 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace axlab
