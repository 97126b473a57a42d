#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace darksearch {

/// xoshiro256** with SplitMix64 seeding. Every trajectory draws from its own
/// substream keyed by (seed, stream index), so ensembles are reproducible
/// independently of how they are scheduled across workers.
///
/// Variate transforms are implemented here rather than taken from <random>,
/// whose distributions are not specified bit-for-bit across standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);
    static Rng substream(std::uint64_t seed, std::uint64_t stream);
    /// Key that seeds substream(seed, stream); recorded in run manifests.
    static std::uint64_t substream_key(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t operator()() { return next(); }
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    std::uint64_t next();
    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Exp(1).
    double exponential();
    /// Standard normal (Box-Muller, one variate per pair of uniforms).
    double normal();

    [[nodiscard]] std::uint64_t draws() const { return draws_; }

private:
    std::array<std::uint64_t, 4> s_{};
    std::uint64_t draws_ = 0;
};

}  // namespace darksearch
