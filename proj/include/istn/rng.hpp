#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace istn {

/// SplitMix64 finalizer; used to derive well-separated stream keys.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/*!
 * xoshiro256** generator keyed by (seed, stream).
 *
 * Every Monte-Carlo snapshot owns the stream (seed, snapshot_index), so the
 * draws of a snapshot never depend on which worker runs it or in what order.
 * Satisfies UniformRandomBitGenerator, so the <random> distributions work
 * with it directly.
 */
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
    {
        std::uint64_t key = seed;
        std::uint64_t mixed = splitmix64(key);
        std::uint64_t sub = stream ^ 0xD1B54A32D192ED03ULL;
        mixed ^= splitmix64(sub);
        for (auto& word : state_) {
            word = splitmix64(mixed);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept
    {
        std::uint64_t const result = rotl(state_[1] * 5, 7) * 9;
        std::uint64_t const t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    //! Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept
    {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    //! Uniform on (0, 1]; safe to take the logarithm of.
    double uniform_open0() noexcept { return 1.0 - uniform(); }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
};

}  // namespace istn
