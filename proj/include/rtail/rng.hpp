#pragma once

#include <cstdint>
#include <random>

namespace rtail {

/// SplitMix64 finalizer; used to derive substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/**
 * A deterministic random stream identified by (master seed, stream id).
 *
 * Distinct stream ids give statistically independent sequences; the same
 * pair always reproduces the same sequence. Streams are not thread-safe and
 * are never shared between workers.
 */
class RngStream
{
  public:
    explicit RngStream(std::uint64_t master_seed, std::uint64_t stream_id = 0)
        : seed_(master_seed), stream_(stream_id)
    {
        std::uint64_t a = splitmix64(master_seed);
        std::uint64_t b = splitmix64(a ^ stream_id);
        std::uint64_t c = splitmix64(b + stream_id);
        std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                          static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
        engine_.seed(seq);
    }

    /// Uniform variate on the open interval (0, 1).
    double uniform() noexcept
    {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t bits() noexcept { return engine_(); }

    /// Independent child stream, deterministic in (this stream's identity, index).
    RngStream substream(std::uint64_t index) const
    {
        return RngStream(splitmix64(seed_ ^ splitmix64(stream_ + 0x632be59bd9b4e019ULL)),
                         index);
    }

    std::uint64_t master_seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

}  // namespace rtail
