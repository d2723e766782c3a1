#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace mlsa {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// A stream is identified by (seed, stream id); the i-th 128-bit block of a
/// stream is a pure function of (seed, stream id, i). Streams therefore never
/// depend on scheduling, and any position can be regenerated independently.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    /// Ten-round Philox bijection applied to one counter block.
    static Block bijection(Block counter, Key key) noexcept;
};

/// Sequential view over one Philox stream.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint64_t next_u64() noexcept;

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept;

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) noexcept;

    /// Standard normal via the Box-Muller transform (both outputs are used).
    double normal() noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_index_ = 0;
    Philox4x32::Block buffer_{};
    int buffered_ = 0;  // remaining 64-bit words in buffer_ (0, 1 or 2)
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// Index of the first entry of a cumulative table strictly greater than u;
/// the last index absorbs rounding in the table's final entry.
std::size_t sample_from_cdf(std::span<const double> cdf, double u) noexcept;

}  // namespace mlsa
