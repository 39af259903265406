#pragma once

#include <array>
#include <cstdint>

namespace gmt {

/// Philox4x32-10 counter-based generator. A (seed, stream) pair selects an
/// independent substream; draws within it are indexed by a 64-bit counter.
class Philox {
public:
    using Block = std::array<std::uint32_t, 4>;

    Philox(std::uint64_t seed, std::uint64_t stream);

    static Block round10(Block counter, std::array<std::uint32_t, 2> key);

    /// Next block of four 32-bit words.
    Block next();

    /// Uniform in (0, 1) with 53 random bits.
    double uniform();
    double normal();

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    Block buffer_{};
    int used_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;

    std::uint64_t next64();
};

}  // namespace gmt
