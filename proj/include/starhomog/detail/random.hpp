#pragma once

#include <cstdint>
#include <string_view>

namespace starhomog::detail {

/// Identifier echoed into output files next to the seed.
inline constexpr std::string_view prng_name = "splitmix64";

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based draw: the value depends only on (seed, stream, index), so a
/// length-n prefix is identical for every n and evaluation needs no state.
constexpr std::uint64_t draw_bits(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t index) noexcept {
    return splitmix64(splitmix64(seed ^ splitmix64(stream)) + index);
}

/// Uniform double in [0, 1) with 53 random bits.
constexpr double draw_unit(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t index) noexcept {
    return static_cast<double>(draw_bits(seed, stream, index) >> 11) * 0x1.0p-53;
}

// Stream tags keep independent quantities decorrelated under one seed.
inline constexpr std::uint64_t coefficient_stream = 1;
inline constexpr std::uint64_t forcing_stream = 2;

} // namespace starhomog::detail
