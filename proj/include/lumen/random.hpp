#pragma once

#include <cstdint>
#include <random>

namespace lumen {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed, a purpose tag and a
/// counter. Streams are addressed by (tag, index) so that work items can be
/// generated in any order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                    std::uint64_t index = 0) noexcept
{
  return mix64(mix64(mix64(master) ^ tag) + index);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t tag, std::uint64_t index = 0)
{
  return Rng(derive_seed(master, tag, index));
}

// Stream tags. Values are arbitrary but frozen: changing one changes every
// dataset generated from a given seed.
namespace stream {
inline constexpr std::uint64_t axis_x = 0x11;
inline constexpr std::uint64_t axis_y = 0x12;
inline constexpr std::uint64_t axis_z = 0x13;
inline constexpr std::uint64_t room_lx = 0x21;
inline constexpr std::uint64_t room_ly = 0x22;
inline constexpr std::uint64_t reference = 0x31;
inline constexpr std::uint64_t noise = 0x41;
inline constexpr std::uint64_t split = 0x51;
inline constexpr std::uint64_t subsample = 0x52;
inline constexpr std::uint64_t init = 0x61;
inline constexpr std::uint64_t shuffle = 0x62;
inline constexpr std::uint64_t tree = 0x71;
inline constexpr std::uint64_t boost = 0x72;
inline constexpr std::uint64_t campaign = 0x81;
} // namespace stream

} // namespace lumen
