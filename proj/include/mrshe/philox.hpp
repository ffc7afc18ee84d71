#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mrshe {

// Philox4x32-10 counter-based generator (Salmon et al. SC'11 constants).
// A keyed bijection on a 128-bit counter: every (key, counter) pair yields an
// independent 128-bit block with no sequential state, so random values can be
// indexed directly by (seed, stream, cell) and are reproducible for any
// worker count and call order.
struct Philox4x32 {
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

namespace detail {
inline double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(hi) << 32) | static_cast<std::uint64_t>(lo);
  // 53 significand bits mapped into (0,1); never returns 0 or 1.
  return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}
}  // namespace detail

// Two independent uniforms in (0,1) for (seed, stream, index).
inline std::array<double, 2> uniform_pair_at(std::uint64_t seed,
                                             std::uint64_t stream,
                                             std::uint64_t index) {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
      static_cast<std::uint32_t>(stream),
      static_cast<std::uint32_t>(stream >> 32)};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto r = Philox4x32::block(ctr, key);
  return {detail::to_unit_open(r[0], r[1]), detail::to_unit_open(r[2], r[3])};
}

inline double uniform_at(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t index) {
  return uniform_pair_at(seed, stream, index)[0];
}

// One standard normal per (seed, stream, index), Box-Muller on a single block.
inline double normal_at(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t index) {
  const auto u = uniform_pair_at(seed, stream, index);
  const double radius = std::sqrt(-2.0 * std::log(u[0]));
  return radius * std::cos(6.283185307179586476925286766559 * u[1]);
}

// Uniform integer in [0, n).
inline std::size_t uniform_index_at(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index, std::size_t n) {
  const double u = uniform_at(seed, stream, index);
  auto k = static_cast<std::size_t>(u * static_cast<double>(n));
  return k >= n ? n - 1 : k;
}

}  // namespace mrshe
