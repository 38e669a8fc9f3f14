// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace mcubes {

/**
 * Identity of a single uniform variate.
 *
 * Every random number drawn anywhere in an integration run is a pure function
 * of this five-field key.  There is no generator state: two samplers (or the
 * serial oracle and a 64-thread run) asking for the same key always see the
 * same variate, which is the root of the library's bitwise reproducibility.
 */
struct SampleKey {
  std::uint64_t seed;
  std::uint64_t iteration;
  std::uint64_t cube;    ///< sub-cube index t
  std::uint64_t sample;  ///< sample index k within the cube
  std::uint64_t axis;    ///< coordinate index j
};

namespace detail {

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

/// SplitMix64 finalizer: full-avalanche bijection on 64-bit words.
[[nodiscard]] constexpr std::uint64_t avalanche(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Absorb one key field.  Bijective in v for fixed h, so sibling keys
/// (consecutive cubes, samples, axes) can never collide at this stage.
[[nodiscard]] constexpr std::uint64_t feed(std::uint64_t h, std::uint64_t v) noexcept {
  return avalanche(h + kGamma + v);
}

[[nodiscard]] constexpr double to_unit(std::uint64_t h) noexcept {
  return static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
}

// Staged roots let hot loops hoist the invariant prefix of the key chain.
// Composing them reproduces uniform01() bit for bit.
[[nodiscard]] constexpr std::uint64_t iteration_root(std::uint64_t seed,
                                                     std::uint64_t iteration) noexcept {
  return feed(feed(0, seed), iteration);
}
[[nodiscard]] constexpr std::uint64_t cube_root(std::uint64_t iter_root,
                                                std::uint64_t cube) noexcept {
  return feed(iter_root, cube);
}
[[nodiscard]] constexpr std::uint64_t point_root(std::uint64_t cube_root,
                                                 std::uint64_t sample) noexcept {
  return feed(cube_root, sample);
}

}  // namespace detail

/// The uniform variate in [0, 1) identified by a key.
[[nodiscard]] constexpr double uniform01(const SampleKey& k) noexcept {
  using namespace detail;
  return to_unit(feed(point_root(cube_root(iteration_root(k.seed, k.iteration), k.cube),
                                 k.sample),
                      k.axis));
}

}  // namespace mcubes
