#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace tabalign {

/// Philox2x64-10 block function (Salmon et al., Random123).
std::array<std::uint64_t, 2> philox2x64(std::array<std::uint64_t, 2> counter, std::uint64_t key) noexcept;

/// SplitMix64 finalizer; used to derive stream keys, never as a generator.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Key for a substream identified by (seed, a, b).  Distinct tuples give
/// statistically independent Philox streams.
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Stable 64-bit hash of a string (FNV-1a), for keying streams by prompt id.
std::uint64_t hash_string(const char* data, std::size_t size) noexcept;

/// Counter-based generator over one Philox key.  The `lane` selects an
/// independent sequence under the same key, so a session can keep separate
/// streams for oracle draws and algorithm coin flips.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key, std::uint64_t lane = 0) noexcept : key_(key), lane_(lane) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on (0, 1] with 53 random bits.
  double uniform_open_closed() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;

  std::uint64_t blocks_used() const noexcept { return block_; }

 private:
  std::uint64_t key_;
  std::uint64_t lane_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

}  // namespace tabalign
