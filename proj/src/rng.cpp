#include "tabalign/rng.hpp"

namespace tabalign {

namespace {
constexpr std::uint64_t kPhiloxMultiplier = 0xD2B74407B1CE6E93ULL;
constexpr std::uint64_t kPhiloxWeyl = 0x9E3779B97F4A7C15ULL;
}  // namespace

std::array<std::uint64_t, 2> philox2x64(std::array<std::uint64_t, 2> ctr, std::uint64_t key) noexcept {
  for (int round = 0; round < 10; ++round) {
    __extension__ using u128 = unsigned __int128;
    const u128 product = static_cast<u128>(kPhiloxMultiplier) * ctr[0];
    const auto hi = static_cast<std::uint64_t>(product >> 64);
    const auto lo = static_cast<std::uint64_t>(product);
    ctr = {hi ^ key ^ ctr[1], lo};
    key += kPhiloxWeyl;
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(mix64(seed) ^ a) ^ (b * 0xD1B54A32D192ED03ULL));
}

std::uint64_t hash_string(const char* data, std::size_t size) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001B3ULL;
  }
  return h;
}

CounterRng::result_type CounterRng::operator()() noexcept {
  if (available_ == 0) {
    buffer_ = philox2x64({block_++, lane_}, key_);
    available_ = 2;
  }
  return buffer_[2 - available_--];
}

double CounterRng::uniform_open_closed() noexcept {
  return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
}

double CounterRng::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

}  // namespace tabalign
