#pragma once

// Deterministic splittable random streams. Every experiment draws all of its
// randomness from one master seed; workers (trials, voters, placement) get
// independent child streams via split(), so results are reproducible
// regardless of execution order or thread count.

#include <cstdint>
#include <random>

namespace riv {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

class SplitStream {
 public:
  explicit SplitStream(std::uint64_t seed)
      : key_(seed), engine_(detail::splitmix64(seed)) {}

  // Uniform double in [0, 1) with 53 random bits. Generated from raw engine
  // words rather than std::uniform_real_distribution so that the sequence is
  // identical across standard-library implementations.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). Lemire reduction; deterministic, and the
  // modulo bias at n << 2^64 is far below anything our statistics can see.
  std::size_t uniform_index(std::size_t n) {
    using u128 = unsigned __int128;
    return static_cast<std::size_t>((static_cast<u128>(engine_()) * n) >> 64);
  }

  // Child stream for an independent worker lane. Splitting depends only on
  // the stream's key, never on how many values were drawn from the parent.
  SplitStream split(std::uint64_t lane) const {
    return SplitStream(detail::splitmix64(key_ ^ detail::splitmix64(lane + 0x51ED270B7A4FF9C3ULL)));
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace riv
