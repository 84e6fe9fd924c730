#pragma once

#include <cstdint>

namespace eqed {

// Stimulus and generator randomness. The exact sequence is part of the
// external contract: a stream for (seed, index) is a xorshift64* generator
// whose state is splitmix64(seed ^ splitmix64(index + 1)), forced nonzero.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed) : state_(seed == 0 ? 0x9e3779b97f4a7c15ULL : seed) {}

  /// Independent stream number `index` derived from `seed`.
  static Xorshift64Star stream(std::uint64_t seed, std::uint64_t index) {
    return Xorshift64Star(splitmix64(seed ^ splitmix64(index + 1)));
  }

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dULL;
  }

  bool next_bit() { return (next() >> 63) != 0; }

  /// Uniform in [0, bound); bound > 0. Multiply-shift reduction.
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  /// True with probability num/den.
  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

 private:
  std::uint64_t state_;
};

}  // namespace eqed
