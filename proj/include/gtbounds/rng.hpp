#pragma once
// Counter-keyed splitmix64 stream.
//
// Monte Carlo trials must be reproducible and order-independent: trial i
// always draws from the stream keyed by (seed, i), regardless of how trials
// are scheduled across threads. splitmix64 is used both as the generator and
// (applied twice) as the keying hash.

#include <cstdint>

namespace gtb {

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  // Stream for one trial: decorrelates (seed, trial) pairs so neighboring
  // seeds or trial indices do not share low-bit structure.
  static RandomStream for_trial(std::uint64_t seed, std::uint64_t trial) {
    RandomStream s(0);
    s.state_ = scramble(seed + kGamma) ^ scramble((trial + 1) * 0xD1B54A32D192ED03ULL);
    return s;
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return scramble(state_);
  }

  // Uniform in [0,1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0,n). Multiply-shift map; the O(n/2^64) bias is far below
  // anything the simulations can resolve.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool next_bernoulli(double p) { return next_unit() < p; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t scramble(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
};

}  // namespace gtb
