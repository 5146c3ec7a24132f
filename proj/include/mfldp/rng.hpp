#pragma once

#include <cmath>
#include <cstdint>

namespace mfldp {

/// SplitMix64 (Steele, Lea & Flood 2014). Every stream is fully determined by
/// its 64-bit seed; replica streams come from `derive(seed, index)`.
class SplitMix64 {
 public:
  static constexpr const char* algorithm =
      "splitmix64; stream seed = mix(seed ^ mix(index + 1)); uniform = (bits >> 11) * 2^-53";

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static SplitMix64 derive(std::uint64_t seed, std::uint64_t index) {
    return SplitMix64(mix(seed ^ mix(index + 1)));
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1], safe for logarithms.
  double uniform_open0() { return 1.0 - uniform(); }

  double exponential(double rate) { return -std::log(uniform_open0()) / rate; }

 private:
  std::uint64_t state_;
};

}  // namespace mfldp
