#pragma once

// Counter-based random number generation (Philox4x32-10) and the handful of
// samplers the simulator needs. Every draw is a pure function of
// (seed, stream, counter), so results do not depend on the platform's
// standard library and independent workers can derive disjoint streams.

#include <array>
#include <cstdint>

namespace asv {

class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block counter, Key key);
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // 53-bit resolution, in [0, 1).
  double uniform01();
  double uniform(double lo, double hi);
  // Integer uniform on the closed range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double gaussian(double mean, double stddev);
  std::int64_t poisson(double mean);
  // Gamma with shape `shape` and rate `rate` (mean shape / rate).
  double gamma(double shape, double rate);

  // An independent generator keyed by the same seed on a different stream.
  Rng derive(std::uint64_t substream) const;

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  Philox4x32::Block buffer_{};
  int used_ = 4;
};

// SplitMix64 finalizer; used to mix seeds and stream identifiers.
std::uint64_t mix64(std::uint64_t x);

}  // namespace asv
