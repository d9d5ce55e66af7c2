#pragma once

#include <cstdint>
#include <random>

namespace csc {

/// Seedable, splittable random stream.
///
/// Raw bits come from std::mt19937_64, whose output sequence is fixed by the
/// C++ standard and therefore identical on every conforming platform. The
/// seed is first mixed with SplitMix64 so that nearby seeds give unrelated
/// streams. Derived scalars never go through std::*_distribution (those are
/// implementation-defined):
///
///   uniform()   = (bits >> 11) * 2^-53                      in [0, 1)
///   gaussian()  = Box-Muller: sqrt(-2 ln(1-u1)) * cos(2*pi*u2), the paired
///                 sine sample is cached for the next call
///   below(n)    = rejection sampling on 64-bit draws, unbiased
///   split(id)   = Rng(mix(seed ^ mix(id + 1)))
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64();
  double uniform();
  double gaussian();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Independent child stream; does not advance this stream.
  Rng split(std::uint64_t stream_id) const;

  static std::uint64_t mix(std::uint64_t x) noexcept;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace csc
