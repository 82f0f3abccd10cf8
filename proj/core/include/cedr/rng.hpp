#pragma once

#include <cstdint>
#include <random>

namespace cedr {

// Seeded random stream with reproducible, platform-independent output.
//
// std::mt19937_64's raw 64-bit sequence is fully specified by the C++
// standard, so we consume the engine directly and do the uniform/normal
// transforms ourselves instead of going through the (implementation-defined)
// standard distributions. Identical seed => identical draws everywhere.
class RngHandle {
 public:
  explicit RngHandle(std::uint64_t seed);

  // Independent child stream, deterministically derived from (seed, index).
  // Used to give every Monte Carlo replication / bootstrap replicate its own
  // stream regardless of scheduling.
  RngHandle substream(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }

  // Uniform on the open interval (0, 1).
  double uniform();
  // Standard normal via the inverse-CDF transform (deterministic draw count:
  // exactly one engine call per variate).
  double normal();
  // Bernoulli(p) as 0.0 / 1.0.
  double bernoulli(double p);
  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace cedr
