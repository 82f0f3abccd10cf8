#include "cedr/rng.hpp"

#include "cedr/numerics.hpp"

namespace cedr {

namespace {

// splitmix64 mixing function; used both to whiten user seeds before feeding
// the engine and to derive decorrelated substream seeds.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

RngHandle::RngHandle(std::uint64_t seed)
    : seed_(seed), engine_(splitmix64(seed)) {}

RngHandle RngHandle::substream(std::uint64_t index) const {
  // Mix the index through splitmix64 before xoring so substream(0) differs
  // from the parent stream and adjacent indices land far apart.
  return RngHandle(seed_ ^ splitmix64(0xA3EC4F1DE9B09D4DULL + index));
}

double RngHandle::uniform() {
  // 53 random bits, centered in the bin: strictly inside (0, 1).
  return (static_cast<double>(engine_() >> 11) + 0.5) *
         (1.0 / 9007199254740992.0);
}

double RngHandle::normal() {
  return std_normal_quantile(uniform());
}

double RngHandle::bernoulli(double p) {
  return uniform() < p ? 1.0 : 0.0;
}

std::uint64_t RngHandle::uniform_index(std::uint64_t n) {
  // Rejection sampling on the top bits to avoid modulo bias.
  const std::uint64_t limit = n * (0xFFFFFFFFFFFFFFFFULL / n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

}  // namespace cedr
