#pragma once

#include <cstdint>

namespace didc {

// Counter-based random number generation. Every draw is a pure function of
// (key, a, b, c), so simulation replications and bootstrap resamples can be
// evaluated in any order, on any number of threads, with identical results.
namespace rng {

uint64_t mix64(uint64_t z);
uint64_t hash(uint64_t key, uint64_t a, uint64_t b, uint64_t c);

// Uniform draw on the open interval (0, 1).
double uniform01(uint64_t key, uint64_t a, uint64_t b, uint64_t c);

double normal(uint64_t key, uint64_t a, uint64_t b, uint64_t c);

// Inverse-CDF draw from Beta(2,4); its CDF has the closed form
// F(x) = 1 - 5(1-x)^4 + 4(1-x)^5 which is inverted by Newton iteration.
double beta24(uint64_t key, uint64_t a, uint64_t b, uint64_t c);

double beta24_quantile(double u);

}  // namespace rng

// A convenience sequential stream over the counter-based core; `stream`
// isolates substreams (e.g. one per bootstrap replication).
class CounterRng {
 public:
  CounterRng(uint64_t key, uint64_t stream) : key_(key), stream_(stream) {}

  double uniform01() { return rng::uniform01(key_, stream_, counter_++, 0); }
  double normal() { return rng::normal(key_, stream_, counter_++, 1); }
  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>(uniform01() * static_cast<double>(n)) % n;
  }

 private:
  uint64_t key_, stream_;
  uint64_t counter_ = 0;
};

}  // namespace didc
