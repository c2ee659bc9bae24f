#include "didc/rng.hpp"

#include <cmath>

#include "didc/mathutil.hpp"

namespace didc {
namespace rng {

uint64_t mix64(uint64_t z) {
  // SplitMix64 finalizer.
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t hash(uint64_t key, uint64_t a, uint64_t b, uint64_t c) {
  uint64_t h = mix64(key);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return h;
}

double uniform01(uint64_t key, uint64_t a, uint64_t b, uint64_t c) {
  uint64_t h = hash(key, a, b, c);
  // 53 mantissa bits, shifted into (0,1) so inverse CDFs never see 0 or 1.
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

double normal(uint64_t key, uint64_t a, uint64_t b, uint64_t c) {
  return normal_quantile(uniform01(key, a, b, c));
}

double beta24_quantile(double u) {
  // Solve F(x) = u with F(x) = 1 - 5(1-x)^4 + 4(1-x)^5, monotone on [0,1].
  double x = 0.3;  // rough center of mass
  for (int it = 0; it < 60; ++it) {
    double om = 1.0 - x;
    double om2 = om * om;
    double F = 1.0 - 5.0 * om2 * om2 + 4.0 * om2 * om2 * om;
    double dens = 20.0 * x * om * om2;
    double step = (F - u) / (dens > 1e-300 ? dens : 1e-300);
    double xn = x - step;
    if (xn <= 0.0) xn = x / 2.0;
    if (xn >= 1.0) xn = 0.5 * (x + 1.0);
    if (std::fabs(xn - x) < 1e-15) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x;
}

double beta24(uint64_t key, uint64_t a, uint64_t b, uint64_t c) {
  return beta24_quantile(uniform01(key, a, b, c));
}

}  // namespace rng
}  // namespace didc
