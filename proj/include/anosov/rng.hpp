#pragma once

#include <cmath>
#include <cstdint>

namespace anosov {

// Deterministic 64-bit generator (splitmix64). Every randomized routine in
// the library draws from one of these, seeded explicitly, so runs are
// bit-reproducible from the config seed. Substreams for parallel tasks come
// from substream(), which depends only on (master, index), never on
// scheduling order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0,1) with 53 random bits
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in {0,...,n-1}, n > 0; multiply-shift, bias < 2^-32 for our n
  std::uint32_t next_below(std::uint32_t n) {
    return std::uint32_t((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // standard normal via Box-Muller (one value per call, second discarded)
  double next_gaussian() {
    double u = 0.0;
    do {
      u = next_double();
    } while (u <= 0.0);
    double v = next_double();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586477 * v);
  }

  // seed of substream k: splitmix64 applied to master ^ (C * (k+1))
  static std::uint64_t substream(std::uint64_t master, std::uint64_t k) {
    Rng r(master ^ (0xa0761d6478bd642full * (k + 1)));
    return r.next_u64();
  }

 private:
  std::uint64_t state_;
};

}  // namespace anosov
