#ifndef FEWBODY_RNG_HPP
#define FEWBODY_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace fewbody {

// splitmix64 step; used to derive independent substream seeds so that
// parallel fan-out never shares or reorders a stream.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(seed ^ mix_seed(stream + 1));
}

// Deterministic RNG. std::mt19937_64 output is pinned by the standard;
// the distributions below are written out explicitly because the standard
// library distribution objects are implementation-defined, which would
// break the byte-identical-output contract across toolchains.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }
  double log_uniform(double a, double b) {
    return std::exp(uniform(std::log(a), std::log(b)));
  }
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }
  std::uint64_t raw() { return gen_(); }
  std::uint64_t below(std::uint64_t n) { return gen_() % n; }

  // Independent stream keyed off the seed this Rng was created with.
  Rng split(std::uint64_t stream) const {
    return Rng(derive_seed(seed_, stream));
  }

private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace fewbody

#endif
