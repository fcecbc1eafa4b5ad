#ifndef TRISTEP_RNG_HPP
#define TRISTEP_RNG_HPP

#include <cmath>
#include <cstdint>

namespace tristep {

// splitmix64: used only to derive independent stream seeds from a master seed.
inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t s = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
  return splitmix64(s);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}

// xorshift64* generator. One independent instance per randomized component so
// that reseeding one stream never perturbs another.
class Xorshift64Star {
 public:
  Xorshift64Star() : state_(0x853c49e6748fea9bULL) {}
  explicit Xorshift64Star(uint64_t seed) { reseed(seed); }

  void reseed(uint64_t seed) {
    uint64_t s = seed;
    state_ = splitmix64(s);
    if (state_ == 0) state_ = 0x9e3779b97f4a7c15ULL;  // state must never be zero
    gauss_valid_ = false;
  }

  uint64_t next() {
    uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dULL;
  }

  // Uniform in [0, n).
  uint64_t below(uint64_t n) { return next() % n; }

  // Uniform in (0, 1].
  double uniform01() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal via Box-Muller; hand rolled so results are identical
  // across standard library implementations.
  double gaussian() {
    if (gauss_valid_) {
      gauss_valid_ = false;
      return gauss_spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    gauss_spare_ = r * std::sin(a);
    gauss_valid_ = true;
    return r * std::cos(a);
  }

 private:
  uint64_t state_;
  double gauss_spare_ = 0.0;
  bool gauss_valid_ = false;
};

}  // namespace tristep

#endif
