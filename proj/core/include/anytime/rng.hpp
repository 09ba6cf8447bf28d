#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace anytime {

// splitmix64 finalizer: cheap, good avalanche, stable everywhere.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// FNV-1a, used to fold names (e.g. policy ids) into seeds.
constexpr std::uint64_t hash_str(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// Folds integer components into one stream seed. Order-sensitive.
template <class... Ts>
constexpr std::uint64_t mix_seed(std::uint64_t seed, Ts... parts) noexcept {
  ((seed = mix64(seed ^ mix64(static_cast<std::uint64_t>(parts)))), ...);
  return mix64(seed);
}

// mt19937_64 wrapper with hand-rolled draws. std::* distributions are not
// bit-stable across standard libraries; these are, which keeps seeded runs
// reproducible no matter where they execute.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive on both ends. Modulo bias is irrelevant at the ranges used here.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller, one variate per call; the stream layout stays obvious.
  double normal(double mu = 0.0, double sigma = 1.0) {
    double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    double u2 = uniform();
    return mu + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  // Inverse-CDF triangular draw on [lo, hi] with the given mode.
  double triangular(double lo, double mode, double hi) {
    double u = uniform();
    double cut = (mode - lo) / (hi - lo);
    if (u < cut) return lo + std::sqrt(u * (hi - lo) * (mode - lo));
    return hi - std::sqrt((1.0 - u) * (hi - lo) * (hi - mode));
  }

 private:
  static constexpr double kTwoPi = 6.28318530717958647692;
  std::mt19937_64 gen_;
};

}  // namespace anytime
