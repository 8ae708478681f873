#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace toolsynth {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for (master, domain, indices...). Every random stream in the
/// engine is derived this way, so results never depend on scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view domain,
                                 std::initializer_list<std::uint64_t> indices = {}) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : domain) h = (h ^ static_cast<unsigned char>(ch)) * 0x100000001b3ULL;
  std::uint64_t s = mix64(master ^ mix64(h));
  for (std::uint64_t i : indices) s = mix64(s ^ mix64(i + 0x632be59bd9b4e019ULL));
  return s;
}

/// Explicitly seeded random source. There is no default constructor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [lo, hi).
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  /// Uniform on the closed integer range [lo, hi].
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  double normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace toolsynth
