#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace bhavnet {

// Named purposes for independent random streams derived from one run seed.
enum class Stream : std::uint64_t {
  init = 1,
  dropout = 2,
  sampling = 3,
  data = 4,
};

/// Seedable generator with a platform-independent output stream.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the C++
/// standard. All derived quantities (uniform doubles, bounded integers,
/// normals, shuffles) are computed here rather than through the
/// implementation-defined std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  // Independent stream for a purpose: engine seeded with splitmix64(seed ^ tag).
  static Rng stream(std::uint64_t seed, Stream purpose);
  static Rng stream(std::uint64_t seed, std::string_view purpose);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n); n > 0. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);
  // Standard normal via Box-Muller; caches the second variate.
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace bhavnet
