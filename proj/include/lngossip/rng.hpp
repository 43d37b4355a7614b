#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace lngossip {

/// Seeded generator with portable draw helpers. The standard distributions
/// are implementation-defined, so bounded and real draws are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for a named subsystem; adding a new label never
  /// perturbs draws made under existing labels.
  static Rng stream(std::uint64_t seed, std::string_view label);

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  /// Uniform double in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate (events per unit).
  double exponential(double rate);

  bool chance(double p) { return unit() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t fnv1a(std::string_view s);

}  // namespace lngossip
