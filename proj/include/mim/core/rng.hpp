#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mim::core {

// Deterministic random source. All helpers are stateless functions of the
// raw engine stream, so serializing the engine alone captures the exact
// stream position (checkpoint resume depends on this).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 13) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(raw() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  int index(std::size_t n) { return static_cast<int>(uniform_int(n)); }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; no cached second value.
  double normal();
  double normal(double mean, double stddev) {
    return mean + stddev * normal();
  }

  // Normal redrawn until within 2 standard deviations.
  double truncated_normal(double mean, double stddev);

  template <class It>
  void shuffle(It first, It last) {
    const std::size_t n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
      std::swap(first[i - 1], first[uniform_int(i)]);
    }
  }

  // k distinct values from [0, n), in selection order.
  std::vector<int> sample_without_replacement(int n, int k);

  // Independent generator seeded from this one's stream.
  Rng fork() { return Rng(raw()); }

  std::string serialize() const;
  void deserialize(const std::string& state);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mim::core
