#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace csense {

// All randomness flows through Rng so that runs are reproducible bit for bit.
// The engine is mt19937_64 (fully specified by the standard) and every draw
// below is implemented on raw engine output; no std::*_distribution is used,
// since those are free to differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of mantissa.
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  bool next_bernoulli(double p_true) { return next_unit() < p_true; }

  // Uniform index in [0, n).
  std::size_t next_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("next_index: empty range");
    auto i = static_cast<std::size_t>(next_unit() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  // Draw from a finite distribution given by nonnegative weights summing to ~1.
  // Consumes exactly one engine output.
  std::size_t next_categorical(std::span<const double> weights) {
    if (weights.empty()) throw std::invalid_argument("next_categorical: no weights");
    const double u = next_unit();
    double cum = 0.0;
    std::size_t last_positive = weights.size();
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] > 0.0) last_positive = i;
      cum += weights[i];
      if (u < cum) return i;
    }
    // Rounding pushed the total slightly below u; fall back to the top of the support.
    if (last_positive == weights.size())
      throw std::invalid_argument("next_categorical: all weights zero");
    return last_positive;
  }

 private:
  std::mt19937_64 engine_;
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Named substreams keep independent concerns on independent random sequences:
// growing the evaluation workload can never perturb training draws.
enum class Stream : std::uint64_t {
  ActorInit = 0x11,
  CriticInit = 0x12,
  TrainHypothesis = 0x21,
  TrainChannel = 0x22,
  TrainExploration = 0x23,
  EvalHypothesis = 0x31,
  EvalChannel = 0x32,
  EvalExploration = 0x33,
  Generic = 0x51,
};

inline std::uint64_t derive_seed(std::uint64_t master, Stream purpose, std::uint64_t salt = 0) {
  const auto p = splitmix64(static_cast<std::uint64_t>(purpose));
  return splitmix64(splitmix64(master ^ p) ^ splitmix64(salt + 0x5DEECE66Dull));
}

inline Rng make_stream(std::uint64_t master, Stream purpose, std::uint64_t salt = 0) {
  return Rng(derive_seed(master, purpose, salt));
}

}  // namespace csense
