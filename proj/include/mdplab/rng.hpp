#pragma once

#include <cstdint>
#include <random>

#include "mdplab/types.hpp"

namespace mdplab {

// Labels for the per-purpose streams derived from a master seed.
inline constexpr uint64_t kStreamActions = 1;
inline constexpr uint64_t kStreamTransitions = 2;
inline constexpr uint64_t kStreamRewards = 3;
inline constexpr uint64_t kStreamEnv = 4;
inline constexpr uint64_t kStreamPolicies = 5;

// Seeded random stream with explicit sampling primitives. Avoids the
// standard-library distribution objects so output is identical across
// implementations, not just across runs.
class RngStream {
 public:
  RngStream(uint64_t master_seed, uint64_t stream_label) {
    std::seed_seq seq{static_cast<uint32_t>(master_seed), static_cast<uint32_t>(master_seed >> 32),
                      static_cast<uint32_t>(stream_label), static_cast<uint32_t>(stream_label >> 32)};
    engine_.seed(seq);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  uint64_t integer(uint64_t bound) { return engine_() % bound; }

  double exponential() { return -std::log1p(-uniform01()); }

  // Index sampled from a probability vector (assumed to sum to ~1).
  int categorical(const Vector& probs) {
    const double u = uniform01();
    double acc = 0.0;
    int last_positive = 0;
    for (int i = 0; i < probs.size(); ++i) {
      if (probs[i] > 0.0) last_positive = i;
      acc += probs[i];
      if (u < acc) return i;
    }
    return last_positive;
  }

  // Uniform draw from the probability simplex of the given dimension.
  Vector simplex(int dim) {
    Vector g(dim);
    double total = 0.0;
    for (int i = 0; i < dim; ++i) {
      g[i] = exponential();
      total += g[i];
    }
    return g / total;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mdplab
