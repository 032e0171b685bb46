#pragma once

#include <cstdint>
#include <memory>
#include <random>

#include "osc/types.hpp"

namespace osc {

// splitmix64 finalizer. Used to derive independent stream seeds from a base
// seed (documented in the README: run i uses mix_seed(base_seed + i)).
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derive a sub-stream seed from a run seed and a fixed stream tag.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix_seed(seed ^ mix_seed(tag));
}

// Source of raw 64-bit randomness plus the small set of transforms the
// simulator needs. Learners and adversaries own one source each; tests may
// inject scripted sources to force coin sequences.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual std::uint64_t next_u64() = 0;

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n). Multiply-shift; n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw ParameterError("uniform_index: n must be positive");
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }
};

// Mersenne twister backed source. mt19937_64 output is pinned by the
// standard, so streams reproduce bit-exactly across platforms.
class Mt19937Source final : public RandomSource {
 public:
  explicit Mt19937Source(std::uint64_t seed) : gen_(seed) {}
  std::uint64_t next_u64() override { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

inline std::unique_ptr<RandomSource> make_rng(std::uint64_t seed) {
  return std::make_unique<Mt19937Source>(seed);
}

}  // namespace osc
