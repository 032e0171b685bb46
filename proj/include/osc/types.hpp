#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace osc {

// Contexts are 1-based dense integers in [1, domain_size].
using ContextId = std::int32_t;

// Class labels are 1..K. Two distinguished values share the representation:
// kAbstain (the "do not predict" action / table entry) and kNoFeedback (the
// feedback symbol on rounds where the learner predicted).
using LabelValue = std::int32_t;

inline constexpr LabelValue kAbstain = 0;
inline constexpr LabelValue kNoFeedback = -1;

// Exploration-coin outcome for a round. kCoinNotTossed marks rounds where the
// learner never drew a coin (e.g. forced actions).
using Coin = std::int8_t;
inline constexpr Coin kCoinNotTossed = -1;

// Bad argument to a library call (out-of-domain context, invalid rate, ...).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The game protocol or an internal invariant was violated at runtime.
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config-file / serialized-input problems. Messages carry line numbers where
// the input is line-oriented.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// FNV-1a, used for config digests recorded into transcripts.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace osc
