#pragma once

#include <cstdint>
#include <string>

#include "osc/types.hpp"

namespace osc {

// Running counters of a probed binary process: W counts the ones of U_t,
// W_tilde the ones that the rate-p probe B_t also saw.
struct DeviationTrace {
  double p = 0.0;
  std::int64_t w = 0;
  std::int64_t w_tilde = 0;
  std::int64_t steps = 0;
};

DeviationTrace make_trace(double p);
void step(DeviationTrace& trace, int u, int b);

// Count bound of the adversarial law of large numbers: with probability at
// least 1 - delta, no time has W_tilde <= 1 while W exceeds 8*ln(1/delta)/p.
// Requires p in (0, 1/2) and delta in (0, exp(-1/2)).
double alln_threshold(double p, double delta);

// Iterated-logarithm deviation boundary for |W - W_tilde/p| at count W, with
// ln ln W read as ln(max(1, ln W)); returns 0 at W = 0.
double lil_boundary(std::int64_t w, double p, double delta);

// Adversarial input strategies for the Monte Carlo validators.
enum class StressKind {
  kAllOnes,       // u = 1 every step
  kAdaptiveStop,  // u = 1 until the probe has seen two ones, then u = 0
  kRandom,        // u ~ Bernoulli(q), independent
};

struct StressSpec {
  StressKind kind = StressKind::kAllOnes;
  double q = 0.5;  // kRandom only
};

StressSpec stress_from_string(const std::string& s);
std::string to_string(const StressSpec& s);

struct ValidationResult {
  std::int64_t trials = 0;
  std::int64_t violations = 0;
  double fraction = 0.0;
};

// Fraction of independent traces in which some time t <= horizon has
// W_tilde <= 1 and W over the count bound. The guarantee puts it at most
// delta; callers assert that with a binomial margin.
ValidationResult validate_alln(double p, double delta, std::int64_t horizon,
                               std::int64_t trials, StressSpec stress, std::uint64_t seed,
                               int workers = 0);

// Fraction of traces in which |W - W_tilde/p| ever crosses the iterated-
// logarithm boundary while W >= 1.
ValidationResult validate_lil(double p, double delta, std::int64_t horizon,
                              std::int64_t trials, StressSpec stress, std::uint64_t seed,
                              int workers = 0);

}  // namespace osc
