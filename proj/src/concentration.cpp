#include "osc/concentration.hpp"

#include <atomic>
#include <cmath>
#include <vector>

#include "osc/parallel.hpp"
#include "osc/rng.hpp"

namespace osc {

DeviationTrace make_trace(double p) {
  if (!(p > 0.0 && p < 0.5))
    throw ParameterError("deviation trace: p must lie in (0, 1/2)");
  DeviationTrace t;
  t.p = p;
  return t;
}

void step(DeviationTrace& trace, int u, int b) {
  if (u != 0 && u != 1) throw ParameterError("step: u must be 0 or 1");
  if (b != 0 && b != 1) throw ParameterError("step: b must be 0 or 1");
  trace.w += u;
  trace.w_tilde += u * b;
  trace.steps += 1;
}

double alln_threshold(double p, double delta) {
  if (!(p > 0.0 && p < 0.5))
    throw ParameterError("alln_threshold: p must lie in (0, 1/2)");
  if (!(delta > 0.0 && delta < std::exp(-0.5)))
    throw ParameterError("alln_threshold: delta must lie in (0, exp(-1/2))");
  return 8.0 * std::log(1.0 / delta) / p;
}

double lil_boundary(std::int64_t w, double p, double delta) {
  if (w < 0) throw ParameterError("lil_boundary: W must be >= 0");
  if (!(p > 0.0 && p < 0.5))
    throw ParameterError("lil_boundary: p must lie in (0, 1/2)");
  if (!(delta > 0.0 && delta < 1.0))
    throw ParameterError("lil_boundary: delta must lie in (0, 1)");
  if (w == 0) return 0.0;  // W = 0 forces W_tilde = 0, deviation 0
  const double wd = static_cast<double>(w);
  const double loglog = std::log(std::max(1.0, std::log(wd)));
  const double level = std::log(2.0 * std::exp(1.0) / delta) + 2.0 * loglog;
  const double pbar = 1.0 - p;
  return 2.0 * std::sqrt(pbar * wd / p * level) + level / (3.0 * p);
}

StressSpec stress_from_string(const std::string& s) {
  if (s == "all_ones") return {StressKind::kAllOnes, 0.0};
  if (s == "adaptive_stop") return {StressKind::kAdaptiveStop, 0.0};
  if (s.rfind("random:", 0) == 0) {
    const double q = std::stod(s.substr(7));
    if (q < 0.0 || q > 1.0) throw ParameterError("stress: q must lie in [0,1]");
    return {StressKind::kRandom, q};
  }
  if (s == "random") return {StressKind::kRandom, 0.5};
  throw ParameterError("unknown stress strategy '" + s + "'");
}

std::string to_string(const StressSpec& s) {
  switch (s.kind) {
    case StressKind::kAllOnes: return "all_ones";
    case StressKind::kAdaptiveStop: return "adaptive_stop";
    case StressKind::kRandom: return "random:" + std::to_string(s.q);
  }
  return "unknown";
}

namespace {

constexpr std::uint64_t kTrialTag = 0x545249414c535452ull;

int next_u(StressSpec stress, std::int64_t w_tilde, RandomSource& rng) {
  switch (stress.kind) {
    case StressKind::kAllOnes:
      return 1;
    case StressKind::kAdaptiveStop:
      return w_tilde <= 1 ? 1 : 0;
    case StressKind::kRandom:
      return rng.bernoulli(stress.q) ? 1 : 0;
  }
  return 0;
}

ValidationResult run_trials(std::int64_t trials, int workers,
                            const std::function<bool(std::uint64_t)>& trial_violates,
                            std::uint64_t seed) {
  std::vector<std::uint8_t> violated(static_cast<std::size_t>(trials), 0);
  parallel_for(trials, workers, [&](std::int64_t i) {
    const std::uint64_t trial_seed = derive_stream_seed(seed + static_cast<std::uint64_t>(i),
                                                        kTrialTag);
    violated[static_cast<std::size_t>(i)] = trial_violates(trial_seed) ? 1 : 0;
  });
  ValidationResult res;
  res.trials = trials;
  for (auto v : violated) res.violations += v;
  res.fraction = trials > 0 ? static_cast<double>(res.violations) / static_cast<double>(trials)
                            : 0.0;
  return res;
}

}  // namespace

ValidationResult validate_alln(double p, double delta, std::int64_t horizon,
                               std::int64_t trials, StressSpec stress, std::uint64_t seed,
                               int workers) {
  const double threshold = alln_threshold(p, delta);
  if (horizon < 1) throw ParameterError("validate_alln: horizon must be >= 1");
  if (trials < 1) throw ParameterError("validate_alln: trials must be >= 1");
  return run_trials(trials, workers, [&](std::uint64_t trial_seed) {
    Mt19937Source rng(trial_seed);
    std::int64_t w = 0, w_tilde = 0;
    for (std::int64_t t = 1; t <= horizon; ++t) {
      const int u = next_u(stress, w_tilde, rng);
      const int b = rng.bernoulli(p) ? 1 : 0;
      w += u;
      w_tilde += u * b;
      if (w_tilde <= 1 && static_cast<double>(w) > threshold) return true;
      if (w_tilde >= 2) return false;  // the event is out of reach from here on
    }
    return false;
  }, seed);
}

ValidationResult validate_lil(double p, double delta, std::int64_t horizon,
                              std::int64_t trials, StressSpec stress, std::uint64_t seed,
                              int workers) {
  if (horizon < 1) throw ParameterError("validate_lil: horizon must be >= 1");
  if (trials < 1) throw ParameterError("validate_lil: trials must be >= 1");
  // W only ever reaches horizon, so the boundary is a lookup table.
  std::vector<double> boundary(static_cast<std::size_t>(horizon) + 1, 0.0);
  for (std::int64_t w = 1; w <= horizon; ++w)
    boundary[static_cast<std::size_t>(w)] = lil_boundary(w, p, delta);
  return run_trials(trials, workers, [&](std::uint64_t trial_seed) {
    Mt19937Source rng(trial_seed);
    std::int64_t w = 0, w_tilde = 0;
    for (std::int64_t t = 1; t <= horizon; ++t) {
      const int u = next_u(stress, w_tilde, rng);
      const int b = rng.bernoulli(p) ? 1 : 0;
      w += u;
      w_tilde += u * b;
      if (w >= 1) {
        const double dev = std::abs(static_cast<double>(w) - static_cast<double>(w_tilde) / p);
        if (dev >= boundary[static_cast<std::size_t>(w)]) return true;
      }
    }
    return false;
  }, seed);
}

}  // namespace osc
