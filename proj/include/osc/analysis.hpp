#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "osc/model.hpp"
#include "osc/types.hpp"

namespace osc {

// Hindsight statistics of a class against a realized stream.
struct CompetitorReport {
  std::int32_t f_star_id = -1;  // zero-mistake function with fewest abstentions
  std::int64_t a_star = 0;      // its abstention count
  std::int64_t m_star = 0;      // minimum mistakes over the class

  // Per-function totals over the transcript, indexed by function id.
  std::vector<std::int64_t> mistakes;
  std::vector<std::int64_t> abstentions;

  // Pareto staircase of (mistake budget, fewest abstentions): increasing in
  // budget, non-increasing in abstentions.
  std::vector<std::pair<std::int64_t, std::int64_t>> pareto;

  // B_t* per round when requested: fewest abstentions so far among functions
  // with no coin-sampled mistake so far.
  std::vector<std::int64_t> b_star_series;

  // Fewest abstentions among functions making at most m mistakes. When no
  // function qualifies, falls back to the abstentions of the least-mistake
  // function (fewest abstentions among those) and reports feasible = false.
  std::int64_t a_star_of(std::int64_t m, bool* feasible = nullptr) const;
};

CompetitorReport competitor(const Transcript& transcript, const FunctionClass& cls,
                            bool with_b_star_series = false);

struct RegretSummary {
  std::int64_t horizon = 0;
  std::int64_t mistakes = 0;           // M_T
  std::int64_t abstentions = 0;        // A_T
  std::int64_t a_star = 0;             // A_T*
  std::int64_t m_star = 0;             // M_T*
  std::int64_t excess_mistakes = 0;    // M_T - M_T*
  std::int64_t excess_abstentions = 0; // A_T - A_T*
  std::int64_t mmea = 0;               // A_T - A*(M_T)
  bool mmea_fallback = false;          // no function had <= M_T mistakes
  std::int64_t coin_heads = 0;         // sum of C_t
};

RegretSummary summarize(const Transcript& transcript, const FunctionClass& cls);

// Incremental form of summarize for summary-only runs: feed records in round
// order, then finish().
class SummaryAccumulator {
 public:
  explicit SummaryAccumulator(const FunctionClass& cls);
  void add(const RoundRecord& r);
  RegretSummary finish() const;

 private:
  const FunctionClass* cls_;
  std::vector<std::int64_t> mistakes_;
  std::vector<std::int64_t> abstentions_;
  RegretSummary totals_;
};

// Least-squares slope of log(value) against log(T).
struct RateFit {
  double slope = 0.0;
  double stderr = 0.0;
  double intercept = 0.0;
  int n_points = 0;
  int n_floored = 0;  // non-positive values floored at 0.5 before fitting
};

RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

// Smallest abstention-rate exponent reachable at mistake exponent mu when the
// competitor abstains at rate alpha_star, with the optimizing (u, v) of the
// p = T^-u, lambda = T^-(u+v) parameterization.
struct TargetRate {
  double alpha_tilde = 0.0;
  double u = 0.0;
  double v = 0.0;
};

TargetRate target_rate(double mu, double alpha_star);

// Mistake floor gamma*(exp(-2*gamma*K)*T - K) implied by K expected excess
// abstentions under the easy law of the lower-bound pair.
struct LowerBoundCheck {
  double bound = 0.0;
  double margin = 0.0;
  bool pass = false;
  double slack = 0.0;  // M_hat - (bound - margin)
};

LowerBoundCheck lower_bound_check(double k_hat, double gamma, std::int64_t horizon,
                                  double m_hat, double margin = 0.0);

// Achievable-rate region boundaries as exact polylines in the (mu, alpha)
// plane, for plotting.
struct RateRegion {
  std::string name;
  std::vector<std::pair<double, double>> vertices;  // (mu, alpha)
};

std::vector<RateRegion> achievable_regions(double alpha_star);

}  // namespace osc
