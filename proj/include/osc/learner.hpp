#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "osc/model.hpp"
#include "osc/rng.hpp"
#include "osc/types.hpp"

namespace osc {

enum class Algorithm {
  kVue,
  kVueProd,
  kMixedLossProd,
  kAdaptiveMlp,
  kVueProdRelaxed,
  kVueProdRelaxedTimeAdapted,
  kAlwaysAbstain,
};

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

enum class TieBreak { kLexMin, kUniformRandom };

struct LearnerConfig {
  Algorithm algorithm = Algorithm::kVue;
  double p = 0.1;        // exploration rate, (0, 1]
  double eta = 0.1;      // learning rate, (0, 1/2]
  double lambda = 0.1;   // abstention weight, (0, 1]
  double epsilon = 0.0;  // mistake tolerance of the relaxed schemes, [0, 1)
  double mu = 0.0;       // target mistake-rate exponent; 0 = unset
  double theta = 0.0;    // phase scale; 0 = derive from the horizon
  std::int64_t horizon = 1;
  TieBreak tie_break = TieBreak::kLexMin;

  void validate() const;
};

// Surviving-function bookkeeping shared by the versioning learners.
struct VersionState {
  std::vector<std::uint8_t> alive;            // membership in V_t
  std::vector<std::int64_t> observed_mistakes;  // o_t^f, on feedback rounds only
  std::int64_t feedback_count = 0;            // Ctr_t
  std::vector<double> log_weights;            // w_t^f, kept in log domain

  std::int64_t alive_count() const {
    std::int64_t n = 0;
    for (auto a : alive) n += a;
    return n;
  }
};

struct Action {
  LabelValue action = kAbstain;
  Coin coin = kCoinNotTossed;
};

// Snapshot of learner internals for replay tests and invariant checks.
struct LearnerDebugState {
  VersionState version;
  int phase = 0;
  std::int64_t phase_start = 0;  // rounds completed when the phase began
  double current_p = 0.0;
  double current_lambda = 0.0;
};

// One game, one learner. act() sees only the context; observe() sees only the
// feedback channel. All learner randomness flows through the injected source.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual Action act(ContextId x) = 0;
  virtual void observe(ContextId x, LabelValue action, LabelValue feedback, Coin coin) = 0;
  virtual LearnerDebugState debug_state() const = 0;
};

std::unique_ptr<Learner> make_learner(const FunctionClass& cls, const LearnerConfig& cfg,
                                      std::unique_ptr<RandomSource> rng);

// Exploration-rate choices. mu <= 0 selects the symmetric choice
// min(sqrt(N/T), 1/2); mu > 0 selects the rate parameterization T^-u, with
// u = mu for the versioning schemes and u from target_rate(mu, 1) for the
// weighted-loss ones. Always capped at 1/2.
double recommended_p(Algorithm algorithm, std::int64_t n_functions, std::int64_t horizon,
                     double mu = 0.0);

// Relaxed-versioning retention bound: a function stays while its observed
// mistakes are at most epsilon*Ctr + sqrt(2*epsilon*Ctr).
double relaxed_retention_threshold(double epsilon, std::int64_t feedback_count);

}  // namespace osc
