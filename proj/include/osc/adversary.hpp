#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "osc/model.hpp"
#include "osc/rng.hpp"
#include "osc/types.hpp"

namespace osc {

enum class AdversaryKind {
  kStochastic,
  kThresholdTight,
  kLowerBoundP1,
  kLowerBoundP2,
  kNoisySynthetic,
  kScripted,
};

std::string to_string(AdversaryKind kind);

// One atom of a stochastic law over (context, label) pairs.
struct SupportAtom {
  ContextId context = 1;
  LabelValue label = 1;
  double prob = 1.0;

  bool operator==(const SupportAtom&) const = default;
};

struct StochasticLaw {
  std::vector<SupportAtom> support;

  // Probabilities nonnegative, summing to 1 within 1e-12.
  void validate() const;

  bool operator==(const StochasticLaw&) const = default;
};

// A distribution over contexts only (used by the noisy synthetic adversary).
struct ContextLaw {
  std::vector<std::pair<ContextId, double>> atoms;

  void validate() const;

  bool operator==(const ContextLaw&) const = default;
};

ContextLaw make_uniform_context_law(ContextId domain_size);

// What the adversary may see of the past: (X_s, Y_s, Yhat_s) for s < t.
struct AdversaryRound {
  ContextId context = 0;
  LabelValue label = 0;
  LabelValue action = 0;
};
// Marker for a history record whose action field was never filled in. Only
// adaptive adversaries care; handing them such a history is a protocol error.
inline constexpr LabelValue kActionUnset = -2;

using AdversaryHistory = std::span<const AdversaryRound>;
using ScriptFn = std::function<std::pair<ContextId, LabelValue>(AdversaryHistory)>;

// Declarative description of a data-generating process. The engine constructs
// a runtime Adversary from this plus a stream seed.
struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::kStochastic;

  StochasticLaw law;  // kStochastic

  int n = 0;  // kThresholdTight: number of contexts (blocks)
  int t_star = 0;
  std::int64_t horizon = 0;

  double gamma = 0.0;  // kLowerBoundP1/P2
  ContextId context = 1;

  std::int32_t target_id = -1;  // kNoisySynthetic
  double noise_rate = 0.0;
  ContextLaw context_law;

  ScriptFn script;  // kScripted; not expressible in config files

  void validate() const;

  // Compact CSV-safe tag, e.g. "threshold_tight[n=4 t*=2]".
  std::string name() const;
};

// Runtime adversary: emits one (context, label) pair per round. Stochastic
// kinds never read the history; the scripted kind requires complete action
// entries in it.
class Adversary {
 public:
  // cls may be null for kinds that do not evaluate class members
  // (everything except kNoisySynthetic).
  Adversary(const FunctionClass* cls, AdversarySpec spec, std::uint64_t seed);

  std::pair<ContextId, LabelValue> next_pair(AdversaryHistory history);

  bool is_stochastic() const;
  const AdversarySpec& spec() const { return spec_; }

 private:
  AdversarySpec spec_;
  std::unique_ptr<RandomSource> rng_;
  std::vector<LabelValue> target_table_;  // kNoisySynthetic
  std::int32_t num_labels_ = 0;
};

// The lower-bound pair of laws on a shared context: the first always emits
// label 1; the second flips to label 2 independently with probability gamma.
// Built from one seed they stay coupled: the label streams agree until the
// second law's first flip.
std::pair<AdversarySpec, AdversarySpec> make_lower_bound_pair(double gamma,
                                                              ContextId shared_context);

// Two-function companion class for the lower-bound pair: one function
// predicting label 1 at every context, plus the all-abstaining one.
FunctionClass make_lower_bound_class(ContextId domain_size);

// Deterministic block schedule on the threshold class: context 1 for
// ceil(horizon/n) rounds, then context 2, ..., with the final block truncated
// at the horizon. Contexts <= t_star carry the off label 2, the rest label 1.
AdversarySpec make_threshold_tight_adversary(int n, int t_star, std::int64_t horizon);

// i.i.d. stochastic stand-in for a real data stream: X ~ context_law;
// Y = target(X) flipped to a uniform other label with probability noise_rate
// where the target predicts, and uniform over all labels where it abstains.
AdversarySpec make_noisy_synthetic(const FunctionClass& cls, std::int32_t target_id,
                                   double noise_rate, ContextLaw context_law);

}  // namespace osc
