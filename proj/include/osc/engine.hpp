#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>

#include "osc/adversary.hpp"
#include "osc/analysis.hpp"
#include "osc/learner.hpp"
#include "osc/model.hpp"

namespace osc {

// Stream tags: a run seed never feeds a generator directly; the learner and
// adversary streams are derived with these tags (see rng.hpp).
inline constexpr std::uint64_t kLearnerStreamTag = 0x4c4541524e455221ull;
inline constexpr std::uint64_t kAdversaryStreamTag = 0x4144565345525921ull;

// A single game between one learner and one adversary.
struct GameConfig {
  std::int64_t horizon = 1;
  LearnerConfig learner;
  AdversarySpec adversary;
  std::uint64_t seed = 1;

  void validate() const;
  std::uint64_t digest() const;
};

// Per-round hook for invariant checks and streaming metrics. The learner
// reference is read-only by convention (debug_state only).
class RoundObserver {
 public:
  virtual ~RoundObserver() = default;
  virtual void on_round(const RoundRecord& record, const Learner& learner) = 0;
};

// Runs the full protocol loop: the adversary emits (X_t, Y_t) from its
// visible history, the learner acts on X_t alone, and the label is revealed
// only through the feedback channel on abstention rounds.
Transcript run(const FunctionClass& cls, const GameConfig& cfg,
               RoundObserver* observer = nullptr);

// Same loop with caller-supplied learner and adversary (used by replay tests
// that inject scripted randomness).
Transcript run_rounds(const FunctionClass& cls, Learner& learner, Adversary& adversary,
                      std::int64_t horizon, RoundObserver* observer = nullptr,
                      std::uint64_t digest = 0, std::uint64_t seed = 0);

// Summary-only mode: identical game, no transcript retained.
RegretSummary run_summary(const FunctionClass& cls, const GameConfig& cfg,
                          RoundObserver* observer = nullptr);

// Coupled lower-bound experiment: both configs must share the seed (hence the
// learner stream) and carry the matching pair of lower-bound laws.
std::pair<Transcript, Transcript> run_coupled_pair(const FunctionClass& cls,
                                                   const GameConfig& cfg_p1,
                                                   const GameConfig& cfg_p2);

// CSV export with columns t,x,y,action,feedback,coin; `_` stands for the
// abstain action, missing feedback, and untossed coins.
void write_transcript_csv(const Transcript& transcript, std::ostream& out);

}  // namespace osc
