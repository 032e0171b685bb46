#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "osc/types.hpp"

namespace osc {

// A selective classifier over a finite context domain: a total table mapping
// each context to a class label or kAbstain.
struct SelectiveClassifier {
  std::int32_t id = 0;
  std::vector<LabelValue> table;  // index x-1 for context x

  LabelValue evaluate(ContextId x) const {
    if (x < 1 || static_cast<std::size_t>(x) > table.size())
      throw ParameterError("evaluate: context " + std::to_string(x) +
                           " outside domain [1," + std::to_string(table.size()) + "]");
    return table[static_cast<std::size_t>(x) - 1];
  }

  bool always_abstains() const {
    for (LabelValue v : table)
      if (v != kAbstain) return false;
    return true;
  }

  bool operator==(const SelectiveClassifier&) const = default;
};

inline LabelValue evaluate(const SelectiveClassifier& f, ContextId x) {
  return f.evaluate(x);
}

// A finite class of selective classifiers. Always carries the all-abstaining
// classifier, at position abstain_index. Duplicates are permitted except that
// exactly one all-abstaining function is kept.
struct FunctionClass {
  ContextId domain_size = 0;
  std::int32_t num_labels = 0;  // K
  std::vector<SelectiveClassifier> functions;
  std::int32_t abstain_index = -1;

  std::int32_t size() const { return static_cast<std::int32_t>(functions.size()); }

  const SelectiveClassifier& at(std::int32_t id) const {
    if (id < 0 || id >= size())
      throw ParameterError("function id " + std::to_string(id) + " out of range");
    return functions[static_cast<std::size_t>(id)];
  }

  // Checks totality, label ranges, id/position agreement, and that exactly
  // one all-abstaining function exists and is abstain_index.
  void validate() const;

  bool operator==(const FunctionClass&) const = default;
};

// The threshold family on domain [1:n]: n+1 functions, where function t
// abstains on contexts x <= t and predicts label 1 on x > t. Function 0 never
// abstains; function n is the all-abstaining one. K = 2 (labels {1, 2}).
FunctionClass make_threshold_class(int n);

// Random class: every generated table cell is kAbstain with probability
// abstain_prob, otherwise a uniform label in [1..num_labels]. All-abstaining
// duplicates collapse to a single function; one is appended if none was
// generated. Deterministic in seed.
FunctionClass make_random_class(ContextId domain_size, std::int32_t num_labels,
                                std::int32_t n_functions, double abstain_prob,
                                std::uint64_t seed);

// Line-oriented text format (bit-exact round trip):
//   class <|X|> <K> <N>
//   <|X| entries per function line, `_` for abstain>
void save_class(const FunctionClass& cls, std::ostream& out);
FunctionClass load_class(std::istream& in);
std::string class_to_string(const FunctionClass& cls);
FunctionClass class_from_string(const std::string& text);

// One round of the game as recorded in a transcript.
struct RoundRecord {
  std::int64_t t = 0;  // 1-based round index
  ContextId context = 0;
  LabelValue label = 0;               // Y_t, ground truth
  LabelValue action = kAbstain;       // what the learner played
  LabelValue feedback = kNoFeedback;  // label iff the action abstained
  Coin coin = kCoinNotTossed;

  bool operator==(const RoundRecord&) const = default;
};

struct Transcript {
  std::vector<RoundRecord> rounds;
  std::uint64_t config_digest = 0;
  std::uint64_t seed = 0;

  std::int64_t horizon() const { return static_cast<std::int64_t>(rounds.size()); }

  // Round indices contiguous from 1; feedback rule holds in every record.
  void validate() const;
};

}  // namespace osc
