#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "osc/adversary.hpp"
#include "osc/learner.hpp"
#include "osc/model.hpp"

namespace osc {

// How the function class is obtained.
struct ClassSpec {
  enum class Kind { kThreshold, kRandom, kFile };
  Kind kind = Kind::kThreshold;
  int n = 1;  // threshold
  ContextId domain_size = 1;  // random
  std::int32_t num_labels = 2;
  std::int32_t n_functions = 1;
  double abstain_prob = 0.0;
  std::uint64_t class_seed = 1;
  std::string path;  // file

  bool operator==(const ClassSpec&) const = default;
};

FunctionClass build_class(const ClassSpec& spec);

// One grid value for a learner parameter. Literal, the symmetric sqrt(N/T)
// choice, a power of the horizon, or "match p".
struct ParamValue {
  enum class Form { kLiteral, kSqrtNT, kPowT, kCopyP };
  Form form = Form::kLiteral;
  double value = 0.0;  // literal value, or the exponent for kPowT

  double resolve(std::int64_t n_functions, std::int64_t horizon, double p) const;
  std::string render() const;

  bool operator==(const ParamValue&) const = default;
};

// Adversary description at config level; kThresholdTight leaves the horizon
// open (filled per run) and takes n from the class.
struct AdversaryConfig {
  AdversaryKind kind = AdversaryKind::kStochastic;
  StochasticLaw law;
  int t_star = 1;
  double gamma = 0.0;
  ContextId context = 1;
  std::int32_t target_id = 0;
  double noise_rate = 0.0;
  bool uniform_context_law = true;
  ContextLaw context_law;

  AdversarySpec resolve(const FunctionClass& cls, std::int64_t horizon) const;

  bool operator==(const AdversaryConfig&) const = default;
};

struct LearnerGrid {
  Algorithm algorithm = Algorithm::kVue;
  std::vector<ParamValue> p, eta, lambda, epsilon, mu, theta;
  TieBreak tie_break = TieBreak::kLexMin;

  bool operator==(const LearnerGrid&) const = default;
};

enum class RunMode { kSummaryOnly, kFullTranscript };

struct ExperimentSpec {
  std::string name = "experiment";
  RunMode mode = RunMode::kSummaryOnly;
  std::string output = "out";
  std::vector<std::int64_t> horizons;
  int seed_count = 1;
  std::uint64_t base_seed = 1;
  ClassSpec class_spec;
  AdversaryConfig adversary;
  std::vector<LearnerGrid> learners;

  bool operator==(const ExperimentSpec&) const = default;
};

// Strict line-oriented parser: `[section]` headers, `key = value` lines,
// `#` comments. Unknown keys and malformed lines are errors with line
// numbers. Cross-field rules (e.g. lambda <= p for mixed_loss_prod) are
// checked over the fully expanded grid.
ExperimentSpec parse_config(std::istream& in);
ExperimentSpec parse_config_file(const std::string& path);
ExperimentSpec parse_config_string(const std::string& text);

// Canonical rendering; parse_config(serialize(spec)) == spec.
std::string serialize(const ExperimentSpec& spec);

// One fully resolved run of a sweep.
struct ResolvedRun {
  std::int64_t run_id = 0;
  int grid_index = 0;        // flattened grid-point index
  int seed_index = 0;
  std::uint64_t run_seed = 0;
  std::int64_t horizon = 0;
  LearnerConfig learner;
};

// Expands grids x horizons x seeds in deterministic order and validates
// every resolved combination. n_functions is the size of the built class.
std::vector<ResolvedRun> expand_runs(const ExperimentSpec& spec, std::int64_t n_functions);

}  // namespace osc
