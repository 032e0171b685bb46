#include "osc/adversary.hpp"

#include <cmath>
#include <sstream>

namespace osc {

namespace {
constexpr LabelValue kOffLabel = 2;  // mistake-inducing label of the tight schedule
constexpr double kProbSumTol = 1e-12;
}  // namespace

std::string to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::kStochastic: return "stochastic";
    case AdversaryKind::kThresholdTight: return "threshold_tight";
    case AdversaryKind::kLowerBoundP1: return "lower_bound_p1";
    case AdversaryKind::kLowerBoundP2: return "lower_bound_p2";
    case AdversaryKind::kNoisySynthetic: return "noisy_synthetic";
    case AdversaryKind::kScripted: return "scripted";
  }
  return "unknown";
}

void StochasticLaw::validate() const {
  if (support.empty()) throw ParameterError("stochastic law: empty support");
  double sum = 0.0;
  for (const auto& a : support) {
    if (a.prob < 0.0) throw ParameterError("stochastic law: negative probability");
    if (a.context < 1) throw ParameterError("stochastic law: context must be >= 1");
    if (a.label < 1) throw ParameterError("stochastic law: label must be >= 1");
    sum += a.prob;
  }
  if (std::abs(sum - 1.0) > kProbSumTol)
    throw ParameterError("stochastic law: probabilities sum to " + std::to_string(sum));
}

void ContextLaw::validate() const {
  if (atoms.empty()) throw ParameterError("context law: empty support");
  double sum = 0.0;
  for (const auto& [x, p] : atoms) {
    if (p < 0.0) throw ParameterError("context law: negative probability");
    if (x < 1) throw ParameterError("context law: context must be >= 1");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbSumTol)
    throw ParameterError("context law: probabilities sum to " + std::to_string(sum));
}

ContextLaw make_uniform_context_law(ContextId domain_size) {
  if (domain_size < 1) throw ParameterError("uniform context law: empty domain");
  ContextLaw law;
  law.atoms.reserve(static_cast<std::size_t>(domain_size));
  const double p = 1.0 / static_cast<double>(domain_size);
  for (ContextId x = 1; x <= domain_size; ++x) law.atoms.emplace_back(x, p);
  return law;
}

void AdversarySpec::validate() const {
  switch (kind) {
    case AdversaryKind::kStochastic:
      law.validate();
      break;
    case AdversaryKind::kThresholdTight:
      if (n < 1) throw ParameterError("threshold_tight: n must be >= 1");
      if (t_star < 1 || t_star > n)
        throw ParameterError("threshold_tight: t_star must lie in [1," + std::to_string(n) + "]");
      if (horizon < 1) throw ParameterError("threshold_tight: horizon must be >= 1");
      break;
    case AdversaryKind::kLowerBoundP1:
    case AdversaryKind::kLowerBoundP2:
      if (gamma < 0.0 || gamma > 0.5)
        throw ParameterError("lower_bound: gamma must lie in [0, 1/2]");
      if (context < 1) throw ParameterError("lower_bound: context must be >= 1");
      break;
    case AdversaryKind::kNoisySynthetic:
      if (noise_rate < 0.0 || noise_rate >= 1.0)
        throw ParameterError("noisy_synthetic: noise_rate must lie in [0,1)");
      if (target_id < 0) throw ParameterError("noisy_synthetic: target_id unset");
      context_law.validate();
      break;
    case AdversaryKind::kScripted:
      if (!script) throw ParameterError("scripted adversary: no transition rule supplied");
      break;
  }
}

std::string AdversarySpec::name() const {
  std::ostringstream ss;
  ss << to_string(kind);
  switch (kind) {
    case AdversaryKind::kThresholdTight:
      ss << "[n=" << n << " t*=" << t_star << "]";
      break;
    case AdversaryKind::kLowerBoundP1:
    case AdversaryKind::kLowerBoundP2:
      ss << "[gamma=" << gamma << "]";
      break;
    case AdversaryKind::kNoisySynthetic:
      ss << "[target=" << target_id << " noise=" << noise_rate << "]";
      break;
    default:
      break;
  }
  return ss.str();
}

Adversary::Adversary(const FunctionClass* cls, AdversarySpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), rng_(make_rng(seed)) {
  spec_.validate();
  if (spec_.kind == AdversaryKind::kNoisySynthetic) {
    if (cls == nullptr)
      throw ParameterError("noisy_synthetic: needs the function class for the target");
    const auto& target = cls->at(spec_.target_id);
    target_table_ = target.table;
    num_labels_ = cls->num_labels;
    if (spec_.noise_rate > 0.0 && num_labels_ < 2)
      throw ParameterError("noisy_synthetic: noise needs at least two labels");
    for (const auto& [x, p] : spec_.context_law.atoms)
      if (x > cls->domain_size)
        throw ParameterError("noisy_synthetic: context law leaves the class domain");
  }
}

bool Adversary::is_stochastic() const {
  return spec_.kind != AdversaryKind::kScripted;
}

std::pair<ContextId, LabelValue> Adversary::next_pair(AdversaryHistory history) {
  switch (spec_.kind) {
    case AdversaryKind::kStochastic: {
      const double u = rng_->uniform();
      double cum = 0.0;
      for (const auto& a : spec_.law.support) {
        cum += a.prob;
        if (u < cum) return {a.context, a.label};
      }
      const auto& last = spec_.law.support.back();
      return {last.context, last.label};
    }
    case AdversaryKind::kThresholdTight: {
      const std::int64_t t = static_cast<std::int64_t>(history.size()) + 1;
      if (t > spec_.horizon)
        throw ProtocolError("threshold_tight: asked for a round past the horizon");
      const std::int64_t block = (spec_.horizon + spec_.n - 1) / spec_.n;  // ceil
      const auto ctx = static_cast<ContextId>(
          std::min<std::int64_t>(spec_.n, 1 + (t - 1) / block));
      const LabelValue y = (ctx <= spec_.t_star) ? kOffLabel : 1;
      return {ctx, y};
    }
    case AdversaryKind::kLowerBoundP1:
      return {spec_.context, 1};
    case AdversaryKind::kLowerBoundP2:
      return {spec_.context, rng_->bernoulli(spec_.gamma) ? kOffLabel : 1};
    case AdversaryKind::kNoisySynthetic: {
      const double u = rng_->uniform();
      double cum = 0.0;
      ContextId x = spec_.context_law.atoms.back().first;
      for (const auto& [ctx, p] : spec_.context_law.atoms) {
        cum += p;
        if (u < cum) {
          x = ctx;
          break;
        }
      }
      const LabelValue fx = target_table_[static_cast<std::size_t>(x) - 1];
      if (fx == kAbstain)
        return {x, 1 + static_cast<LabelValue>(
                       rng_->uniform_index(static_cast<std::uint64_t>(num_labels_)))};
      if (rng_->bernoulli(spec_.noise_rate)) {
        // Uniform over the other K-1 labels.
        auto off = 1 + static_cast<LabelValue>(
                       rng_->uniform_index(static_cast<std::uint64_t>(num_labels_ - 1)));
        if (off >= fx) ++off;
        return {x, off};
      }
      return {x, fx};
    }
    case AdversaryKind::kScripted: {
      for (const auto& r : history)
        if (r.action == kActionUnset)
          throw ProtocolError("scripted adversary: history is missing learner actions");
      return spec_.script(history);
    }
  }
  throw ProtocolError("adversary: unknown kind");
}

std::pair<AdversarySpec, AdversarySpec> make_lower_bound_pair(double gamma,
                                                              ContextId shared_context) {
  if (gamma < 0.0 || gamma > 0.5)
    throw ParameterError("make_lower_bound_pair: gamma must lie in [0, 1/2]");
  AdversarySpec p1;
  p1.kind = AdversaryKind::kLowerBoundP1;
  p1.gamma = gamma;
  p1.context = shared_context;
  AdversarySpec p2 = p1;
  p2.kind = AdversaryKind::kLowerBoundP2;
  p1.validate();
  p2.validate();
  return {p1, p2};
}

FunctionClass make_lower_bound_class(ContextId domain_size) {
  if (domain_size < 1) throw ParameterError("make_lower_bound_class: empty domain");
  FunctionClass cls;
  cls.domain_size = domain_size;
  cls.num_labels = 2;
  SelectiveClassifier predictor;
  predictor.id = 0;
  predictor.table.assign(static_cast<std::size_t>(domain_size), 1);
  SelectiveClassifier bottom;
  bottom.id = 1;
  bottom.table.assign(static_cast<std::size_t>(domain_size), kAbstain);
  cls.functions = {std::move(predictor), std::move(bottom)};
  cls.abstain_index = 1;
  cls.validate();
  return cls;
}

AdversarySpec make_threshold_tight_adversary(int n, int t_star, std::int64_t horizon) {
  AdversarySpec spec;
  spec.kind = AdversaryKind::kThresholdTight;
  spec.n = n;
  spec.t_star = t_star;
  spec.horizon = horizon;
  spec.validate();
  return spec;
}

AdversarySpec make_noisy_synthetic(const FunctionClass& cls, std::int32_t target_id,
                                   double noise_rate, ContextLaw context_law) {
  cls.at(target_id);  // range check
  AdversarySpec spec;
  spec.kind = AdversaryKind::kNoisySynthetic;
  spec.target_id = target_id;
  spec.noise_rate = noise_rate;
  spec.context_law = std::move(context_law);
  spec.validate();
  return spec;
}

}  // namespace osc
