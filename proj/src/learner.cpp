#include "osc/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "osc/analysis.hpp"

namespace osc {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kVue: return "vue";
    case Algorithm::kVueProd: return "vue_prod";
    case Algorithm::kMixedLossProd: return "mixed_loss_prod";
    case Algorithm::kAdaptiveMlp: return "adaptive_mlp";
    case Algorithm::kVueProdRelaxed: return "vue_prod_relaxed";
    case Algorithm::kVueProdRelaxedTimeAdapted: return "vue_prod_relaxed_time_adapted";
    case Algorithm::kAlwaysAbstain: return "always_abstain";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "vue") return Algorithm::kVue;
  if (s == "vue_prod") return Algorithm::kVueProd;
  if (s == "mixed_loss_prod") return Algorithm::kMixedLossProd;
  if (s == "adaptive_mlp") return Algorithm::kAdaptiveMlp;
  if (s == "vue_prod_relaxed") return Algorithm::kVueProdRelaxed;
  if (s == "vue_prod_relaxed_time_adapted") return Algorithm::kVueProdRelaxedTimeAdapted;
  if (s == "always_abstain") return Algorithm::kAlwaysAbstain;
  throw ParameterError("unknown algorithm '" + s + "'");
}

void LearnerConfig::validate() const {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("learner: p must lie in (0,1]");
  if (!(eta > 0.0 && eta <= 0.5)) throw ParameterError("learner: eta must lie in (0,1/2]");
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw ParameterError("learner: lambda must lie in (0,1]");
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw ParameterError("learner: epsilon must lie in [0,1)");
  if (mu != 0.0 && !(mu > 0.0 && mu <= 1.0))
    throw ParameterError("learner: mu must lie in (0,1]");
  if (theta < 0.0) throw ParameterError("learner: theta must be >= 0");
  if (horizon < 1) throw ParameterError("learner: horizon must be >= 1");
  if (algorithm == Algorithm::kMixedLossProd && lambda > p)
    throw ParameterError("mixed_loss_prod requires lambda <= p (got lambda=" +
                         std::to_string(lambda) + " > p=" + std::to_string(p) + ")");
  if (algorithm == Algorithm::kAdaptiveMlp) {
    if (mu == 0.0) throw ParameterError("adaptive_mlp: mu is required");
    if (theta == 0.0 && horizon < 2)
      throw ParameterError("adaptive_mlp: automatic theta needs horizon >= 2");
  }
}

double relaxed_retention_threshold(double epsilon, std::int64_t feedback_count) {
  if (epsilon < 0.0 || epsilon >= 1.0)
    throw ParameterError("retention threshold: epsilon must lie in [0,1)");
  if (feedback_count < 0)
    throw ParameterError("retention threshold: feedback count must be >= 0");
  const double en = epsilon * static_cast<double>(feedback_count);
  return en + std::sqrt(2.0 * en);
}

double recommended_p(Algorithm algorithm, std::int64_t n_functions, std::int64_t horizon,
                     double mu) {
  if (n_functions < 2) throw ParameterError("recommended_p: need at least two functions");
  if (horizon < 1) throw ParameterError("recommended_p: horizon must be >= 1");
  if (mu <= 0.0) {
    const double symmetric =
        std::sqrt(static_cast<double>(n_functions) / static_cast<double>(horizon));
    return std::min(symmetric, 0.5);
  }
  if (mu > 1.0) throw ParameterError("recommended_p: mu must lie in (0,1]");
  double u = mu;
  if (algorithm == Algorithm::kMixedLossProd || algorithm == Algorithm::kAdaptiveMlp)
    u = target_rate(mu, 1.0).u;
  return std::min(std::pow(static_cast<double>(horizon), -u), 0.5);
}

namespace {

double log1p_factor(double eta, double loss) {
  // 1 - eta*loss stays in [1/2, 1] for eta <= 1/2, loss <= 1.
  return std::log1p(-eta * loss);
}

class LearnerBase : public Learner {
 public:
  LearnerBase(const FunctionClass& cls, const LearnerConfig& cfg,
              std::unique_ptr<RandomSource> rng)
      : cls_(&cls), cfg_(cfg), rng_(std::move(rng)) {
    cfg_.validate();
    const auto n = static_cast<std::size_t>(cls.size());
    vs_.alive.assign(n, 1);
    vs_.observed_mistakes.assign(n, 0);
    vs_.log_weights.assign(n, 0.0);
  }

  LearnerDebugState debug_state() const override {
    LearnerDebugState d;
    d.version = vs_;
    d.phase = phase_;
    d.phase_start = phase_start_;
    d.current_p = current_p();
    d.current_lambda = current_lambda();
    return d;
  }

 protected:
  virtual double current_p() const { return cfg_.p; }
  virtual double current_lambda() const { return cfg_.lambda; }

  std::int32_t size() const { return cls_->size(); }
  LabelValue value_of(std::int32_t f, ContextId x) const {
    return cls_->functions[static_cast<std::size_t>(f)].table[static_cast<std::size_t>(x) - 1];
  }

  // Sample an index from the weight distribution, optionally restricted to
  // the alive set. Consumes exactly one uniform draw.
  std::int32_t sample_weighted(bool alive_only) {
    double max_lw = -std::numeric_limits<double>::infinity();
    for (std::int32_t f = 0; f < size(); ++f) {
      if (alive_only && !vs_.alive[static_cast<std::size_t>(f)]) continue;
      max_lw = std::max(max_lw, vs_.log_weights[static_cast<std::size_t>(f)]);
    }
    if (!std::isfinite(max_lw))
      throw ProtocolError("learner: weight distribution has empty support");
    double total = 0.0;
    for (std::int32_t f = 0; f < size(); ++f) {
      if (alive_only && !vs_.alive[static_cast<std::size_t>(f)]) continue;
      total += std::exp(vs_.log_weights[static_cast<std::size_t>(f)] - max_lw);
    }
    const double r = rng_->uniform() * total;
    double cum = 0.0;
    std::int32_t last = -1;
    for (std::int32_t f = 0; f < size(); ++f) {
      if (alive_only && !vs_.alive[static_cast<std::size_t>(f)]) continue;
      cum += std::exp(vs_.log_weights[static_cast<std::size_t>(f)] - max_lw);
      last = f;
      if (r < cum) return f;
    }
    return last;
  }

  // Exact versioning: drop every alive function inconsistent with (x, y).
  void eliminate_inconsistent(ContextId x, LabelValue y) {
    for (std::int32_t f = 0; f < size(); ++f) {
      const auto i = static_cast<std::size_t>(f);
      if (!vs_.alive[i]) continue;
      const LabelValue v = value_of(f, x);
      if (v != kAbstain && v != y) {
        vs_.alive[i] = 0;
        vs_.observed_mistakes[i] += 1;
      }
    }
    if (vs_.alive_count() == 0)
      throw ProtocolError("learner: version space emptied under exact versioning");
  }

  static void require_feedback(LabelValue action, LabelValue feedback) {
    const bool abstained = (action == kAbstain);
    if (abstained && feedback == kNoFeedback)
      throw ProtocolError("learner: abstained but received no feedback");
    if (!abstained && feedback != kNoFeedback)
      throw ProtocolError("learner: feedback supplied on a prediction round");
  }

  const FunctionClass* cls_;
  LearnerConfig cfg_;
  std::unique_ptr<RandomSource> rng_;
  VersionState vs_;
  std::int64_t round_ = 0;  // completed rounds
  int phase_ = 0;
  std::int64_t phase_start_ = 0;
};

class AlwaysAbstainLearner final : public LearnerBase {
 public:
  using LearnerBase::LearnerBase;

  Action act(ContextId) override { return {kAbstain, kCoinNotTossed}; }

  void observe(ContextId, LabelValue action, LabelValue feedback, Coin) override {
    require_feedback(action, feedback);
    vs_.feedback_count += 1;
    ++round_;
  }
};

class VueLearner final : public LearnerBase {
 public:
  using LearnerBase::LearnerBase;

  Action act(ContextId x) override {
    // Distinct values the surviving functions take at x.
    std::set<LabelValue> values;
    std::int32_t lowest_alive = -1;
    for (std::int32_t f = 0; f < size(); ++f) {
      if (!vs_.alive[static_cast<std::size_t>(f)]) continue;
      if (lowest_alive < 0) lowest_alive = f;
      values.insert(value_of(f, x));
    }
    if (lowest_alive < 0) throw ProtocolError("vue: empty version space");
    if (values.size() == 1) return {value_of(lowest_alive, x), kCoinNotTossed};

    const Coin coin = rng_->bernoulli(cfg_.p) ? 1 : 0;
    if (coin == 1) return {kAbstain, 1};
    values.erase(kAbstain);
    if (cfg_.tie_break == TieBreak::kLexMin) return {*values.begin(), 0};
    auto it = values.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(rng_->uniform_index(values.size())));
    return {*it, 0};
  }

  void observe(ContextId x, LabelValue action, LabelValue feedback, Coin) override {
    require_feedback(action, feedback);
    if (action == kAbstain) {
      vs_.feedback_count += 1;
      eliminate_inconsistent(x, feedback);
    }
    ++round_;
  }
};

class VueProdLearner final : public LearnerBase {
 public:
  using LearnerBase::LearnerBase;

  Action act(ContextId x) override {
    const std::int32_t f = sample_weighted(/*alive_only=*/true);
    const Coin coin = rng_->bernoulli(cfg_.p) ? 1 : 0;
    return {coin == 1 ? kAbstain : value_of(f, x), coin};
  }

  void observe(ContextId x, LabelValue action, LabelValue feedback, Coin coin) override {
    require_feedback(action, feedback);
    if (coin == 1 && feedback == kNoFeedback)
      throw ProtocolError("vue_prod: exploration round without feedback");
    if (action == kAbstain) vs_.feedback_count += 1;
    // Versioning is driven by the exploration coin, not by incidental
    // abstentions of the sampled function.
    if (coin == 1) eliminate_inconsistent(x, feedback);
    for (std::int32_t f = 0; f < size(); ++f) {
      const auto i = static_cast<std::size_t>(f);
      if (!vs_.alive[i]) continue;  // eliminated weights stay frozen
      if (value_of(f, x) == kAbstain)
        vs_.log_weights[i] += log1p_factor(cfg_.eta, 1.0);
    }
    ++round_;
  }
};

// Weighted-loss scheme: no versioning; every function pays lambda per
// abstention and, on coin rounds, 1 per observed mistake.
class MixedLossProdLearner : public LearnerBase {
 public:
  using LearnerBase::LearnerBase;

  Action act(ContextId x) override {
    const std::int32_t f = sample_weighted(/*alive_only=*/false);
    const Coin coin = rng_->bernoulli(current_p()) ? 1 : 0;
    return {coin == 1 ? kAbstain : value_of(f, x), coin};
  }

  void observe(ContextId x, LabelValue action, LabelValue feedback, Coin coin) override {
    require_feedback(action, feedback);
    if (coin == 1 && feedback == kNoFeedback)
      throw ProtocolError("mixed_loss_prod: exploration round without feedback");
    if (action == kAbstain) vs_.feedback_count += 1;
    const double lambda = current_lambda();
    for (std::int32_t f = 0; f < size(); ++f) {
      const auto i = static_cast<std::size_t>(f);
      const LabelValue v = value_of(f, x);
      double loss = 0.0;
      if (v == kAbstain) {
        loss = lambda;
      } else if (coin == 1 && v != feedback) {
        loss = 1.0;
        vs_.observed_mistakes[i] += 1;
      }
      if (loss != 0.0) vs_.log_weights[i] += log1p_factor(current_eta(), loss);
    }
    after_update(x, feedback, coin);
    ++round_;
  }

 protected:
  virtual double current_eta() const { return cfg_.eta; }
  virtual void after_update(ContextId, LabelValue, Coin) {}
};

// Doubling-trick variant: exploration and abstention weights follow the
// phase index, which advances when the best observably-consistent abstention
// count B* crosses T^(mu + n*theta). Weights restart each phase.
class AdaptiveMlpLearner final : public MixedLossProdLearner {
 public:
  AdaptiveMlpLearner(const FunctionClass& cls, const LearnerConfig& cfg,
                     std::unique_ptr<RandomSource> rng)
      : MixedLossProdLearner(cls, cfg, std::move(rng)) {
    theta_ = cfg_.theta > 0.0 ? cfg_.theta
                              : 2.0 * std::log(2.0) / std::log(static_cast<double>(cfg_.horizon));
    n_max_ = static_cast<int>(std::ceil(1.0 / theta_));
    const auto n = static_cast<std::size_t>(cls.size());
    phase_abstentions_.assign(n, 0);
    phase_sampled_mistakes_.assign(n, 0);
  }

 protected:
  double current_p() const override {
    const double u = exponent_u();
    return std::min(1.0, std::pow(static_cast<double>(cfg_.horizon), -u));
  }

  double current_lambda() const override {
    const double u = exponent_u();
    const double v = static_cast<double>(phase_) * theta_;
    return std::min(1.0, std::pow(static_cast<double>(cfg_.horizon), -(u + v)));
  }

  double current_eta() const override { return 0.5; }

  void after_update(ContextId x, LabelValue feedback, Coin coin) override {
    for (std::int32_t f = 0; f < size(); ++f) {
      const auto i = static_cast<std::size_t>(f);
      const LabelValue v = value_of(f, x);
      if (v == kAbstain) {
        phase_abstentions_[i] += 1;
      } else if (coin == 1 && v != feedback) {
        phase_sampled_mistakes_[i] += 1;
      }
    }
    std::int64_t b_star = std::numeric_limits<std::int64_t>::max();
    for (std::size_t i = 0; i < phase_abstentions_.size(); ++i)
      if (phase_sampled_mistakes_[i] == 0) b_star = std::min(b_star, phase_abstentions_[i]);
    // The all-abstaining function always qualifies, so b_star is finite.
    const double log_t = std::log(static_cast<double>(cfg_.horizon));
    if (b_star >= 1 && phase_ < n_max_ &&
        std::log(static_cast<double>(b_star)) >=
            (cfg_.mu + static_cast<double>(phase_) * theta_) * log_t) {
      ++phase_;
      phase_start_ = round_ + 1;
      std::fill(vs_.log_weights.begin(), vs_.log_weights.end(), 0.0);
      std::fill(phase_abstentions_.begin(), phase_abstentions_.end(), 0);
      std::fill(phase_sampled_mistakes_.begin(), phase_sampled_mistakes_.end(), 0);
    }
  }

 private:
  double exponent_u() const {
    return std::min(1.0 - static_cast<double>(phase_) * theta_, 2.0 * cfg_.mu) / 2.0;
  }

  double theta_ = 0.0;
  int n_max_ = 0;
  std::vector<std::int64_t> phase_abstentions_;
  std::vector<std::int64_t> phase_sampled_mistakes_;
};

// Relaxed versioning: refine on every abstention round, retain functions
// whose observed mistakes stay under the epsilon threshold, and revert the
// whole round if the retained set would come out empty.
class VueProdRelaxedLearner : public LearnerBase {
 public:
  using LearnerBase::LearnerBase;

  Action act(ContextId x) override {
    const std::int32_t f = sample_weighted(/*alive_only=*/true);
    const Coin coin = rng_->bernoulli(current_p()) ? 1 : 0;
    return {coin == 1 ? kAbstain : value_of(f, x), coin};
  }

  void observe(ContextId x, LabelValue action, LabelValue feedback, Coin) override {
    require_feedback(action, feedback);
    const double eta = current_eta();
    bool reverted = false;
    if (action == kAbstain) {
      const std::int64_t ctr = vs_.feedback_count + 1;
      const double threshold = relaxed_retention_threshold(cfg_.epsilon, ctr);
      bool any_survivor = false;
      for (std::int32_t f = 0; f < size() && !any_survivor; ++f) {
        const auto i = static_cast<std::size_t>(f);
        if (!vs_.alive[i]) continue;
        const LabelValue v = value_of(f, x);
        const std::int64_t o = vs_.observed_mistakes[i] + ((v != kAbstain && v != feedback) ? 1 : 0);
        any_survivor = static_cast<double>(o) <= threshold;
      }
      if (!any_survivor) {
        reverted = true;  // nothing was mutated; the round leaves no trace
      } else {
        vs_.feedback_count = ctr;
        for (std::int32_t f = 0; f < size(); ++f) {
          const auto i = static_cast<std::size_t>(f);
          if (!vs_.alive[i]) continue;
          const LabelValue v = value_of(f, x);
          if (v != kAbstain && v != feedback) vs_.observed_mistakes[i] += 1;
          if (static_cast<double>(vs_.observed_mistakes[i]) > threshold) vs_.alive[i] = 0;
        }
      }
    }
    if (!reverted) {
      for (std::int32_t f = 0; f < size(); ++f) {
        const auto i = static_cast<std::size_t>(f);
        if (!vs_.alive[i]) continue;
        if (value_of(f, x) == kAbstain) vs_.log_weights[i] += log1p_factor(eta, 1.0);
      }
    }
    ++round_;
  }

 protected:
  virtual double current_eta() const { return cfg_.eta; }
};

// Horizon-free relaxed variant: p_t = eta_t = min(0.1, 1/sqrt(t)).
class VueProdRelaxedTimeAdaptedLearner final : public VueProdRelaxedLearner {
 public:
  using VueProdRelaxedLearner::VueProdRelaxedLearner;

 protected:
  double current_p() const override {
    const auto t = static_cast<double>(round_ + 1);
    return std::min(0.1, 1.0 / std::sqrt(t));
  }
  double current_eta() const override { return current_p(); }
};

}  // namespace

std::unique_ptr<Learner> make_learner(const FunctionClass& cls, const LearnerConfig& cfg,
                                      std::unique_ptr<RandomSource> rng) {
  if (cls.size() < 1) throw ParameterError("make_learner: empty class");
  switch (cfg.algorithm) {
    case Algorithm::kVue:
      return std::make_unique<VueLearner>(cls, cfg, std::move(rng));
    case Algorithm::kVueProd:
      return std::make_unique<VueProdLearner>(cls, cfg, std::move(rng));
    case Algorithm::kMixedLossProd:
      return std::make_unique<MixedLossProdLearner>(cls, cfg, std::move(rng));
    case Algorithm::kAdaptiveMlp:
      return std::make_unique<AdaptiveMlpLearner>(cls, cfg, std::move(rng));
    case Algorithm::kVueProdRelaxed:
      return std::make_unique<VueProdRelaxedLearner>(cls, cfg, std::move(rng));
    case Algorithm::kVueProdRelaxedTimeAdapted:
      return std::make_unique<VueProdRelaxedTimeAdaptedLearner>(cls, cfg, std::move(rng));
    case Algorithm::kAlwaysAbstain:
      return std::make_unique<AlwaysAbstainLearner>(cls, cfg, std::move(rng));
  }
  throw ParameterError("make_learner: unknown algorithm");
}

}  // namespace osc
