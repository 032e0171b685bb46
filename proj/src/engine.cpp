#include "osc/engine.hpp"

#include <ostream>
#include <sstream>

namespace osc {

namespace {

void run_loop(const FunctionClass& cls, Learner& learner, Adversary& adversary,
              std::int64_t horizon, RoundObserver* observer,
              const std::function<void(const RoundRecord&)>& sink) {
  std::vector<AdversaryRound> adv_history;
  adv_history.reserve(static_cast<std::size_t>(horizon));
  for (std::int64_t t = 1; t <= horizon; ++t) {
    const auto [x, y] = adversary.next_pair(
        AdversaryHistory(adv_history.data(), adv_history.size()));
    if (x < 1 || x > cls.domain_size)
      throw ProtocolError("engine: adversary emitted context " + std::to_string(x) +
                          " outside the domain");
    if (y < 1 || y > cls.num_labels)
      throw ProtocolError("engine: adversary emitted label " + std::to_string(y) +
                          " outside [1,K]");
    const Action a = learner.act(x);
    if (a.action != kAbstain && (a.action < 1 || a.action > cls.num_labels))
      throw ProtocolError("engine: learner played " + std::to_string(a.action) +
                          " outside labels plus abstain");
    const LabelValue feedback = (a.action == kAbstain) ? y : kNoFeedback;
    learner.observe(x, a.action, feedback, a.coin);

    RoundRecord rec;
    rec.t = t;
    rec.context = x;
    rec.label = y;
    rec.action = a.action;
    rec.feedback = feedback;
    rec.coin = a.coin;
    sink(rec);
    if (observer) observer->on_round(rec, learner);
    adv_history.push_back({x, y, a.action});
  }
}

}  // namespace

void GameConfig::validate() const {
  if (horizon < 1) throw ParameterError("game: horizon must be >= 1");
  LearnerConfig lc = learner;
  lc.horizon = horizon;
  lc.validate();
  adversary.validate();
}

std::uint64_t GameConfig::digest() const {
  std::ostringstream ss;
  ss << "T=" << horizon << ";alg=" << to_string(learner.algorithm) << ";p=" << learner.p
     << ";eta=" << learner.eta << ";lambda=" << learner.lambda << ";eps=" << learner.epsilon
     << ";mu=" << learner.mu << ";theta=" << learner.theta
     << ";tie=" << (learner.tie_break == TieBreak::kLexMin ? "lex" : "unif")
     << ";adv=" << adversary.name() << ";seed=" << seed;
  return fnv1a64(ss.str());
}

Transcript run_rounds(const FunctionClass& cls, Learner& learner, Adversary& adversary,
                      std::int64_t horizon, RoundObserver* observer, std::uint64_t digest,
                      std::uint64_t seed) {
  Transcript tr;
  tr.config_digest = digest;
  tr.seed = seed;
  tr.rounds.reserve(static_cast<std::size_t>(horizon));
  run_loop(cls, learner, adversary, horizon, observer,
           [&tr](const RoundRecord& r) { tr.rounds.push_back(r); });
  return tr;
}

Transcript run(const FunctionClass& cls, const GameConfig& cfg, RoundObserver* observer) {
  cls.validate();
  cfg.validate();
  LearnerConfig lc = cfg.learner;
  lc.horizon = cfg.horizon;
  AdversarySpec spec = cfg.adversary;
  if (spec.kind == AdversaryKind::kThresholdTight && spec.horizon == 0)
    spec.horizon = cfg.horizon;
  auto learner = make_learner(cls, lc, make_rng(derive_stream_seed(cfg.seed, kLearnerStreamTag)));
  Adversary adversary(&cls, spec, derive_stream_seed(cfg.seed, kAdversaryStreamTag));
  return run_rounds(cls, *learner, adversary, cfg.horizon, observer, cfg.digest(), cfg.seed);
}

RegretSummary run_summary(const FunctionClass& cls, const GameConfig& cfg,
                          RoundObserver* observer) {
  cls.validate();
  cfg.validate();
  LearnerConfig lc = cfg.learner;
  lc.horizon = cfg.horizon;
  AdversarySpec spec = cfg.adversary;
  if (spec.kind == AdversaryKind::kThresholdTight && spec.horizon == 0)
    spec.horizon = cfg.horizon;
  auto learner = make_learner(cls, lc, make_rng(derive_stream_seed(cfg.seed, kLearnerStreamTag)));
  Adversary adversary(&cls, spec, derive_stream_seed(cfg.seed, kAdversaryStreamTag));
  SummaryAccumulator acc(cls);
  run_loop(cls, *learner, adversary, cfg.horizon, observer,
           [&acc](const RoundRecord& r) { acc.add(r); });
  return acc.finish();
}

std::pair<Transcript, Transcript> run_coupled_pair(const FunctionClass& cls,
                                                   const GameConfig& cfg_p1,
                                                   const GameConfig& cfg_p2) {
  if (cfg_p1.seed != cfg_p2.seed)
    throw ParameterError("run_coupled_pair: configs must share the seed");
  if (cfg_p1.adversary.kind != AdversaryKind::kLowerBoundP1 ||
      cfg_p2.adversary.kind != AdversaryKind::kLowerBoundP2)
    throw ParameterError("run_coupled_pair: expected the lower-bound pair of laws");
  if (cfg_p1.adversary.gamma != cfg_p2.adversary.gamma ||
      cfg_p1.adversary.context != cfg_p2.adversary.context)
    throw ParameterError("run_coupled_pair: pair parameters differ");
  return {run(cls, cfg_p1), run(cls, cfg_p2)};
}

void write_transcript_csv(const Transcript& transcript, std::ostream& out) {
  out << "t,x,y,action,feedback,coin\n";
  for (const RoundRecord& r : transcript.rounds) {
    out << r.t << ',' << r.context << ',' << r.label << ',';
    if (r.action == kAbstain)
      out << '_';
    else
      out << r.action;
    out << ',';
    if (r.feedback == kNoFeedback)
      out << '_';
    else
      out << r.feedback;
    out << ',';
    if (r.coin == kCoinNotTossed)
      out << '_';
    else
      out << static_cast<int>(r.coin);
    out << '\n';
  }
}

}  // namespace osc
