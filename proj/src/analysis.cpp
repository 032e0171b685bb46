#include "osc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace osc {

namespace {

// Least-mistake function, ties broken by fewer abstentions, then lower id.
std::int32_t least_mistake_id(const std::vector<std::int64_t>& mistakes,
                              const std::vector<std::int64_t>& abstentions) {
  std::int32_t best = 0;
  for (std::int32_t f = 1; f < static_cast<std::int32_t>(mistakes.size()); ++f) {
    const auto i = static_cast<std::size_t>(f);
    const auto b = static_cast<std::size_t>(best);
    if (mistakes[i] < mistakes[b] ||
        (mistakes[i] == mistakes[b] && abstentions[i] < abstentions[b]))
      best = f;
  }
  return best;
}

}  // namespace

std::int64_t CompetitorReport::a_star_of(std::int64_t m, bool* feasible) const {
  for (const auto& [budget, abst] : pareto) {
    if (budget <= m) {
      if (feasible) *feasible = true;
      return abst;
    }
  }
  // Infeasible budget: report the least-mistake function's abstentions.
  if (feasible) *feasible = false;
  const std::int32_t f = least_mistake_id(mistakes, abstentions);
  return abstentions[static_cast<std::size_t>(f)];
}

CompetitorReport competitor(const Transcript& transcript, const FunctionClass& cls,
                            bool with_b_star_series) {
  const auto n = static_cast<std::size_t>(cls.size());
  CompetitorReport rep;
  rep.mistakes.assign(n, 0);
  rep.abstentions.assign(n, 0);
  if (with_b_star_series) rep.b_star_series.reserve(transcript.rounds.size());

  std::vector<std::int64_t> sampled_mistakes(n, 0);
  for (const RoundRecord& r : transcript.rounds) {
    for (std::size_t i = 0; i < n; ++i) {
      const LabelValue v = cls.functions[i].table[static_cast<std::size_t>(r.context) - 1];
      if (v == kAbstain) {
        rep.abstentions[i] += 1;
      } else if (v != r.label) {
        rep.mistakes[i] += 1;
        if (r.coin == 1) sampled_mistakes[i] += 1;
      }
    }
    if (with_b_star_series) {
      std::int64_t b = std::numeric_limits<std::int64_t>::max();
      for (std::size_t i = 0; i < n; ++i)
        if (sampled_mistakes[i] == 0) b = std::min(b, rep.abstentions[i]);
      rep.b_star_series.push_back(b);
    }
  }

  rep.m_star = *std::min_element(rep.mistakes.begin(), rep.mistakes.end());
  rep.f_star_id = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (rep.mistakes[i] != 0) continue;
    if (rep.f_star_id < 0 ||
        rep.abstentions[i] < rep.abstentions[static_cast<std::size_t>(rep.f_star_id)])
      rep.f_star_id = static_cast<std::int32_t>(i);
  }
  if (rep.f_star_id < 0)
    throw ProtocolError("competitor: no zero-mistake function (class lacks the abstainer?)");
  rep.a_star = rep.abstentions[static_cast<std::size_t>(rep.f_star_id)];

  // Pareto staircase over (mistakes, abstentions).
  std::vector<std::pair<std::int64_t, std::int64_t>> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(rep.mistakes[i], rep.abstentions[i]);
  std::sort(pts.begin(), pts.end());
  std::int64_t best_abst = std::numeric_limits<std::int64_t>::max();
  for (const auto& [m, a] : pts) {
    if (a < best_abst) {
      best_abst = a;
      rep.pareto.emplace_back(m, a);
    }
  }
  std::reverse(rep.pareto.begin(), rep.pareto.end());  // a_star_of scans large budgets first

  return rep;
}

SummaryAccumulator::SummaryAccumulator(const FunctionClass& cls) : cls_(&cls) {
  const auto n = static_cast<std::size_t>(cls.size());
  mistakes_.assign(n, 0);
  abstentions_.assign(n, 0);
}

void SummaryAccumulator::add(const RoundRecord& r) {
  totals_.horizon += 1;
  if (r.action == kAbstain)
    totals_.abstentions += 1;
  else if (r.action != r.label)
    totals_.mistakes += 1;
  if (r.coin == 1) totals_.coin_heads += 1;
  for (std::size_t i = 0; i < mistakes_.size(); ++i) {
    const LabelValue v = cls_->functions[i].table[static_cast<std::size_t>(r.context) - 1];
    if (v == kAbstain)
      abstentions_[i] += 1;
    else if (v != r.label)
      mistakes_[i] += 1;
  }
}

RegretSummary SummaryAccumulator::finish() const {
  RegretSummary s = totals_;
  const std::size_t n = mistakes_.size();
  s.m_star = *std::min_element(mistakes_.begin(), mistakes_.end());
  std::int64_t a_star = -1;
  for (std::size_t i = 0; i < n; ++i)
    if (mistakes_[i] == 0 && (a_star < 0 || abstentions_[i] < a_star)) a_star = abstentions_[i];
  if (a_star < 0)
    throw ProtocolError("summarize: no zero-mistake function (class lacks the abstainer?)");
  s.a_star = a_star;

  std::int64_t a_of_m = -1;
  for (std::size_t i = 0; i < n; ++i)
    if (mistakes_[i] <= s.mistakes && (a_of_m < 0 || abstentions_[i] < a_of_m))
      a_of_m = abstentions_[i];
  if (a_of_m < 0) {
    s.mmea_fallback = true;
    const std::int32_t f = least_mistake_id(mistakes_, abstentions_);
    a_of_m = abstentions_[static_cast<std::size_t>(f)];
  }
  s.mmea = s.abstentions - a_of_m;
  s.excess_mistakes = s.mistakes - s.m_star;
  s.excess_abstentions = s.abstentions - s.a_star;
  return s;
}

RegretSummary summarize(const Transcript& transcript, const FunctionClass& cls) {
  SummaryAccumulator acc(cls);
  for (const RoundRecord& r : transcript.rounds) acc.add(r);
  return acc.finish();
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw ParameterError("fit_rate: need at least 3 points");
  RateFit fit;
  fit.n_points = static_cast<int>(points.size());
  std::vector<double> xs, ys;
  xs.reserve(points.size());
  ys.reserve(points.size());
  for (auto [t, value] : points) {
    if (t <= 0.0) throw ParameterError("fit_rate: horizons must be positive");
    if (value <= 0.0) {
      value = 0.5;
      fit.n_floored += 1;
    }
    xs.push_back(std::log(t));
    ys.push_back(std::log(value));
  }
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw ParameterError("fit_rate: all horizons identical");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double resid = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ssr += resid * resid;
  }
  fit.stderr = std::sqrt((ssr / (n - 2.0)) / sxx);
  return fit;
}

TargetRate target_rate(double mu, double alpha_star) {
  if (mu < 0.0 || mu > 1.0) throw ParameterError("target_rate: mu must lie in [0,1]");
  if (alpha_star < 0.0 || alpha_star > 1.0)
    throw ParameterError("target_rate: alpha_star must lie in [0,1]");
  TargetRate r;
  const double gap = std::max(0.0, alpha_star - mu);
  r.v = gap;
  r.u = std::min(1.0 - gap, 2.0 * mu) / 2.0;
  r.alpha_tilde = std::max(1.0 - mu, (1.0 + gap) / 2.0);
  return r;
}

LowerBoundCheck lower_bound_check(double k_hat, double gamma, std::int64_t horizon,
                                  double m_hat, double margin) {
  if (k_hat < 0.0) throw ParameterError("lower_bound_check: K must be >= 0");
  if (gamma < 0.0 || gamma > 0.5)
    throw ParameterError("lower_bound_check: gamma must lie in [0, 1/2]");
  LowerBoundCheck c;
  c.bound = gamma * (std::exp(-2.0 * gamma * k_hat) * static_cast<double>(horizon) - k_hat);
  c.margin = margin;
  c.slack = m_hat - (c.bound - margin);
  c.pass = c.slack >= 0.0;
  return c;
}

std::vector<RateRegion> achievable_regions(double alpha_star) {
  if (alpha_star < 0.0 || alpha_star > 1.0)
    throw ParameterError("achievable_regions: alpha_star must lie in [0,1]");
  std::vector<RateRegion> regions;
  // Pareto frontier against adaptive adversaries: alpha + mu = 1.
  regions.push_back({"adaptive_frontier", {{0.0, 1.0}, {1.0, 0.0}}});
  // Logarithmically achievable, stochastic: alpha > 1/2 and alpha + mu > 1.
  regions.push_back({"stochastic_log", {{0.0, 1.0}, {0.5, 0.5}, {1.0, 0.5}}});
  // Logarithmically achievable, adaptive: 2*alpha + mu > 2.
  regions.push_back({"adaptive_log", {{0.0, 1.0}, {1.0, 0.5}}});
  // Adaptive-rate region for a known competitor exponent: intersection of
  // alpha > 1/2, alpha + mu > 1 and (when alpha_star >= 1/2)
  // 2*alpha + mu > 1 + alpha_star.
  RateRegion adaptive{"adaptive_rate", {}};
  if (alpha_star >= 0.5) {
    adaptive.vertices = {{0.0, 1.0},
                         {1.0 - alpha_star, alpha_star},
                         {alpha_star, 0.5},
                         {1.0, 0.5}};
  } else {
    adaptive.vertices = {{0.0, 1.0}, {0.5, 0.5}, {1.0, 0.5}};
  }
  regions.push_back(std::move(adaptive));
  return regions;
}

}  // namespace osc
