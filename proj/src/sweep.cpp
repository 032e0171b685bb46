#include "osc/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "osc/engine.hpp"
#include "osc/parallel.hpp"

namespace osc {

std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

namespace {

struct RunOutcome {
  bool ok = false;
  std::string error;
  RegretSummary summary;
  std::string transcript_csv;  // full-transcript mode only
};

void write_spec_header(std::ostream& out, const ExperimentSpec& spec) {
  std::istringstream ss(serialize(spec));
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) out << "# " << line << '\n';
}

struct Aggregate {
  std::string key_prefix;  // algorithm,adversary,T,p,eta,lambda,epsilon
  std::int64_t n = 0;
  // mean/M2 pairs per tracked column (Welford).
  static constexpr int kCols = 7;
  double mean[kCols] = {0};
  double m2[kCols] = {0};

  void add(const RegretSummary& s) {
    const double values[kCols] = {
        static_cast<double>(s.mistakes),
        static_cast<double>(s.abstentions),
        static_cast<double>(s.a_star),
        static_cast<double>(s.excess_mistakes),
        static_cast<double>(s.excess_abstentions),
        static_cast<double>(s.mmea),
        static_cast<double>(s.coin_heads),
    };
    n += 1;
    for (int c = 0; c < kCols; ++c) {
      const double d = values[c] - mean[c];
      mean[c] += d / static_cast<double>(n);
      m2[c] += d * (values[c] - mean[c]);
    }
  }

  double sd(int c) const {
    return n > 1 ? std::sqrt(m2[c] / static_cast<double>(n - 1)) : 0.0;
  }
};

}  // namespace

SweepBuffers sweep_to_buffers(const ExperimentSpec& spec, int workers) {
  const FunctionClass cls = build_class(spec.class_spec);
  const auto runs = expand_runs(spec, cls.size());
  std::vector<RunOutcome> outcomes(runs.size());

  parallel_for(static_cast<std::int64_t>(runs.size()), workers, [&](std::int64_t i) {
    const ResolvedRun& run = runs[static_cast<std::size_t>(i)];
    RunOutcome& out = outcomes[static_cast<std::size_t>(i)];
    try {
      GameConfig cfg;
      cfg.horizon = run.horizon;
      cfg.learner = run.learner;
      cfg.adversary = spec.adversary.resolve(cls, run.horizon);
      cfg.seed = run.run_seed;
      if (spec.mode == RunMode::kFullTranscript) {
        const Transcript tr = osc::run(cls, cfg);
        out.summary = summarize(tr, cls);
        std::ostringstream ss;
        write_transcript_csv(tr, ss);
        out.transcript_csv = ss.str();
      } else {
        out.summary = run_summary(cls, cfg);
      }
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  SweepBuffers buffers;
  std::ostringstream summaries;
  write_spec_header(summaries, spec);
  summaries << "run_id,seed,algorithm,adversary,T,p,eta,lambda,epsilon,M_T,A_T,A_star,M_star,"
               "excess_mistakes,excess_abstentions,MMEA,coin_heads\n";

  // Keyed by grid order; runs arrive already sorted by run_id.
  std::vector<std::pair<int, Aggregate>> aggregates;
  std::map<int, std::size_t> agg_index;

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const ResolvedRun& run = runs[i];
    const RunOutcome& out = outcomes[i];
    const std::string adversary_name = spec.adversary.resolve(cls, run.horizon).name();
    if (!out.ok) {
      buffers.failures += 1;
      buffers.failure_messages.push_back("run " + std::to_string(run.run_id) + ": " + out.error);
      continue;
    }
    const RegretSummary& s = out.summary;
    summaries << run.run_id << ',' << run.run_seed << ',' << to_string(run.learner.algorithm)
              << ',' << adversary_name << ',' << run.horizon << ','
              << csv_double(run.learner.p) << ',' << csv_double(run.learner.eta) << ','
              << csv_double(run.learner.lambda) << ',' << csv_double(run.learner.epsilon) << ','
              << s.mistakes << ',' << s.abstentions << ',' << s.a_star << ',' << s.m_star << ','
              << s.excess_mistakes << ',' << s.excess_abstentions << ',' << s.mmea << ','
              << s.coin_heads << '\n';

    auto it = agg_index.find(run.grid_index);
    if (it == agg_index.end()) {
      Aggregate agg;
      std::ostringstream key;
      key << to_string(run.learner.algorithm) << ',' << adversary_name << ',' << run.horizon
          << ',' << csv_double(run.learner.p) << ',' << csv_double(run.learner.eta) << ','
          << csv_double(run.learner.lambda) << ',' << csv_double(run.learner.epsilon);
      agg.key_prefix = key.str();
      agg_index.emplace(run.grid_index, aggregates.size());
      aggregates.emplace_back(run.grid_index, std::move(agg));
      it = agg_index.find(run.grid_index);
    }
    aggregates[it->second].second.add(s);
  }

  std::ostringstream aggcsv;
  write_spec_header(aggcsv, spec);
  aggcsv << "algorithm,adversary,T,p,eta,lambda,epsilon,n_seeds,"
            "mean_M_T,sd_M_T,mean_A_T,sd_A_T,mean_A_star,sd_A_star,"
            "mean_excess_mistakes,sd_excess_mistakes,"
            "mean_excess_abstentions,sd_excess_abstentions,"
            "mean_MMEA,sd_MMEA,mean_coin_heads,sd_coin_heads\n";
  for (const auto& [grid_index, agg] : aggregates) {
    aggcsv << agg.key_prefix << ',' << agg.n;
    for (int c = 0; c < Aggregate::kCols; ++c)
      aggcsv << ',' << csv_double(agg.mean[c]) << ',' << csv_double(agg.sd(c));
    aggcsv << '\n';
  }

  buffers.summaries_csv = summaries.str();
  buffers.aggregates_csv = aggcsv.str();

  if (spec.mode == RunMode::kFullTranscript) {
    namespace fs = std::filesystem;
    fs::create_directories(spec.output);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      if (!outcomes[i].ok) continue;
      std::ofstream f(fs::path(spec.output) /
                      ("transcript_" + std::to_string(runs[i].run_id) + ".csv"));
      f << outcomes[i].transcript_csv;
    }
  }
  return buffers;
}

SweepResult sweep(const ExperimentSpec& spec, int workers) {
  namespace fs = std::filesystem;
  SweepBuffers buffers = sweep_to_buffers(spec, workers);
  fs::create_directories(spec.output);
  SweepResult result;
  result.summaries_path = (fs::path(spec.output) / "summaries.csv").string();
  result.aggregates_path = (fs::path(spec.output) / "aggregates.csv").string();
  {
    std::ofstream f(result.summaries_path, std::ios::binary);
    f << buffers.summaries_csv;
  }
  {
    std::ofstream f(result.aggregates_path, std::ios::binary);
    f << buffers.aggregates_csv;
  }
  const auto runs = expand_runs(spec, build_class(spec.class_spec).size());
  result.runs = static_cast<std::int64_t>(runs.size());
  result.failures = buffers.failures;
  result.failure_messages = buffers.failure_messages;
  return result;
}

}  // namespace osc
