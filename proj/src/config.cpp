#include "osc/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace osc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& tok, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing");
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
    return v;
  } catch (const std::exception&) {
    fail(line, "expected a number, got '" + tok + "'");
  }
}

std::int64_t parse_int(const std::string& tok, int line) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(line, "expected an integer, got '" + tok + "'");
  }
}

std::uint64_t parse_u64(const std::string& tok, int line) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(line, "expected an unsigned integer, got '" + tok + "'");
  }
}

ParamValue parse_param_value(const std::string& tok, int line) {
  ParamValue v;
  if (tok == "sqrt_nt") {
    v.form = ParamValue::Form::kSqrtNT;
  } else if (tok == "p") {
    v.form = ParamValue::Form::kCopyP;
  } else if (tok.rfind("T^", 0) == 0) {
    v.form = ParamValue::Form::kPowT;
    v.value = parse_double(tok.substr(2), line);
  } else {
    v.form = ParamValue::Form::kLiteral;
    v.value = parse_double(tok, line);
  }
  return v;
}

std::string render_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double ParamValue::resolve(std::int64_t n_functions, std::int64_t horizon, double p) const {
  switch (form) {
    case Form::kLiteral:
      return value;
    case Form::kSqrtNT:
      return std::min(std::sqrt(static_cast<double>(n_functions) / static_cast<double>(horizon)),
                      0.5);
    case Form::kPowT:
      return std::pow(static_cast<double>(horizon), value);
    case Form::kCopyP:
      return p;
  }
  throw ParameterError("param value: unknown form");
}

std::string ParamValue::render() const {
  switch (form) {
    case Form::kLiteral:
      return render_double(value);
    case Form::kSqrtNT:
      return "sqrt_nt";
    case Form::kPowT:
      return "T^" + render_double(value);
    case Form::kCopyP:
      return "p";
  }
  return "?";
}

FunctionClass build_class(const ClassSpec& spec) {
  switch (spec.kind) {
    case ClassSpec::Kind::kThreshold:
      return make_threshold_class(spec.n);
    case ClassSpec::Kind::kRandom:
      return make_random_class(spec.domain_size, spec.num_labels, spec.n_functions,
                               spec.abstain_prob, spec.class_seed);
    case ClassSpec::Kind::kFile: {
      std::ifstream in(spec.path);
      if (!in) throw ConfigError("class file '" + spec.path + "' cannot be opened");
      return load_class(in);
    }
  }
  throw ParameterError("class spec: unknown kind");
}

AdversarySpec AdversaryConfig::resolve(const FunctionClass& cls, std::int64_t horizon) const {
  AdversarySpec spec;
  spec.kind = kind;
  switch (kind) {
    case AdversaryKind::kStochastic:
      spec.law = law;
      break;
    case AdversaryKind::kThresholdTight:
      spec.n = cls.domain_size;
      spec.t_star = t_star;
      spec.horizon = horizon;
      break;
    case AdversaryKind::kLowerBoundP1:
    case AdversaryKind::kLowerBoundP2:
      spec.gamma = gamma;
      spec.context = context;
      break;
    case AdversaryKind::kNoisySynthetic:
      spec.target_id = target_id;
      spec.noise_rate = noise_rate;
      spec.context_law = uniform_context_law ? make_uniform_context_law(cls.domain_size)
                                             : context_law;
      break;
    case AdversaryKind::kScripted:
      throw ConfigError("scripted adversaries are a programmatic hook, not a config kind");
  }
  spec.validate();
  return spec;
}

namespace {

struct RawSection {
  std::string name;
  int line = 0;
  std::vector<std::pair<std::pair<std::string, int>, std::string>> entries;  // ((key,line),value)
};

std::vector<RawSection> tokenize(std::istream& in) {
  std::vector<RawSection> sections;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      sections.push_back({trim(line.substr(1, line.size() - 2)), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
    if (sections.empty()) fail(line_no, "key outside any [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (value.empty()) fail(line_no, "empty value for key '" + key + "'");
    for (const auto& [kl, v] : sections.back().entries)
      if (kl.first == key) fail(line_no, "duplicate key '" + key + "' in section");
    sections.back().entries.push_back({{key, line_no}, value});
  }
  return sections;
}

// Key-set guard: every key must be consumed exactly once.
class SectionReader {
 public:
  explicit SectionReader(const RawSection& s) : s_(s) {}

  bool has(const std::string& key) const {
    for (const auto& [kl, v] : s_.entries)
      if (kl.first == key) return true;
    return false;
  }

  std::string get(const std::string& key) {
    for (const auto& [kl, v] : s_.entries) {
      if (kl.first == key) {
        used_.insert(key);
        line_ = kl.second;
        return v;
      }
    }
    fail(s_.line, "section [" + s_.name + "] is missing key '" + key + "'");
  }

  std::string get_or(const std::string& key, const std::string& fallback) {
    if (has(key)) return get(key);
    return fallback;
  }

  int value_line() const { return line_; }

  void finish() const {
    for (const auto& [kl, v] : s_.entries)
      if (!used_.count(kl.first))
        fail(kl.second, "unknown key '" + kl.first + "' in section [" + s_.name + "]");
  }

 private:
  const RawSection& s_;
  std::set<std::string> used_;
  int line_ = 0;
};

std::vector<ParamValue> parse_param_list(const std::string& value, int line) {
  std::vector<ParamValue> out;
  for (const auto& tok : split_ws(value)) out.push_back(parse_param_value(tok, line));
  if (out.empty()) fail(line, "empty value list");
  return out;
}

AdversaryKind adversary_kind_from_string(const std::string& s, int line) {
  if (s == "stochastic") return AdversaryKind::kStochastic;
  if (s == "threshold_tight") return AdversaryKind::kThresholdTight;
  if (s == "lower_bound_p1") return AdversaryKind::kLowerBoundP1;
  if (s == "lower_bound_p2") return AdversaryKind::kLowerBoundP2;
  if (s == "noisy_synthetic") return AdversaryKind::kNoisySynthetic;
  fail(line, "unknown adversary kind '" + s + "'");
}

}  // namespace

ExperimentSpec parse_config(std::istream& in) {
  const auto sections = tokenize(in);
  ExperimentSpec spec;
  spec.horizons.clear();
  spec.learners.clear();
  bool saw_experiment = false, saw_class = false, saw_adversary = false;

  for (const auto& raw : sections) {
    SectionReader sec(raw);
    if (raw.name == "experiment") {
      if (saw_experiment) fail(raw.line, "duplicate [experiment] section");
      saw_experiment = true;
      spec.name = sec.get_or("name", "experiment");
      const std::string mode = sec.get_or("mode", "summary_only");
      if (mode == "summary_only")
        spec.mode = RunMode::kSummaryOnly;
      else if (mode == "full_transcript")
        spec.mode = RunMode::kFullTranscript;
      else
        fail(sec.value_line(), "mode must be summary_only or full_transcript");
      spec.output = sec.get_or("output", "out");
      for (const auto& tok : split_ws(sec.get("horizons"))) {
        const std::int64_t t = parse_int(tok, sec.value_line());
        if (t < 1) fail(sec.value_line(), "horizons must be >= 1");
        spec.horizons.push_back(t);
      }
      spec.seed_count = static_cast<int>(parse_int(sec.get_or("seeds", "1"), sec.value_line()));
      if (spec.seed_count < 1) fail(raw.line, "seeds must be >= 1");
      spec.base_seed = parse_u64(sec.get_or("base_seed", "1"), sec.value_line());
      sec.finish();
    } else if (raw.name == "class") {
      if (saw_class) fail(raw.line, "duplicate [class] section");
      saw_class = true;
      const std::string kind = sec.get("kind");
      if (kind == "threshold") {
        spec.class_spec.kind = ClassSpec::Kind::kThreshold;
        spec.class_spec.n = static_cast<int>(parse_int(sec.get("n"), sec.value_line()));
      } else if (kind == "random") {
        spec.class_spec.kind = ClassSpec::Kind::kRandom;
        spec.class_spec.domain_size =
            static_cast<ContextId>(parse_int(sec.get("domain_size"), sec.value_line()));
        spec.class_spec.num_labels =
            static_cast<std::int32_t>(parse_int(sec.get("num_labels"), sec.value_line()));
        spec.class_spec.n_functions =
            static_cast<std::int32_t>(parse_int(sec.get("n_functions"), sec.value_line()));
        spec.class_spec.abstain_prob = parse_double(sec.get("abstain_prob"), sec.value_line());
        spec.class_spec.class_seed = parse_u64(sec.get_or("class_seed", "1"), sec.value_line());
      } else if (kind == "file") {
        spec.class_spec.kind = ClassSpec::Kind::kFile;
        spec.class_spec.path = sec.get("path");
      } else {
        fail(sec.value_line(), "class kind must be threshold, random or file");
      }
      sec.finish();
    } else if (raw.name == "adversary") {
      if (saw_adversary) fail(raw.line, "duplicate [adversary] section");
      saw_adversary = true;
      spec.adversary.kind = adversary_kind_from_string(sec.get("kind"), sec.value_line());
      switch (spec.adversary.kind) {
        case AdversaryKind::kStochastic: {
          spec.adversary.law.support.clear();
          for (const auto& tok : split_ws(sec.get("support"))) {
            const auto c1 = tok.find(':');
            const auto c2 = tok.find(':', c1 == std::string::npos ? c1 : c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos)
              fail(sec.value_line(), "support atoms use x:y:prob");
            SupportAtom atom;
            atom.context = static_cast<ContextId>(parse_int(tok.substr(0, c1), sec.value_line()));
            atom.label = static_cast<LabelValue>(
                parse_int(tok.substr(c1 + 1, c2 - c1 - 1), sec.value_line()));
            atom.prob = parse_double(tok.substr(c2 + 1), sec.value_line());
            spec.adversary.law.support.push_back(atom);
          }
          break;
        }
        case AdversaryKind::kThresholdTight:
          spec.adversary.t_star =
              static_cast<int>(parse_int(sec.get("t_star"), sec.value_line()));
          break;
        case AdversaryKind::kLowerBoundP1:
        case AdversaryKind::kLowerBoundP2:
          spec.adversary.gamma = parse_double(sec.get("gamma"), sec.value_line());
          spec.adversary.context =
              static_cast<ContextId>(parse_int(sec.get_or("context", "1"), sec.value_line()));
          break;
        case AdversaryKind::kNoisySynthetic: {
          spec.adversary.target_id =
              static_cast<std::int32_t>(parse_int(sec.get("target"), sec.value_line()));
          spec.adversary.noise_rate = parse_double(sec.get("noise_rate"), sec.value_line());
          const std::string claw = sec.get_or("context_law", "uniform");
          if (claw == "uniform") {
            spec.adversary.uniform_context_law = true;
          } else {
            spec.adversary.uniform_context_law = false;
            spec.adversary.context_law.atoms.clear();
            for (const auto& tok : split_ws(claw)) {
              const auto c = tok.find(':');
              if (c == std::string::npos) fail(sec.value_line(), "context law atoms use x:prob");
              spec.adversary.context_law.atoms.emplace_back(
                  static_cast<ContextId>(parse_int(tok.substr(0, c), sec.value_line())),
                  parse_double(tok.substr(c + 1), sec.value_line()));
            }
          }
          break;
        }
        case AdversaryKind::kScripted:
          fail(raw.line, "scripted adversaries cannot be configured from files");
      }
      sec.finish();
    } else if (raw.name == "learner") {
      LearnerGrid grid;
      grid.algorithm = algorithm_from_string(sec.get("algorithm"));
      grid.p = sec.has("p") ? parse_param_list(sec.get("p"), sec.value_line())
                            : std::vector<ParamValue>{{ParamValue::Form::kSqrtNT, 0.0}};
      grid.eta = sec.has("eta") ? parse_param_list(sec.get("eta"), sec.value_line())
                                : std::vector<ParamValue>{{ParamValue::Form::kCopyP, 0.0}};
      grid.lambda = sec.has("lambda") ? parse_param_list(sec.get("lambda"), sec.value_line())
                                      : std::vector<ParamValue>{{ParamValue::Form::kCopyP, 0.0}};
      grid.epsilon = sec.has("epsilon") ? parse_param_list(sec.get("epsilon"), sec.value_line())
                                        : std::vector<ParamValue>{{ParamValue::Form::kLiteral, 0.0}};
      grid.mu = sec.has("mu") ? parse_param_list(sec.get("mu"), sec.value_line())
                              : std::vector<ParamValue>{{ParamValue::Form::kLiteral, 0.0}};
      grid.theta = sec.has("theta") ? parse_param_list(sec.get("theta"), sec.value_line())
                                    : std::vector<ParamValue>{{ParamValue::Form::kLiteral, 0.0}};
      const std::string tie = sec.get_or("tie_break", "lex_min");
      if (tie == "lex_min")
        grid.tie_break = TieBreak::kLexMin;
      else if (tie == "uniform_random")
        grid.tie_break = TieBreak::kUniformRandom;
      else
        fail(sec.value_line(), "tie_break must be lex_min or uniform_random");
      for (const auto& pv : grid.p)
        if (pv.form == ParamValue::Form::kCopyP) fail(raw.line, "p cannot reference itself");
      spec.learners.push_back(std::move(grid));
      sec.finish();
    } else {
      fail(raw.line, "unknown section [" + raw.name + "]");
    }
  }

  if (!saw_experiment) throw ConfigError("config: missing [experiment] section");
  if (!saw_class) throw ConfigError("config: missing [class] section");
  if (!saw_adversary) throw ConfigError("config: missing [adversary] section");
  if (spec.learners.empty()) throw ConfigError("config: at least one [learner] section required");
  if (spec.horizons.empty()) throw ConfigError("config: horizons list is empty");

  // Full grid validation, including cross-field rules per resolved combo.
  try {
    const FunctionClass cls = build_class(spec.class_spec);
    expand_runs(spec, cls.size());
    for (std::int64_t t : spec.horizons) spec.adversary.resolve(cls, t);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return spec;
}

ExperimentSpec parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file '" + path + "' cannot be opened");
  return parse_config(in);
}

ExperimentSpec parse_config_string(const std::string& text) {
  std::istringstream ss(text);
  return parse_config(ss);
}

namespace {

void render_param_list(std::ostream& out, const char* key,
                       const std::vector<ParamValue>& values) {
  out << key << " = ";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ' ';
    out << values[i].render();
  }
  out << '\n';
}

}  // namespace

std::string serialize(const ExperimentSpec& spec) {
  std::ostringstream out;
  out << "[experiment]\n";
  out << "name = " << spec.name << '\n';
  out << "mode = " << (spec.mode == RunMode::kSummaryOnly ? "summary_only" : "full_transcript")
      << '\n';
  out << "output = " << spec.output << '\n';
  out << "horizons =";
  for (std::int64_t t : spec.horizons) out << ' ' << t;
  out << '\n';
  out << "seeds = " << spec.seed_count << '\n';
  out << "base_seed = " << spec.base_seed << '\n';

  out << "\n[class]\n";
  switch (spec.class_spec.kind) {
    case ClassSpec::Kind::kThreshold:
      out << "kind = threshold\n" << "n = " << spec.class_spec.n << '\n';
      break;
    case ClassSpec::Kind::kRandom:
      out << "kind = random\n";
      out << "domain_size = " << spec.class_spec.domain_size << '\n';
      out << "num_labels = " << spec.class_spec.num_labels << '\n';
      out << "n_functions = " << spec.class_spec.n_functions << '\n';
      out << "abstain_prob = " << render_double(spec.class_spec.abstain_prob) << '\n';
      out << "class_seed = " << spec.class_spec.class_seed << '\n';
      break;
    case ClassSpec::Kind::kFile:
      out << "kind = file\n" << "path = " << spec.class_spec.path << '\n';
      break;
  }

  out << "\n[adversary]\n";
  out << "kind = " << to_string(spec.adversary.kind) << '\n';
  switch (spec.adversary.kind) {
    case AdversaryKind::kStochastic: {
      out << "support =";
      for (const auto& a : spec.adversary.law.support)
        out << ' ' << a.context << ':' << a.label << ':' << render_double(a.prob);
      out << '\n';
      break;
    }
    case AdversaryKind::kThresholdTight:
      out << "t_star = " << spec.adversary.t_star << '\n';
      break;
    case AdversaryKind::kLowerBoundP1:
    case AdversaryKind::kLowerBoundP2:
      out << "gamma = " << render_double(spec.adversary.gamma) << '\n';
      out << "context = " << spec.adversary.context << '\n';
      break;
    case AdversaryKind::kNoisySynthetic:
      out << "target = " << spec.adversary.target_id << '\n';
      out << "noise_rate = " << render_double(spec.adversary.noise_rate) << '\n';
      if (spec.adversary.uniform_context_law) {
        out << "context_law = uniform\n";
      } else {
        out << "context_law =";
        for (const auto& [x, p] : spec.adversary.context_law.atoms)
          out << ' ' << x << ':' << render_double(p);
        out << '\n';
      }
      break;
    case AdversaryKind::kScripted:
      break;
  }

  for (const auto& grid : spec.learners) {
    out << "\n[learner]\n";
    out << "algorithm = " << to_string(grid.algorithm) << '\n';
    render_param_list(out, "p", grid.p);
    render_param_list(out, "eta", grid.eta);
    render_param_list(out, "lambda", grid.lambda);
    render_param_list(out, "epsilon", grid.epsilon);
    render_param_list(out, "mu", grid.mu);
    render_param_list(out, "theta", grid.theta);
    out << "tie_break = "
        << (grid.tie_break == TieBreak::kLexMin ? "lex_min" : "uniform_random") << '\n';
  }
  return out.str();
}

std::vector<ResolvedRun> expand_runs(const ExperimentSpec& spec, std::int64_t n_functions) {
  std::vector<ResolvedRun> runs;
  std::int64_t run_id = 0;
  int grid_index = 0;
  for (const auto& grid : spec.learners) {
    for (const ParamValue& pv : grid.p)
      for (const ParamValue& ev : grid.eta)
        for (const ParamValue& lv : grid.lambda)
          for (const ParamValue& xv : grid.epsilon)
            for (const ParamValue& mv : grid.mu)
              for (const ParamValue& tv : grid.theta) {
                for (std::int64_t horizon : spec.horizons) {
                  LearnerConfig lc;
                  lc.algorithm = grid.algorithm;
                  lc.horizon = horizon;
                  lc.tie_break = grid.tie_break;
                  lc.p = pv.resolve(n_functions, horizon, 0.0);
                  lc.eta = ev.resolve(n_functions, horizon, lc.p);
                  lc.lambda = lv.resolve(n_functions, horizon, lc.p);
                  lc.epsilon = xv.resolve(n_functions, horizon, lc.p);
                  lc.mu = mv.resolve(n_functions, horizon, lc.p);
                  lc.theta = tv.resolve(n_functions, horizon, lc.p);
                  // eta is capped at 1/2 when copied from a larger p; the
                  // prod-style updates require it.
                  if (ev.form == ParamValue::Form::kCopyP && lc.eta > 0.5) lc.eta = 0.5;
                  if (lv.form == ParamValue::Form::kCopyP && lc.lambda > 1.0) lc.lambda = 1.0;
                  try {
                    lc.validate();
                  } catch (const ParameterError& e) {
                    throw ConfigError(std::string("config: invalid grid point for ") +
                                      to_string(grid.algorithm) + ": " + e.what());
                  }
                  for (int s = 0; s < spec.seed_count; ++s) {
                    ResolvedRun run;
                    run.run_id = run_id++;
                    run.grid_index = grid_index;
                    run.seed_index = s;
                    run.run_seed = mix_seed(spec.base_seed + static_cast<std::uint64_t>(s));
                    run.horizon = horizon;
                    run.learner = lc;
                    runs.push_back(std::move(run));
                  }
                  ++grid_index;
                }
              }
  }
  return runs;
}

}  // namespace osc
