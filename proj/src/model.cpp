#include "osc/model.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "osc/rng.hpp"

namespace osc {

void FunctionClass::validate() const {
  if (domain_size < 1) throw ParameterError("class: domain_size must be >= 1");
  if (num_labels < 1) throw ParameterError("class: num_labels must be >= 1");
  if (functions.empty()) throw ParameterError("class: no functions");
  std::int32_t abstainers = 0;
  for (std::size_t i = 0; i < functions.size(); ++i) {
    const auto& f = functions[i];
    if (f.id != static_cast<std::int32_t>(i))
      throw ParameterError("class: function id " + std::to_string(f.id) +
                           " does not match position " + std::to_string(i));
    if (f.table.size() != static_cast<std::size_t>(domain_size))
      throw ParameterError("class: function " + std::to_string(f.id) +
                           " table is not total over the domain");
    for (LabelValue v : f.table)
      if (v != kAbstain && (v < 1 || v > num_labels))
        throw ParameterError("class: function " + std::to_string(f.id) +
                             " has label " + std::to_string(v) + " outside [1," +
                             std::to_string(num_labels) + "]");
    if (f.always_abstains()) ++abstainers;
  }
  if (abstainers != 1)
    throw ParameterError("class: expected exactly one all-abstaining function, found " +
                         std::to_string(abstainers));
  if (abstain_index < 0 || abstain_index >= size() ||
      !functions[static_cast<std::size_t>(abstain_index)].always_abstains())
    throw ParameterError("class: abstain_index does not point at the all-abstaining function");
}

FunctionClass make_threshold_class(int n) {
  if (n < 1) throw ParameterError("make_threshold_class: n must be >= 1");
  FunctionClass cls;
  cls.domain_size = n;
  cls.num_labels = 2;
  cls.functions.reserve(static_cast<std::size_t>(n) + 1);
  for (int t = 0; t <= n; ++t) {
    SelectiveClassifier f;
    f.id = t;
    f.table.resize(static_cast<std::size_t>(n));
    for (int x = 1; x <= n; ++x)
      f.table[static_cast<std::size_t>(x) - 1] = (x <= t) ? kAbstain : 1;
    cls.functions.push_back(std::move(f));
  }
  cls.abstain_index = n;
  cls.validate();
  return cls;
}

FunctionClass make_random_class(ContextId domain_size, std::int32_t num_labels,
                                std::int32_t n_functions, double abstain_prob,
                                std::uint64_t seed) {
  if (domain_size < 1) throw ParameterError("make_random_class: domain_size must be >= 1");
  if (num_labels < 1) throw ParameterError("make_random_class: num_labels must be >= 1");
  if (n_functions < 1) throw ParameterError("make_random_class: n_functions must be >= 1");
  if (abstain_prob < 0.0 || abstain_prob > 1.0)
    throw ParameterError("make_random_class: abstain_prob must lie in [0,1]");

  Mt19937Source rng(seed);
  FunctionClass cls;
  cls.domain_size = domain_size;
  cls.num_labels = num_labels;
  bool have_abstainer = false;
  for (std::int32_t i = 0; i < n_functions; ++i) {
    SelectiveClassifier f;
    f.table.resize(static_cast<std::size_t>(domain_size));
    for (ContextId x = 0; x < domain_size; ++x) {
      if (rng.bernoulli(abstain_prob))
        f.table[static_cast<std::size_t>(x)] = kAbstain;
      else
        f.table[static_cast<std::size_t>(x)] =
            1 + static_cast<LabelValue>(rng.uniform_index(static_cast<std::uint64_t>(num_labels)));
    }
    // Keep at most one all-abstaining function.
    if (f.always_abstains()) {
      if (have_abstainer) continue;
      have_abstainer = true;
      cls.abstain_index = static_cast<std::int32_t>(cls.functions.size());
    }
    f.id = static_cast<std::int32_t>(cls.functions.size());
    cls.functions.push_back(std::move(f));
  }
  if (!have_abstainer) {
    SelectiveClassifier bottom;
    bottom.id = static_cast<std::int32_t>(cls.functions.size());
    bottom.table.assign(static_cast<std::size_t>(domain_size), kAbstain);
    cls.abstain_index = bottom.id;
    cls.functions.push_back(std::move(bottom));
  }
  cls.validate();
  return cls;
}

void save_class(const FunctionClass& cls, std::ostream& out) {
  out << "class " << cls.domain_size << ' ' << cls.num_labels << ' ' << cls.size() << '\n';
  for (const auto& f : cls.functions) {
    for (std::size_t i = 0; i < f.table.size(); ++i) {
      if (i) out << ' ';
      if (f.table[i] == kAbstain)
        out << '_';
      else
        out << f.table[i];
    }
    out << '\n';
  }
}

std::string class_to_string(const FunctionClass& cls) {
  std::ostringstream ss;
  save_class(cls, ss);
  return ss.str();
}

namespace {

std::int64_t parse_int_token(const std::string& tok, int line, const char* what) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("class file line " + std::to_string(line) + ": bad " + what +
                      " '" + tok + "'");
  }
}

}  // namespace

FunctionClass load_class(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("class file line 1: missing header");
  std::istringstream hdr(line);
  std::string tag, xs, ks, ns;
  if (!(hdr >> tag >> xs >> ks >> ns) || tag != "class")
    throw ConfigError("class file line 1: expected 'class <|X|> <K> <N>'");
  std::string extra;
  if (hdr >> extra) throw ConfigError("class file line 1: trailing tokens");

  FunctionClass cls;
  cls.domain_size = static_cast<ContextId>(parse_int_token(xs, 1, "domain size"));
  cls.num_labels = static_cast<std::int32_t>(parse_int_token(ks, 1, "label count"));
  const std::int64_t n = parse_int_token(ns, 1, "function count");
  if (n < 1) throw ConfigError("class file line 1: N must be >= 1");

  for (std::int64_t i = 0; i < n; ++i) {
    const int line_no = static_cast<int>(i) + 2;
    if (!std::getline(in, line))
      throw ConfigError("class file line " + std::to_string(line_no) + ": missing function row");
    std::istringstream row(line);
    SelectiveClassifier f;
    f.id = static_cast<std::int32_t>(i);
    std::string tok;
    while (row >> tok) {
      if (tok == "_")
        f.table.push_back(kAbstain);
      else
        f.table.push_back(static_cast<LabelValue>(parse_int_token(tok, line_no, "label")));
    }
    if (f.table.size() != static_cast<std::size_t>(cls.domain_size))
      throw ConfigError("class file line " + std::to_string(line_no) + ": expected " +
                        std::to_string(cls.domain_size) + " entries, got " +
                        std::to_string(f.table.size()));
    if (f.always_abstains()) cls.abstain_index = f.id;
    cls.functions.push_back(std::move(f));
  }
  try {
    cls.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("class file: ") + e.what());
  }
  return cls;
}

FunctionClass class_from_string(const std::string& text) {
  std::istringstream ss(text);
  return load_class(ss);
}

void Transcript::validate() const {
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    const RoundRecord& r = rounds[i];
    if (r.t != static_cast<std::int64_t>(i) + 1)
      throw ProtocolError("transcript: round index " + std::to_string(r.t) +
                          " at position " + std::to_string(i));
    const bool abstained = (r.action == kAbstain);
    if (abstained && r.feedback != r.label)
      throw ProtocolError("transcript: abstention without label feedback at t=" +
                          std::to_string(r.t));
    if (!abstained && r.feedback != kNoFeedback)
      throw ProtocolError("transcript: feedback leaked on prediction at t=" +
                          std::to_string(r.t));
  }
}

}  // namespace osc
