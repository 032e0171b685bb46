#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "osc/model.hpp"

using namespace osc;

TEST_CASE("evaluate is a total table lookup with a domain boundary") {
  SelectiveClassifier f{0, {2, kAbstain}};
  CHECK(f.evaluate(1) == 2);
  CHECK(f.evaluate(2) == kAbstain);
  CHECK_THROWS_AS(f.evaluate(5), ParameterError);
  CHECK_THROWS_AS(f.evaluate(0), ParameterError);

  // Referential transparency.
  CHECK(f.evaluate(1) == f.evaluate(1));
}

TEST_CASE("all-abstain classifier abstains everywhere") {
  const FunctionClass cls = make_threshold_class(4);
  const auto& bottom = cls.functions[static_cast<std::size_t>(cls.abstain_index)];
  for (ContextId x = 1; x <= 4; ++x) CHECK(bottom.evaluate(x) == kAbstain);
  CHECK(bottom.evaluate(3) == kAbstain);
}

TEST_CASE("threshold class n=2 matches the construction") {
  const FunctionClass cls = make_threshold_class(2);
  REQUIRE(cls.size() == 3);
  CHECK(cls.num_labels == 2);
  CHECK(cls.domain_size == 2);
  CHECK(cls.functions[0].table == std::vector<LabelValue>{1, 1});
  CHECK(cls.functions[1].table == std::vector<LabelValue>{kAbstain, 1});
  CHECK(cls.functions[2].table == std::vector<LabelValue>{kAbstain, kAbstain});
  CHECK(cls.abstain_index == 2);
}

TEST_CASE("threshold class smallest instance") {
  const FunctionClass cls = make_threshold_class(1);
  REQUIRE(cls.size() == 2);
  CHECK(cls.functions[0].table == std::vector<LabelValue>{1});
  CHECK(cls.functions[1].table == std::vector<LabelValue>{kAbstain});
}

TEST_CASE("threshold class abstention counts scan") {
  // Function t abstains on exactly t contexts, one function per count.
  const int n = 8;
  const FunctionClass cls = make_threshold_class(n);
  std::vector<int> count_seen(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& f : cls.functions) {
    int abst = 0;
    for (ContextId x = 1; x <= n; ++x)
      if (f.evaluate(x) == kAbstain) ++abst;
    CHECK(abst == f.id);
    count_seen[static_cast<std::size_t>(abst)]++;
  }
  for (int k = 0; k <= n; ++k) CHECK(count_seen[static_cast<std::size_t>(k)] == 1);
}

TEST_CASE("threshold class rejects n=0") {
  CHECK_THROWS_AS(make_threshold_class(0), ParameterError);
}

TEST_CASE("random class with abstain_prob=1 collapses to the abstainer") {
  const FunctionClass cls = make_random_class(3, 2, 8, 1.0, 42);
  CHECK(cls.size() == 1);
  CHECK(cls.functions[0].always_abstains());
  CHECK(cls.abstain_index == 0);
}

TEST_CASE("random class is deterministic in the seed") {
  const FunctionClass a = make_random_class(5, 3, 6, 0.3, 7);
  const FunctionClass b = make_random_class(5, 3, 6, 0.3, 7);
  const FunctionClass c = make_random_class(5, 3, 6, 0.3, 8);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("random class abstain fraction near its parameter") {
  const FunctionClass cls = make_random_class(4, 3, 8, 0.3, 7);
  // Direct recount of the emitted tables.
  std::int64_t abstain_cells = 0, cells = 0;
  for (const auto& f : cls.functions)
    for (LabelValue v : f.table) {
      ++cells;
      if (v == kAbstain) ++abstain_cells;
    }
  const double fraction = static_cast<double>(abstain_cells) / static_cast<double>(cells);
  CHECK(fraction >= 0.1);
  CHECK(fraction <= 0.5);
}

TEST_CASE("random class keeps exactly one abstainer and valid ids") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FunctionClass cls = make_random_class(3, 2, 10, 0.5, seed);
    cls.validate();
    int abstainers = 0;
    for (std::int32_t f = 0; f < cls.size(); ++f) {
      CHECK(cls.functions[static_cast<std::size_t>(f)].id == f);
      if (cls.functions[static_cast<std::size_t>(f)].always_abstains()) ++abstainers;
    }
    CHECK(abstainers == 1);
  }
}

TEST_CASE("random class validates parameters") {
  CHECK_THROWS_AS(make_random_class(4, 2, 0, 0.3, 1), ParameterError);
  CHECK_THROWS_AS(make_random_class(4, 2, 3, 1.5, 1), ParameterError);
  CHECK_THROWS_AS(make_random_class(0, 2, 3, 0.5, 1), ParameterError);
}

TEST_CASE("class serialization round-trips bit-exactly") {
  const FunctionClass cls = make_random_class(6, 4, 9, 0.25, 123);
  const std::string text = class_to_string(cls);
  const FunctionClass back = class_from_string(text);
  CHECK(back == cls);
  CHECK(class_to_string(back) == text);

  // Header carries |X|, K, N.
  std::istringstream first_line(text.substr(0, text.find('\n')));
  std::string tag;
  int xs, ks, ns;
  first_line >> tag >> xs >> ks >> ns;
  CHECK(tag == "class");
  CHECK(xs == 6);
  CHECK(ks == 4);
  CHECK(ns == cls.size());
}

TEST_CASE("class loader rejects malformed input with line numbers") {
  CHECK_THROWS_AS(class_from_string("nope\n"), ConfigError);
  CHECK_THROWS_AS(class_from_string("class 2 2 1\n1\n"), ConfigError);      // short row
  CHECK_THROWS_AS(class_from_string("class 2 2 1\n1 1\n"), ConfigError);    // no abstainer
  CHECK_THROWS_AS(class_from_string("class 2 2 1\n1 x\n"), ConfigError);    // bad token
  try {
    class_from_string("class 2 2 2\n_ _\n1\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("class validation catches broken invariants") {
  FunctionClass cls = make_threshold_class(2);
  cls.functions[0].id = 5;
  CHECK_THROWS_AS(cls.validate(), ParameterError);

  FunctionClass two_abstainers = make_threshold_class(2);
  two_abstainers.functions[0].table = {kAbstain, kAbstain};
  CHECK_THROWS_AS(two_abstainers.validate(), ParameterError);

  FunctionClass bad_label = make_threshold_class(2);
  bad_label.functions[0].table = {3, 1};
  CHECK_THROWS_AS(bad_label.validate(), ParameterError);
}

TEST_CASE("transcript feedback invariant") {
  Transcript tr;
  tr.rounds.push_back({1, 1, 2, kAbstain, 2, 1});
  tr.rounds.push_back({2, 1, 2, 1, kNoFeedback, 0});
  tr.validate();

  Transcript leak = tr;
  leak.rounds[1].feedback = 2;  // feedback on a prediction round
  CHECK_THROWS_AS(leak.validate(), ProtocolError);

  Transcript hidden = tr;
  hidden.rounds[0].feedback = kNoFeedback;  // abstention must reveal the label
  CHECK_THROWS_AS(hidden.validate(), ProtocolError);

  Transcript gap = tr;
  gap.rounds[1].t = 3;
  CHECK_THROWS_AS(gap.validate(), ProtocolError);
}
