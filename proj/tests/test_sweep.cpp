#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "osc/sweep.hpp"

using namespace osc;

namespace {

ExperimentSpec small_spec() {
  return parse_config_string(R"(
[experiment]
name = smoke
horizons = 64
seeds = 3
base_seed = 11

[class]
kind = threshold
n = 3

[adversary]
kind = threshold_tight
t_star = 2

[learner]
algorithm = vue
p = 0.2
)");
}

int count_lines(const std::string& s, bool data_only) {
  std::istringstream ss(s);
  std::string line;
  int n = 0;
  bool past_header = false;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') continue;
    if (!past_header) {  // column header
      past_header = true;
      if (data_only) continue;
    }
    ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("one grid point x three seeds gives three rows plus one aggregate") {
  const SweepBuffers out = sweep_to_buffers(small_spec(), 1);
  CHECK(out.failures == 0);
  CHECK(count_lines(out.summaries_csv, true) == 3);
  CHECK(count_lines(out.aggregates_csv, true) == 1);
}

TEST_CASE("summary header names the spec columns") {
  const SweepBuffers out = sweep_to_buffers(small_spec(), 1);
  CHECK(out.summaries_csv.find(
            "run_id,seed,algorithm,adversary,T,p,eta,lambda,epsilon,M_T,A_T,A_star,M_star,"
            "excess_mistakes,excess_abstentions,MMEA,coin_heads") != std::string::npos);
  // Resolved defaults are echoed in the comment header.
  CHECK(out.summaries_csv.find("# [experiment]") != std::string::npos);
  CHECK(out.summaries_csv.find("# base_seed = 11") != std::string::npos);
}

TEST_CASE("re-running a sweep is byte-identical, whatever the worker count") {
  const ExperimentSpec spec = small_spec();
  const SweepBuffers a = sweep_to_buffers(spec, 1);
  const SweepBuffers b = sweep_to_buffers(spec, 1);
  const SweepBuffers c = sweep_to_buffers(spec, 4);
  CHECK(a.summaries_csv == b.summaries_csv);
  CHECK(a.aggregates_csv == b.aggregates_csv);
  CHECK(a.summaries_csv == c.summaries_csv);
  CHECK(a.aggregates_csv == c.aggregates_csv);
}

TEST_CASE("aggregates carry means over seeds") {
  const SweepBuffers out = sweep_to_buffers(small_spec(), 2);
  // Parse the single aggregate row.
  std::istringstream ss(out.aggregates_csv);
  std::string line, header, row;
  while (std::getline(ss, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (header.empty())
      header = line;
    else
      row = line;
  }
  REQUIRE(!row.empty());
  std::vector<std::string> cells;
  std::stringstream rs(row);
  std::string cell;
  while (std::getline(rs, cell, ',')) cells.push_back(cell);
  CHECK(cells[0] == "vue");
  CHECK(cells[2] == "64");
  CHECK(std::stoi(cells[7]) == 3);  // n_seeds

  // Cross-check mean_M_T against the per-run rows.
  std::istringstream sums(out.summaries_csv);
  double total = 0;
  int rows = 0;
  bool past_header = false;
  while (std::getline(sums, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!past_header) {
      past_header = true;
      continue;
    }
    std::vector<std::string> rcells;
    std::stringstream rss(line);
    while (std::getline(rss, cell, ',')) rcells.push_back(cell);
    total += std::stod(rcells[9]);  // M_T column
    ++rows;
  }
  CHECK(rows == 3);
  CHECK(std::stod(cells[8]) == doctest::Approx(total / 3.0));
}

TEST_CASE("multiple learner sections and grids aggregate per grid point") {
  ExperimentSpec spec = parse_config_string(R"(
[experiment]
horizons = 32 64
seeds = 2

[class]
kind = threshold
n = 2

[adversary]
kind = threshold_tight
t_star = 1

[learner]
algorithm = vue
p = 0.1 0.3

[learner]
algorithm = always_abstain
)");
  const SweepBuffers out = sweep_to_buffers(spec, 3);
  CHECK(out.failures == 0);
  // Grid points: vue (2 p x 2 T) + always_abstain (2 T) = 6; runs = 12.
  CHECK(count_lines(out.summaries_csv, true) == 12);
  CHECK(count_lines(out.aggregates_csv, true) == 6);
}

TEST_CASE("operating-point grid over (p, epsilon) with the relaxed learner") {
  // Class with a mistake-free target plus junk; the relaxed scheme sweeps a
  // two-by-two operating grid. One summary row per grid point x seed and one
  // aggregate per grid point.
  ExperimentSpec spec = parse_config_string(R"(
[experiment]
horizons = 500
seeds = 2

[class]
kind = random
domain_size = 8
num_labels = 3
n_functions = 15
abstain_prob = 0.25
class_seed = 6

[adversary]
kind = noisy_synthetic
target = 0
noise_rate = 0.02

[learner]
algorithm = vue_prod_relaxed
p = 0.015 0.285
eta = p
epsilon = 0.001 0.046
)");
  const SweepBuffers out = sweep_to_buffers(spec, 2);
  CHECK(out.failures == 0);
  CHECK(count_lines(out.summaries_csv, true) == 8);
  CHECK(count_lines(out.aggregates_csv, true) == 4);
}

TEST_CASE("t-sweep feeds the slope fitter end to end") {
  ExperimentSpec spec = parse_config_string(R"(
[experiment]
horizons = 1024 2048 4096 8192
seeds = 8

[class]
kind = threshold
n = 4

[adversary]
kind = threshold_tight
t_star = 2

[learner]
algorithm = vue
p = T^-0.5
)");
  const SweepBuffers out = sweep_to_buffers(spec, 4);
  CHECK(out.failures == 0);

  // Pull (T, mean_excess_mistakes) out of the aggregate rows and fit.
  std::istringstream ss(out.aggregates_csv);
  std::string line;
  std::vector<std::string> header;
  std::vector<std::pair<double, double>> points;
  while (std::getline(ss, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream rs(line);
    std::string cell;
    while (std::getline(rs, cell, ',')) cells.push_back(cell);
    if (header.empty()) {
      header = cells;
      continue;
    }
    double t = 0, v = 0;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == "T") t = std::stod(cells[i]);
      if (header[i] == "mean_excess_mistakes") v = std::stod(cells[i]);
    }
    points.emplace_back(t, v);
  }
  REQUIRE(points.size() == 4);
  const RateFit fit = fit_rate(points);
  // Mistakes of the explorer at p = T^-1/2 grow like sqrt(T); desk-scale
  // noise warrants a wide band.
  CHECK(fit.slope > 0.2);
  CHECK(fit.slope < 0.8);
}

TEST_CASE("full-transcript mode writes per-run files") {
  ExperimentSpec spec = small_spec();
  spec.mode = RunMode::kFullTranscript;
  spec.output = "test_sweep_out";
  const SweepResult res = sweep(spec, 1);
  CHECK(res.failures == 0);
  CHECK(std::filesystem::exists("test_sweep_out/summaries.csv"));
  CHECK(std::filesystem::exists("test_sweep_out/transcript_0.csv"));
  CHECK(std::filesystem::exists("test_sweep_out/transcript_2.csv"));
  std::filesystem::remove_all("test_sweep_out");
}
