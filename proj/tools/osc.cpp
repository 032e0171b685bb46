// Experiment runner for the selective-classification game library.
// Subcommands: run, sweep, alln, lil, lowerbound, rates, paretodata.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "osc/concentration.hpp"
#include "osc/engine.hpp"
#include "osc/parallel.hpp"
#include "osc/sweep.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitCheckFailed = 4;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw osc::ConfigError("csv: no column named '" + name + "'");
  }
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw osc::ConfigError("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!saw_header) {
      table.header = cells;
      saw_header = true;
    } else {
      table.rows.push_back(cells);
    }
  }
  if (!saw_header) throw osc::ConfigError("csv '" + path + "' has no header row");
  return table;
}

double binomial_margin(double delta, std::int64_t trials) {
  return 3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(trials));
}

int cmd_run(const std::string& config_path, bool to_stdout, int workers) {
  const osc::ExperimentSpec spec = osc::parse_config_file(config_path);
  const osc::FunctionClass cls = osc::build_class(spec.class_spec);
  const auto runs = osc::expand_runs(spec, cls.size());
  if (runs.size() != 1)
    throw osc::ConfigError("run: the config expands to " + std::to_string(runs.size()) +
                           " runs; use a single grid point, horizon and seed (or `osc sweep`)");
  (void)workers;
  osc::GameConfig cfg;
  cfg.horizon = runs[0].horizon;
  cfg.learner = runs[0].learner;
  cfg.adversary = spec.adversary.resolve(cls, runs[0].horizon);
  cfg.seed = runs[0].run_seed;
  const osc::Transcript tr = osc::run(cls, cfg);
  if (to_stdout) {
    osc::write_transcript_csv(tr, std::cout);
  } else {
    std::filesystem::create_directories(spec.output);
    const auto path = std::filesystem::path(spec.output) / "transcript.csv";
    std::ofstream f(path, std::ios::binary);
    osc::write_transcript_csv(tr, f);
    std::cerr << "wrote " << path.string() << "\n";
  }
  const osc::RegretSummary s = osc::summarize(tr, cls);
  std::cerr << "M_T=" << s.mistakes << " A_T=" << s.abstentions << " A*=" << s.a_star
            << " MMEA=" << s.mmea << " heads=" << s.coin_heads << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, int workers) {
  const osc::ExperimentSpec spec = osc::parse_config_file(config_path);
  const osc::SweepResult result = osc::sweep(spec, workers);
  std::cerr << "wrote " << result.summaries_path << " and " << result.aggregates_path << " ("
            << result.runs << " runs)\n";
  if (result.failures > 0) {
    for (const auto& msg : result.failure_messages) std::cerr << "worker failure: " << msg << "\n";
    std::cerr << result.failures << " of " << result.runs << " runs failed; results are partial\n";
    return kExitProtocol;
  }
  return kExitOk;
}

int cmd_validator(bool lil, double p, double delta, std::int64_t horizon, std::int64_t trials,
                  const std::string& stress_str, std::uint64_t seed, int workers) {
  const osc::StressSpec stress = osc::stress_from_string(stress_str);
  const osc::ValidationResult res =
      lil ? osc::validate_lil(p, delta, horizon, trials, stress, seed, workers)
          : osc::validate_alln(p, delta, horizon, trials, stress, seed, workers);
  const double bound = delta + binomial_margin(delta, trials);
  json out;
  out["p"] = p;
  out["delta"] = delta;
  out["horizon"] = horizon;
  out["trials"] = trials;
  out["stress"] = osc::to_string(stress);
  out["violations"] = res.violations;
  out["fraction"] = res.fraction;
  out["bound"] = bound;
  std::cout << out.dump(2) << "\n";
  return res.fraction <= bound ? kExitOk : kExitCheckFailed;
}

int cmd_lowerbound(double gamma, std::int64_t horizon, int seeds, std::uint64_t base_seed,
                   const std::string& algorithm, double p, double eta, double lambda,
                   int workers) {
  const osc::FunctionClass cls = osc::make_lower_bound_class(1);
  const auto [p1, p2] = osc::make_lower_bound_pair(gamma, 1);

  osc::LearnerConfig lc;
  lc.algorithm = osc::algorithm_from_string(algorithm);
  lc.p = p;
  lc.eta = eta;
  lc.lambda = lambda;
  lc.horizon = horizon;

  std::vector<double> excess_p1(static_cast<std::size_t>(seeds), 0.0);
  std::vector<double> mistakes_p2(static_cast<std::size_t>(seeds), 0.0);
  osc::parallel_for(seeds, workers, [&](std::int64_t i) {
    osc::GameConfig cfg1;
    cfg1.horizon = horizon;
    cfg1.learner = lc;
    cfg1.adversary = p1;
    cfg1.seed = osc::mix_seed(base_seed + static_cast<std::uint64_t>(i));
    osc::GameConfig cfg2 = cfg1;
    cfg2.adversary = p2;
    const auto [t1, t2] = osc::run_coupled_pair(cls, cfg1, cfg2);
    excess_p1[static_cast<std::size_t>(i)] =
        static_cast<double>(osc::summarize(t1, cls).excess_abstentions);
    mistakes_p2[static_cast<std::size_t>(i)] =
        static_cast<double>(osc::summarize(t2, cls).mistakes);
  });

  double k_hat = 0.0, m_hat = 0.0;
  for (double v : excess_p1) k_hat += v;
  for (double v : mistakes_p2) m_hat += v;
  k_hat /= seeds;
  m_hat /= seeds;
  double var = 0.0;
  for (double v : mistakes_p2) var += (v - m_hat) * (v - m_hat);
  var = seeds > 1 ? var / (seeds - 1) : 0.0;
  const double se_m = std::sqrt(var / seeds);

  const osc::LowerBoundCheck check =
      osc::lower_bound_check(std::max(0.0, k_hat), gamma, horizon, m_hat, 3.0 * se_m);
  json out;
  out["gamma"] = gamma;
  out["T"] = horizon;
  out["seeds"] = seeds;
  out["algorithm"] = algorithm;
  out["K_hat"] = k_hat;
  out["M_hat"] = m_hat;
  out["se_M"] = se_m;
  out["bound"] = check.bound;
  out["margin"] = check.margin;
  out["pass"] = check.pass;
  std::cout << out.dump(2) << "\n";
  return check.pass ? kExitOk : kExitCheckFailed;
}

int cmd_rates(const std::string& input, const std::string& value_column,
              const std::string& x_column, const std::vector<std::string>& filters,
              const std::string& series) {
  const CsvTable table = read_csv(input);
  const int xc = table.column(x_column);
  const int vc = table.column(value_column);
  std::vector<std::pair<int, std::string>> filter_cols;
  for (const auto& f : filters) {
    const auto eq = f.find('=');
    if (eq == std::string::npos)
      throw osc::ConfigError("filter '" + f + "' must look like column=value");
    filter_cols.emplace_back(table.column(f.substr(0, eq)), f.substr(eq + 1));
  }
  std::vector<std::pair<double, double>> points;
  for (const auto& row : table.rows) {
    bool keep = true;
    for (const auto& [col, want] : filter_cols)
      if (row[static_cast<std::size_t>(col)] != want) keep = false;
    if (!keep) continue;
    points.emplace_back(std::stod(row[static_cast<std::size_t>(xc)]),
                        std::stod(row[static_cast<std::size_t>(vc)]));
  }
  const osc::RateFit fit = osc::fit_rate(points);
  json out;
  out["series"] = series.empty() ? value_column : series;
  out["slope"] = fit.slope;
  out["stderr"] = fit.stderr;
  out["n_points"] = fit.n_points;
  if (fit.n_floored > 0) out["n_floored"] = fit.n_floored;
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_paretodata(double alpha_star) {
  const auto regions = osc::achievable_regions(alpha_star);
  json out;
  out["alpha_star"] = alpha_star;
  out["regions"] = json::array();
  for (const auto& region : regions) {
    json r;
    r["name"] = region.name;
    r["vertices"] = json::array();
    for (const auto& [mu, alpha] : region.vertices) r["vertices"].push_back({mu, alpha});
    out["regions"].push_back(r);
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"selective-classification game simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // accept global options after the subcommand too
  int workers = 0;
  app.add_option("--workers", workers, "worker threads (default: OSC_WORKERS or hardware)");

  std::string config_path;
  bool to_stdout = false;
  auto* run_cmd = app.add_subcommand("run", "play a single game and export the transcript");
  run_cmd->add_option("config", config_path, "experiment config file")->required();
  run_cmd->add_flag("--stdout", to_stdout, "write the transcript CSV to stdout");

  std::string sweep_config;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid and aggregate regrets");
  sweep_cmd->add_option("config", sweep_config, "experiment config file")->required();

  double v_p = 0.1, v_delta = 0.05;
  std::int64_t v_horizon = 10000, v_trials = 10000;
  std::string v_stress = "all_ones";
  std::uint64_t v_seed = 1;
  auto add_validator_options = [&](CLI::App* cmd) {
    cmd->add_option("--p", v_p, "probe rate in (0, 1/2)")->required();
    cmd->add_option("--delta", v_delta, "failure level")->required();
    cmd->add_option("--horizon", v_horizon, "steps per trace");
    cmd->add_option("--trials", v_trials, "independent traces");
    cmd->add_option("--stress", v_stress, "all_ones | adaptive_stop | random:<q>");
    cmd->add_option("--seed", v_seed, "base seed");
  };
  auto* alln_cmd = app.add_subcommand("alln", "Monte Carlo check of the count bound");
  add_validator_options(alln_cmd);
  auto* lil_cmd = app.add_subcommand("lil", "Monte Carlo check of the deviation boundary");
  add_validator_options(lil_cmd);

  double lb_gamma = 0.25, lb_p = 0.002, lb_eta = 0.002, lb_lambda = 0.001;
  std::int64_t lb_horizon = 5000;
  int lb_seeds = 400;
  std::uint64_t lb_base_seed = 1;
  std::string lb_algorithm = "vue";
  auto* lb_cmd = app.add_subcommand("lowerbound", "coupled-pair mistake floor experiment");
  lb_cmd->add_option("--gamma", lb_gamma, "flip probability in [0, 1/2]");
  lb_cmd->add_option("--T", lb_horizon, "horizon");
  lb_cmd->add_option("--seeds", lb_seeds, "number of coupled pairs");
  lb_cmd->add_option("--base-seed", lb_base_seed, "base seed");
  lb_cmd->add_option("--algorithm", lb_algorithm, "learner algorithm");
  lb_cmd->add_option("--p", lb_p, "exploration rate");
  lb_cmd->add_option("--eta", lb_eta, "learning rate");
  lb_cmd->add_option("--lambda", lb_lambda, "abstention weight");

  std::string r_input, r_value = "mean_excess_mistakes", r_x = "T", r_series;
  std::vector<std::string> r_filters;
  auto* rates_cmd = app.add_subcommand("rates", "fit a log-log slope over a sweep output");
  rates_cmd->add_option("--input", r_input, "aggregates.csv (or any CSV with the columns)")
      ->required();
  rates_cmd->add_option("--value", r_value, "value column");
  rates_cmd->add_option("--x", r_x, "horizon column");
  rates_cmd->add_option("--filter", r_filters, "column=value row filters")->take_all();
  rates_cmd->add_option("--series", r_series, "label for the output record");

  double pareto_alpha_star = 1.0;
  auto* pareto_cmd = app.add_subcommand("paretodata", "emit achievable-rate region polylines");
  pareto_cmd->add_option("--alpha-star", pareto_alpha_star, "competitor abstention exponent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, to_stdout, workers);
    if (*sweep_cmd) return cmd_sweep(sweep_config, workers);
    if (*alln_cmd)
      return cmd_validator(false, v_p, v_delta, v_horizon, v_trials, v_stress, v_seed, workers);
    if (*lil_cmd)
      return cmd_validator(true, v_p, v_delta, v_horizon, v_trials, v_stress, v_seed, workers);
    if (*lb_cmd)
      return cmd_lowerbound(lb_gamma, lb_horizon, lb_seeds, lb_base_seed, lb_algorithm, lb_p,
                            lb_eta, lb_lambda, workers);
    if (*rates_cmd) return cmd_rates(r_input, r_value, r_x, r_filters, r_series);
    if (*pareto_cmd) return cmd_paretodata(pareto_alpha_star);
  } catch (const osc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const osc::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const osc::ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kExitProtocol;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitProtocol;
  }
  return kExitConfig;
}
