#include "opeval/scenario.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "opeval/csv.hpp"
#include "opeval/error.hpp"
#include "opeval/io.hpp"
#include "opeval/rng.hpp"

namespace opeval {

namespace {

// Seed streams for the scenario-level randomized steps.
enum ScenarioStream : std::uint64_t {
  kStreamPoolResolve = 101,
  kStreamRandomPolicy = 102,
  kStreamMonteCarlo = 103,
};

double parse_double(const std::string& value, const std::string& key) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    fail(ErrorClass::kConfig, "bad number for '" + key + "': " + value);
  }
  return out;
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    fail(ErrorClass::kConfig, "bad integer for '" + key + "': " + value);
  }
  return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") {
    return true;
  }
  if (value == "0" || value == "false" || value == "no" || value == "off") {
    return false;
  }
  fail(ErrorClass::kConfig, "bad boolean for '" + key + "': " + value);
}

CountingUnit parse_unit(const std::string& value, const std::string& key) {
  if (value == "case") return CountingUnit::kCase;
  if (value == "individual") return CountingUnit::kIndividual;
  fail(ErrorClass::kConfig,
       "'" + key + "' must be 'case' or 'individual', got: " + value);
}

const char* unit_name(CountingUnit unit) {
  return unit == CountingUnit::kCase ? "case" : "individual";
}

// key=value file with '#' comments and blank lines.
template <typename Config>
Config parse_kv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorClass::kConfig, "cannot open config file: " + path.string());
  }
  Config config;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      std::size_t b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      std::size_t e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorClass::kConfig, path.string() + ":" +
                                    std::to_string(line_number) +
                                    ": expected key=value");
    }
    config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

std::string optional_path_text(const std::optional<std::filesystem::path>& p) {
  return p ? p->string() : "(none)";
}

}  // namespace

ScenarioConfig ScenarioConfig::from_file(const std::filesystem::path& path) {
  return parse_kv_file<ScenarioConfig>(path);
}

void ScenarioConfig::set(const std::string& key, const std::string& value) {
  if (key == "name") {
    name = value;
  } else if (key == "data") {
    data = value;
  } else if (key == "predictions") {
    predictions = value;
  } else if (key == "capacities") {
    capacities = value;
  } else if (key == "policy") {
    policy = value;
    assignment = AssignmentMode::kGiven;
  } else if (key == "assignment") {
    if (value == "given") {
      assignment = AssignmentMode::kGiven;
    } else if (value == "offline") {
      assignment = AssignmentMode::kOffline;
    } else if (value == "online") {
      assignment = AssignmentMode::kOnline;
    } else {
      fail(ErrorClass::kConfig, "assignment must be given|offline|online");
    }
  } else if (key == "arrival_column") {
    arrival_column = value;
  } else if (key == "propensity") {
    if (value == "empirical") {
      propensity = PropensityMode::kEmpirical;
    } else if (value == "estimated") {
      propensity = PropensityMode::kEstimated;
    } else if (value == "external") {
      propensity = PropensityMode::kExternal;
    } else {
      fail(ErrorClass::kConfig, "propensity must be empirical|estimated|external");
    }
  } else if (key == "propensity_file") {
    propensity_file = value;
  } else if (key == "propensity_unit") {
    propensity_unit = parse_unit(value, key);
  } else if (key == "pooling") {
    if (value == "off") {
      pooling_threshold.reset();
    } else {
      pooling_threshold = parse_double(value, key);
    }
  } else if (key == "floor") {
    positivity_floor = parse_double(value, key);
  } else if (key == "allow_positivity") {
    allow_positivity_violations = parse_bool(value, key);
  } else if (key == "baseline") {
    baseline_override = parse_double(value, key);
  } else if (key == "logit_l2") {
    logit_l2 = parse_double(value, key);
  } else if (key == "logit_floor") {
    logit_floor = parse_double(value, key);
  } else if (key == "seed") {
    seed = parse_u64(value, key);
  } else if (key == "out") {
    out = value;
  } else {
    fail(ErrorClass::kConfig, "unknown scenario key: " + key);
  }
}

void ScenarioConfig::validate() const {
  if (data.empty()) fail(ErrorClass::kConfig, "missing 'data' file");
  if (predictions.empty()) {
    fail(ErrorClass::kConfig, "missing 'predictions' file");
  }
  if (assignment == AssignmentMode::kGiven && !policy) {
    fail(ErrorClass::kConfig,
         "a policy file is required when assignment=given");
  }
  if (assignment != AssignmentMode::kGiven && policy) {
    fail(ErrorClass::kConfig,
         "exactly one policy source: drop the policy file or use "
         "assignment=given");
  }
  if (assignment == AssignmentMode::kOnline && arrival_column.empty()) {
    fail(ErrorClass::kConfig,
         "online assignment needs an arrival_column");
  }
  if (propensity == PropensityMode::kExternal && !propensity_file) {
    fail(ErrorClass::kConfig,
         "propensity=external needs a propensity_file");
  }
  if (pooling_threshold && !(*pooling_threshold > 0.0 && *pooling_threshold < 1.0)) {
    fail(ErrorClass::kConfig, "pooling threshold must lie in (0,1)");
  }
}

std::vector<std::string> ScenarioConfig::resolved_lines() const {
  std::vector<std::string> lines;
  lines.push_back("name = " + name);
  lines.push_back("data = " + data.string());
  lines.push_back("predictions = " + predictions.string());
  lines.push_back("capacities = " + optional_path_text(capacities));
  lines.push_back("policy = " + optional_path_text(policy));
  lines.push_back(std::string("assignment = ") +
                  (assignment == AssignmentMode::kGiven     ? "given"
                   : assignment == AssignmentMode::kOffline ? "offline"
                                                            : "online"));
  if (assignment == AssignmentMode::kOnline) {
    lines.push_back("arrival_column = " + arrival_column);
  }
  lines.push_back(std::string("propensity = ") +
                  (propensity == PropensityMode::kEmpirical   ? "empirical"
                   : propensity == PropensityMode::kEstimated ? "estimated"
                                                              : "external"));
  if (propensity == PropensityMode::kExternal) {
    lines.push_back("propensity_file = " + optional_path_text(propensity_file));
  }
  if (propensity == PropensityMode::kEstimated) {
    lines.push_back("logit_l2 = " + format_double(logit_l2));
    lines.push_back("logit_floor = " + format_double(logit_floor));
  }
  lines.push_back(std::string("propensity_unit = ") + unit_name(propensity_unit));
  lines.push_back("pooling = " + (pooling_threshold
                                      ? format_double(*pooling_threshold)
                                      : std::string("off")));
  lines.push_back("floor = " + format_double(positivity_floor));
  lines.push_back(std::string("allow_positivity = ") +
                  (allow_positivity_violations ? "1" : "0"));
  if (baseline_override) {
    lines.push_back("baseline = " + format_double(*baseline_override));
  }
  lines.push_back("seed = " +
                  (seed ? std::to_string(*seed) : std::string("(none)")));
  lines.push_back("out = " + out.string());
  return lines;
}

namespace {

std::size_t covariate_index_from_name(const std::string& column,
                                      const EvaluationDataset& dataset) {
  // Covariate headers are x1..xp.
  if (column.size() < 2 || column[0] != 'x') {
    fail(ErrorClass::kConfig,
         "arrival_column must name a covariate column (x1..xp), got: " + column);
  }
  std::size_t j = 0;
  auto [ptr, ec] = std::from_chars(column.data() + 1,
                                   column.data() + column.size(), j);
  if (ec != std::errc() || ptr != column.data() + column.size() || j == 0 ||
      j > dataset.covariate_dim()) {
    fail(ErrorClass::kConfig, "unknown arrival column: " + column);
  }
  return j - 1;
}

}  // namespace

EvaluateResult run_evaluate(const ScenarioConfig& config) {
  config.validate();

  EvaluationDataset dataset = ingest_dataset(config.data, config.capacities);
  PredictionMatrix predictions = read_predictions(config.predictions, dataset);

  PropensityModel model;
  switch (config.propensity) {
    case PropensityMode::kEmpirical:
      model = empirical_propensities(dataset, config.propensity_unit);
      break;
    case PropensityMode::kEstimated: {
      LogitConfig lc;
      lc.l2 = config.logit_l2;
      lc.floor = config.logit_floor;
      lc.seed = config.seed.value_or(0);
      model = estimate_propensities(dataset, lc);
      break;
    }
    case PropensityMode::kExternal:
      model = read_propensity_table(*config.propensity_file, dataset);
      break;
  }

  PoolingMap pooling = identity_pooling(dataset);
  if (config.pooling_threshold) {
    pooling = build_pooling(
        dataset, empirical_propensities(dataset, config.propensity_unit),
        *config.pooling_threshold);
  }
  PooledProblem problem = pool_problem(dataset, predictions, model, pooling);

  PolicyAssignment policy_eval;                  // evaluation (pooled) space
  std::optional<PolicyAssignment> emitted;       // original space
  if (config.assignment == AssignmentMode::kGiven) {
    PolicyAssignment original = read_policy(*config.policy, dataset);
    policy_eval = pool_policy(dataset, original, pooling);
  } else {
    AssignmentProblem ap =
        build_assignment_problem(problem.dataset, problem.predictions);
    if (config.assignment == AssignmentMode::kOnline) {
      ap.arrival_order = arrival_order_by_covariate(
          dataset, covariate_index_from_name(config.arrival_column, dataset));
      policy_eval = online_assign(problem.dataset, ap);
    } else {
      policy_eval = offline_assign(problem.dataset, ap);
    }
    if (pooling.identity) {
      emitted = policy_eval;
    } else {
      if (!config.seed) {
        fail(ErrorClass::kConfig,
             "seed required: pooled assignments are resolved by a random "
             "within-pool draw");
      }
      emitted = resolve_pooled_assignment(
          dataset, policy_eval, pooling,
          derive_seed(*config.seed, kStreamPoolResolve));
    }
  }

  PositivityReport positivity =
      positivity_check(problem.propensities, problem.dataset, policy_eval,
                       config.positivity_floor);
  if (!positivity.pass() && !config.allow_positivity_violations) {
    const auto& v = positivity.violations.front();
    fail(ErrorClass::kPositivity,
         "positivity violation: " + std::to_string(positivity.violations.size()) +
             " individuals assigned to locations with propensity <= " +
             format_double(config.positivity_floor) + " (first: " +
             problem.dataset.individual(v.individual).id + " -> " +
             problem.dataset.location(v.location).id + ")");
  }

  EstimatorOptions options;
  options.positivity_floor = config.positivity_floor;
  options.enforce_positivity = !config.allow_positivity_violations;
  options.baseline_override = config.baseline_override;
  options.local_unit = config.propensity_unit;

  EvaluateResult result;
  result.report.scenario = config.name;
  result.report.baseline_overridden = config.baseline_override.has_value();
  result.report.reports =
      evaluate_all(problem.dataset, problem.propensities, problem.predictions,
                   policy_eval, options);
  result.report.baseline = result.report.reports.front().baseline;

  const std::filesystem::path records = config.out.string() + ".records.csv";
  const std::filesystem::path table = config.out.string() + ".report.txt";
  write_records_csv(records, result.report);
  write_text_file(table,
                  render_report_table(result.report, config.resolved_lines()));
  result.files_written = {records, table};

  if (emitted) {
    const std::filesystem::path policy_path =
        config.out.string() + ".policy.csv";
    write_policy(policy_path, dataset, *emitted);
    result.files_written.push_back(policy_path);
  }
  if (!pooling.identity) {
    const std::filesystem::path pooling_path =
        config.out.string() + ".pooling.csv";
    write_pooling_map(pooling_path, dataset, pooling);
    result.files_written.push_back(pooling_path);
  }
  return result;
}

std::vector<EvaluateResult> run_evaluate_grid(
    std::span<const ScenarioConfig> configs,
    const std::filesystem::path& summary_path) {
  std::vector<EvaluateResult> results;
  std::vector<ScenarioReport> reports;
  for (const ScenarioConfig& config : configs) {
    results.push_back(run_evaluate(config));
    reports.push_back(results.back().report);
  }
  write_gains_summary(summary_path, reports);
  for (EvaluateResult& r : results) r.files_written.push_back(summary_path);
  return results;
}

SimulateConfig SimulateConfig::from_file(const std::filesystem::path& path) {
  return parse_kv_file<SimulateConfig>(path);
}

void SimulateConfig::set(const std::string& key, const std::string& value) {
  if (key == "name") {
    name = value;
  } else if (key == "n") {
    synthetic.n = parse_u64(value, key);
  } else if (key == "k") {
    synthetic.k = parse_u64(value, key);
  } else if (key == "covariate_dim" || key == "p") {
    synthetic.covariate_dim = parse_u64(value, key);
  } else if (key == "case_sizes") {
    // "1" or "1:0.7,2:0.2,3:0.1"
    synthetic.case_sizes.clear();
    std::stringstream ss(value);
    std::string part;
    while (std::getline(ss, part, ',')) {
      std::size_t colon = part.find(':');
      long long size = 0;
      double weight = 1.0;
      if (colon == std::string::npos) {
        size = static_cast<long long>(parse_u64(part, key));
      } else {
        size = static_cast<long long>(parse_u64(part.substr(0, colon), key));
        weight = parse_double(part.substr(colon + 1), key);
      }
      synthetic.case_sizes.emplace_back(size, weight);
    }
  } else if (key == "pi") {
    synthetic.pi.clear();
    if (value != "uniform") {
      std::stringstream ss(value);
      std::string part;
      while (std::getline(ss, part, ',')) {
        synthetic.pi.push_back(parse_double(part, key));
      }
    }
  } else if (key == "intercept_mean") {
    synthetic.intercept_mean = parse_double(value, key);
  } else if (key == "intercept_sd") {
    synthetic.intercept_sd = parse_double(value, key);
  } else if (key == "coef_sd") {
    synthetic.coef_sd = parse_double(value, key);
  } else if (key == "prediction_noise") {
    synthetic.prediction_noise = parse_double(value, key);
  } else if (key == "mode") {
    if (value != "mc" && value != "enumerate") {
      fail(ErrorClass::kConfig, "mode must be mc|enumerate");
    }
    mode = value;
  } else if (key == "replications" || key == "R") {
    replications = parse_u64(value, key);
  } else if (key == "pooling") {
    if (value == "off") {
      pooling_threshold.reset();
    } else {
      pooling_threshold = parse_double(value, key);
    }
  } else if (key == "local_unit") {
    local_unit = parse_unit(value, key);
  } else if (key == "policy_source") {
    if (value != "offline" && value != "argmax" && value != "random") {
      fail(ErrorClass::kConfig, "policy_source must be offline|argmax|random");
    }
    policy_source = value;
  } else if (key == "seed") {
    seed = parse_u64(value, key);
  } else if (key == "out") {
    out = value;
  } else {
    fail(ErrorClass::kConfig, "unknown simulate key: " + key);
  }
}

void SimulateConfig::validate() const {
  if (!seed) {
    fail(ErrorClass::kConfig, "seed is required for simulation runs");
  }
  if (mode == "mc" && replications < 2) {
    fail(ErrorClass::kConfig, "mc mode needs replications >= 2");
  }
}

std::vector<std::string> SimulateConfig::resolved_lines() const {
  std::vector<std::string> lines;
  lines.push_back("name = " + name);
  lines.push_back("mode = " + mode);
  lines.push_back("n = " + std::to_string(synthetic.n));
  lines.push_back("k = " + std::to_string(synthetic.k));
  lines.push_back("covariate_dim = " + std::to_string(synthetic.covariate_dim));
  {
    std::string sizes;
    for (const auto& [size, weight] : synthetic.case_sizes) {
      if (!sizes.empty()) sizes += ",";
      sizes += std::to_string(size) + ":" + format_double(weight);
    }
    lines.push_back("case_sizes = " + sizes);
  }
  {
    std::string pi = "uniform";
    if (!synthetic.pi.empty()) {
      pi.clear();
      for (double v : synthetic.pi) {
        if (!pi.empty()) pi += ",";
        pi += format_double(v);
      }
    }
    lines.push_back("pi = " + pi);
  }
  lines.push_back("intercept_mean = " + format_double(synthetic.intercept_mean));
  lines.push_back("intercept_sd = " + format_double(synthetic.intercept_sd));
  lines.push_back("coef_sd = " + format_double(synthetic.coef_sd));
  lines.push_back("prediction_noise = " +
                  format_double(synthetic.prediction_noise));
  if (mode == "mc") {
    lines.push_back("replications = " + std::to_string(replications));
  }
  lines.push_back("pooling = " + (pooling_threshold
                                      ? format_double(*pooling_threshold)
                                      : std::string("off")));
  lines.push_back(std::string("local_unit = ") + unit_name(local_unit));
  lines.push_back("policy_source = " + policy_source);
  lines.push_back("seed = " +
                  (seed ? std::to_string(*seed) : std::string("(none)")));
  lines.push_back("out = " + out.string());
  return lines;
}

SimulateResult run_simulate(const SimulateConfig& config) {
  config.validate();
  SyntheticConfig synthetic = config.synthetic;
  synthetic.seed = *config.seed;
  SyntheticPopulation population = generate_population(synthetic);

  PoolingMap pooling = identity_pooling(population.dataset);
  PropensityModel design_model;
  design_model.kind = PropensityModel::Kind::kEmpirical;
  design_model.k = population.dataset.n_locations();
  design_model.marginal = population.pi;
  if (config.pooling_threshold) {
    pooling = build_pooling(population.dataset, design_model,
                            *config.pooling_threshold);
  }

  // The study holds the policy fixed; matching runs in pooled space when
  // pooling is on and the pseudo-arm draw is resolved once, seeded.
  PolicyAssignment policy;
  if (config.policy_source == "offline") {
    PooledProblem pooled = pool_problem(population.dataset,
                                        population.predictions, design_model,
                                        pooling);
    PolicyAssignment pooled_policy = offline_assign(
        pooled.dataset,
        build_assignment_problem(pooled.dataset, pooled.predictions));
    policy = resolve_pooled_assignment(population.dataset, pooled_policy,
                                       pooling,
                                       derive_seed(*config.seed,
                                                   kStreamPoolResolve));
  } else if (config.policy_source == "argmax") {
    std::vector<std::size_t> case_location(population.dataset.n_cases());
    for (std::size_t c = 0; c < population.dataset.n_cases(); ++c) {
      const Case& cs = population.dataset.case_at(c);
      std::size_t best = 0;
      double best_reward = -1.0;
      for (std::size_t a = 0; a < population.dataset.n_locations(); ++a) {
        double reward = 0.0;
        for (std::size_t i : cs.members) {
          reward += population.predictions.at(i, a);
        }
        if (reward > best_reward) {
          best_reward = reward;
          best = a;
        }
      }
      case_location[c] = best;
    }
    policy = make_policy_from_indices(population.dataset, case_location,
                                      /*enforce_capacities=*/false);
  } else {  // random
    Rng rng(derive_seed(*config.seed, kStreamRandomPolicy));
    std::vector<double> uniform(population.dataset.n_locations(), 1.0);
    std::vector<std::size_t> case_location(population.dataset.n_cases());
    for (std::size_t& a : case_location) a = rng.pick_weighted(uniform);
    policy = make_policy_from_indices(population.dataset, case_location,
                                      /*enforce_capacities=*/false);
  }

  DesignStudyOptions options;
  options.pooling_threshold = config.pooling_threshold;
  options.local_unit = config.local_unit;

  SimulateResult result;
  if (config.mode == "enumerate") {
    result.exact =
        enumerate_design(population.dataset, population.table,
                         population.predictions, policy, population.pi,
                         options);
    const std::filesystem::path records = config.out.string() + ".exact.csv";
    const std::filesystem::path summary = config.out.string() + ".exact.txt";
    write_enumeration_records(records, *result.exact);
    write_text_file(summary, render_enumeration_summary(
                                 *result.exact, config.resolved_lines()));
    result.files_written = {records, summary};
  } else {
    result.mc = monte_carlo(population.dataset, population.table,
                            population.predictions, policy, population.pi,
                            config.replications,
                            derive_seed(*config.seed, kStreamMonteCarlo),
                            options);
    const std::filesystem::path records = config.out.string() + ".mc.csv";
    const std::filesystem::path summary = config.out.string() + ".mc.txt";
    write_mc_records(records, *result.mc);
    write_text_file(summary,
                    render_mc_summary(*result.mc, config.resolved_lines()));
    result.files_written = {records, summary};
  }
  return result;
}

AssignResult run_assign(const AssignConfig& config) {
  EvaluationDataset dataset = ingest_dataset(config.data, config.capacities);
  AssignResult result;
  result.out = config.out;
  if (config.policy) {
    // Passthrough: validate and rewrite in canonical form.
    result.policy = read_policy(*config.policy, dataset);
    PredictionMatrix predictions =
        read_predictions(config.predictions, dataset);
    AssignmentProblem problem = build_assignment_problem(dataset, predictions);
    result.total_reward =
        assignment_total_reward(problem, result.policy.case_location);
  } else {
    PredictionMatrix predictions =
        read_predictions(config.predictions, dataset);
    AssignmentProblem problem = build_assignment_problem(dataset, predictions);
    if (config.mode == AssignmentMode::kOnline) {
      if (config.arrival_column.empty()) {
        fail(ErrorClass::kConfig, "online assignment needs an arrival_column");
      }
      problem.arrival_order = arrival_order_by_covariate(
          dataset, covariate_index_from_name(config.arrival_column, dataset));
      result.policy = online_assign(dataset, problem);
    } else {
      result.policy = offline_assign(dataset, problem);
    }
    result.total_reward =
        assignment_total_reward(problem, result.policy.case_location);
  }
  write_policy(config.out, dataset, result.policy);
  return result;
}

PoolInspectResult run_pool_inspect(const PoolInspectConfig& config) {
  EvaluationDataset dataset = ingest_dataset(config.data, config.capacities);
  PropensityModel empirical = empirical_propensities(dataset, config.unit);
  PoolInspectResult result;
  result.pooling = build_pooling(dataset, empirical, config.threshold);
  result.rendered = render_pooling_map(dataset, result.pooling);
  if (config.out) {
    write_pooling_map(*config.out, dataset, result.pooling);
  }
  return result;
}

}  // namespace opeval
