// Command-line front end: evaluate | simulate | assign | pool-inspect.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "opeval/csv.hpp"
#include "opeval/error.hpp"
#include "opeval/scenario.hpp"

namespace {

int exit_code_for(opeval::ErrorClass c) {
  switch (c) {
    case opeval::ErrorClass::kParse: return 2;
    case opeval::ErrorClass::kValidation: return 3;
    case opeval::ErrorClass::kConfig: return 4;
    case opeval::ErrorClass::kPositivity: return 5;
    case opeval::ErrorClass::kInfeasible: return 6;
    case opeval::ErrorClass::kUndefinedEstimate: return 7;
  }
  return 1;
}

opeval::CountingUnit unit_from(const std::string& s) {
  if (s == "case") return opeval::CountingUnit::kCase;
  if (s == "individual") return opeval::CountingUnit::kIndividual;
  opeval::fail(opeval::ErrorClass::kConfig,
               "unit must be 'case' or 'individual'");
}

struct EvaluateCli {
  std::vector<std::string> config_files;
  std::string summary;
  std::optional<std::uint64_t> seed;

  // single-scenario flags
  opeval::ScenarioConfig flags;
  std::string assignment = "given";
  std::string propensity = "empirical";
  std::string propensity_unit = "case";
  std::string pooling = "off";
  bool allow_positivity = false;
  double baseline = -1.0;
  bool baseline_set = false;
};

int do_evaluate(const EvaluateCli& cli, const CLI::App& sub) {
  std::vector<opeval::ScenarioConfig> configs;
  if (!cli.config_files.empty()) {
    for (const std::string& path : cli.config_files) {
      configs.push_back(opeval::ScenarioConfig::from_file(path));
    }
  } else {
    opeval::ScenarioConfig config = cli.flags;
    config.set("assignment", cli.assignment);
    config.set("propensity", cli.propensity);
    config.set("propensity_unit", cli.propensity_unit);
    config.set("pooling", cli.pooling);
    config.allow_positivity_violations = cli.allow_positivity;
    if (cli.baseline_set) config.baseline_override = cli.baseline;
    // "policy" implies assignment=given in ScenarioConfig::set; flags keep
    // the two independent, so re-apply the file if one was given.
    if (config.policy && cli.assignment == "given") {
      config.assignment = opeval::AssignmentMode::kGiven;
    }
    configs.push_back(std::move(config));
  }
  if (cli.seed) {
    for (opeval::ScenarioConfig& c : configs) c.seed = cli.seed;
  }
  for (opeval::ScenarioConfig& c : configs) c.validate();

  std::string summary_path = cli.summary;
  if (summary_path.empty()) {
    summary_path = configs.front().out.string() + ".gains.csv";
  }
  std::vector<opeval::EvaluateResult> results =
      opeval::run_evaluate_grid(configs, summary_path);
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::cout << opeval::render_report_table(results[i].report,
                                             configs[i].resolved_lines());
    std::cout << "\n";
  }
  std::cout << "gains summary: " << summary_path << "\n";
  (void)sub;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Off-policy evaluation of capacity-constrained assignment "
               "policies from quasi-random placement data"};
  app.require_subcommand(1);

  // ---- evaluate ----
  EvaluateCli ev;
  CLI::App* evaluate =
      app.add_subcommand("evaluate",
                         "Estimate a policy's value (IPW, AIPW, AIPWl, "
                         "model-based) with gains and 95% CIs");
  evaluate->add_option("--config", ev.config_files,
                       "Scenario config file(s); repeat for a grid");
  evaluate->add_option("--summary", ev.summary,
                       "Combined gains summary path (default <out>.gains.csv)");
  std::string data, predictions, capacities, policy, arrival, out = "opeval_run",
              name = "scenario", prop_file;
  std::uint64_t seed_value = 0;
  bool seed_set = false;
  evaluate->add_option("--data", data, "Individuals file");
  evaluate->add_option("--predictions", predictions, "Predictions file");
  evaluate->add_option("--capacities", capacities, "Capacities file");
  evaluate->add_option("--policy", policy, "Policy file (assignment=given)");
  evaluate->add_option("--assignment", ev.assignment,
                       "given|offline|online");
  evaluate->add_option("--arrival-column", arrival,
                       "Covariate column giving the online arrival order");
  evaluate->add_option("--propensity", ev.propensity,
                       "empirical|estimated|external");
  evaluate->add_option("--propensity-file", prop_file,
                       "Externally fitted propensity table");
  evaluate->add_option("--propensity-unit", ev.propensity_unit,
                       "case|individual counting unit");
  evaluate->add_option("--pooling", ev.pooling,
                       "off or a small-location threshold such as 0.01");
  evaluate->add_option("--floor", ev.flags.positivity_floor,
                       "Positivity floor (violation when propensity <= floor)");
  evaluate->add_flag("--allow-positivity-violations", ev.allow_positivity,
                     "Run the estimators despite positivity violations");
  evaluate->add_option("--baseline", ev.baseline, "Baseline override")
      ->each([&ev](const std::string&) { ev.baseline_set = true; });
  evaluate->add_option("--name", name, "Scenario name in reports");
  evaluate->add_option("--out", out, "Output path prefix");
  evaluate->add_option("--seed", seed_value, "Seed for randomized steps")
      ->each([&seed_set](const std::string&) { seed_set = true; });

  // ---- simulate ----
  std::string sim_config_file;
  opeval::SimulateConfig sim;
  std::string sim_pi, sim_case_sizes, sim_pooling = "off",
              sim_local_unit = "case";
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  CLI::App* simulate = app.add_subcommand(
      "simulate",
      "Synthetic-population studies: exact design enumeration or Monte Carlo "
      "bias/variance/coverage checks");
  simulate->add_option("--config", sim_config_file, "Simulation config file");
  simulate->add_option("--mode", sim.mode, "mc|enumerate");
  simulate->add_option("--n", sim.synthetic.n, "Individuals");
  simulate->add_option("--k", sim.synthetic.k, "Locations");
  simulate->add_option("--covariate-dim", sim.synthetic.covariate_dim,
                       "Covariates per individual");
  simulate->add_option("--case-sizes", sim_case_sizes,
                       "Size distribution, e.g. 1:0.8,2:0.2");
  simulate->add_option("--pi", sim_pi,
                       "Design propensities, e.g. 0.5,0.3,0.2 or uniform");
  simulate->add_option("--prediction-noise", sim.synthetic.prediction_noise,
                       "SD of the mu perturbation");
  simulate->add_option("--replications", sim.replications,
                       "Monte Carlo replications");
  simulate->add_option("--pooling", sim_pooling,
                       "off or a pooling threshold");
  simulate->add_option("--local-unit", sim_local_unit,
                       "pi_L counting unit: case|individual");
  simulate->add_option("--policy-source", sim.policy_source,
                       "offline|argmax|random");
  simulate->add_option("--out", sim.out, "Output path prefix");
  simulate->add_option("--seed", sim_seed, "Master seed (required)")
      ->each([&sim_seed_set](const std::string&) { sim_seed_set = true; });

  // ---- assign ----
  opeval::AssignConfig assign_config;
  std::string assign_mode = "offline", assign_data, assign_predictions,
              assign_capacities, assign_policy;
  CLI::App* assign = app.add_subcommand(
      "assign", "Write a counterfactual policy file (offline optimum or "
                "online greedy)");
  assign->add_option("--data", assign_data, "Individuals file")->required();
  assign->add_option("--predictions", assign_predictions, "Predictions file")
      ->required();
  assign->add_option("--capacities", assign_capacities, "Capacities file");
  assign->add_option("--mode", assign_mode, "offline|online|given");
  assign->add_option("--policy", assign_policy,
                     "Existing policy to validate and pass through");
  assign->add_option("--arrival-column", assign_config.arrival_column,
                     "Covariate column giving the online arrival order");
  assign->add_option("--out", assign_config.out, "Policy file to write");

  // ---- pool-inspect ----
  opeval::PoolInspectConfig pool_config;
  std::string pool_data, pool_capacities, pool_unit = "case", pool_out;
  CLI::App* pool = app.add_subcommand(
      "pool-inspect", "Show the small-location pooling map at a threshold");
  pool->add_option("--data", pool_data, "Individuals file")->required();
  pool->add_option("--capacities", pool_capacities, "Capacities file");
  pool->add_option("--threshold", pool_config.threshold, "Pooling threshold");
  pool->add_option("--unit", pool_unit, "case|individual counting unit");
  pool->add_option("--out", pool_out, "Also write the map to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*evaluate) {
      if (!data.empty()) ev.flags.data = data;
      if (!predictions.empty()) ev.flags.predictions = predictions;
      if (!capacities.empty()) ev.flags.capacities = capacities;
      if (!policy.empty()) ev.flags.policy = policy;
      if (!prop_file.empty()) ev.flags.propensity_file = prop_file;
      if (!arrival.empty()) ev.flags.arrival_column = arrival;
      ev.flags.name = name;
      ev.flags.out = out;
      if (seed_set) ev.seed = seed_value;
      return do_evaluate(ev, *evaluate);
    }
    if (*simulate) {
      opeval::SimulateConfig config;
      if (!sim_config_file.empty()) {
        config = opeval::SimulateConfig::from_file(sim_config_file);
      } else {
        config = sim;
        if (!sim_case_sizes.empty()) config.set("case_sizes", sim_case_sizes);
        if (!sim_pi.empty()) config.set("pi", sim_pi);
        config.set("pooling", sim_pooling);
        config.local_unit = unit_from(sim_local_unit);
      }
      if (sim_seed_set) config.seed = sim_seed;
      opeval::SimulateResult result = opeval::run_simulate(config);
      if (result.mc) {
        std::cout << opeval::render_mc_summary(*result.mc,
                                               config.resolved_lines());
      } else if (result.exact) {
        std::cout << opeval::render_enumeration_summary(
            *result.exact, config.resolved_lines());
      }
      for (const auto& f : result.files_written) {
        std::cout << "wrote: " << f.string() << "\n";
      }
      return 0;
    }
    if (*assign) {
      assign_config.data = assign_data;
      assign_config.predictions = assign_predictions;
      if (!assign_capacities.empty()) assign_config.capacities = assign_capacities;
      if (!assign_policy.empty()) assign_config.policy = assign_policy;
      if (assign_mode == "offline") {
        assign_config.mode = opeval::AssignmentMode::kOffline;
      } else if (assign_mode == "online") {
        assign_config.mode = opeval::AssignmentMode::kOnline;
      } else if (assign_mode == "given") {
        if (assign_policy.empty()) {
          opeval::fail(opeval::ErrorClass::kConfig,
                       "--mode given needs --policy");
        }
      } else {
        opeval::fail(opeval::ErrorClass::kConfig,
                     "--mode must be offline|online|given");
      }
      opeval::AssignResult result = opeval::run_assign(assign_config);
      std::cout << "policy written: " << result.out.string()
                << " (total predicted outcome "
                << opeval::format_double(result.total_reward) << ")\n";
      return 0;
    }
    if (*pool) {
      pool_config.data = pool_data;
      if (!pool_capacities.empty()) pool_config.capacities = pool_capacities;
      pool_config.unit = unit_from(pool_unit);
      if (!pool_out.empty()) pool_config.out = pool_out;
      opeval::PoolInspectResult result = opeval::run_pool_inspect(pool_config);
      std::cout << result.rendered;
      return 0;
    }
  } catch (const opeval::Error& e) {
    std::cerr << "opeval: " << opeval::error_class_name(e.error_class())
              << ": " << e.what() << "\n";
    return exit_code_for(e.error_class());
  } catch (const std::exception& e) {
    std::cerr << "opeval: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
