#ifndef OPEVAL_SCENARIO_HPP
#define OPEVAL_SCENARIO_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "opeval/assignment.hpp"
#include "opeval/pooling.hpp"
#include "opeval/report.hpp"
#include "opeval/simulation.hpp"

namespace opeval {

enum class PropensityMode { kEmpirical, kEstimated, kExternal };
enum class AssignmentMode { kGiven, kOffline, kOnline };

// One evaluation scenario, settable from CLI flags or a key=value file
// (keys named like the fields; '#' starts a comment). Exactly one policy
// source: either a policy file (assignment=given) or an optimizer mode.
struct ScenarioConfig {
  std::string name = "scenario";
  std::filesystem::path data;
  std::filesystem::path predictions;
  std::optional<std::filesystem::path> capacities;
  std::optional<std::filesystem::path> policy;
  AssignmentMode assignment = AssignmentMode::kGiven;
  std::string arrival_column;  // covariate header, online assignment only
  PropensityMode propensity = PropensityMode::kEmpirical;
  std::optional<std::filesystem::path> propensity_file;
  CountingUnit propensity_unit = CountingUnit::kCase;
  std::optional<double> pooling_threshold;  // absent = pooling off
  double positivity_floor = 0.0;
  bool allow_positivity_violations = false;
  std::optional<double> baseline_override;
  double logit_l2 = 1e-4;      // estimated-propensity hyperparameters
  double logit_floor = 1e-3;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "opeval_run";

  static ScenarioConfig from_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);
  void validate() const;
  std::vector<std::string> resolved_lines() const;
};

struct EvaluateResult {
  ScenarioReport report;
  std::vector<std::filesystem::path> files_written;
};

// Full pipeline: ingest, propensities, optional pooling, policy (given or
// optimized), positivity gate, all four estimators, report files
// (<out>.records.csv, <out>.report.txt, plus <out>.policy.csv when the
// policy was computed here and <out>.pooling.csv when pooling is active).
EvaluateResult run_evaluate(const ScenarioConfig& config);

// Runs each scenario and writes one combined gains summary.
std::vector<EvaluateResult> run_evaluate_grid(
    std::span<const ScenarioConfig> configs,
    const std::filesystem::path& summary_path);

// Simulation study configuration (key=value file: n, k, covariate_dim,
// case_sizes, pi, intercept_mean, intercept_sd, coef_sd, prediction_noise,
// mode, replications, pooling, local_unit, policy_source, out, name).
struct SimulateConfig {
  std::string name = "simulation";
  SyntheticConfig synthetic;
  std::string mode = "mc";  // mc | enumerate
  std::size_t replications = 1000;
  std::optional<double> pooling_threshold;
  CountingUnit local_unit = CountingUnit::kCase;
  std::string policy_source = "offline";  // offline | argmax | random
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "opeval_sim";

  static SimulateConfig from_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);
  void validate() const;
  std::vector<std::string> resolved_lines() const;
};

struct SimulateResult {
  std::optional<MonteCarloResult> mc;
  std::optional<DesignExpectation> exact;
  std::vector<std::filesystem::path> files_written;
};

SimulateResult run_simulate(const SimulateConfig& config);

struct AssignConfig {
  std::filesystem::path data;
  std::filesystem::path predictions;
  std::optional<std::filesystem::path> capacities;
  AssignmentMode mode = AssignmentMode::kOffline;
  std::optional<std::filesystem::path> policy;  // passthrough input
  std::string arrival_column;
  std::filesystem::path out = "policy_out.csv";
};

struct AssignResult {
  PolicyAssignment policy;
  double total_reward = 0.0;
  std::filesystem::path out;
};

AssignResult run_assign(const AssignConfig& config);

struct PoolInspectConfig {
  std::filesystem::path data;
  std::optional<std::filesystem::path> capacities;
  double threshold = 0.01;
  CountingUnit unit = CountingUnit::kCase;
  std::optional<std::filesystem::path> out;  // absent = render only
};

struct PoolInspectResult {
  PoolingMap pooling;
  std::string rendered;  // original_location,pooled_location,weight lines
};

PoolInspectResult run_pool_inspect(const PoolInspectConfig& config);

}  // namespace opeval

#endif  // OPEVAL_SCENARIO_HPP
