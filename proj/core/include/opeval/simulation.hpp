#ifndef OPEVAL_SIMULATION_HPP
#define OPEVAL_SIMULATION_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "opeval/dataset.hpp"
#include "opeval/propensity.hpp"

namespace opeval {

// Synthetic population with known potential outcomes. Outcome probabilities
// are logistic in iid standard-normal covariates with location-specific
// coefficients; supplied predictions are the true probabilities perturbed by
// the configured noise. Everything is a pure function of the seed.
struct SyntheticConfig {
  std::size_t n = 1000;          // individuals
  std::size_t k = 2;             // locations
  std::size_t covariate_dim = 2;
  std::vector<std::pair<long long, double>> case_sizes = {{1, 1.0}};
  std::vector<double> pi;        // historical assignment probabilities;
                                 // empty means uniform
  double intercept_mean = -0.6;  // roughly a 0.35 base outcome rate
  double intercept_sd = 0.5;
  double coef_sd = 1.0;
  double prediction_noise = 0.0; // sd of the additive mu perturbation
  std::uint64_t seed = 0;
};

struct SyntheticPopulation {
  EvaluationDataset dataset;
  PotentialOutcomeTable table;
  PredictionMatrix predictions;
  std::vector<double> pi;  // the design probabilities actually used
};

SyntheticPopulation generate_population(const SyntheticConfig& config);

// (1/N) sum Y_i(g_i) from the fixed potential-outcome table.
double true_policy_value(const PotentialOutcomeTable& table,
                         const PolicyAssignment& policy);

// Options shared by the exact and Monte Carlo design studies. When a
// pooling threshold is set, every redrawn sample is evaluated through the
// pooled transform (matching and evaluation both see the pooled problem).
struct DesignStudyOptions {
  std::optional<double> pooling_threshold;
  CountingUnit local_unit = CountingUnit::kCase;
  std::size_t enumeration_guard = 1000000;  // max assignment vectors
};

struct DesignMoments {
  bool defined = false;
  double mean = 0.0;
  double variance = 0.0;
  double mean_estimated_variance = 0.0;
  double skipped_weight = 0.0;  // design weight of zero-match vectors (IPW)
};

// Exact design moments: iterates every case-level assignment vector with
// weight prod_c pi(A_c), recomputing each estimator on the realized sample.
// IPW moments are conditional on at least one match, with the skipped
// weight reported. Model-based has no variance estimator, so its
// mean_estimated_variance stays zero.
struct DesignExpectation {
  double true_value = 0.0;
  std::size_t vector_count = 0;
  DesignMoments aipw, aipwl, ipw, model_based;
};

DesignExpectation enumerate_design(const EvaluationDataset& dataset,
                                   const PotentialOutcomeTable& table,
                                   const PredictionMatrix& predictions,
                                   const PolicyAssignment& policy,
                                   const std::vector<double>& pi,
                                   const DesignStudyOptions& options = {});

struct McEstimatorStats {
  std::size_t replications_used = 0;
  std::size_t undefined_replications = 0;  // zero-match draws (IPW only)
  double mean_point = 0.0;
  double bias = 0.0;              // mean_point - true V(g)
  double empirical_variance = 0.0;
  double mean_estimated_variance = 0.0;  // mean of the per-draw Var-hat
  double coverage = 0.0;  // share of draws whose 95% interval covers V(g)
  double mc_se = 0.0;     // sqrt(empirical_variance / replications_used)
  bool has_interval = true;  // false for model-based
};

struct MonteCarloResult {
  std::size_t replications = 0;
  double true_value = 0.0;
  McEstimatorStats aipw, aipwl, ipw, model_based;
};

// Redraws the historical assignment R times (population, potential
// outcomes, predictions, and policy stay fixed); replication r is seeded by
// derive_seed(seed, r), so results do not depend on evaluation order.
MonteCarloResult monte_carlo(const EvaluationDataset& dataset,
                             const PotentialOutcomeTable& table,
                             const PredictionMatrix& predictions,
                             const PolicyAssignment& policy,
                             const std::vector<double>& pi, std::size_t r,
                             std::uint64_t seed,
                             const DesignStudyOptions& options = {});

}  // namespace opeval

#endif  // OPEVAL_SIMULATION_HPP
