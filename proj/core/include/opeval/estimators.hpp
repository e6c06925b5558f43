#ifndef OPEVAL_ESTIMATORS_HPP
#define OPEVAL_ESTIMATORS_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opeval/dataset.hpp"
#include "opeval/propensity.hpp"

namespace opeval {

enum class EstimatorKind { kAipw, kAipwLocal, kIpw, kModelBased };

const char* estimator_name(EstimatorKind kind);  // "AIPW", "AIPWl", ...

// One column of the results table: policy-value point estimate, gains over
// the baseline, design-based variance of the gains, and the 95% interval.
// Model-based reports carry no variance or interval. Point estimates are
// never clipped into [0,1]; an out-of-range point is flagged in `notes`.
struct EstimateReport {
  EstimatorKind estimator = EstimatorKind::kAipw;
  double point = 0.0;
  double baseline = 0.0;
  double gains = 0.0;
  std::optional<double> var_gains;
  std::optional<std::pair<double, double>> ci95;
  std::size_t n_matched = 0;
  std::vector<std::string> notes;
};

struct EstimatorOptions {
  double positivity_floor = 0.0;
  bool enforce_positivity = true;   // refuse to run on violations
  std::optional<double> baseline_override;
  CountingUnit local_unit = CountingUnit::kCase;  // pi_L counting unit
};

// Matched fraction per location among the units the policy sends there:
// pi_L(a) = #{A = g = a} / #{g = a}, defined where the denominator is
// positive. Counted per case by default and broadcast to members.
struct LocalPropensityTable {
  CountingUnit unit = CountingUnit::kCase;
  std::vector<double> value;          // per location; 0 where undefined
  std::vector<std::size_t> assigned;  // #{g = a}
  std::vector<std::size_t> matched;   // #{A = g = a}

  bool defined(std::size_t a) const { return assigned[a] > 0; }
};

LocalPropensityTable local_propensities(const EvaluationDataset& dataset,
                                        const PolicyAssignment& policy,
                                        CountingUnit unit = CountingUnit::kCase);

// Hajek-style IPW: importance-weighted mean outcome over the individuals
// whose historical location matches the policy, normalized by the summed
// weights. Uses no outcome predictions. Fails with "no overlap" when the
// matched set is empty.
EstimateReport ipw_estimate(const EvaluationDataset& dataset,
                            const PropensityModel& propensities,
                            const PolicyAssignment& policy,
                            const EstimatorOptions& options = {});

// Doubly robust estimator: model prediction at the policy location plus a
// matched, inverse-propensity-weighted residual correction.
EstimateReport aipw_estimate(const EvaluationDataset& dataset,
                             const PropensityModel& propensities,
                             const PredictionMatrix& predictions,
                             const PolicyAssignment& policy,
                             const EstimatorOptions& options = {});

// AIPW with the marginal propensity replaced by the location-specific
// matched fraction pi_L; needs no propensity model input.
EstimateReport aipwl_estimate(const EvaluationDataset& dataset,
                              const PredictionMatrix& predictions,
                              const PolicyAssignment& policy,
                              const EstimatorOptions& options = {});

// Benchmark that trusts the outcome model: mean mu_i(g_i).
EstimateReport model_based_estimate(const EvaluationDataset& dataset,
                                    const PredictionMatrix& predictions,
                                    const PolicyAssignment& policy,
                                    const EstimatorOptions& options = {});

// Design-based variance of the AIPW estimate:
// (1/N^2) sum over matched of (1 - pi_A) ((Y - mu_A)/pi_A)^2.
double var_aipw(const EvaluationDataset& dataset,
                const PropensityModel& propensities,
                const PredictionMatrix& predictions,
                const PolicyAssignment& policy);

// Same estimate with pi_L(A_i) substituted for the marginal propensity.
double var_aipw_local(const EvaluationDataset& dataset,
                      const LocalPropensityTable& local,
                      const PredictionMatrix& predictions,
                      const PolicyAssignment& policy);

// Design-based variance of the IPW estimate:
// (1/N^2) sum over matched of (1 - pi_A) ((Y - point)/pi_A)^2.
double var_ipw(const EvaluationDataset& dataset,
               const PropensityModel& propensities,
               const PolicyAssignment& policy, double point);

struct GainsCi {
  double gains = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// gains = point - baseline, interval gains +/- 1.96 sqrt(var); the baseline
// is treated as a fixed constant.
GainsCi gains_and_ci(double point, double baseline, double var);

// The full four-column report set in table order: AIPW, AIPWl, IPW,
// Model-Based.
std::vector<EstimateReport> evaluate_all(const EvaluationDataset& dataset,
                                         const PropensityModel& propensities,
                                         const PredictionMatrix& predictions,
                                         const PolicyAssignment& policy,
                                         const EstimatorOptions& options = {});

}  // namespace opeval

#endif  // OPEVAL_ESTIMATORS_HPP
