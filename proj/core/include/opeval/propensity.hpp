#ifndef OPEVAL_PROPENSITY_HPP
#define OPEVAL_PROPENSITY_HPP

#include <cstdint>
#include <vector>

#include "opeval/dataset.hpp"

namespace opeval {

// Historical assignment happened per case, so propensities count cases by
// default; individual-level counting is available for sensitivity analysis.
enum class CountingUnit { kCase, kIndividual };

// Historical assignment probabilities pi_{a,i}: either one marginal vector
// pi(a) shared by everyone (quasi-random design) or an N x K table of
// covariate-conditional probabilities pi(a|X_i).
struct PropensityModel {
  enum class Kind { kEmpirical, kEstimated };

  Kind kind = Kind::kEmpirical;
  CountingUnit unit = CountingUnit::kCase;
  std::size_t k = 0;
  std::vector<double> marginal;     // K entries (empirical kind)
  std::vector<double> conditional;  // N*K row-major (estimated kind)

  // Lookup pi_{a,i}.
  double at(std::size_t i, std::size_t a) const {
    return kind == Kind::kEmpirical ? marginal[a] : conditional[i * k + a];
  }
};

// Each probability vector must sum to 1 within 1e-9 with entries in [0,1].
void validate_propensities(const PropensityModel& model, std::size_t n);

// pi(a) = (#units historically at a) / (total units).
PropensityModel empirical_propensities(const EvaluationDataset& dataset,
                                       CountingUnit unit = CountingUnit::kCase);

// Reference conditional model: L2-regularized multinomial logistic
// regression on the covariates (features standardized internally, intercept
// unpenalized), with a probability floor applied and rows renormalized.
// Deterministic: zero initialization plus full-batch descent, no sampling.
struct LogitConfig {
  double l2 = 1e-4;          // ridge penalty on non-intercept weights
  double floor = 1e-3;       // post-fit probability floor
  int max_iter = 1000;
  double tol = 1e-9;         // stop when the gradient max-norm drops below
  std::uint64_t seed = 0;    // recorded for provenance; the fit is exact
};

PropensityModel estimate_propensities(const EvaluationDataset& dataset,
                                      const LogitConfig& config = {});

// Individuals the policy sends to a location whose propensity is <= floor
// (inclusive: a propensity exactly at the floor already means the maximum
// tolerable weight 1/floor).
struct PositivityViolation {
  std::size_t individual;
  std::size_t location;
  double propensity;
};

struct PositivityReport {
  double floor = 0.0;
  std::vector<PositivityViolation> violations;

  bool pass() const { return violations.empty(); }
};

PositivityReport positivity_check(const PropensityModel& propensities,
                                  const EvaluationDataset& dataset,
                                  const PolicyAssignment& policy,
                                  double floor = 0.0);

}  // namespace opeval

#endif  // OPEVAL_PROPENSITY_HPP
