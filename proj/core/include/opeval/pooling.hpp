#ifndef OPEVAL_POOLING_HPP
#define OPEVAL_POOLING_HPP

#include <cstdint>
#include <vector>

#include "opeval/dataset.hpp"
#include "opeval/propensity.hpp"

namespace opeval {

// Merges every location whose marginal propensity falls strictly below the
// threshold into one pseudo-location. Anyone sent to the pseudo-location is
// randomly assigned within the pool in proportion to the members' historical
// propensities, so the pooled arm behaves like one location whose expected
// prediction is the propensity-weighted mean of its members'.
struct PoolingMap {
  double threshold = 0.01;
  bool identity = true;             // no pool (fewer than 2 small locations)
  std::vector<bool> is_member;      // per original location
  std::vector<std::size_t> forward; // original index -> pooled index
  std::vector<double> member_weight; // pi(a)/pooled_propensity, 0 off-pool
  double pooled_propensity = 0.0;   // sum of member propensities
  std::size_t pooled_k = 0;         // location count after pooling
  std::size_t pooled_index = 0;     // index of the pseudo-arm (if !identity)
  LocationId pooled_id;             // synthetic id of the pseudo-arm
};

// Membership is decided on Empirical-kind marginal propensities; threshold
// must lie in (0,1). Fewer than two small locations yields the identity map.
PoolingMap build_pooling(const EvaluationDataset& dataset,
                         const PropensityModel& empirical, double threshold);

// Identity map over the dataset's locations (pooling off).
PoolingMap identity_pooling(const EvaluationDataset& dataset);

// The same problem re-expressed over the pooled location space: historical
// locations mapped through `forward`, pooled-arm prediction equal to the
// propensity-weighted mean of member predictions, pooled-arm propensity
// equal to the summed member propensity (rowwise for estimated models), and
// pooled-arm capacity equal to the summed member capacities.
struct PooledProblem {
  EvaluationDataset dataset;
  PredictionMatrix predictions;
  PropensityModel propensities;
};

PooledProblem pool_problem(const EvaluationDataset& dataset,
                           const PredictionMatrix& predictions,
                           const PropensityModel& propensities,
                           const PoolingMap& pooling);

// Maps an original-space policy into the pooled space.
PolicyAssignment pool_policy(const EvaluationDataset& dataset,
                             const PolicyAssignment& policy,
                             const PoolingMap& pooling);

// Resolves a pooled-space policy back to original locations: each case on
// the pseudo-arm draws a member location with probability
// pi(a)/pooled_propensity. Deterministic given the seed.
PolicyAssignment resolve_pooled_assignment(const EvaluationDataset& dataset,
                                           const PolicyAssignment& pooled_policy,
                                           const PoolingMap& pooling,
                                           std::uint64_t seed);

}  // namespace opeval

#endif  // OPEVAL_POOLING_HPP
