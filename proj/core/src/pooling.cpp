#include "opeval/pooling.hpp"

#include <algorithm>

#include "opeval/error.hpp"
#include "opeval/rng.hpp"

namespace opeval {

PoolingMap build_pooling(const EvaluationDataset& dataset,
                         const PropensityModel& empirical, double threshold) {
  if (empirical.kind != PropensityModel::Kind::kEmpirical) {
    fail(ErrorClass::kValidation,
         "pooling membership requires empirical marginal propensities");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    fail(ErrorClass::kConfig, "pooling threshold must lie in (0,1)");
  }
  const std::size_t k = dataset.n_locations();
  PoolingMap map;
  map.threshold = threshold;
  map.is_member.assign(k, false);
  map.member_weight.assign(k, 0.0);
  map.forward.resize(k);

  std::size_t member_count = 0;
  for (std::size_t a = 0; a < k; ++a) {
    if (empirical.marginal[a] < threshold) {  // strict comparison
      map.is_member[a] = true;
      map.pooled_propensity += empirical.marginal[a];
      ++member_count;
    }
  }
  if (member_count < 2) {
    // Nothing to merge; degenerate single-location pools are suppressed.
    map.identity = true;
    map.is_member.assign(k, false);
    map.pooled_propensity = 0.0;
    map.pooled_k = k;
    for (std::size_t a = 0; a < k; ++a) map.forward[a] = a;
    return map;
  }
  if (map.pooled_propensity <= 0.0) {
    fail(ErrorClass::kValidation,
         "pooled propensity is zero: no pool member has historical arrivals");
  }

  map.identity = false;
  map.pooled_k = k - member_count + 1;
  map.pooled_index = map.pooled_k - 1;  // pseudo-arm appended last
  std::size_t next = 0;
  for (std::size_t a = 0; a < k; ++a) {
    if (map.is_member[a]) {
      map.forward[a] = map.pooled_index;
      map.member_weight[a] = empirical.marginal[a] / map.pooled_propensity;
    } else {
      map.forward[a] = next++;
    }
  }

  // Synthetic id; suffix until it avoids the existing location ids.
  std::string id = "pooled";
  while (dataset.find_location(id)) id += "_";
  map.pooled_id = id;
  return map;
}

PoolingMap identity_pooling(const EvaluationDataset& dataset) {
  const std::size_t k = dataset.n_locations();
  PoolingMap map;
  map.identity = true;
  map.is_member.assign(k, false);
  map.member_weight.assign(k, 0.0);
  map.forward.resize(k);
  for (std::size_t a = 0; a < k; ++a) map.forward[a] = a;
  map.pooled_k = k;
  return map;
}

PooledProblem pool_problem(const EvaluationDataset& dataset,
                           const PredictionMatrix& predictions,
                           const PropensityModel& propensities,
                           const PoolingMap& pooling) {
  if (pooling.identity) {
    return PooledProblem{dataset, predictions, propensities};
  }
  const std::size_t k = dataset.n_locations();
  const std::size_t n = dataset.n_individuals();
  const std::size_t pk = pooling.pooled_k;

  std::vector<Location> locations(pk);
  bool any_capacity = false;
  long long pooled_capacity = 0;
  bool pooled_capacity_known = true;
  for (std::size_t a = 0; a < k; ++a) {
    const Location& loc = dataset.location(a);
    if (pooling.is_member[a]) {
      if (loc.capacity) {
        pooled_capacity += *loc.capacity;
        any_capacity = true;
      } else {
        pooled_capacity_known = false;
      }
    } else {
      locations[pooling.forward[a]] = loc;
    }
  }
  Location pooled_loc;
  pooled_loc.id = pooling.pooled_id;
  if (any_capacity && pooled_capacity_known) {
    pooled_loc.capacity = pooled_capacity;
  }
  locations[pooling.pooled_index] = pooled_loc;

  std::vector<Individual> individuals = dataset.individuals();
  for (Individual& ind : individuals) {
    ind.historical_location = pooling.forward[ind.historical_location];
  }
  std::vector<Case> cases = dataset.cases();
  for (Case& cs : cases) {
    cs.historical_location = pooling.forward[cs.historical_location];
  }

  PooledProblem out{
      EvaluationDataset(std::move(locations), std::move(individuals),
                        std::move(cases)),
      PredictionMatrix{n, pk, std::vector<double>(n * pk, 0.0)},
      PropensityModel{}};

  // Pooled-arm prediction: mean of member predictions weighted by their
  // propensity share, i.e. the expected outcome of the proportional random
  // assignment the pool performs.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      double v = predictions.at(i, a);
      if (pooling.is_member[a]) {
        out.predictions.at(i, pooling.pooled_index) +=
            pooling.member_weight[a] * v;
      } else {
        out.predictions.at(i, pooling.forward[a]) = v;
      }
    }
  }

  PropensityModel& pooled_props = out.propensities;
  pooled_props.kind = propensities.kind;
  pooled_props.unit = propensities.unit;
  pooled_props.k = pk;
  if (propensities.kind == PropensityModel::Kind::kEmpirical) {
    pooled_props.marginal.assign(pk, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
      pooled_props.marginal[pooling.forward[a]] += propensities.marginal[a];
    }
  } else {
    pooled_props.conditional.assign(n * pk, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < k; ++a) {
        pooled_props.conditional[i * pk + pooling.forward[a]] +=
            propensities.at(i, a);
      }
    }
  }
  validate_propensities(pooled_props, n);
  return out;
}

PolicyAssignment pool_policy(const EvaluationDataset& dataset,
                             const PolicyAssignment& policy,
                             const PoolingMap& pooling) {
  if (policy.case_location.size() != dataset.n_cases() ||
      policy.individual_location.size() != dataset.n_individuals()) {
    fail(ErrorClass::kValidation, "policy does not cover the dataset");
  }
  if (pooling.identity) return policy;
  PolicyAssignment out;
  out.case_location.resize(policy.case_location.size());
  out.individual_location.resize(policy.individual_location.size());
  for (std::size_t c = 0; c < policy.case_location.size(); ++c) {
    out.case_location[c] = pooling.forward[policy.case_location[c]];
  }
  for (std::size_t i = 0; i < policy.individual_location.size(); ++i) {
    out.individual_location[i] = pooling.forward[policy.individual_location[i]];
  }
  return out;
}

PolicyAssignment resolve_pooled_assignment(const EvaluationDataset& dataset,
                                           const PolicyAssignment& pooled_policy,
                                           const PoolingMap& pooling,
                                           std::uint64_t seed) {
  if (pooling.identity) return pooled_policy;

  std::vector<std::size_t> member_locations;
  std::vector<double> weights;
  for (std::size_t a = 0; a < pooling.is_member.size(); ++a) {
    if (pooling.is_member[a]) {
      member_locations.push_back(a);
      weights.push_back(pooling.member_weight[a]);
    }
  }

  // Inverse of `forward` for the non-pooled arms.
  std::vector<std::size_t> original_of(pooling.pooled_k, 0);
  for (std::size_t a = 0; a < pooling.forward.size(); ++a) {
    if (!pooling.is_member[a]) original_of[pooling.forward[a]] = a;
  }

  Rng rng(derive_seed(seed, 0x706f6f6cULL));  // stream tag "pool"
  std::vector<std::size_t> case_location(pooled_policy.case_location.size());
  for (std::size_t c = 0; c < case_location.size(); ++c) {
    std::size_t pa = pooled_policy.case_location[c];
    if (pa == pooling.pooled_index) {
      case_location[c] = member_locations[rng.pick_weighted(weights)];
    } else {
      case_location[c] = original_of[pa];
    }
  }
  // Capacities are not re-checked here: the pool's summed capacity was
  // honored in pooled space, individual member draws may exceed a member's
  // own declared capacity by chance.
  return make_policy_from_indices(dataset, case_location,
                                  /*enforce_capacities=*/false);
}

}  // namespace opeval
