#include "opeval/dataset.hpp"

#include "opeval/error.hpp"

namespace opeval {

const char* error_class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::kParse: return "parse";
    case ErrorClass::kValidation: return "validation";
    case ErrorClass::kConfig: return "config";
    case ErrorClass::kPositivity: return "positivity";
    case ErrorClass::kInfeasible: return "infeasible";
    case ErrorClass::kUndefinedEstimate: return "undefined-estimate";
  }
  return "unknown";
}

EvaluationDataset::EvaluationDataset(std::vector<Location> locations,
                                     std::vector<Individual> individuals,
                                     std::vector<Case> cases)
    : locations_(std::move(locations)),
      individuals_(std::move(individuals)),
      cases_(std::move(cases)) {
  if (individuals_.empty()) {
    fail(ErrorClass::kValidation, "empty dataset");
  }
  for (std::size_t a = 0; a < locations_.size(); ++a) {
    if (!location_index_.emplace(locations_[a].id, a).second) {
      fail(ErrorClass::kValidation, "duplicate location id: " + locations_[a].id);
    }
    if (locations_[a].capacity && *locations_[a].capacity < 0) {
      fail(ErrorClass::kValidation,
           "negative capacity for location " + locations_[a].id);
    }
    if (locations_[a].capacity) has_capacities_ = true;
  }
  covariate_dim_ = individuals_.front().covariates.size();
  for (std::size_t i = 0; i < individuals_.size(); ++i) {
    const Individual& ind = individuals_[i];
    if (!individual_index_.emplace(ind.id, i).second) {
      fail(ErrorClass::kValidation, "duplicate individual id: " + ind.id);
    }
    if (ind.outcome != 0 && ind.outcome != 1) {
      fail(ErrorClass::kValidation,
           "outcome outside {0,1} for individual " + ind.id);
    }
    if (ind.historical_location >= locations_.size()) {
      fail(ErrorClass::kValidation,
           "unknown location index for individual " + ind.id);
    }
    if (ind.covariates.size() != covariate_dim_) {
      fail(ErrorClass::kValidation,
           "covariate length mismatch for individual " + ind.id);
    }
  }
  std::vector<bool> seen(individuals_.size(), false);
  for (std::size_t c = 0; c < cases_.size(); ++c) {
    const Case& cs = cases_[c];
    if (!case_index_.emplace(cs.id, c).second) {
      fail(ErrorClass::kValidation, "duplicate case id: " + cs.id);
    }
    if (cs.members.empty()) {
      fail(ErrorClass::kValidation, "case " + cs.id + " has no members");
    }
    for (std::size_t i : cs.members) {
      if (i >= individuals_.size() || seen[i]) {
        fail(ErrorClass::kValidation,
             "case membership is not a partition (case " + cs.id + ")");
      }
      seen[i] = true;
      if (individuals_[i].case_index != c) {
        fail(ErrorClass::kValidation,
             "member/case index mismatch in case " + cs.id);
      }
      if (individuals_[i].historical_location != cs.historical_location) {
        fail(ErrorClass::kValidation,
             "inconsistent case placement: members of case " + cs.id +
                 " list different historical locations");
      }
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      fail(ErrorClass::kValidation,
           "individual " + individuals_[i].id + " belongs to no case");
    }
  }
}

std::optional<std::size_t> EvaluationDataset::find_location(
    const LocationId& id) const {
  auto it = location_index_.find(id);
  if (it == location_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> EvaluationDataset::find_case(const CaseId& id) const {
  auto it = case_index_.find(id);
  if (it == case_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> EvaluationDataset::find_individual(
    const IndividualId& id) const {
  auto it = individual_index_.find(id);
  if (it == individual_index_.end()) return std::nullopt;
  return it->second;
}

std::map<IndividualId, LocationId> derive_individual_assignment(
    const EvaluationDataset& dataset,
    const std::map<CaseId, LocationId>& case_assignment) {
  std::map<IndividualId, LocationId> result;
  for (const Case& cs : dataset.cases()) {
    auto it = case_assignment.find(cs.id);
    if (it == case_assignment.end()) {
      fail(ErrorClass::kValidation, "unassigned case: " + cs.id);
    }
    if (!dataset.find_location(it->second)) {
      fail(ErrorClass::kValidation,
           "unknown location id '" + it->second + "' for case " + cs.id);
    }
    for (std::size_t i : cs.members) {
      result[dataset.individual(i).id] = it->second;
    }
  }
  return result;
}

PolicyAssignment make_policy_from_indices(
    const EvaluationDataset& dataset,
    const std::vector<std::size_t>& case_location, bool enforce_capacities) {
  if (case_location.size() != dataset.n_cases()) {
    fail(ErrorClass::kValidation, "policy does not cover every case");
  }
  PolicyAssignment policy;
  policy.case_location = case_location;
  policy.individual_location.resize(dataset.n_individuals());
  std::vector<long long> load(dataset.n_locations(), 0);
  for (std::size_t c = 0; c < case_location.size(); ++c) {
    std::size_t a = case_location[c];
    if (a >= dataset.n_locations()) {
      fail(ErrorClass::kValidation,
           "policy assigns case " + dataset.case_at(c).id +
               " to an unknown location");
    }
    const Case& cs = dataset.case_at(c);
    load[a] += static_cast<long long>(cs.members.size());
    for (std::size_t i : cs.members) {
      policy.individual_location[i] = a;
    }
  }
  if (enforce_capacities && dataset.has_capacities()) {
    for (std::size_t a = 0; a < dataset.n_locations(); ++a) {
      const auto& cap = dataset.location(a).capacity;
      if (cap && load[a] > *cap) {
        fail(ErrorClass::kValidation,
             "policy exceeds capacity at location " + dataset.location(a).id +
                 " (" + std::to_string(load[a]) + " > " +
                 std::to_string(*cap) + ")");
      }
    }
  }
  return policy;
}

PolicyAssignment make_policy(const EvaluationDataset& dataset,
                             const std::map<CaseId, LocationId>& case_assignment,
                             bool enforce_capacities) {
  std::vector<std::size_t> case_location(dataset.n_cases());
  for (std::size_t c = 0; c < dataset.n_cases(); ++c) {
    const Case& cs = dataset.case_at(c);
    auto it = case_assignment.find(cs.id);
    if (it == case_assignment.end()) {
      fail(ErrorClass::kValidation, "unassigned case: " + cs.id);
    }
    auto a = dataset.find_location(it->second);
    if (!a) {
      fail(ErrorClass::kValidation,
           "unknown location id '" + it->second + "' for case " + cs.id);
    }
    case_location[c] = *a;
  }
  return make_policy_from_indices(dataset, case_location, enforce_capacities);
}

double observed_baseline(const EvaluationDataset& dataset) {
  double sum = 0.0;
  for (const Individual& ind : dataset.individuals()) sum += ind.outcome;
  return sum / static_cast<double>(dataset.n_individuals());
}

void validate_table_against_dataset(const PotentialOutcomeTable& table,
                                    const EvaluationDataset& dataset) {
  if (table.n != dataset.n_individuals() || table.k != dataset.n_locations()) {
    fail(ErrorClass::kValidation, "potential-outcome table shape mismatch");
  }
  for (std::size_t i = 0; i < table.n; ++i) {
    const Individual& ind = dataset.individual(i);
    int v = table.at(i, ind.historical_location);
    if (v != ind.outcome) {
      fail(ErrorClass::kValidation,
           "potential-outcome table disagrees with observed outcome for " +
               ind.id);
    }
  }
}

}  // namespace opeval
