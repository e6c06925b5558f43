#ifndef OPEVAL_DATASET_HPP
#define OPEVAL_DATASET_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace opeval {

using LocationId = std::string;
using IndividualId = std::string;
using CaseId = std::string;

struct Location {
  LocationId id;
  std::optional<long long> capacity;  // individual count limit, if declared
};

struct Individual {
  IndividualId id;
  std::size_t case_index;
  std::size_t historical_location;  // index into the location set
  int outcome;                      // binary employment outcome
  std::vector<double> covariates;
};

struct Case {
  CaseId id;
  std::vector<std::size_t> members;  // individual indices, in input order
  std::size_t historical_location;   // shared by all members
};

// Immutable evaluation population: individuals grouped into cases, each case
// historically placed at one location, with a binary outcome per individual.
// Locations, cases, and individuals are index-addressed everywhere past
// ingestion; ids only appear at the file boundary.
class EvaluationDataset {
 public:
  EvaluationDataset(std::vector<Location> locations,
                    std::vector<Individual> individuals,
                    std::vector<Case> cases);

  std::size_t n_individuals() const { return individuals_.size(); }
  std::size_t n_locations() const { return locations_.size(); }
  std::size_t n_cases() const { return cases_.size(); }
  std::size_t covariate_dim() const { return covariate_dim_; }

  const std::vector<Location>& locations() const { return locations_; }
  const std::vector<Individual>& individuals() const { return individuals_; }
  const std::vector<Case>& cases() const { return cases_; }

  const Location& location(std::size_t a) const { return locations_[a]; }
  const Individual& individual(std::size_t i) const { return individuals_[i]; }
  const Case& case_at(std::size_t c) const { return cases_[c]; }

  std::optional<std::size_t> find_location(const LocationId& id) const;
  std::optional<std::size_t> find_case(const CaseId& id) const;
  std::optional<std::size_t> find_individual(const IndividualId& id) const;

  bool has_capacities() const { return has_capacities_; }

 private:
  std::vector<Location> locations_;
  std::vector<Individual> individuals_;
  std::vector<Case> cases_;
  std::unordered_map<std::string, std::size_t> location_index_;
  std::unordered_map<std::string, std::size_t> case_index_;
  std::unordered_map<std::string, std::size_t> individual_index_;
  std::size_t covariate_dim_ = 0;
  bool has_capacities_ = false;
};

// N x K table of outcome-model estimates mu_i(a), aligned with the dataset's
// individual and location orderings.
struct PredictionMatrix {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<double> values;  // row-major

  double at(std::size_t i, std::size_t a) const { return values[i * k + a]; }
  double& at(std::size_t i, std::size_t a) { return values[i * k + a]; }
};

// Case-level policy with the derived individual-level assignment.
struct PolicyAssignment {
  std::vector<std::size_t> case_location;        // per case
  std::vector<std::size_t> individual_location;  // per individual (g_i)
};

// N x K table of synthetic potential outcomes Y_i(a).
struct PotentialOutcomeTable {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::int8_t> values;  // row-major, entries in {0,1}

  int at(std::size_t i, std::size_t a) const { return values[i * k + a]; }
};

// Each case member inherits the case's location. Throws on an unassigned
// case or an unknown location id.
std::map<IndividualId, LocationId> derive_individual_assignment(
    const EvaluationDataset& dataset,
    const std::map<CaseId, LocationId>& case_assignment);

// Builds a validated policy from a case id -> location id map. When the
// dataset declares capacities and `enforce_capacities` is set, per-location
// assigned-individual counts must stay within them.
PolicyAssignment make_policy(const EvaluationDataset& dataset,
                             const std::map<CaseId, LocationId>& case_assignment,
                             bool enforce_capacities = true);

// Internal constructor for index-level case assignments (optimizers,
// pooling); performs the same capacity validation.
PolicyAssignment make_policy_from_indices(
    const EvaluationDataset& dataset,
    const std::vector<std::size_t>& case_location,
    bool enforce_capacities = true);

// Mean observed outcome (1/N) sum Y_i.
double observed_baseline(const EvaluationDataset& dataset);

// Checks Y_i(A_i) == observed Y_i for every individual.
void validate_table_against_dataset(const PotentialOutcomeTable& table,
                                    const EvaluationDataset& dataset);

}  // namespace opeval

#endif  // OPEVAL_DATASET_HPP
