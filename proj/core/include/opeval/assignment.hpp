#ifndef OPEVAL_ASSIGNMENT_HPP
#define OPEVAL_ASSIGNMENT_HPP

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "opeval/dataset.hpp"

namespace opeval {

// Case-level optimization input: reward of sending case c to location a is
// the summed member prediction, capacity is counted in individuals, and
// cases are atomic (a family is never split).
struct AssignmentProblem {
  std::size_t n_cases = 0;
  std::size_t n_locations = 0;
  std::vector<double> case_rewards;       // n_cases x n_locations, row-major
  std::vector<long long> capacities;      // per location
  std::vector<long long> case_sizes;      // per case
  std::vector<std::size_t> arrival_order; // optional; empty = case order

  double reward(std::size_t c, std::size_t a) const {
    return case_rewards[c * n_locations + a];
  }
};

// Rewards from predictions; capacities from the dataset's declared values
// where present, otherwise historical per-location individual counts (the
// counterfactual policy then redistributes the same load).
AssignmentProblem build_assignment_problem(const EvaluationDataset& dataset,
                                           const PredictionMatrix& predictions);

// Total reward of a complete case assignment, summed in case order.
double assignment_total_reward(const AssignmentProblem& problem,
                               std::span<const std::size_t> case_location);

// Exact capacity-constrained maximizer of the total case reward. Solved as
// a transportation relaxation by min-cost flow (cases may fractionally
// split), plus a branch step that pins split cases until the solution is
// atomic; with unit case sizes the relaxation is already integral. Ties are
// resolved deterministically, preferring lower location then case ids.
PolicyAssignment offline_assign(const EvaluationDataset& dataset,
                                const AssignmentProblem& problem);

// Everything an online rule may look at when a case arrives.
struct OnlineDecision {
  std::size_t arrival_index;
  std::size_t case_index;
  long long case_size;
  std::span<const double> rewards;             // this case's reward row
  std::span<const long long> remaining_capacity;
};

// Returns the chosen location; it must still have room for the case.
using OnlineStrategy = std::function<std::size_t(const OnlineDecision&)>;

// Built-in rule: feasible location with the highest case reward at the
// moment of arrival, ties toward the lower location id.
OnlineStrategy greedy_online_strategy();

PolicyAssignment online_assign(const EvaluationDataset& dataset,
                               const AssignmentProblem& problem,
                               const OnlineStrategy& strategy = greedy_online_strategy());

// Arrival order for online assignment read off a covariate column: the
// value must be constant within each case; cases are ordered by ascending
// value, ties keeping case input order.
std::vector<std::size_t> arrival_order_by_covariate(
    const EvaluationDataset& dataset, std::size_t covariate_index);

}  // namespace opeval

#endif  // OPEVAL_ASSIGNMENT_HPP
