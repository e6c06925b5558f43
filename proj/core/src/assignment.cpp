#include "opeval/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "opeval/error.hpp"
#include "opeval/min_cost_flow.hpp"

namespace opeval {

namespace {

constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();

void validate_problem(const AssignmentProblem& problem) {
  if (problem.case_rewards.size() != problem.n_cases * problem.n_locations) {
    fail(ErrorClass::kValidation, "assignment reward table has wrong shape");
  }
  for (double r : problem.case_rewards) {
    if (!std::isfinite(r)) {
      fail(ErrorClass::kValidation, "assignment rewards must be finite");
    }
  }
  long long total_size = 0;
  for (long long s : problem.case_sizes) total_size += s;
  long long total_capacity = 0;
  for (long long c : problem.capacities) total_capacity += c;
  if (total_capacity < total_size) {
    fail(ErrorClass::kInfeasible,
         "total capacity " + std::to_string(total_capacity) +
             " is below the population size " + std::to_string(total_size));
  }
}

// Transportation relaxation under partial fixing: case c supplies size_c
// units, arc (c,a) carries per-unit reward reward(c,a)/size_c, locations cap
// the inflow. A fixed case keeps only its pinned arc. Costs are negated
// rewards shifted to be nonpositive.
struct Relaxation {
  bool feasible = false;
  double value = 0.0;                    // max total reward of the relaxation
  std::vector<std::size_t> whole_case;   // location per case, kUnset if split
  std::size_t first_split = kUnset;
};

Relaxation solve_relaxation(const AssignmentProblem& problem,
                            const std::vector<std::size_t>& fixed) {
  const std::size_t c_count = problem.n_cases;
  const std::size_t k = problem.n_locations;
  const std::size_t source = 0;
  const std::size_t sink = 1 + c_count + k;
  MinCostFlow flow(2 + c_count + k);

  long long total_size = 0;
  for (std::size_t c = 0; c < c_count; ++c) {
    flow.add_arc(source, 1 + c, problem.case_sizes[c], 0.0);
    total_size += problem.case_sizes[c];
  }
  std::vector<std::size_t> case_arc(c_count * k, kUnset);
  for (std::size_t c = 0; c < c_count; ++c) {
    const double inv_size = 1.0 / static_cast<double>(problem.case_sizes[c]);
    for (std::size_t a = 0; a < k; ++a) {
      if (fixed[c] != kUnset && fixed[c] != a) continue;
      case_arc[c * k + a] = flow.add_arc(1 + c, 1 + c_count + a,
                                         problem.case_sizes[c],
                                         -problem.reward(c, a) * inv_size);
    }
  }
  for (std::size_t a = 0; a < k; ++a) {
    flow.add_arc(1 + c_count + a, sink, problem.capacities[a], 0.0);
  }

  MinCostFlow::Outcome outcome = flow.solve(source, sink, total_size);
  Relaxation result;
  if (outcome.flow < total_size) return result;  // infeasible under fixing
  result.feasible = true;
  result.value = -outcome.cost;
  result.whole_case.assign(c_count, kUnset);
  for (std::size_t c = 0; c < c_count; ++c) {
    for (std::size_t a = 0; a < k; ++a) {
      std::size_t arc = case_arc[c * k + a];
      if (arc == kUnset) continue;
      long long f = flow.arc_flow(arc);
      if (f == problem.case_sizes[c]) {
        result.whole_case[c] = a;
        break;
      }
      if (f > 0) break;  // split case
    }
    if (result.whole_case[c] == kUnset && result.first_split == kUnset) {
      result.first_split = c;
    }
  }
  return result;
}

struct BranchSearch {
  const AssignmentProblem& problem;
  std::vector<std::size_t> best;
  double best_value = -std::numeric_limits<double>::infinity();
  bool found = false;

  // Rounding slack for the relaxation bound: a subtree is pruned only when
  // its bound sits below the incumbent by more than the worst plausible
  // floating-point error, so the exact optimum is never cut. Equal-valued
  // solutions never replace the incumbent, keeping the first one found in
  // the lower-location-first search order.
  static constexpr double kBoundSlack = 1e-9;

  void search(std::vector<std::size_t>& fixed) {
    Relaxation relax = solve_relaxation(problem, fixed);
    if (!relax.feasible) return;
    if (relax.first_split == kUnset) {
      // The relaxation itself is atomic, so it is optimal for this subtree.
      double value = assignment_total_reward(problem, relax.whole_case);
      if (!found || value > best_value) {
        found = true;
        best_value = value;
        best = relax.whole_case;
      }
      return;
    }
    if (found && relax.value + kBoundSlack <= best_value) return;
    const std::size_t c = relax.first_split;
    for (std::size_t a = 0; a < problem.n_locations; ++a) {
      fixed[c] = a;
      search(fixed);
      fixed[c] = kUnset;
    }
  }
};

}  // namespace

AssignmentProblem build_assignment_problem(const EvaluationDataset& dataset,
                                           const PredictionMatrix& predictions) {
  AssignmentProblem problem;
  problem.n_cases = dataset.n_cases();
  problem.n_locations = dataset.n_locations();
  problem.case_rewards.assign(problem.n_cases * problem.n_locations, 0.0);
  problem.case_sizes.resize(problem.n_cases);
  for (std::size_t c = 0; c < problem.n_cases; ++c) {
    const Case& cs = dataset.case_at(c);
    problem.case_sizes[c] = static_cast<long long>(cs.members.size());
    for (std::size_t a = 0; a < problem.n_locations; ++a) {
      double sum = 0.0;
      for (std::size_t i : cs.members) sum += predictions.at(i, a);
      problem.case_rewards[c * problem.n_locations + a] = sum;
    }
  }
  problem.capacities.assign(problem.n_locations, 0);
  for (std::size_t a = 0; a < problem.n_locations; ++a) {
    const auto& declared = dataset.location(a).capacity;
    if (declared) {
      problem.capacities[a] = *declared;
    } else {
      long long count = 0;
      for (const Individual& ind : dataset.individuals()) {
        if (ind.historical_location == a) ++count;
      }
      problem.capacities[a] = count;
    }
  }
  return problem;
}

double assignment_total_reward(const AssignmentProblem& problem,
                               std::span<const std::size_t> case_location) {
  double total = 0.0;
  for (std::size_t c = 0; c < problem.n_cases; ++c) {
    total += problem.reward(c, case_location[c]);
  }
  return total;
}

PolicyAssignment offline_assign(const EvaluationDataset& dataset,
                                const AssignmentProblem& problem) {
  validate_problem(problem);
  std::vector<std::size_t> fixed(problem.n_cases, kUnset);
  Relaxation root = solve_relaxation(problem, fixed);
  if (!root.feasible) {
    fail(ErrorClass::kInfeasible, "capacities cannot absorb every case");
  }
  std::vector<std::size_t> assignment;
  if (root.first_split == kUnset) {
    assignment = root.whole_case;
  } else {
    BranchSearch search{problem, {}};
    search.search(fixed);
    if (!search.found) {
      fail(ErrorClass::kInfeasible,
           "no feasible atomic assignment exists under these capacities");
    }
    assignment = search.best;
  }
  return make_policy_from_indices(dataset, assignment,
                                  /*enforce_capacities=*/false);
}

OnlineStrategy greedy_online_strategy() {
  return [](const OnlineDecision& decision) {
    std::size_t best = kUnset;
    double best_reward = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < decision.rewards.size(); ++a) {
      if (decision.remaining_capacity[a] < decision.case_size) continue;
      if (decision.rewards[a] > best_reward) {
        best_reward = decision.rewards[a];
        best = a;
      }
    }
    if (best == kUnset) {
      fail(ErrorClass::kInfeasible,
           "case " + std::to_string(decision.case_index) +
               " fits no remaining location");
    }
    return best;
  };
}

std::vector<std::size_t> arrival_order_by_covariate(
    const EvaluationDataset& dataset, std::size_t covariate_index) {
  if (covariate_index >= dataset.covariate_dim()) {
    fail(ErrorClass::kConfig, "arrival-order covariate index out of range");
  }
  std::vector<double> value(dataset.n_cases());
  for (std::size_t c = 0; c < dataset.n_cases(); ++c) {
    const Case& cs = dataset.case_at(c);
    value[c] = dataset.individual(cs.members.front()).covariates[covariate_index];
    for (std::size_t i : cs.members) {
      if (dataset.individual(i).covariates[covariate_index] != value[c]) {
        fail(ErrorClass::kValidation,
             "arrival-order column varies within case " + cs.id);
      }
    }
  }
  std::vector<std::size_t> order(dataset.n_cases());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) {
                     return value[x] < value[y];
                   });
  return order;
}

PolicyAssignment online_assign(const EvaluationDataset& dataset,
                               const AssignmentProblem& problem,
                               const OnlineStrategy& strategy) {
  validate_problem(problem);
  std::vector<std::size_t> order = problem.arrival_order;
  if (order.empty()) {
    order.resize(problem.n_cases);
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  if (order.size() != problem.n_cases) {
    fail(ErrorClass::kValidation, "arrival order does not cover every case");
  }
  std::vector<bool> seen(problem.n_cases, false);
  for (std::size_t c : order) {
    if (c >= problem.n_cases || seen[c]) {
      fail(ErrorClass::kValidation, "arrival order is not a permutation");
    }
    seen[c] = true;
  }

  std::vector<long long> remaining = problem.capacities;
  std::vector<std::size_t> assignment(problem.n_cases, kUnset);
  for (std::size_t t = 0; t < order.size(); ++t) {
    const std::size_t c = order[t];
    OnlineDecision decision{
        t, c, problem.case_sizes[c],
        std::span<const double>(problem.case_rewards.data() +
                                    c * problem.n_locations,
                                problem.n_locations),
        std::span<const long long>(remaining)};
    std::size_t a = strategy(decision);
    if (a >= problem.n_locations ||
        remaining[a] < problem.case_sizes[c]) {
      fail(ErrorClass::kInfeasible,
           "online strategy picked an infeasible location for case " +
               std::to_string(c));
    }
    remaining[a] -= problem.case_sizes[c];
    assignment[c] = a;
  }
  return make_policy_from_indices(dataset, assignment,
                                  /*enforce_capacities=*/false);
}

}  // namespace opeval
