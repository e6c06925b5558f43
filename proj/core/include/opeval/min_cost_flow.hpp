#ifndef OPEVAL_MIN_COST_FLOW_HPP
#define OPEVAL_MIN_COST_FLOW_HPP

#include <cstddef>
#include <utility>
#include <vector>

namespace opeval {

// Successive-shortest-path min-cost flow with real-valued arc costs.
// Potentials keep reduced costs nonnegative so Dijkstra drives each
// augmentation; the first potential vector comes from Bellman-Ford, which
// admits negative arc costs (reward arcs enter negated). Integer capacities
// give integer flows. Iteration order is fixed by arc insertion order and
// Dijkstra breaks distance ties toward the lower node index, so results are
// deterministic.
class MinCostFlow {
 public:
  explicit MinCostFlow(std::size_t node_count);

  // Returns an arc id usable with arc_flow().
  std::size_t add_arc(std::size_t from, std::size_t to, long long capacity,
                      double unit_cost);

  struct Outcome {
    long long flow = 0;  // units actually sent (< required means infeasible)
    double cost = 0.0;
  };

  // Sends up to `required` units at minimum cost.
  Outcome solve(std::size_t source, std::size_t sink, long long required);

  long long arc_flow(std::size_t arc_id) const;

 private:
  struct Arc {
    std::size_t to;
    std::size_t rev;  // index of the reverse arc in graph_[to]
    long long residual;
    double cost;
  };

  std::vector<std::vector<Arc>> graph_;
  std::vector<std::pair<std::size_t, std::size_t>> arc_ref_;  // node, offset
  std::vector<long long> arc_capacity_;
};

}  // namespace opeval

#endif  // OPEVAL_MIN_COST_FLOW_HPP
