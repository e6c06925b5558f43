#include "opeval/min_cost_flow.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace opeval {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

MinCostFlow::MinCostFlow(std::size_t node_count) : graph_(node_count) {}

std::size_t MinCostFlow::add_arc(std::size_t from, std::size_t to,
                                 long long capacity, double unit_cost) {
  Arc forward{to, graph_[to].size(), capacity, unit_cost};
  Arc backward{from, graph_[from].size(), 0, -unit_cost};
  graph_[from].push_back(forward);
  graph_[to].push_back(backward);
  arc_ref_.emplace_back(from, graph_[from].size() - 1);
  arc_capacity_.push_back(capacity);
  return arc_ref_.size() - 1;
}

MinCostFlow::Outcome MinCostFlow::solve(std::size_t source, std::size_t sink,
                                        long long required) {
  const std::size_t n = graph_.size();
  std::vector<double> potential(n, 0.0);

  // Bellman-Ford over residual arcs with capacity left; handles the initial
  // negative costs. The assignment graphs here are DAGs, so this converges
  // in a handful of passes.
  {
    std::vector<double> dist(n, kInf);
    dist[source] = 0.0;
    bool changed = true;
    std::size_t pass = 0;
    while (changed && pass++ < n) {
      changed = false;
      for (std::size_t u = 0; u < n; ++u) {
        if (dist[u] == kInf) continue;
        for (const Arc& arc : graph_[u]) {
          if (arc.residual <= 0) continue;
          double nd = dist[u] + arc.cost;
          if (nd < dist[arc.to]) {
            dist[arc.to] = nd;
            changed = true;
          }
        }
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      potential[v] = dist[v] == kInf ? 0.0 : dist[v];
    }
  }

  Outcome out;
  std::vector<double> dist(n);
  std::vector<std::pair<std::size_t, std::size_t>> parent(n);  // node, arc idx
  std::vector<bool> done(n);

  while (out.flow < required) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), false);
    dist[source] = 0.0;
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
    queue.push({0.0, source});
    while (!queue.empty()) {
      auto [d, u] = queue.top();
      queue.pop();
      if (done[u]) continue;
      done[u] = true;
      for (std::size_t idx = 0; idx < graph_[u].size(); ++idx) {
        const Arc& arc = graph_[u][idx];
        if (arc.residual <= 0 || done[arc.to]) continue;
        // Rounding can push a reduced cost a hair below zero; clamp it.
        double rc = std::max(0.0, arc.cost + potential[u] - potential[arc.to]);
        double nd = dist[u] + rc;
        if (nd < dist[arc.to]) {
          dist[arc.to] = nd;
          parent[arc.to] = {u, idx};
          queue.push({nd, arc.to});
        }
      }
    }
    if (dist[sink] == kInf) break;  // no augmenting path left

    for (std::size_t v = 0; v < n; ++v) {
      if (dist[v] != kInf) potential[v] += dist[v];
    }

    long long bottleneck = required - out.flow;
    for (std::size_t v = sink; v != source;) {
      auto [u, idx] = parent[v];
      bottleneck = std::min(bottleneck, graph_[u][idx].residual);
      v = u;
    }
    for (std::size_t v = sink; v != source;) {
      auto [u, idx] = parent[v];
      Arc& arc = graph_[u][idx];
      arc.residual -= bottleneck;
      graph_[arc.to][arc.rev].residual += bottleneck;
      out.cost += static_cast<double>(bottleneck) * arc.cost;
      v = u;
    }
    out.flow += bottleneck;
  }
  return out;
}

long long MinCostFlow::arc_flow(std::size_t arc_id) const {
  auto [node, offset] = arc_ref_[arc_id];
  return arc_capacity_[arc_id] - graph_[node][offset].residual;
}

}  // namespace opeval
