#include "obsblock/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <string>

#include <fmt/format.h>

#include "obsblock/error.hpp"

namespace obsblock {

WeightedDigraph::WeightedDigraph(int node_count, int order, std::vector<Edge> edges)
    : node_count_(node_count), order_(order), edges_(std::move(edges)) {
  if (node_count_ < 1) throw Error(ErrorKind::InvalidInput, "graph needs at least one node");
  if (order_ < 1) throw Error(ErrorKind::InvalidInput, "network order must be positive");
  std::set<std::pair<int, int>> seen;
  for (const auto& e : edges_) {
    if (e.from < 1 || e.from > node_count_ || e.to < 1 || e.to > node_count_) {
      throw Error(ErrorKind::InvalidInput,
                  fmt::format("edge ({},{}) references a node outside 1..{}", e.from, e.to,
                              node_count_));
    }
    if (e.from == e.to) {
      throw Error(ErrorKind::InvalidInput, fmt::format("self-loop at node {}", e.from));
    }
    if (!seen.emplace(e.from, e.to).second) {
      throw Error(ErrorKind::InvalidInput,
                  fmt::format("duplicate edge ({},{})", e.from, e.to));
    }
    if (static_cast<int>(e.weights.size()) != order_) {
      throw Error(ErrorKind::OrderMismatch,
                  fmt::format("edge ({},{}) carries {} weights, order is {}", e.from, e.to,
                              e.weights.size(), order_));
    }
    for (double w : e.weights) {
      if (!std::isfinite(w) || w <= 0.0) {
        throw Error(ErrorKind::InvalidInput,
                    fmt::format("edge ({},{}) has non-positive weight {}", e.from, e.to, w));
      }
    }
  }
}

std::vector<std::vector<int>> WeightedDigraph::undirected_adjacency() const {
  std::vector<std::vector<int>> adj(node_count_);
  for (const auto& e : edges_) {
    adj[e.from - 1].push_back(e.to - 1);
    adj[e.to - 1].push_back(e.from - 1);
  }
  for (auto& nb : adj) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return adj;
}

void check_order(const WeightedDigraph& g, int k) {
  if (k < 0 || k >= g.order()) {
    throw Error(ErrorKind::OrderMismatch,
                fmt::format("derivative order {} outside 0..{}", k, g.order() - 1));
  }
}

namespace {

int count_reachable(const std::vector<std::vector<int>>& adj, int start) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<int> stack{start};
  seen[start] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count;
}

// Dinic max-flow on a small integer-capacity network.
class FlowNetwork {
 public:
  explicit FlowNetwork(int nodes) : head_(nodes, -1), level_(nodes), iter_(nodes) {}

  void add_edge(int u, int v, int cap) {
    arcs_.push_back({v, head_[u], cap});
    head_[u] = static_cast<int>(arcs_.size()) - 1;
    arcs_.push_back({u, head_[v], 0});
    head_[v] = static_cast<int>(arcs_.size()) - 1;
  }

  int max_flow(int s, int t, int limit) {
    int flow = 0;
    while (flow < limit && bfs(s, t)) {
      iter_ = head_;
      while (int pushed = dfs(s, t, limit - flow)) {
        flow += pushed;
        if (flow >= limit) break;
      }
    }
    return flow;
  }

 private:
  struct Arc {
    int to;
    int next;
    int cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int a = head_[u]; a != -1; a = arcs_[a].next) {
        if (arcs_[a].cap > 0 && level_[arcs_[a].to] < 0) {
          level_[arcs_[a].to] = level_[u] + 1;
          q.push(arcs_[a].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  int dfs(int u, int t, int pushed) {
    if (u == t) return pushed;
    for (int& a = iter_[u]; a != -1; a = arcs_[a].next) {
      Arc& arc = arcs_[a];
      if (arc.cap > 0 && level_[arc.to] == level_[u] + 1) {
        if (int got = dfs(arc.to, t, std::min(pushed, arc.cap))) {
          arc.cap -= got;
          arcs_[a ^ 1].cap += got;
          return got;
        }
      }
    }
    return 0;
  }

  std::vector<Arc> arcs_;
  std::vector<int> head_;
  std::vector<int> level_;
  std::vector<int> iter_;
};

enum class NodeRole : char { Cuttable, Fixed, Removed };

// Minimum number of Cuttable nodes separating sources from sinks, or `inf`
// when only Fixed nodes stand in the way.
int separator_size(const std::vector<std::vector<int>>& adj, const std::vector<NodeRole>& role,
                   const std::vector<int>& sources, const std::vector<int>& sinks, int inf) {
  const int n = static_cast<int>(adj.size());
  const int s = 2 * n;
  const int t = 2 * n + 1;
  FlowNetwork net(2 * n + 2);
  for (int v = 0; v < n; ++v) {
    if (role[v] == NodeRole::Removed) continue;
    net.add_edge(2 * v, 2 * v + 1, role[v] == NodeRole::Cuttable ? 1 : inf);
    for (int w : adj[v]) {
      if (role[w] != NodeRole::Removed) net.add_edge(2 * v + 1, 2 * w, inf);
    }
  }
  for (int a : sources) {
    if (role[a] != NodeRole::Removed) net.add_edge(s, 2 * a, inf);
  }
  for (int m : sinks) {
    if (role[m] != NodeRole::Removed) net.add_edge(2 * m + 1, t, inf);
  }
  return net.max_flow(s, t, inf);
}

std::vector<int> to_zero_based(const std::vector<int>& ids, int n, const char* what) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id < 1 || id > n) {
      throw Error(ErrorKind::InvalidInput, fmt::format("{} node {} outside 1..{}", what, id, n));
    }
    out.push_back(id - 1);
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw Error(ErrorKind::InvalidInput, fmt::format("duplicate {} node", what));
  }
  return out;
}

void check_disjoint(const std::vector<int>& actuation, const std::vector<int>& measurement) {
  for (int a : actuation) {
    if (std::find(measurement.begin(), measurement.end(), a) != measurement.end()) {
      throw Error(ErrorKind::InvalidInput,
                  fmt::format("node {} is both actuation and measurement", a));
    }
  }
}

}  // namespace

bool is_strongly_connected(const WeightedDigraph& g) {
  const int n = g.size();
  std::vector<std::vector<int>> fwd(n), bwd(n);
  for (const auto& e : g.edges()) {
    fwd[e.from - 1].push_back(e.to - 1);
    bwd[e.to - 1].push_back(e.from - 1);
  }
  return count_reachable(fwd, 0) == n && count_reachable(bwd, 0) == n;
}

CutsetPlan plan_from_cut(const WeightedDigraph& g, const std::vector<int>& actuation,
                         const std::vector<int>& measurement, std::vector<int> vcut) {
  const int n = g.size();
  check_disjoint(actuation, measurement);
  const auto cut0 = to_zero_based(vcut, n, "cut");
  const auto meas0 = to_zero_based(measurement, n, "measurement");
  std::vector<char> in_cut(n, 0);
  for (int c : cut0) in_cut[c] = 1;

  // V2: everything reachable from uncut measurement nodes once the cut is removed.
  const auto adj = g.undirected_adjacency();
  std::vector<char> side2(n, 0);
  std::vector<int> stack;
  for (int m : meas0) {
    if (!in_cut[m] && !side2[m]) {
      side2[m] = 1;
      stack.push_back(m);
    }
  }
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int w : adj[u]) {
      if (!in_cut[w] && !side2[w]) {
        side2[w] = 1;
        stack.push_back(w);
      }
    }
  }

  CutsetPlan plan;
  for (int v = 0; v < n; ++v) {
    if (in_cut[v]) {
      plan.vcut.push_back(v + 1);
    } else if (side2[v]) {
      plan.v2.push_back(v + 1);
    } else {
      plan.v1.push_back(v + 1);
    }
  }
  for (const auto* part : {&plan.v1, &plan.vcut, &plan.v2}) {
    for (int id : *part) plan.permutation.push_back(id - 1);
  }
  validate_plan(g, plan, actuation, measurement);
  return plan;
}

CutsetPlan min_vertex_cut(const WeightedDigraph& g, const std::vector<int>& actuation,
                          const std::vector<int>& measurement) {
  const int n = g.size();
  check_disjoint(actuation, measurement);
  const auto act0 = to_zero_based(actuation, n, "actuation");
  const auto meas0 = to_zero_based(measurement, n, "measurement");
  const auto adj = g.undirected_adjacency();
  const int inf = n + 1;

  std::vector<NodeRole> role(n, NodeRole::Cuttable);
  for (int a : act0) role[a] = NodeRole::Fixed;

  const int k = separator_size(adj, role, act0, meas0, inf);
  if (k >= inf) {
    throw Error(ErrorKind::InvalidInput, "no vertex cut separates actuation from measurement");
  }

  // Greedy lexicographic search: commit v if some minimum cut still contains
  // the chosen prefix plus v and no smaller uncommitted node.
  std::vector<int> chosen;
  for (int v = 0; v < n && static_cast<int>(chosen.size()) < k; ++v) {
    if (role[v] != NodeRole::Cuttable) continue;
    role[v] = NodeRole::Removed;
    const int rest = separator_size(adj, role, act0, meas0, inf);
    if (rest == k - static_cast<int>(chosen.size()) - 1) {
      chosen.push_back(v + 1);
    } else {
      role[v] = NodeRole::Fixed;
    }
  }
  return plan_from_cut(g, actuation, measurement, chosen);
}

void validate_plan(const WeightedDigraph& g, const CutsetPlan& plan,
                   const std::vector<int>& actuation, const std::vector<int>& measurement) {
  const int n = g.size();
  std::vector<int> part(n, -1);
  int index = 0;
  for (const auto* set : {&plan.v1, &plan.vcut, &plan.v2}) {
    for (int id : *set) {
      if (id < 1 || id > n || part[id - 1] != -1) {
        throw Error(ErrorKind::InvalidInput, fmt::format("plan lists node {} twice or out of range", id));
      }
      part[id - 1] = index;
    }
    ++index;
  }
  if (std::count(part.begin(), part.end(), -1) != 0) {
    throw Error(ErrorKind::InvalidInput, "plan does not cover every node");
  }
  for (int m : measurement) {
    if (part[m - 1] == 0) {
      throw Error(ErrorKind::InvalidInput, fmt::format("measurement node {} lies in V1", m));
    }
  }
  for (int a : actuation) {
    if (part[a - 1] == 2) {
      throw Error(ErrorKind::InvalidInput, fmt::format("actuation node {} lies in V2", a));
    }
  }
  for (const auto& e : g.edges()) {
    const int pa = part[e.from - 1];
    const int pb = part[e.to - 1];
    if ((pa == 0 && pb == 2) || (pa == 2 && pb == 0)) {
      throw Error(ErrorKind::InvalidInput,
                  fmt::format("edge ({},{}) crosses between V1 and V2", e.from, e.to));
    }
  }
  if (plan.permutation.size() != static_cast<size_t>(n)) {
    throw Error(ErrorKind::InvalidInput, "plan permutation has wrong length");
  }
  size_t pos = 0;
  for (const auto* set : {&plan.v1, &plan.vcut, &plan.v2}) {
    for (int id : *set) {
      if (plan.permutation[pos++] != id - 1) {
        throw Error(ErrorKind::InvalidInput, "plan permutation does not follow V1, Vcut, V2");
      }
    }
  }
}

}  // namespace obsblock
