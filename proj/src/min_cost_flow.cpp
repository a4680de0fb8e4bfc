#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>

#include "ecr/flowopt.hpp"

namespace ecr {

int FlowNetwork::add_node(long long supply, std::string label) {
  imbalance.push_back(supply);
  labels.push_back(std::move(label));
  return node_count() - 1;
}

int FlowNetwork::add_arc(int tail, int head, long long cap, long long cost) {
  if (tail < 0 || head < 0 || tail >= node_count() || head >= node_count())
    throw std::out_of_range("arc endpoint outside the network");
  if (cap < 0) throw std::invalid_argument("negative arc capacity");
  arcs.push_back({tail, head, cap, cost});
  return static_cast<int>(arcs.size()) - 1;
}

void FlowNetwork::dump(std::ostream& out) const {
  out << "nodes " << node_count() << '\n';
  for (int v = 0; v < node_count(); ++v)
    out << "n " << v << ' ' << imbalance[v] << ' ' << (labels[v].empty() ? "-" : labels[v]) << '\n';
  out << "arcs " << arcs.size() << '\n';
  for (size_t i = 0; i < arcs.size(); ++i) {
    const auto& a = arcs[i];
    out << "a " << i << ' ' << a.tail << ' ' << a.head << ' ';
    if (a.cap >= kUnbounded)
      out << "inf";
    else
      out << a.cap;
    out << ' ' << a.cost << '\n';
  }
}

namespace {

constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

// Residual graph in paired-edge form: edge e and e ^ 1 are mutual reverses.
struct Residual {
  std::vector<int> to;
  std::vector<long long> cap;
  std::vector<long long> cost;
  std::vector<int> first;  // CSR offsets into `order`
  std::vector<int> order;

  int tail(int e) const { return to[e ^ 1]; }

  void add(int u, int v, long long c, long long w) {
    to.push_back(v);
    cap.push_back(c);
    cost.push_back(w);
    to.push_back(u);
    cap.push_back(0);
    cost.push_back(-w);
  }

  void index(int n) {
    first.assign(n + 1, 0);
    for (size_t e = 0; e < to.size(); ++e) ++first[tail(static_cast<int>(e)) + 1];
    for (int v = 0; v < n; ++v) first[v + 1] += first[v];
    order.resize(to.size());
    std::vector<int> fill(first.begin(), first.end() - 1);
    for (size_t e = 0; e < to.size(); ++e) order[fill[tail(static_cast<int>(e))]++] = static_cast<int>(e);
  }
};

// Label-correcting pass from a virtual root joined to every node at cost 0.
std::vector<long long> initial_potentials(const Residual& g, int n) {
  std::vector<long long> pi(n, 0);
  std::vector<int> hops(n, 0);
  std::vector<char> queued(n, 1);
  std::deque<int> queue(n);
  std::iota(queue.begin(), queue.end(), 0);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    queued[u] = 0;
    for (int i = g.first[u]; i < g.first[u + 1]; ++i) {
      const int e = g.order[i];
      if (g.cap[e] <= 0) continue;
      const int v = g.to[e];
      if (pi[u] + g.cost[e] < pi[v]) {
        pi[v] = pi[u] + g.cost[e];
        hops[v] = hops[u] + 1;
        if (hops[v] > n) throw NegativeCycleError("flow network contains a negative-cost cycle");
        if (!queued[v]) {
          queued[v] = 1;
          queue.push_back(v);
        }
      }
    }
  }
  return pi;
}

}  // namespace

FlowSolution solve_min_cost_flow(const FlowNetwork& net) {
  const int n0 = net.node_count();
  const long long total = std::accumulate(net.imbalance.begin(), net.imbalance.end(), 0LL);
  if (total != 0)
    throw std::invalid_argument("imbalances sum to " + std::to_string(total) + ", expected 0");

  const int S = n0, T = n0 + 1, n = n0 + 2;
  Residual g;
  for (const auto& a : net.arcs) g.add(a.tail, a.head, a.cap, a.cost);
  long long required = 0;
  for (int v = 0; v < n0; ++v) {
    if (net.imbalance[v] > 0) {
      g.add(S, v, net.imbalance[v], 0);
      required += net.imbalance[v];
    } else if (net.imbalance[v] < 0) {
      g.add(v, T, -net.imbalance[v], 0);
    }
  }
  g.index(n);

  std::vector<long long> pi = initial_potentials(g, n);
  auto reduced = [&](int e) { return g.cost[e] + pi[g.tail(e)] - pi[g.to[e]]; };

  long long sent = 0;
  std::vector<long long> dist(n);
  std::vector<int> level(n), next(n);
  using Item = std::pair<long long, int>;
  while (sent < required) {
    // Dijkstra on reduced costs; the heap orders equal distances by node index.
    std::fill(dist.begin(), dist.end(), kInf);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[S] = 0;
    heap.push({0, S});
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d != dist[u]) continue;
      for (int i = g.first[u]; i < g.first[u + 1]; ++i) {
        const int e = g.order[i];
        if (g.cap[e] <= 0) continue;
        const int v = g.to[e];
        const long long nd = d + reduced(e);
        if (nd < dist[v]) {
          dist[v] = nd;
          heap.push({nd, v});
        }
      }
    }
    if (dist[T] >= kInf) break;
    for (int v = 0; v < n; ++v) pi[v] += std::min(dist[v], dist[T]);

    // Blocking flows on the zero-reduced-cost subgraph until T is cut off.
    for (;;) {
      std::fill(level.begin(), level.end(), -1);
      std::deque<int> bfs{S};
      level[S] = 0;
      while (!bfs.empty()) {
        const int u = bfs.front();
        bfs.pop_front();
        for (int i = g.first[u]; i < g.first[u + 1]; ++i) {
          const int e = g.order[i];
          const int v = g.to[e];
          if (g.cap[e] > 0 && level[v] < 0 && reduced(e) == 0) {
            level[v] = level[u] + 1;
            bfs.push_back(v);
          }
        }
      }
      if (level[T] < 0) break;
      for (int v = 0; v < n; ++v) next[v] = g.first[v];
      std::vector<int> path;
      int u = S;
      for (;;) {
        if (u == T) {
          long long f = kInf;
          for (int e : path) f = std::min(f, g.cap[e]);
          for (int e : path) {
            g.cap[e] -= f;
            g.cap[e ^ 1] += f;
          }
          sent += f;
          path.clear();
          u = S;
          continue;
        }
        bool advanced = false;
        for (; next[u] < g.first[u + 1]; ++next[u]) {
          const int e = g.order[next[u]];
          const int v = g.to[e];
          if (g.cap[e] > 0 && level[v] == level[u] + 1 && reduced(e) == 0) {
            path.push_back(e);
            u = v;
            advanced = true;
            break;
          }
        }
        if (advanced) continue;
        level[u] = -1;  // dead end
        if (path.empty()) break;
        u = g.tail(path.back());
        path.pop_back();
      }
    }
  }
  if (sent < required)
    throw InfeasibleFlowError("only " + std::to_string(sent) + " of " + std::to_string(required) +
                              " units can be routed");

  FlowSolution sol;
  sol.flow.resize(net.arcs.size());
  for (size_t i = 0; i < net.arcs.size(); ++i) {
    sol.flow[i] = g.cap[2 * i + 1];
    sol.cost += sol.flow[i] * net.arcs[i].cost;
  }
  sol.potential.assign(pi.begin(), pi.begin() + n0);
  return sol;
}

bool check_complementary_slackness(const FlowNetwork& net, const FlowSolution& sol) {
  for (size_t i = 0; i < net.arcs.size(); ++i) {
    const auto& a = net.arcs[i];
    const long long f = sol.flow[i];
    if (f < 0 || f > a.cap) return false;
    const long long rc = a.cost + sol.potential[a.tail] - sol.potential[a.head];
    if (rc > 0 && f != 0) return false;
    if (rc < 0 && f != a.cap) return false;
  }
  std::vector<long long> balance = net.imbalance;
  for (size_t i = 0; i < net.arcs.size(); ++i) {
    balance[net.arcs[i].tail] -= sol.flow[i];
    balance[net.arcs[i].head] += sol.flow[i];
  }
  return std::all_of(balance.begin(), balance.end(), [](long long b) { return b == 0; });
}

}  // namespace ecr
