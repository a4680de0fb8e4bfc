#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "ecr/flowopt.hpp"

namespace ecr::testing {

/// Small random network: up to 6 nodes, up to `max_arcs` arcs with capacity
/// 0..3 and cost -2..6, imbalances summing to zero.
inline FlowNetwork random_flow_instance(std::mt19937_64& rng, int max_arcs = 12) {
  std::uniform_int_distribution<int> nodes_d(2, 6), cap_d(0, 3), cost_d(-2, 6), sup_d(0, 3);
  const int n = nodes_d(rng);
  std::uniform_int_distribution<int> arcs_d(1, max_arcs), node_d(0, n - 1);
  FlowNetwork net;
  for (int i = 0; i < n; ++i) net.add_node();
  const int m = arcs_d(rng);
  for (int a = 0; a < m; ++a) {
    int t = node_d(rng), h = node_d(rng);
    while (h == t) h = node_d(rng);
    net.add_arc(t, h, cap_d(rng), cost_d(rng));
  }
  const int pairs = sup_d(rng);
  for (int k = 0; k < pairs; ++k) {
    const int s = node_d(rng), d = node_d(rng);
    net.imbalance[s] += 1;
    net.imbalance[d] -= 1;
  }
  return net;
}

/// Floyd-Warshall over arcs with positive capacity.
inline bool has_negative_cycle(const FlowNetwork& net) {
  const int n = net.node_count();
  const long long inf = std::numeric_limits<long long>::max() / 4;
  std::vector<std::vector<long long>> d(n, std::vector<long long>(n, inf));
  for (int i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& a : net.arcs)
    if (a.cap > 0) d[a.tail][a.head] = std::min(d[a.tail][a.head], a.cost);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (d[i][k] < inf && d[k][j] < inf) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  for (int i = 0; i < n; ++i)
    if (d[i][i] < 0) return true;
  return false;
}

/// Exhaustive search over integer arc flows; nullopt when no flow balances.
inline std::optional<long long> enumerate_min_cost(const FlowNetwork& net) {
  const int n = net.node_count(), m = static_cast<int>(net.arcs.size());
  // For pruning: capacity still unassigned into and out of each node.
  std::vector<long long> rem_in(n, 0), rem_out(n, 0), excess(n, 0);
  for (const auto& a : net.arcs) {
    rem_out[a.tail] += a.cap;
    rem_in[a.head] += a.cap;
  }
  std::optional<long long> best;
  auto feasible = [&](int v) {
    const long long need = net.imbalance[v] - excess[v];  // more outflow required
    return need <= rem_out[v] && -need <= rem_in[v];
  };
  auto rec = [&](auto&& self, int i, long long cost) -> void {
    if (i == m) {
      for (int v = 0; v < n; ++v)
        if (excess[v] != net.imbalance[v]) return;
      if (!best || cost < *best) best = cost;
      return;
    }
    const auto& a = net.arcs[i];
    rem_out[a.tail] -= a.cap;
    rem_in[a.head] -= a.cap;
    for (long long f = 0; f <= a.cap; ++f) {
      excess[a.tail] += f;
      excess[a.head] -= f;
      if (feasible(a.tail) && feasible(a.head)) self(self, i + 1, cost + f * a.cost);
      excess[a.tail] -= f;
      excess[a.head] += f;
    }
    rem_out[a.tail] += a.cap;
    rem_in[a.head] += a.cap;
  };
  bool ok = true;
  for (int v = 0; v < n; ++v) ok = ok && feasible(v);
  if (ok) rec(rec, 0, 0);
  return best;
}

/// Outcome of comparing the solver with enumeration on one instance.
enum class FlowCheck { match, mismatch, bad_slackness };

inline FlowCheck check_against_enumeration(const FlowNetwork& net) {
  if (has_negative_cycle(net)) {
    try {
      solve_min_cost_flow(net);
    } catch (const NegativeCycleError&) {
      return FlowCheck::match;
    }
    return FlowCheck::mismatch;
  }
  const auto expect = enumerate_min_cost(net);
  try {
    const auto sol = solve_min_cost_flow(net);
    if (!expect || sol.cost != *expect) return FlowCheck::mismatch;
    long long cost = 0;
    std::vector<long long> bal(net.node_count(), 0);
    for (size_t a = 0; a < net.arcs.size(); ++a) {
      const auto& arc = net.arcs[a];
      if (sol.flow[a] < 0 || sol.flow[a] > arc.cap) return FlowCheck::mismatch;
      cost += sol.flow[a] * arc.cost;
      bal[arc.tail] += sol.flow[a];
      bal[arc.head] -= sol.flow[a];
    }
    if (cost != sol.cost || bal != net.imbalance) return FlowCheck::mismatch;
    return check_complementary_slackness(net, sol) ? FlowCheck::match : FlowCheck::bad_slackness;
  } catch (const InfeasibleFlowError&) {
    return expect ? FlowCheck::mismatch : FlowCheck::match;
  }
}

}  // namespace ecr::testing

namespace ecr::testing {

/// Cheapest plan for a single-vessel world by enumerating every integer
/// transfer at every planned call. Port stock within the gap between two call
/// days is pooled, so demand there is met greedily against the tightest later
/// carry; unmet demand costs big_m per container, each transfer costs 1.
inline long long brute_force_plan_cost(const World& world, const SndForecast& fc,
                                       const PlanningInput& in) {
  const auto& cfg = world.config;
  const size_t P = cfg.ports.size();
  if (cfg.vessels.size() != 1) throw std::invalid_argument("oracle handles one vessel");
  struct Call {
    int port, node;
    long room;
  };
  std::vector<std::vector<int>> days(P);
  std::vector<const CallEvent*> planned;
  const auto& ve = world.timetable.vessel_events[0];
  for (size_t k = in.vessel_first_event[0]; k < ve.size() && ve[k].day < in.end_day; ++k) {
    planned.push_back(&ve[k]);
    days[ve[k].port].push_back(ve[k].day);
  }
  for (auto& d : days) {
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
  }
  auto count_days = [&](int p, auto pred) {
    return static_cast<int>(std::count_if(days[p].begin(), days[p].end(), pred));
  };
  std::vector<Call> calls;
  for (size_t j = 0; j < planned.size(); ++j) {
    const auto& c = *planned[j];
    const long room = std::max(0L, cfg.vessels[0].capacity - fc.laden_load[0][in.vessel_first_event[0] + j]);
    calls.push_back({c.port, count_days(c.port, [&](int d) { return d <= c.day; }), room});
  }
  std::vector<std::vector<long long>> demand(P), supply(P);
  long long total_demand = 0;
  for (size_t p = 0; p < P; ++p) {
    demand[p].assign(days[p].size() + 1, 0);
    supply[p].assign(days[p].size() + 1, 0);
    for (int d = in.start_day; d < in.end_day; ++d) {
      demand[p][count_days(p, [&](int x) { return x < d; })] += fc.demand[p][d];
      supply[p][count_days(p, [&](int x) { return x <= d; })] += fc.supply[p][d];
    }
    if (!in.reserve.empty()) demand[p][0] += in.reserve[p];
    for (auto x : demand[p]) total_demand += x;
  }

  std::vector<long> x(calls.size(), 0);
  long long best = std::numeric_limits<long long>::max();
  auto evaluate = [&]() {
    long long served = 0, moves = 0;
    for (long v : x) moves += std::abs(v);
    for (size_t p = 0; p < P; ++p) {
      const size_t K = demand[p].size();
      std::vector<long long> a(K);
      long long run = in.port_stock[p];
      for (size_t k = 0; k < K; ++k) {
        run += supply[p][k];
        for (size_t j = 0; j < calls.size(); ++j)
          if (calls[j].port == static_cast<int>(p) && calls[j].node == static_cast<int>(k)) run -= x[j];
        a[k] = run;
      }
      std::vector<long long> sufmin(K);
      for (size_t k = K; k-- > 0;) sufmin[k] = std::min(a[k], k + 1 < K ? sufmin[k + 1] : a[k]);
      if (sufmin[0] < 0) return;
      long long prefix = 0;
      for (size_t k = 0; k < K; ++k) {
        const long long s = std::min(demand[p][k], sufmin[k] - prefix);
        prefix += s;
      }
      served += prefix;
    }
    best = std::min(best, moves + in.big_m * (total_demand - served));
  };
  auto rec = [&](auto&& self, size_t j, long aboard) -> void {
    if (j == calls.size()) {
      evaluate();
      return;
    }
    for (long after = 0; after <= calls[j].room; ++after) {
      x[j] = after - aboard;
      self(self, j + 1, after);
    }
  };
  rec(rec, 0, in.vessel_empties[0]);
  return best;
}

}  // namespace ecr::testing
