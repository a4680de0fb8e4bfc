#include <algorithm>
#include <numeric>

#include "ecr/flowopt.hpp"

namespace ecr {

namespace {

// Index of the last node whose day is < bound (or <= bound when inclusive);
// 0 is the start node, node k + 1 carries days[k].
int attach(const std::vector<int>& days, int bound, bool inclusive) {
  const auto it = inclusive ? std::upper_bound(days.begin(), days.end(), bound)
                            : std::lower_bound(days.begin(), days.end(), bound);
  return static_cast<int>(it - days.begin());
}

}  // namespace

TimeExpandedNetwork build_time_expanded(const World& world, const SndForecast& forecast,
                                        const PlanningInput& in) {
  const auto& cfg = world.config;
  const auto& tt = world.timetable;
  const size_t P = cfg.ports.size(), V = cfg.vessels.size();
  if (forecast.demand.size() != P || forecast.supply.size() != P ||
      forecast.laden_load.size() != V)
    throw std::invalid_argument("forecast/timetable mismatch: entity counts differ");
  for (size_t v = 0; v < V; ++v)
    if (forecast.laden_load[v].size() != tt.vessel_events[v].size())
      throw std::invalid_argument("forecast/timetable mismatch: call counts differ for vessel " +
                                  cfg.vessels[v].id);
  if (in.end_day > forecast.horizon || in.start_day < 0 || in.start_day > in.end_day)
    throw std::invalid_argument("planning window outside the forecast horizon");
  if (in.port_stock.size() != P || in.vessel_empties.size() != V ||
      in.vessel_first_event.size() != V || (!in.reserve.empty() && in.reserve.size() != P))
    throw std::invalid_argument("planning input sizes do not match the scenario");

  // Planned calls per vessel and the distinct call days per port.
  std::vector<std::pair<int, int>> planned(V);  // [first, last) event index
  std::vector<std::vector<int>> port_days(P);
  for (size_t v = 0; v < V; ++v) {
    const auto& ve = tt.vessel_events[v];
    int k = std::max(0, in.vessel_first_event[v]), first = k;
    for (; k < static_cast<int>(ve.size()) && ve[k].day < in.end_day; ++k)
      port_days[ve[k].port].push_back(ve[k].day);
    planned[v] = {first, k};
  }
  for (auto& days : port_days) {
    std::sort(days.begin(), days.end());
    days.erase(std::unique(days.begin(), days.end()), days.end());
  }
  size_t arc_estimate = 0;
  for (size_t i = 0; i < P; ++i) arc_estimate += 1 + port_days[i].size();
  for (size_t v = 0; v < V; ++v) arc_estimate += planned[v].second - planned[v].first;
  if (in.big_m <= static_cast<long long>(3 * arc_estimate))
    throw std::invalid_argument("big_m must exceed the network's arc count");

  TimeExpandedNetwork ten;
  FlowNetwork& net = ten.net;
  std::vector<int> port_base(P), demand_base(P), vessel_base(V);
  for (size_t i = 0; i < P; ++i) {
    port_base[i] = net.node_count();
    net.add_node(in.port_stock[i], cfg.ports[i].code + "@start");
    for (int d : port_days[i]) net.add_node(0, cfg.ports[i].code + "@" + std::to_string(d));
  }
  ten.port_nodes = net.node_count();
  std::vector<std::vector<long long>> demand(P);
  for (size_t i = 0; i < P; ++i) {
    demand[i].assign(1 + port_days[i].size(), 0);
    for (int d = in.start_day; d < in.end_day; ++d)
      demand[i][attach(port_days[i], d, false)] += forecast.demand[i][d];
    if (!in.reserve.empty()) demand[i][0] += in.reserve[i];
    demand_base[i] = net.node_count();
    for (size_t k = 0; k < demand[i].size(); ++k)
      net.add_node(-demand[i][k], "q:" + net.labels[port_base[i] + k]);
  }
  ten.demand_nodes = net.node_count() - ten.port_nodes;
  for (size_t v = 0; v < V; ++v) {
    vessel_base[v] = net.node_count();
    for (int k = planned[v].first; k < planned[v].second; ++k)
      net.add_node(k == planned[v].first ? in.vessel_empties[v] : 0,
                   cfg.vessels[v].id + "#" + std::to_string(k));
  }
  ten.vessel_nodes = net.node_count() - ten.port_nodes - ten.demand_nodes;
  const int slack = net.add_node(0, "slack");

  for (size_t i = 0; i < P; ++i) {
    const int p = static_cast<int>(i);
    for (int d = in.start_day; d < in.end_day; ++d) {
      const auto s = static_cast<size_t>(d);
      if (s < forecast.supply[i].size() && forecast.supply[i][s] != 0)
        net.imbalance[port_base[i] + attach(port_days[p], d, true)] += forecast.supply[i][s];
    }
  }
  net.imbalance[slack] = -std::accumulate(net.imbalance.begin(), net.imbalance.end(), 0LL);

  for (size_t i = 0; i < P; ++i) {
    const int n = static_cast<int>(port_days[i].size()) + 1;
    for (int k = 0; k < n; ++k)
      net.add_arc(port_base[i] + k, k + 1 < n ? port_base[i] + k + 1 : slack, kUnbounded, 0);
    for (int k = 0; k < n; ++k) {
      net.add_arc(port_base[i] + k, demand_base[i] + k, demand[i][k], 0);
      ten.shortage_arcs.push_back(net.add_arc(slack, demand_base[i] + k, demand[i][k], in.big_m));
    }
  }
  for (size_t v = 0; v < V; ++v) {
    const auto& ve = tt.vessel_events[v];
    const long cap = cfg.vessels[v].capacity;
    const auto [first, last] = planned[v];
    for (int k = first; k < last; ++k) {
      const int node = vessel_base[v] + (k - first);
      const long room = std::max(0L, cap - forecast.laden_load[v][k]);
      net.add_arc(node, k + 1 < last ? node + 1 : slack, room, 0);
    }
    for (int k = first; k < last; ++k) {
      const int node = vessel_base[v] + (k - first);
      const int port = ve[k].port;
      const int pnode = port_base[port] + attach(port_days[port], ve[k].day, true);
      TimeExpandedNetwork::Transfer t;
      t.vessel = static_cast<int>(v);
      t.event = k;
      t.day = ve[k].day;
      t.load_arc = net.add_arc(pnode, node, kUnbounded, 1);
      t.discharge_arc = net.add_arc(node, pnode, kUnbounded, 1);
      ten.transfers.push_back(t);
    }
  }
  return ten;
}

long RepositionPlan::at(int vessel, int event) const {
  const auto it = x.find({vessel, event});
  return it == x.end() ? 0 : it->second;
}

RepositionPlan extract_plan(const TimeExpandedNetwork& ten, const FlowSolution& sol) {
  RepositionPlan plan;
  for (const auto& t : ten.transfers)
    plan.x[{t.vessel, t.event}] = sol.flow[t.load_arc] - sol.flow[t.discharge_arc];
  for (int a : ten.shortage_arcs) plan.shortage += sol.flow[a];
  return plan;
}

PlanningInput offline_input(const World& world, long long big_m) {
  const auto& cfg = world.config;
  PlanningInput in;
  in.start_day = 0;
  in.end_day = cfg.episode_days;
  for (int s : cfg.scaled_initial_stock()) in.port_stock.push_back(s);
  in.vessel_empties.assign(cfg.vessels.size(), 0);
  in.vessel_first_event.assign(cfg.vessels.size(), 0);
  in.big_m = big_m;
  return in;
}

}  // namespace ecr
