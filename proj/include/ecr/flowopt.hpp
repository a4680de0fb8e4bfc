#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ecr/ordergen.hpp"
#include "ecr/scenario.hpp"

namespace ecr {

/// Effectively unbounded arc capacity.
constexpr long long kUnbounded = 1LL << 40;

struct FlowArc {
  int tail = 0;
  int head = 0;
  long long cap = 0;
  long long cost = 0;
};

/// Integral network with node imbalances: supply > 0, demand < 0.
struct FlowNetwork {
  std::vector<long long> imbalance;
  std::vector<FlowArc> arcs;
  std::vector<std::string> labels;  // one per node, for dumps

  int node_count() const { return static_cast<int>(imbalance.size()); }
  int add_node(long long supply = 0, std::string label = {});
  int add_arc(int tail, int head, long long cap, long long cost);

  /// Plain-text node/arc listing.
  void dump(std::ostream& out) const;
};

struct FlowSolution {
  std::vector<long long> flow;       // per arc
  std::vector<long long> potential;  // per node; reduced costs certify optimality
  long long cost = 0;
};

class NegativeCycleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleFlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Successive shortest paths with node potentials. Initial potentials come from
/// a label-correcting pass (which also detects negative cycles); each phase then
/// runs a binary-heap Dijkstra on reduced costs and saturates every shortest path
/// it found with a blocking flow. Imbalances must sum to zero.
FlowSolution solve_min_cost_flow(const FlowNetwork& net);

/// True when the potentials satisfy complementary slackness on every arc:
/// reduced cost > 0 forces zero flow, < 0 forces saturation.
bool check_complementary_slackness(const FlowNetwork& net, const FlowSolution& sol);

/// What the planner knows at the moment it plans.
struct PlanningInput {
  int start_day = 0;                   // first day whose demand still matters
  int end_day = 0;                     // exclusive
  std::vector<long> port_stock;        // empties available at the start node
  std::vector<long> vessel_empties;    // empties aboard before the first planned call
  std::vector<int> vessel_first_event; // first call index per vessel still to plan
  std::vector<long> reserve;           // per port safety stock charged as extra demand (may be empty)
  long long big_m = 1'000'000;
};

/// Time-expanded network plus the handles needed to read a plan back out.
struct TimeExpandedNetwork {
  FlowNetwork net;
  struct Transfer {
    int vessel = 0;
    int event = 0;  // index into the vessel's call list
    int day = 0;
    int load_arc = 0;       // port -> vessel
    int discharge_arc = 0;  // vessel -> port
  };
  std::vector<Transfer> transfers;
  std::vector<int> shortage_arcs;
  int port_nodes = 0;
  int demand_nodes = 0;
  int vessel_nodes = 0;
};

/// Per port: a start node, then one node per distinct call day in the window,
/// chained by free carry arcs ending in the slack node. Each port node k has a
/// demand node fed by k (cap D) and by the slack node (cap D, cost big_m); demand
/// and supply of day d attach to the last port node dated before d. Per vessel:
/// one node per planned call, chained by arcs of capacity Cap - laden_load, with
/// unit-cost transfer arcs to and from the port node of that call day.
TimeExpandedNetwork build_time_expanded(const World& world, const SndForecast& forecast,
                                        const PlanningInput& input);

struct RepositionPlan {
  std::map<std::pair<int, int>, long> x;  // (vessel, event index) -> load (+) / discharge (-)
  long long shortage = 0;

  long at(int vessel, int event) const;
};

RepositionPlan extract_plan(const TimeExpandedNetwork& ten, const FlowSolution& sol);

/// Full-knowledge plan from day 0 with the scenario's initial stock.
PlanningInput offline_input(const World& world, long long big_m = 1'000'000);

}  // namespace ecr
