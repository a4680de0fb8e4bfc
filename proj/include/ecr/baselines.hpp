#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ecr/flowopt.hpp"
#include "ecr/ordergen.hpp"
#include "ecr/policy.hpp"

namespace ecr {

/// Never repositions; ladens still move through stages 1 and 3.
class NoReposition : public Policy {
 public:
  std::string name() const override { return "norepo"; }
  double act(const Engine&, const ArrivalEvent&) override { return 0.0; }
};

struct ThresholdTable {
  std::vector<long> safety;  // F_s per port
  std::vector<long> excess;  // F_e per port
};

/// Container move for the inventory-control rule: load down towards the excess
/// threshold, discharge up towards the safety threshold, otherwise hold.
long ic_move(long stock, long safety, long excess, long free_slots, long vessel_empties);

/// Action that makes the engine move exactly x containers when the stages allow
/// it, saturating at +-1 otherwise.
double move_to_action(long x, const StagePreview& preview);

class InventoryControl : public Policy {
 public:
  explicit InventoryControl(ThresholdTable table) : table_(std::move(table)) {}
  std::string name() const override { return "ic"; }
  double act(const Engine& engine, const ArrivalEvent& event) override;
  const ThresholdTable& table() const { return table_; }

 private:
  ThresholdTable table_;
};

/// Nearest-rank percentile; pct in [0, 100]. Empty input gives 0.
long percentile_nearest_rank(std::vector<long> values, int pct);

/// Median gap in days between consecutive distinct call days, per port (1 when
/// a port has fewer than two call days).
std::vector<int> typical_call_gaps(const World& world);

/// Thresholds from the p-th / q-th percentiles of each port's net demand
/// (order demand minus forecast returns) summed over windows of its typical call
/// gap, pooled over the given traces, floored at zero.
ThresholdTable fit_thresholds(const World& world, const std::vector<std::vector<Order>>& traces,
                              int p, int q);

struct ThresholdSearch {
  int p = 0;
  int q = 0;
  double mean_ratio = 0;
  ThresholdTable table;
};

/// Grid over p, q in {0, step, ..., 100} with q >= p, scored by mean simulated
/// fulfillment on `eval_traces`; ties keep the smaller (p, q).
ThresholdSearch search_thresholds(std::shared_ptr<const World> world,
                                  const std::vector<std::vector<Order>>& fit_traces,
                                  const std::vector<std::vector<Order>>& eval_traces,
                                  int step = 10);

struct RollingConfig {
  int horizon_days = 100;
  int execute_days = 7;
  long long big_m = 1'000'000;
  void validate() const;
};

/// Rolling-horizon planner fed with the episode's exact future orders. Every
/// `execute_days` the network is rebuilt from the engine's current state and the
/// plan for the following `horizon_days` is cached.
class OnlineLp : public Policy {
 public:
  OnlineLp(std::shared_ptr<const World> world, RollingConfig cfg,
           std::optional<ThresholdTable> reserve = std::nullopt);
  std::string name() const override { return reserve_ ? "online-lp-ic" : "online-lp"; }
  void begin_episode(const Engine& engine) override;
  double act(const Engine& engine, const ArrivalEvent& event) override;
  int solves() const { return solves_; }

  /// The network the planner would build right now.
  TimeExpandedNetwork build_network(const Engine& engine, const ArrivalEvent& event) const;

 private:
  void resolve(const Engine& engine, const ArrivalEvent& event);

  std::shared_ptr<const World> world_;
  RollingConfig cfg_;
  std::optional<ThresholdTable> reserve_;
  std::optional<RepositionPlan> plan_;
  int plan_day_ = 0;
  int solves_ = 0;
};

struct OfflineResult {
  double ratio = 1.0;
  long long shortage = 0;
  long long ordered = 0;
  RepositionPlan plan;
};

/// Full-knowledge LP bound: 1 - shortage / ordered (1 when nothing is ordered).
OfflineResult offline_optimal(const World& world, const std::vector<Order>& orders,
                              long long big_m = 1'000'000);

/// Runs one episode of `policy` over `orders`; returns the final engine.
Engine run_episode(std::shared_ptr<const World> world, Policy& policy, std::vector<Order> orders,
                   bool log_trajectory = false);

}  // namespace ecr
