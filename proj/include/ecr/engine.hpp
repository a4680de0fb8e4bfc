#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ecr/ordergen.hpp"
#include "ecr/scenario.hpp"

namespace ecr {

/// Per-day ledgers, append-only during an episode. Rows for days before the
/// current one never change, which is what lets snapshots share this buffer.
struct History {
  std::vector<std::vector<long>> end_stock;       // [day][port], written when the day closes
  std::vector<std::vector<long>> shortage;        // [day][port], complete once orders ran
  std::vector<std::vector<long>> cum_shortage;    // inclusive prefix sums of `shortage`
};

struct LadenLot {
  int received_day = 0;
  int dest = 0;
  int count = 0;
  bool operator==(const LadenLot&) const = default;
};

struct ReturnLot {
  int day = 0;
  int port = 0;
  int count = 0;
  bool operator==(const ReturnLot&) const = default;
};

/// Six per-port counters reported in the regional table.
struct PortCounters {
  long ordered = 0;
  long failed = 0;
  long imported_laden = 0;
  long imported_empty = 0;
  long exported_laden = 0;
  long exported_empty = 0;
  bool operator==(const PortCounters&) const = default;
};

struct EnvState {
  int day = 0;
  bool day_open = false;          // today's orders and returns already applied
  bool awaiting_action = false;   // an arrival event was emitted and not yet executed
  size_t next_call = 0;           // index into Timetable::ordered
  size_t order_cursor = 0;
  std::vector<long> port_stock;
  std::vector<long> yesterday_stock;
  std::vector<ReturnLot> pending_returns;          // ascending by day
  std::vector<std::vector<LadenLot>> laden_yard;   // per port, FIFO
  std::vector<int> vessel_next_event;              // per vessel index into its call list
  std::vector<long> vessel_empties;
  std::vector<std::vector<long>> vessel_ladens;    // [vessel][dest port]
  std::vector<PortCounters> counters;
  std::shared_ptr<History> history;

  long vessel_laden_total(int vessel) const;
};

bool same_state(const EnvState& a, const EnvState& b);

struct ArrivalEvent {
  int day = 0;
  int port = 0;
  int vessel = 0;
  int k = 0;          // the vessel's own event counter
  size_t call = 0;    // position in Timetable::ordered
  bool operator==(const ArrivalEvent&) const = default;
};

struct ActionOutcome {
  long discharged_laden = 0;
  long discharged_empty = 0;
  long loaded_laden = 0;
  long loaded_empty = 0;
  bool operator==(const ActionOutcome&) const = default;
};

/// Quantities an action will be applied against, computed without mutating.
struct StagePreview {
  long port_stock = 0;
  long vessel_empties = 0;
  long free_after_laden = 0;   // free slots after stages 1 and 3 with no empty discharge
  int capacity = 0;
};

struct Census {
  long in_ports = 0;
  long on_vessels_empty = 0;
  long on_vessels_laden = 0;
  long in_yards = 0;
  long in_returns = 0;
  long total() const { return in_ports + on_vessels_empty + on_vessels_laden + in_yards + in_returns; }
  bool operator==(const Census&) const = default;
};

/// Immutable full view of the environment at an arrival event.
class Snapshot {
 public:
  Snapshot(ArrivalEvent event, EnvState state);

  const ArrivalEvent& event() const { return event_; }
  const EnvState& state() const { return state_; }
  int day() const { return state_.day; }

  long stock(int port) const { return state_.port_stock[port]; }
  /// End-of-day stock for a past day (< day()).
  long past_stock(int port, int past_day) const;
  /// Shortage summed over days [0, through_day]; through_day <= day(). -1 gives 0.
  long cum_shortage(int port, int through_day) const;
  /// Shortage summed over (from_day, to_day].
  long shortage_between(int port, int from_day, int to_day) const;

  bool operator==(const Snapshot& other) const;

 private:
  ArrivalEvent event_;
  EnvState state_;
};

struct TrajectoryRecord {
  ArrivalEvent event;
  double action = 0;
  ActionOutcome outcome;
  long port_stock_after = 0;
  long vessel_empties_after = 0;
};

/// Nearest integer, ties away from zero.
long round_half_away(double x);

/// The event-driven simulator. Daily order: orders (against yesterday's stock),
/// then due returns, then vessel calls in timetable order.
class Engine {
 public:
  explicit Engine(std::shared_ptr<const World> world);

  void reset(std::vector<Order> orders);
  /// Runs whole days until the next call; nullopt once the horizon is reached.
  std::optional<ArrivalEvent> advance_until_event();
  ActionOutcome execute_action(const ArrivalEvent& event, double a);
  StagePreview preview(const ArrivalEvent& event) const;
  Snapshot snapshot(const ArrivalEvent& event) const;
  /// Snapshot at the end of the episode (no triggering event).
  Snapshot final_snapshot() const;
  Census container_census() const;

  bool done() const;
  const EnvState& state() const { return state_; }
  const World& world() const { return *world_; }
  std::shared_ptr<const World> world_ptr() const { return world_; }
  const std::vector<Order>& orders() const { return orders_; }

  void set_trajectory_logging(bool on) { log_on_ = on; }
  const std::vector<TrajectoryRecord>& trajectory() const { return log_; }

 private:
  void open_day();
  void close_day();
  void credit_returns();

  std::shared_ptr<const World> world_;
  std::vector<Order> orders_;
  EnvState state_;
  std::optional<ArrivalEvent> pending_;
  bool log_on_ = false;
  std::vector<TrajectoryRecord> log_;
};

/// Fulfilled / ordered over the whole episode; 1 when nothing was ordered.
double fulfillment_ratio(const EnvState& state);

void to_json(nlohmann::json& j, const EnvState& s);
void from_json(const nlohmann::json& j, EnvState& s);
nlohmann::json snapshot_to_json(const Snapshot& snap);
Snapshot snapshot_from_json(const nlohmann::json& j);

}  // namespace ecr
