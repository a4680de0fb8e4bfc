#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ecr/scenario.hpp"

namespace ecr {

struct Order {
  int day = 0;
  int origin = 0;  // port index
  int dest = 0;    // port index
  int quantity = 1;
  bool operator==(const Order&) const = default;
};

struct DemandModel {
  std::map<std::pair<int, int>, double> pair_rates;  // (origin, dest) -> containers/day
  double quantity_dispersion = 0.2;                  // success probability of the size law

  static DemandModel from_scenario(const ScenarioConfig& config);
};

/// Per lane and day the container total is Poisson(rate); it is cut into orders
/// whose sizes are 1 + Geometric(dispersion), the last one truncated. Sorted by
/// (day, origin code, dest code); same inputs give the same list.
std::vector<Order> generate_orders(const DemandModel& model, const ScenarioConfig& config,
                                   int horizon, uint64_t seed);

/// Laden-flow forecast derived from an order trace under the fulfil-everything
/// assumption. Indexed [port][day] / [vessel][event index].
struct SndForecast {
  std::vector<std::vector<long>> demand;       // D_i^t
  std::vector<std::vector<long>> supply;       // S_i^t, credited t_ret after discharge
  std::vector<std::vector<long>> laden_load;   // laden aboard after loading at each vessel event
  int horizon = 0;
};

/// A group of laden containers to trace. `vessel < 0` means waiting in the
/// origin yard from `ready_day`; otherwise aboard `vessel` with its next call at
/// vessel-event index `next_event`.
struct LadenBatch {
  int origin = 0;
  int dest = 0;
  long count = 0;
  int ready_day = 0;
  int vessel = -1;
  int next_event = 0;
  size_t first_call = 0;  // yard batches skip calls earlier in Timetable::ordered
};

SndForecast empty_forecast(const ScenarioConfig& config, const Timetable& timetable, int horizon);

/// Adds one batch to `fc`; returns false when no serving vessel calls at the
/// origin before the horizon ends.
bool trace_laden(const LadenBatch& batch, const ScenarioConfig& config,
                 const Timetable& timetable, int t_ret, SndForecast& fc);

/// Builds the forecast for `orders` (all boarding the first vessel of a serving
/// route after the order day, capacity ignored). Throws std::invalid_argument for
/// a lane no route serves.
SndForecast snd_profile(const std::vector<Order>& orders, const ScenarioConfig& config,
                        const Timetable& timetable, int t_ret);

/// Seed derivation shared by training and evaluation.
uint64_t mix_seed(uint64_t base, uint64_t stream);

void write_order_trace(std::ostream& out, const std::vector<Order>& orders,
                       const ScenarioConfig& config);
std::vector<Order> read_order_trace(std::istream& in, const ScenarioConfig& config);

}  // namespace ecr
