#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ecr {

/// Raised when scenario text cannot be parsed or violates a structural rule.
/// `line()` is 0 for semantic errors that are not tied to a single line.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct PortSpec {
  std::string code;
  std::string region;
  int initial_empty = 0;
  // Mean laden containers per day from this port to each destination code.
  std::map<std::string, double> demand_rate;
};

struct RouteStop {
  std::string port;
  int offset = 0;  // transit day measured from the first stop
  int port_index = -1;
};

struct RouteSpec {
  std::string id;
  std::vector<RouteStop> stops;
  int cycle_days = 0;
  int vessel_count = 0;
};

struct VesselSpec {
  std::string id;
  std::string route_id;
  int capacity = 0;
  int start_offset = 0;
  int route_index = -1;
};

/// The static world. Produced by `parse_scenario` / `builtin_scenario`, which
/// validate every field and fill in the resolved index tables at the bottom.
struct ScenarioConfig {
  std::vector<PortSpec> ports;
  std::vector<RouteSpec> routes;
  std::vector<VesselSpec> vessels;
  int total_containers = 0;
  int episode_days = 400;
  int t_ret = 1;
  double container_scale = 1.0;
  double quantity_dispersion = 0.2;

  // Resolved topology.
  std::vector<std::vector<int>> route_ports;   // distinct ports per route, first-visit order
  std::vector<std::vector<int>> port_routes;   // routes calling at each port, ascending
  std::vector<std::vector<int>> crossing;      // routes sharing >= 1 port, excluding self

  int port_index(std::string_view code) const;   // -1 when absent
  int route_index(std::string_view id) const;
  int vessel_index(std::string_view id) const;
  bool route_serves(int route, int port) const;

  /// Initial empties after applying container_scale; largest-remainder rounding
  /// so the sum equals `effective_total()` exactly.
  std::vector<int> scaled_initial_stock() const;
  int effective_total() const;

  /// Rebuilds the resolved tables and checks every invariant. Throws ScenarioError.
  void finalize();
};

ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario_file(const std::string& path);
ScenarioConfig builtin_scenario();
std::string_view builtin_scenario_text();

/// Evenly spaced default start offsets: floor(i * cycle / count).
std::vector<int> default_start_offsets(int cycle_days, int vessel_count);

/// One vessel call. `stop` indexes into the vessel's route stops.
struct CallEvent {
  int day = 0;
  int vessel = 0;
  int port = 0;
  int stop = 0;
  size_t seq = 0;  // position in Timetable::ordered
  bool operator==(const CallEvent&) const = default;
};

struct Timetable {
  std::vector<std::vector<CallEvent>> port_events;    // per port, by (day, vessel order)
  std::vector<std::vector<CallEvent>> vessel_events;  // per vessel, by day
  std::vector<CallEvent> ordered;                     // global processing order

  /// Previous event day strictly before `day` for a port / vessel, if any.
  std::optional<int> prev_port_event(int port, int day) const;
  std::optional<int> prev_vessel_event(int vessel, int day) const;
};

/// Arrival days are start_offset + stop_offset + k * cycle_days for every
/// integer k that lands inside [0, episode_days). Same-day calls are ordered
/// by (port code, vessel id).
Timetable derive_timetable(const ScenarioConfig& config);

/// Config plus its timetable; shared read-only by engines, features and planners.
struct World {
  ScenarioConfig config;
  Timetable timetable;
};

std::shared_ptr<const World> make_world(ScenarioConfig config);

}  // namespace ecr
