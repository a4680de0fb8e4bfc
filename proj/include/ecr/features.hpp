#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecr/engine.hpp"
#include "ecr/scenario.hpp"

namespace ecr {

enum class AwarenessLevel { self, territorial, diplomatic };

std::string to_string(AwarenessLevel level);
AwarenessLevel parse_awareness(const std::string& name);

struct FeatureConfig {
  AwarenessLevel level = AwarenessLevel::self;
  int n = 1;             // successor ports on the vessel's route
  int m = 1;             // vessels arriving next at the current port
  int staleness_k = 0;   // delay in days for cross-route aggregates
  double norm = 3000.0;  // container normalisation constant

  void validate() const;
};

struct LayoutSlice {
  std::string name;
  size_t offset = 0;
  size_t width = 0;
};

/// Ordered named slices of a state vector. The hash pins checkpoints to a layout.
struct StateLayout {
  std::vector<LayoutSlice> slices;
  size_t size = 0;
  uint64_t hash() const;
  std::string describe() const;
};

struct StateVector {
  std::vector<double> values;
};

StateLayout state_layout(const ScenarioConfig& config, const FeatureConfig& cfg);

size_t port_slice_width(const ScenarioConfig& config);
size_t vessel_slice_width(const ScenarioConfig& config);
constexpr size_t kRouteSliceWidth = 2;

/// [C/norm, mean past C/norm, cumulative past shortage/norm, one-hot port].
void port_features(const Snapshot& snap, const World& world, int port, double norm,
                   std::vector<double>& out);
/// [empties/cap, free/cap, ladens/cap, one-hot route].
void vessel_features(const Snapshot& snap, const World& world, int vessel,
                     std::vector<double>& out);
/// [mean C/norm, mean cumulative shortage/norm] over the route's ports, read as of `as_of_day`.
void route_aggregate(const Snapshot& snap, const World& world, int route, double norm,
                     int as_of_day, std::vector<double>& out);

/// Ports the vessel calls at after the current event (n of them, cyclic).
std::vector<int> successor_ports(const World& world, const ArrivalEvent& ev, int n);
/// Vessels calling at the event's port next, excluding the acting vessel.
std::vector<int> future_vessels(const World& world, const ArrivalEvent& ev, int m);

StateVector build_state(const Snapshot& snap, const World& world, const FeatureConfig& cfg);

}  // namespace ecr
