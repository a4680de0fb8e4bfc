#include "ecr/features.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace ecr {

std::string to_string(AwarenessLevel level) {
  switch (level) {
    case AwarenessLevel::self: return "self";
    case AwarenessLevel::territorial: return "territorial";
    case AwarenessLevel::diplomatic: return "diplomatic";
  }
  return "?";
}

AwarenessLevel parse_awareness(const std::string& name) {
  if (name == "self" || name == "sa") return AwarenessLevel::self;
  if (name == "territorial" || name == "ta") return AwarenessLevel::territorial;
  if (name == "diplomatic" || name == "da") return AwarenessLevel::diplomatic;
  throw std::invalid_argument("unknown awareness level '" + name + "'");
}

void FeatureConfig::validate() const {
  if (n < 0 || m < 0) throw std::invalid_argument("feature n and m must be >= 0");
  if (staleness_k < 0) throw std::invalid_argument("staleness_k must be >= 0");
  if (!(norm > 0)) throw std::invalid_argument("norm must be > 0");
}

uint64_t StateLayout::hash() const {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const auto& s : slices) mix(s.name + ":" + std::to_string(s.width) + ";");
  return h;
}

std::string StateLayout::describe() const {
  std::ostringstream out;
  for (const auto& s : slices)
    out << s.offset << '\t' << s.width << '\t' << s.name << '\n';
  out << "total\t" << size << '\n';
  return out.str();
}

size_t port_slice_width(const ScenarioConfig& config) { return 3 + config.ports.size(); }
size_t vessel_slice_width(const ScenarioConfig& config) { return 3 + config.routes.size(); }

StateLayout state_layout(const ScenarioConfig& config, const FeatureConfig& cfg) {
  cfg.validate();
  StateLayout layout;
  auto add = [&](std::string name, size_t width) {
    layout.slices.push_back({std::move(name), layout.size, width});
    layout.size += width;
  };
  add("port", port_slice_width(config));
  add("vessel", vessel_slice_width(config));
  if (cfg.level == AwarenessLevel::self) return layout;
  for (int i = 0; i < cfg.n; ++i) add("successor_port_" + std::to_string(i), port_slice_width(config));
  for (int i = 0; i < cfg.m; ++i) add("future_vessel_" + std::to_string(i), vessel_slice_width(config));
  add("own_route", kRouteSliceWidth);
  if (cfg.level == AwarenessLevel::territorial) return layout;
  add("crossing_routes_mean", kRouteSliceWidth);
  add("transfer_routes_mean", kRouteSliceWidth);
  return layout;
}

void port_features(const Snapshot& snap, const World& world, int port, double norm,
                   std::vector<double>& out) {
  const int day = snap.day();
  double mean_stock;
  if (day == 0) {
    mean_stock = static_cast<double>(snap.stock(port));
  } else {
    double sum = 0;
    for (int d = 0; d < day; ++d) sum += static_cast<double>(snap.past_stock(port, d));
    mean_stock = sum / day;
  }
  out.push_back(static_cast<double>(snap.stock(port)) / norm);
  out.push_back(mean_stock / norm);
  out.push_back(static_cast<double>(snap.cum_shortage(port, day - 1)) / norm);
  const size_t base = out.size();
  out.resize(base + world.config.ports.size(), 0.0);
  out[base + port] = 1.0;
}

void vessel_features(const Snapshot& snap, const World& world, int vessel,
                     std::vector<double>& out) {
  const auto& vs = world.config.vessels[vessel];
  const double cap = vs.capacity;
  const double empties = static_cast<double>(snap.state().vessel_empties[vessel]);
  const double ladens = static_cast<double>(snap.state().vessel_laden_total(vessel));
  out.push_back(empties / cap);
  out.push_back((cap - empties - ladens) / cap);
  out.push_back(ladens / cap);
  const size_t base = out.size();
  out.resize(base + world.config.routes.size(), 0.0);
  out[base + vs.route_index] = 1.0;
}

void route_aggregate(const Snapshot& snap, const World& world, int route, double norm,
                     int as_of_day, std::vector<double>& out) {
  as_of_day = std::clamp(as_of_day, 0, snap.day());
  const auto& ports = world.config.route_ports[route];
  double stock = 0, shortage = 0;
  for (int p : ports) {
    stock += static_cast<double>(as_of_day == snap.day() ? snap.stock(p) : snap.past_stock(p, as_of_day));
    shortage += static_cast<double>(snap.cum_shortage(p, as_of_day - 1));
  }
  const double n = static_cast<double>(ports.size());
  out.push_back(stock / n / norm);
  out.push_back(shortage / n / norm);
}

std::vector<int> successor_ports(const World& world, const ArrivalEvent& ev, int n) {
  const auto& call = world.timetable.vessel_events[ev.vessel][ev.k];
  const auto& stops = world.config.routes[world.config.vessels[ev.vessel].route_index].stops;
  std::vector<int> out;
  for (int i = 1; i <= n; ++i) out.push_back(stops[(call.stop + i) % stops.size()].port_index);
  return out;
}

std::vector<int> future_vessels(const World& world, const ArrivalEvent& ev, int m) {
  std::vector<int> out;
  const auto& calls = world.timetable.port_events[ev.port];
  auto it = std::find_if(calls.begin(), calls.end(), [&](const CallEvent& c) {
    return c.day == ev.day && c.vessel == ev.vessel;
  });
  if (it == calls.end()) return out;
  for (++it; it != calls.end() && static_cast<int>(out.size()) < m; ++it) {
    if (it->vessel == ev.vessel) continue;
    if (std::find(out.begin(), out.end(), it->vessel) != out.end()) continue;
    out.push_back(it->vessel);
  }
  return out;
}

namespace {

void mean_route_aggregate(const Snapshot& snap, const World& world, const std::vector<int>& routes,
                          double norm, int as_of_day, std::vector<double>& out) {
  double a = 0, b = 0;
  std::vector<double> tmp;
  for (int r : routes) {
    tmp.clear();
    route_aggregate(snap, world, r, norm, as_of_day, tmp);
    a += tmp[0];
    b += tmp[1];
  }
  const double n = routes.empty() ? 1.0 : static_cast<double>(routes.size());
  out.push_back(a / n);
  out.push_back(b / n);
}

}  // namespace

StateVector build_state(const Snapshot& snap, const World& world, const FeatureConfig& cfg) {
  const ArrivalEvent& ev = snap.event();
  StateVector sv;
  auto& out = sv.values;
  out.reserve(128);
  port_features(snap, world, ev.port, cfg.norm, out);
  vessel_features(snap, world, ev.vessel, out);
  if (cfg.level == AwarenessLevel::self) return sv;

  for (int p : successor_ports(world, ev, cfg.n)) port_features(snap, world, p, cfg.norm, out);
  const auto fu = future_vessels(world, ev, cfg.m);
  for (int v : fu) vessel_features(snap, world, v, out);
  out.resize(out.size() + (cfg.m - fu.size()) * vessel_slice_width(world.config), 0.0);
  const int route = world.config.vessels[ev.vessel].route_index;
  route_aggregate(snap, world, route, cfg.norm, snap.day(), out);
  if (cfg.level == AwarenessLevel::territorial) return sv;

  const int delayed = std::max(0, snap.day() - cfg.staleness_k);
  mean_route_aggregate(snap, world, world.config.crossing[route], cfg.norm, delayed, out);
  const auto& through = world.config.port_routes[ev.port];
  if (through.size() > 1) {
    mean_route_aggregate(snap, world, through, cfg.norm, delayed, out);
  } else {
    out.push_back(0.0);
    out.push_back(0.0);
  }
  return sv;
}

}  // namespace ecr
