#include "ecr/ordergen.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ecr {

uint64_t mix_seed(uint64_t base, uint64_t stream) {
  // splitmix64 over the combined value
  uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

DemandModel DemandModel::from_scenario(const ScenarioConfig& config) {
  DemandModel m;
  m.quantity_dispersion = config.quantity_dispersion;
  for (size_t u = 0; u < config.ports.size(); ++u)
    for (const auto& [dest, rate] : config.ports[u].demand_rate)
      m.pair_rates[{static_cast<int>(u), config.port_index(dest)}] = rate;
  return m;
}

std::vector<Order> generate_orders(const DemandModel& model, const ScenarioConfig& config,
                                   int horizon, uint64_t seed) {
  struct Lane {
    int origin, dest;
    double rate;
  };
  std::vector<Lane> lanes;
  for (const auto& [pair, rate] : model.pair_rates)
    if (rate > 0) lanes.push_back({pair.first, pair.second, rate});
  std::sort(lanes.begin(), lanes.end(), [&](const Lane& a, const Lane& b) {
    const auto& ao = config.ports[a.origin].code;
    const auto& bo = config.ports[b.origin].code;
    if (ao != bo) return ao < bo;
    return config.ports[a.dest].code < config.ports[b.dest].code;
  });

  std::mt19937_64 rng(seed);
  std::geometric_distribution<int> size_law(model.quantity_dispersion);
  std::vector<Order> out;
  for (int day = 0; day < horizon; ++day) {
    for (const auto& lane : lanes) {
      std::poisson_distribution<int> count_law(lane.rate);
      int remaining = count_law(rng);
      while (remaining > 0) {
        const int q = std::min(remaining, 1 + size_law(rng));
        out.push_back({day, lane.origin, lane.dest, q});
        remaining -= q;
      }
    }
  }
  return out;
}

SndForecast empty_forecast(const ScenarioConfig& config, const Timetable& timetable,
                           int horizon) {
  SndForecast fc;
  fc.horizon = horizon;
  fc.demand.assign(config.ports.size(), std::vector<long>(horizon, 0));
  fc.supply.assign(config.ports.size(), std::vector<long>(horizon + config.t_ret + 1, 0));
  fc.laden_load.resize(timetable.vessel_events.size());
  for (size_t v = 0; v < timetable.vessel_events.size(); ++v)
    fc.laden_load[v].assign(timetable.vessel_events[v].size(), 0);
  return fc;
}

bool trace_laden(const LadenBatch& batch, const ScenarioConfig& config,
                 const Timetable& timetable, int t_ret, SndForecast& fc) {
  int vessel = batch.vessel;
  size_t k = static_cast<size_t>(batch.next_event);
  if (vessel < 0) {
    const auto& calls = timetable.port_events[batch.origin];
    auto it = std::lower_bound(calls.begin(), calls.end(), batch.ready_day,
                               [](const CallEvent& e, int d) { return e.day < d; });
    for (; it != calls.end(); ++it) {
      if (it->seq < batch.first_call) continue;
      if (config.route_serves(config.vessels[it->vessel].route_index, batch.dest)) break;
    }
    if (it == calls.end()) return false;
    vessel = it->vessel;
    const auto& ve = timetable.vessel_events[vessel];
    k = static_cast<size_t>(std::find(ve.begin(), ve.end(), *it) - ve.begin());
    fc.laden_load[vessel][k] += batch.count;  // boards here
    ++k;
  }
  const auto& ve = timetable.vessel_events[vessel];
  for (; k < ve.size(); ++k) {
    if (ve[k].port == batch.dest) {
      const size_t day = static_cast<size_t>(ve[k].day + t_ret);
      if (day < fc.supply[batch.dest].size()) fc.supply[batch.dest][day] += batch.count;
      return true;
    }
    fc.laden_load[vessel][k] += batch.count;
  }
  return true;
}

SndForecast snd_profile(const std::vector<Order>& orders, const ScenarioConfig& config,
                        const Timetable& timetable, int t_ret) {
  const int horizon = config.episode_days;
  SndForecast fc = empty_forecast(config, timetable, horizon);
  for (const auto& o : orders) {
    if (o.day < 0 || o.day >= horizon) continue;
    const bool served = std::any_of(
        config.port_routes[o.origin].begin(), config.port_routes[o.origin].end(),
        [&](int r) { return config.route_serves(r, o.dest); });
    if (!served)
      throw std::invalid_argument("no route serves lane " + config.ports[o.origin].code + "->" +
                                  config.ports[o.dest].code);
    fc.demand[o.origin][o.day] += o.quantity;
    trace_laden({o.origin, o.dest, o.quantity, o.day, -1, 0, 0}, config, timetable, t_ret, fc);
  }
  return fc;
}

void write_order_trace(std::ostream& out, const std::vector<Order>& orders,
                       const ScenarioConfig& config) {
  for (const auto& o : orders)
    out << o.day << ' ' << config.ports[o.origin].code << ' ' << config.ports[o.dest].code << ' '
        << o.quantity << '\n';
}

std::vector<Order> read_order_trace(std::istream& in, const ScenarioConfig& config) {
  std::vector<Order> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    Order o;
    std::string from, to;
    if (!(fields >> o.day)) continue;
    if (!(fields >> from >> to >> o.quantity))
      throw std::invalid_argument("order trace line " + std::to_string(lineno) + ": malformed");
    o.origin = config.port_index(from);
    o.dest = config.port_index(to);
    if (o.origin < 0 || o.dest < 0 || o.origin == o.dest || o.quantity < 1 || o.day < 0)
      throw std::invalid_argument("order trace line " + std::to_string(lineno) + ": invalid order");
    out.push_back(o);
  }
  return out;
}

}  // namespace ecr
