#include "ecr/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace ecr {

namespace {

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

int to_int(const std::string& s, int line) {
  try {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ScenarioError("expected integer, got '" + s + "'", line);
  }
}

double to_double(const std::string& s, int line) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ScenarioError("expected number, got '" + s + "'", line);
  }
}

struct PendingVessel {
  VesselSpec spec;
  bool has_offset = false;
};

}  // namespace

int ScenarioConfig::port_index(std::string_view code) const {
  for (size_t i = 0; i < ports.size(); ++i)
    if (ports[i].code == code) return static_cast<int>(i);
  return -1;
}

int ScenarioConfig::route_index(std::string_view id) const {
  for (size_t i = 0; i < routes.size(); ++i)
    if (routes[i].id == id) return static_cast<int>(i);
  return -1;
}

int ScenarioConfig::vessel_index(std::string_view id) const {
  for (size_t i = 0; i < vessels.size(); ++i)
    if (vessels[i].id == id) return static_cast<int>(i);
  return -1;
}

bool ScenarioConfig::route_serves(int route, int port) const {
  const auto& rp = route_ports[route];
  return std::find(rp.begin(), rp.end(), port) != rp.end();
}

int ScenarioConfig::effective_total() const {
  int raw = 0;
  for (const auto& p : ports) raw += p.initial_empty;
  return static_cast<int>(std::llround(raw * container_scale));
}

std::vector<int> ScenarioConfig::scaled_initial_stock() const {
  const int target = effective_total();
  std::vector<int> out(ports.size(), 0);
  std::vector<double> frac(ports.size(), 0.0);
  int assigned = 0;
  for (size_t i = 0; i < ports.size(); ++i) {
    double exact = ports[i].initial_empty * container_scale;
    out[i] = static_cast<int>(std::floor(exact));
    frac[i] = exact - out[i];
    assigned += out[i];
  }
  std::vector<size_t> order(ports.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return frac[a] > frac[b]; });
  for (size_t k = 0; assigned < target && k < order.size(); ++k, ++assigned) ++out[order[k]];
  return out;
}

void ScenarioConfig::finalize() {
  if (ports.empty()) throw ScenarioError("scenario has no ports");
  if (routes.empty()) throw ScenarioError("scenario has no routes");
  if (episode_days < 1) throw ScenarioError("episode_days must be >= 1");
  if (t_ret < 0) throw ScenarioError("t_ret must be >= 0");
  if (!(container_scale > 0)) throw ScenarioError("container_scale must be > 0");
  if (!(quantity_dispersion > 0 && quantity_dispersion <= 1))
    throw ScenarioError("quantity_dispersion must lie in (0, 1]");

  std::set<std::string> seen;
  for (const auto& p : ports) {
    if (!seen.insert(p.code).second) throw ScenarioError("duplicate port '" + p.code + "'");
    if (p.initial_empty < 0) throw ScenarioError("negative initial_empty at port '" + p.code + "'");
  }
  seen.clear();
  for (auto& r : routes) {
    if (!seen.insert(r.id).second) throw ScenarioError("duplicate route '" + r.id + "'");
    if (r.stops.empty()) throw ScenarioError("route '" + r.id + "' has no stops");
    if (r.cycle_days < 1) throw ScenarioError("route '" + r.id + "' cycle_days must be >= 1");
    if (r.stops.front().offset != 0)
      throw ScenarioError("route '" + r.id + "' first stop must have transit day 0");
    for (size_t k = 0; k < r.stops.size(); ++k) {
      auto& s = r.stops[k];
      s.port_index = port_index(s.port);
      if (s.port_index < 0)
        throw ScenarioError("unknown port '" + s.port + "' on route '" + r.id + "'");
      if (k > 0 && s.offset <= r.stops[k - 1].offset)
        throw ScenarioError("non-increasing transit day on route '" + r.id + "' at stop " +
                            std::to_string(k));
    }
    if (r.stops.back().offset >= r.cycle_days)
      throw ScenarioError("route '" + r.id + "' last transit day must be < cycle_days");
  }
  seen.clear();
  std::vector<int> per_route(routes.size(), 0);
  for (auto& v : vessels) {
    if (!seen.insert(v.id).second) throw ScenarioError("duplicate vessel '" + v.id + "'");
    v.route_index = route_index(v.route_id);
    if (v.route_index < 0)
      throw ScenarioError("vessel '" + v.id + "' references unknown route '" + v.route_id + "'");
    if (v.capacity <= 0) throw ScenarioError("vessel '" + v.id + "' capacity must be > 0");
    const int cycle = routes[v.route_index].cycle_days;
    if (v.start_offset < 0 || v.start_offset >= cycle)
      throw ScenarioError("vessel '" + v.id + "' start_offset outside [0, cycle_days)");
    ++per_route[v.route_index];
  }
  for (size_t r = 0; r < routes.size(); ++r) {
    if (per_route[r] != routes[r].vessel_count)
      throw ScenarioError("route '" + routes[r].id + "' declares " +
                          std::to_string(routes[r].vessel_count) + " vessels but has " +
                          std::to_string(per_route[r]));
  }

  route_ports.assign(routes.size(), {});
  port_routes.assign(ports.size(), {});
  for (size_t r = 0; r < routes.size(); ++r) {
    for (const auto& s : routes[r].stops) {
      auto& rp = route_ports[r];
      if (std::find(rp.begin(), rp.end(), s.port_index) == rp.end()) rp.push_back(s.port_index);
    }
    for (int p : route_ports[r]) port_routes[p].push_back(static_cast<int>(r));
  }
  crossing.assign(routes.size(), {});
  for (size_t a = 0; a < routes.size(); ++a) {
    for (size_t b = 0; b < routes.size(); ++b) {
      if (a == b) continue;
      bool shares = std::any_of(route_ports[a].begin(), route_ports[a].end(),
                                [&](int p) { return route_serves(static_cast<int>(b), p); });
      if (shares) crossing[a].push_back(static_cast<int>(b));
    }
  }

  for (const auto& p : ports) {
    const int u = port_index(p.code);
    for (const auto& [dest, rate] : p.demand_rate) {
      const int v = port_index(dest);
      if (v < 0) throw ScenarioError("unknown port '" + dest + "' in demand table");
      if (v == u) throw ScenarioError("demand lane " + p.code + "->" + dest + " has origin == dest");
      if (rate < 0) throw ScenarioError("negative demand rate on " + p.code + "->" + dest);
      bool shared = std::any_of(port_routes[u].begin(), port_routes[u].end(),
                                [&](int r) { return route_serves(r, v); });
      if (!shared)
        throw ScenarioError("demand lane " + p.code + "->" + dest + " is not served by any route");
    }
  }

  int raw = 0;
  for (const auto& p : ports) raw += p.initial_empty;
  if (raw != total_containers)
    throw ScenarioError("container-sum mismatch: ports hold " + std::to_string(raw) +
                        " but total_containers is " + std::to_string(total_containers));
}

std::vector<int> default_start_offsets(int cycle_days, int vessel_count) {
  std::vector<int> out;
  out.reserve(vessel_count);
  for (int i = 0; i < vessel_count; ++i)
    out.push_back(static_cast<int>((static_cast<long long>(i) * cycle_days) / vessel_count));
  return out;
}

ScenarioConfig parse_scenario(std::string_view text) {
  ScenarioConfig cfg;
  std::string section;
  int default_capacity = 0;
  bool have_total = false;
  std::vector<PendingVessel> explicit_vessels;

  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    auto f = split_fields(raw);
    if (f.empty()) continue;
    if (f[0].front() == '[') {
      if (f.size() != 1 || f[0].back() != ']')
        throw ScenarioError("malformed section header", lineno);
      section = f[0].substr(1, f[0].size() - 2);
      if (section != "general" && section != "ports" && section != "routes" &&
          section != "vessels" && section != "demand")
        throw ScenarioError("unknown section [" + section + "]", lineno);
      continue;
    }
    if (section.empty()) throw ScenarioError("record outside of any section", lineno);

    if (section == "general") {
      if (f.size() != 2) throw ScenarioError("expected 'key value'", lineno);
      const auto& key = f[0];
      if (key == "episode_days") cfg.episode_days = to_int(f[1], lineno);
      else if (key == "t_ret") cfg.t_ret = to_int(f[1], lineno);
      else if (key == "container_scale") cfg.container_scale = to_double(f[1], lineno);
      else if (key == "total_containers") { cfg.total_containers = to_int(f[1], lineno); have_total = true; }
      else if (key == "vessel_capacity") default_capacity = to_int(f[1], lineno);
      else if (key == "quantity_dispersion") cfg.quantity_dispersion = to_double(f[1], lineno);
      else throw ScenarioError("unknown general key '" + key + "'", lineno);
    } else if (section == "ports") {
      if (f.size() != 3) throw ScenarioError("port record needs: code region initial_empty", lineno);
      PortSpec p;
      p.code = f[0];
      p.region = f[1];
      p.initial_empty = to_int(f[2], lineno);
      cfg.ports.push_back(std::move(p));
    } else if (section == "routes") {
      if (f.size() < 4)
        throw ScenarioError("route record needs: id cycle_days vessel_count PORT:day...", lineno);
      RouteSpec r;
      r.id = f[0];
      r.cycle_days = to_int(f[1], lineno);
      r.vessel_count = to_int(f[2], lineno);
      if (r.vessel_count < 0) throw ScenarioError("negative vessel_count", lineno);
      for (size_t k = 3; k < f.size(); ++k) {
        auto colon = f[k].find(':');
        if (colon == std::string::npos || colon == 0)
          throw ScenarioError("stop must be PORT:transit_day, got '" + f[k] + "'", lineno);
        r.stops.push_back({f[k].substr(0, colon), to_int(f[k].substr(colon + 1), lineno), -1});
      }
      cfg.routes.push_back(std::move(r));
    } else if (section == "vessels") {
      if (f.size() != 3 && f.size() != 4)
        throw ScenarioError("vessel record needs: id route capacity [start_offset]", lineno);
      PendingVessel v;
      v.spec.id = f[0];
      v.spec.route_id = f[1];
      v.spec.capacity = to_int(f[2], lineno);
      if (f.size() == 4) {
        v.spec.start_offset = to_int(f[3], lineno);
        v.has_offset = true;
      }
      explicit_vessels.push_back(std::move(v));
    } else if (section == "demand") {
      if (f.size() != 3) throw ScenarioError("demand record needs: origin dest rate", lineno);
      const double rate = to_double(f[2], lineno);
      auto it = std::find_if(cfg.ports.begin(), cfg.ports.end(),
                             [&](const PortSpec& p) { return p.code == f[0]; });
      if (it == cfg.ports.end()) throw ScenarioError("unknown port '" + f[0] + "'", lineno);
      if (!it->demand_rate.emplace(f[1], rate).second)
        throw ScenarioError("duplicate demand lane " + f[0] + "->" + f[1], lineno);
    }
  }

  if (!have_total) {
    for (const auto& p : cfg.ports) cfg.total_containers += p.initial_empty;
  }

  // Routes with no explicit vessels get vessel_count evenly spaced vessels.
  for (const auto& r : cfg.routes) {
    std::vector<PendingVessel*> mine;
    for (auto& v : explicit_vessels)
      if (v.spec.route_id == r.id) mine.push_back(&v);
    if (mine.empty()) {
      if (r.vessel_count > 0 && default_capacity <= 0)
        throw ScenarioError("route '" + r.id + "' needs vessels but vessel_capacity is unset");
      const auto offsets = default_start_offsets(r.cycle_days, r.vessel_count);
      for (int i = 0; i < r.vessel_count; ++i) {
        char id[64];
        std::snprintf(id, sizeof(id), "%s_V%02d", r.id.c_str(), i);
        cfg.vessels.push_back({id, r.id, default_capacity, offsets[i], -1});
      }
    } else {
      const auto offsets = default_start_offsets(r.cycle_days, static_cast<int>(mine.size()));
      for (size_t i = 0; i < mine.size(); ++i) {
        auto spec = mine[i]->spec;
        if (!mine[i]->has_offset) spec.start_offset = offsets[i];
        cfg.vessels.push_back(spec);
      }
    }
  }
  for (const auto& v : explicit_vessels) {
    if (cfg.route_index(v.spec.route_id) < 0)
      throw ScenarioError("vessel '" + v.spec.id + "' references unknown route '" +
                          v.spec.route_id + "'");
  }

  cfg.finalize();
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

ScenarioConfig builtin_scenario() { return parse_scenario(builtin_scenario_text()); }

std::optional<int> Timetable::prev_port_event(int port, int day) const {
  const auto& ev = port_events[port];
  auto it = std::lower_bound(ev.begin(), ev.end(), day,
                             [](const CallEvent& e, int d) { return e.day < d; });
  if (it == ev.begin()) return std::nullopt;
  return std::prev(it)->day;
}

std::optional<int> Timetable::prev_vessel_event(int vessel, int day) const {
  const auto& ev = vessel_events[vessel];
  auto it = std::lower_bound(ev.begin(), ev.end(), day,
                             [](const CallEvent& e, int d) { return e.day < d; });
  if (it == ev.begin()) return std::nullopt;
  return std::prev(it)->day;
}

Timetable derive_timetable(const ScenarioConfig& config) {
  Timetable tt;
  tt.port_events.assign(config.ports.size(), {});
  tt.vessel_events.assign(config.vessels.size(), {});
  const int horizon = config.episode_days;

  for (size_t v = 0; v < config.vessels.size(); ++v) {
    const auto& vs = config.vessels[v];
    const auto& route = config.routes[vs.route_index];
    auto& out = tt.vessel_events[v];
    for (size_t s = 0; s < route.stops.size(); ++s) {
      const int phase = (vs.start_offset + route.stops[s].offset) % route.cycle_days;
      for (int day = phase; day < horizon; day += route.cycle_days)
        out.push_back({day, static_cast<int>(v), route.stops[s].port_index, static_cast<int>(s)});
    }
    std::sort(out.begin(), out.end(),
              [](const CallEvent& a, const CallEvent& b) { return a.day < b.day; });
  }

  auto key_less = [&](const CallEvent& a, const CallEvent& b) {
    if (a.day != b.day) return a.day < b.day;
    const auto& pa = config.ports[a.port].code;
    const auto& pb = config.ports[b.port].code;
    if (pa != pb) return pa < pb;
    return config.vessels[a.vessel].id < config.vessels[b.vessel].id;
  };
  for (const auto& ev : tt.vessel_events)
    tt.ordered.insert(tt.ordered.end(), ev.begin(), ev.end());
  std::sort(tt.ordered.begin(), tt.ordered.end(), key_less);
  for (auto& ev : tt.vessel_events) ev.clear();
  for (size_t i = 0; i < tt.ordered.size(); ++i) {
    auto& e = tt.ordered[i];
    e.seq = i;
    tt.port_events[e.port].push_back(e);
    tt.vessel_events[e.vessel].push_back(e);
  }
  return tt;
}

std::shared_ptr<const World> make_world(ScenarioConfig config) {
  auto w = std::make_shared<World>();
  w->timetable = derive_timetable(config);
  w->config = std::move(config);
  return w;
}

}  // namespace ecr
