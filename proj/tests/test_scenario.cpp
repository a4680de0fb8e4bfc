#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "helpers.hpp"

using namespace ecr;
using namespace ecr::testing;

TEST_CASE("built-in network shape") {
  const auto cfg = builtin_scenario();
  CHECK(cfg.ports.size() == 17);
  CHECK(cfg.routes.size() == 4);
  CHECK(cfg.vessels.size() == 31);
  CHECK(cfg.total_containers == 3000);
  int sum = 0;
  for (const auto& p : cfg.ports) sum += p.initial_empty;
  CHECK(sum == 3000);
  for (const auto& v : cfg.vessels) CHECK(v.capacity == 200);
  CHECK(cfg.episode_days == 400);
}

TEST_CASE("crossing sets agree with shared stop codes") {
  const auto cfg = builtin_scenario();
  for (size_t a = 0; a < cfg.routes.size(); ++a) {
    std::set<std::string> mine;
    for (const auto& s : cfg.routes[a].stops) mine.insert(s.port);
    std::vector<int> expect;
    for (size_t b = 0; b < cfg.routes.size(); ++b) {
      if (a == b) continue;
      for (const auto& s : cfg.routes[b].stops)
        if (mine.count(s.port)) {
          expect.push_back(static_cast<int>(b));
          break;
        }
    }
    CHECK(cfg.crossing[a] == expect);
  }
  // Singapore sits on R2 and R4 only.
  const int sin = cfg.port_index("SIN");
  CHECK(cfg.port_routes[sin] == std::vector<int>{cfg.route_index("R2"), cfg.route_index("R4")});
}

TEST_CASE("structural errors are reported") {
  auto base = shuttle_text(10, 10, 5, 5);
  SUBCASE("unknown port on a route") {
    auto text = base;
    text.replace(text.find("B:2"), 3, "Q:2");
    CHECK_THROWS_WITH_AS(parse_scenario(text), doctest::Contains("unknown port"), ScenarioError);
  }
  SUBCASE("transit days must increase") {
    auto text = base;
    text.replace(text.find("B:2"), 3, "B:0");
    CHECK_THROWS_WITH_AS(parse_scenario(text), doctest::Contains("non-increasing transit day"),
                         ScenarioError);
  }
  SUBCASE("declared total must match port stocks") {
    auto text = base;
    text.replace(text.find("[ports]"), 7, "total_containers 11\n[ports]");
    CHECK_THROWS_WITH_AS(parse_scenario(text), doctest::Contains("container-sum mismatch"),
                         ScenarioError);
  }
  SUBCASE("unserved demand lane") {
    auto text = two_route_text(10, 10);
    text += "X Y 1\n";
    CHECK_THROWS_AS(parse_scenario(text), ScenarioError);
  }
  SUBCASE("malformed numbers carry the line") {
    auto text = base;
    text.replace(text.find("episode_days 10"), 15, "episode_days ten");
    try {
      parse_scenario(text);
      FAIL("expected an error");
    } catch (const ScenarioError& e) {
      CHECK(e.line() == 2);
    }
  }
}

TEST_CASE("container scale keeps the sum exact") {
  auto cfg = builtin_scenario();
  for (double scale : {0.8, 1.0, 1.5, 0.37}) {
    cfg.container_scale = scale;
    const auto stock = cfg.scaled_initial_stock();
    CHECK(std::accumulate(stock.begin(), stock.end(), 0) == cfg.effective_total());
    CHECK(cfg.effective_total() == static_cast<int>(std::llround(3000 * scale)));
    for (size_t i = 0; i < stock.size(); ++i)
      CHECK(std::abs(stock[i] - cfg.ports[i].initial_empty * scale) < 1.0);
  }
}

TEST_CASE("default start offsets are evenly spaced") {
  CHECK(default_start_offsets(94, 14)[1] == 6);
  CHECK(default_start_offsets(94, 14)[13] == 87);
  CHECK(default_start_offsets(19, 3) == std::vector<int>{0, 6, 12});
  CHECK(default_start_offsets(5, 1) == std::vector<int>{0});
}

TEST_CASE("timetable is periodic and complete") {
  const auto world = builtin_world();
  const auto& cfg = world->config;
  const auto& tt = world->timetable;
  size_t expected_total = 0;
  for (size_t v = 0; v < cfg.vessels.size(); ++v) {
    const auto& route = cfg.routes[cfg.vessels[v].route_index];
    for (size_t s = 0; s < route.stops.size(); ++s) {
      // Count days in [0, T) congruent to the stop's phase, by brute force.
      const int phase = (cfg.vessels[v].start_offset + route.stops[s].offset) % route.cycle_days;
      std::vector<int> days;
      for (int d = 0; d < cfg.episode_days; ++d)
        if (d % route.cycle_days == phase) days.push_back(d);
      std::vector<int> got;
      for (const auto& e : tt.vessel_events[v])
        if (e.stop == static_cast<int>(s)) got.push_back(e.day);
      CHECK(got == days);
      expected_total += days.size();
    }
    for (size_t k = 1; k < tt.vessel_events[v].size(); ++k)
      CHECK(tt.vessel_events[v][k - 1].day < tt.vessel_events[v][k].day);
  }
  CHECK(tt.ordered.size() == expected_total);
}

TEST_CASE("port and vessel views partition the global order") {
  const auto world = builtin_world();
  const auto& cfg = world->config;
  const auto& tt = world->timetable;
  size_t from_ports = 0, from_vessels = 0;
  for (const auto& pe : tt.port_events) from_ports += pe.size();
  for (const auto& ve : tt.vessel_events) from_vessels += ve.size();
  CHECK(from_ports == tt.ordered.size());
  CHECK(from_vessels == tt.ordered.size());
  for (size_t i = 0; i < tt.ordered.size(); ++i) {
    const auto& e = tt.ordered[i];
    CHECK(e.seq == i);
    CHECK(std::count(tt.port_events[e.port].begin(), tt.port_events[e.port].end(), e) == 1);
    CHECK(std::count(tt.vessel_events[e.vessel].begin(), tt.vessel_events[e.vessel].end(), e) == 1);
    if (i > 0) {
      const auto& p = tt.ordered[i - 1];
      const auto key = [&](const CallEvent& c) {
        return std::make_tuple(c.day, cfg.ports[c.port].code, cfg.vessels[c.vessel].id);
      };
      CHECK(key(p) < key(e));
    }
  }
}

TEST_CASE("previous event lookup") {
  const auto world = world_from(shuttle_text(12, 10, 5, 5, 4, 2));
  const auto& tt = world->timetable;
  // A is called on days 0, 4, 8; B on 2, 6, 10.
  CHECK_FALSE(tt.prev_port_event(0, 0).has_value());
  CHECK(tt.prev_port_event(0, 5) == 4);
  CHECK(tt.prev_port_event(1, 10) == 6);
  CHECK(tt.prev_vessel_event(0, 3) == 2);
}

TEST_CASE("explicit vessels override the generated fleet") {
  std::string text = shuttle_text(12, 10, 5, 5, 4, 2, 0, 0, 2);
  text += "[vessels]\nbig R 30 1\nsmall R 5\n";
  const auto cfg = parse_scenario(text);
  REQUIRE(cfg.vessels.size() == 2);
  CHECK(cfg.vessels[0].id == "big");
  CHECK(cfg.vessels[0].capacity == 30);
  CHECK(cfg.vessels[0].start_offset == 1);
  CHECK(cfg.vessels[1].start_offset == 2);
}
