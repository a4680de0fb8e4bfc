#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "ecr/ordergen.hpp"
#include "helpers.hpp"

using namespace ecr;
using namespace ecr::testing;

TEST_CASE("same seed, same trace; different seed, different trace") {
  const auto cfg = builtin_scenario();
  const auto model = DemandModel::from_scenario(cfg);
  const auto a = generate_orders(model, cfg, 60, 7);
  const auto b = generate_orders(model, cfg, 60, 7);
  const auto c = generate_orders(model, cfg, 60, 8);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
}

TEST_CASE("orders are well formed and sorted") {
  const auto cfg = builtin_scenario();
  const auto model = DemandModel::from_scenario(cfg);
  const auto orders = generate_orders(model, cfg, 100, 3);
  REQUIRE_FALSE(orders.empty());
  for (size_t i = 0; i < orders.size(); ++i) {
    const auto& o = orders[i];
    CHECK(o.quantity >= 1);
    CHECK(o.origin != o.dest);
    CHECK(model.pair_rates.count({o.origin, o.dest}) == 1);
    if (i > 0) {
      const auto& p = orders[i - 1];
      const auto key = [&](const Order& x) {
        return std::make_tuple(x.day, cfg.ports[x.origin].code, cfg.ports[x.dest].code);
      };
      CHECK(key(p) <= key(o));
    }
  }
}

TEST_CASE("daily lane totals follow the Poisson law") {
  const auto cfg = builtin_scenario();
  const auto model = DemandModel::from_scenario(cfg);
  const int days = 400;
  double expected = 0;
  for (const auto& [lane, rate] : model.pair_rates) expected += rate * days;
  for (uint64_t seed : {11u, 12u, 13u}) {
    const auto orders = generate_orders(model, cfg, days, seed);
    long total = 0;
    for (const auto& o : orders) total += o.quantity;
    // A sum of Poisson counts has variance equal to its mean.
    CHECK(std::abs(total - expected) <= 3.0 * std::sqrt(expected));
  }

  // Dispersion index of the busiest lane: variance / mean close to 1.
  auto busiest = std::max_element(model.pair_rates.begin(), model.pair_rates.end(),
                                  [](const auto& x, const auto& y) { return x.second < y.second; });
  std::vector<double> daily;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<double> per_day(days, 0);
    for (const auto& o : generate_orders(model, cfg, days, 100 + seed))
      if (o.origin == busiest->first.first && o.dest == busiest->first.second)
        per_day[o.day] += o.quantity;
    daily.insert(daily.end(), per_day.begin(), per_day.end());
  }
  const double mean = std::accumulate(daily.begin(), daily.end(), 0.0) / daily.size();
  double var = 0;
  for (double x : daily) var += (x - mean) * (x - mean);
  var /= daily.size() - 1;
  CHECK(std::abs(mean - busiest->second) <= 3.0 * std::sqrt(busiest->second / daily.size()));
  CHECK(var / mean == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("trace round trip") {
  const auto cfg = builtin_scenario();
  const auto orders = generate_orders(DemandModel::from_scenario(cfg), cfg, 30, 5);
  std::stringstream buf;
  write_order_trace(buf, orders, cfg);
  CHECK(read_order_trace(buf, cfg) == orders);

  std::istringstream bad("3 SIN ZZZ 4\n");
  CHECK_THROWS_AS(read_order_trace(bad, cfg), std::invalid_argument);
  std::istringstream comment("# header\n\n2 SIN HKG 1 # trailing\n");
  const auto parsed = read_order_trace(comment, cfg);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].day == 2);
}

TEST_CASE("laden tracing on a shuttle") {
  // One vessel: A on days 0, 4, 8, ...; B on days 2, 6, 10, ...
  const auto world = world_from(shuttle_text(20, 50, 10, 10, 4, 2, 1, 1));
  const auto& cfg = world->config;
  const auto& tt = world->timetable;
  const int A = 0, B = 1;

  SUBCASE("order waits for the next call at its origin") {
    const auto fc = snd_profile({{1, A, B, 5}}, cfg, tt, cfg.t_ret);
    CHECK(fc.demand[A][1] == 5);
    // Boards on day 4 (event 2), discharged at B on day 6, empty again on day 7.
    CHECK(fc.laden_load[0][2] == 5);
    CHECK(fc.laden_load[0][3] == 0);
    CHECK(fc.supply[B][7] == 5);
    long supply = 0;
    for (auto s : fc.supply[B]) supply += s;
    CHECK(supply == 5);
  }
  SUBCASE("same-day call is usable") {
    const auto fc = snd_profile({{4, A, B, 2}}, cfg, tt, cfg.t_ret);
    CHECK(fc.laden_load[0][2] == 2);
    CHECK(fc.supply[B][7] == 2);
  }
  SUBCASE("yard batches skip calls already processed") {
    SndForecast fc = empty_forecast(cfg, tt, cfg.episode_days);
    const size_t after_day4 = tt.vessel_events[0][2].seq + 1;
    CHECK(trace_laden({A, B, 3, 4, -1, 0, after_day4}, cfg, tt, cfg.t_ret, fc));
    CHECK(fc.laden_load[0][2] == 0);
    CHECK(fc.laden_load[0][4] == 3);
    CHECK(fc.supply[B][11] == 3);
  }
  SUBCASE("aboard batches ride to their destination") {
    SndForecast fc = empty_forecast(cfg, tt, cfg.episode_days);
    CHECK(trace_laden({-1, A, 4, 0, 0, 1}, cfg, tt, cfg.t_ret, fc));
    // Next call is B (event 1) where nothing leaves; A at event 2 discharges.
    CHECK(fc.laden_load[0][1] == 4);
    CHECK(fc.supply[A][5] == 4);
  }
  SUBCASE("no call before the horizon") {
    SndForecast fc = empty_forecast(cfg, tt, cfg.episode_days);
    CHECK_FALSE(trace_laden({A, B, 1, 19, -1, 0, 0}, cfg, tt, cfg.t_ret, fc));
  }
}

TEST_CASE("unserved lanes are rejected") {
  const auto world = world_from(two_route_text(30, 20));
  const auto& cfg = world->config;
  const Order cross{0, cfg.port_index("X"), cfg.port_index("Y"), 1};
  CHECK_THROWS_AS(snd_profile({cross}, cfg, world->timetable, 1), std::invalid_argument);
}

TEST_CASE("forecast totals match the trace") {
  const auto world = builtin_world();
  const auto& cfg = world->config;
  const auto orders = generate_orders(DemandModel::from_scenario(cfg), cfg, cfg.episode_days, 9);
  const auto fc = snd_profile(orders, cfg, world->timetable, cfg.t_ret);
  long ordered = 0, demand = 0;
  for (const auto& o : orders) ordered += o.quantity;
  for (const auto& row : fc.demand) demand += std::accumulate(row.begin(), row.end(), 0L);
  CHECK(demand == ordered);
  long supply = 0;
  for (const auto& row : fc.supply) supply += std::accumulate(row.begin(), row.end(), 0L);
  CHECK(supply <= ordered);
  CHECK(supply > ordered * 8 / 10);
}
