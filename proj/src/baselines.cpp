#include "ecr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ecr {

long ic_move(long stock, long safety, long excess, long free_slots, long vessel_empties) {
  if (stock > excess) return std::max(0L, std::min({stock - excess, free_slots, stock}));
  if (stock < safety) return -std::max(0L, std::min(safety - stock, vessel_empties));
  return 0;
}

double move_to_action(long x, const StagePreview& p) {
  if (x > 0) {
    const long room = std::min(p.free_after_laden, p.port_stock);
    if (room <= 0) return 0.0;
    return std::min(1.0, static_cast<double>(x) / static_cast<double>(room));
  }
  if (x < 0) {
    if (p.vessel_empties <= 0) return 0.0;
    return std::max(-1.0, static_cast<double>(x) / static_cast<double>(p.vessel_empties));
  }
  return 0.0;
}

double InventoryControl::act(const Engine& engine, const ArrivalEvent& event) {
  const StagePreview p = engine.preview(event);
  const long x = ic_move(p.port_stock, table_.safety[event.port], table_.excess[event.port],
                         p.free_after_laden, p.vessel_empties);
  return move_to_action(x, p);
}

long percentile_nearest_rank(std::vector<long> values, int pct) {
  if (values.empty()) return 0;
  if (pct < 0 || pct > 100) throw std::invalid_argument("percentile outside [0, 100]");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  size_t rank = static_cast<size_t>(std::ceil(pct / 100.0 * static_cast<double>(n)));
  rank = std::clamp<size_t>(rank, 1, n);
  return values[rank - 1];
}

std::vector<int> typical_call_gaps(const World& world) {
  std::vector<int> gaps;
  for (const auto& calls : world.timetable.port_events) {
    std::vector<int> days;
    for (const auto& c : calls)
      if (days.empty() || days.back() != c.day) days.push_back(c.day);
    std::vector<int> diff;
    for (size_t i = 1; i < days.size(); ++i) diff.push_back(days[i] - days[i - 1]);
    if (diff.empty()) {
      gaps.push_back(1);
      continue;
    }
    std::sort(diff.begin(), diff.end());
    gaps.push_back(diff[(diff.size() - 1) / 2]);
  }
  return gaps;
}

ThresholdTable fit_thresholds(const World& world, const std::vector<std::vector<Order>>& traces,
                              int p, int q) {
  if (!(0 <= p && p <= q && q <= 100)) throw std::invalid_argument("need 0 <= p <= q <= 100");
  const auto& cfg = world.config;
  const size_t P = cfg.ports.size();
  const auto gaps = typical_call_gaps(world);
  std::vector<std::vector<long>> samples(P);
  for (const auto& trace : traces) {
    const SndForecast fc = snd_profile(trace, cfg, world.timetable, cfg.t_ret);
    for (size_t i = 0; i < P; ++i) {
      const int g = gaps[i];
      long window = 0;
      for (int d = 0; d < fc.horizon; ++d) {
        window += fc.demand[i][d] - fc.supply[i][d];
        if (d >= g) window -= fc.demand[i][d - g] - fc.supply[i][d - g];
        if (d + 1 >= g) samples[i].push_back(window);
      }
    }
  }
  ThresholdTable t;
  for (size_t i = 0; i < P; ++i) {
    t.safety.push_back(std::max(0L, percentile_nearest_rank(samples[i], p)));
    t.excess.push_back(std::max(0L, percentile_nearest_rank(samples[i], q)));
  }
  return t;
}

Engine run_episode(std::shared_ptr<const World> world, Policy& policy, std::vector<Order> orders,
                   bool log_trajectory) {
  Engine engine(std::move(world));
  engine.set_trajectory_logging(log_trajectory);
  engine.reset(std::move(orders));
  policy.begin_episode(engine);
  while (auto ev = engine.advance_until_event()) engine.execute_action(*ev, policy.act(engine, *ev));
  return engine;
}

ThresholdSearch search_thresholds(std::shared_ptr<const World> world,
                                  const std::vector<std::vector<Order>>& fit_traces,
                                  const std::vector<std::vector<Order>>& eval_traces, int step) {
  if (step < 1 || step > 100) throw std::invalid_argument("grid step must lie in [1, 100]");
  ThresholdSearch best;
  bool have = false;
  for (int p = 0; p <= 100; p += step) {
    for (int q = p; q <= 100; q += step) {
      ThresholdTable table = fit_thresholds(*world, fit_traces, p, q);
      InventoryControl ic(table);
      double sum = 0;
      for (const auto& trace : eval_traces)
        sum += fulfillment_ratio(run_episode(world, ic, trace).state());
      const double mean = eval_traces.empty() ? 1.0 : sum / eval_traces.size();
      if (!have || mean > best.mean_ratio) {
        best = {p, q, mean, std::move(table)};
        have = true;
      }
    }
  }
  return best;
}

void RollingConfig::validate() const {
  if (!(1 <= execute_days && execute_days <= horizon_days))
    throw std::invalid_argument("rolling horizon needs 1 <= execute_days <= horizon_days");
  if (big_m < 1) throw std::invalid_argument("big_m must be positive");
}

OnlineLp::OnlineLp(std::shared_ptr<const World> world, RollingConfig cfg,
                   std::optional<ThresholdTable> reserve)
    : world_(std::move(world)), cfg_(cfg), reserve_(std::move(reserve)) {
  cfg_.validate();
}

void OnlineLp::begin_episode(const Engine&) {
  plan_.reset();
  solves_ = 0;
}

TimeExpandedNetwork OnlineLp::build_network(const Engine& engine, const ArrivalEvent& event) const {
  const auto& cfg = world_->config;
  const auto& tt = world_->timetable;
  const EnvState& s = engine.state();
  const int t0 = s.day;
  const int end = std::min(cfg.episode_days, t0 + 1 + cfg_.horizon_days);

  SndForecast fc = empty_forecast(cfg, tt, cfg.episode_days);
  for (const auto& o : engine.orders()) {
    if (o.day <= t0 || o.day >= end) continue;
    fc.demand[o.origin][o.day] += o.quantity;
    trace_laden({o.origin, o.dest, o.quantity, o.day, -1, 0, 0}, cfg, tt, cfg.t_ret, fc);
  }
  for (size_t p = 0; p < cfg.ports.size(); ++p)
    for (const auto& lot : s.laden_yard[p])
      trace_laden({static_cast<int>(p), lot.dest, lot.count, t0, -1, 0, event.call}, cfg, tt,
                  cfg.t_ret, fc);
  for (size_t v = 0; v < cfg.vessels.size(); ++v)
    for (size_t dest = 0; dest < cfg.ports.size(); ++dest)
      if (s.vessel_ladens[v][dest] > 0)
        trace_laden({-1, static_cast<int>(dest), s.vessel_ladens[v][dest], t0, static_cast<int>(v),
                     s.vessel_next_event[v], 0},
                    cfg, tt, cfg.t_ret, fc);
  for (const auto& r : s.pending_returns)
    if (r.day > t0 && static_cast<size_t>(r.day) < fc.supply[r.port].size())
      fc.supply[r.port][r.day] += r.count;

  PlanningInput in;
  in.start_day = t0 + 1;
  in.end_day = end;
  in.port_stock = s.port_stock;
  in.vessel_empties = s.vessel_empties;
  in.vessel_first_event = s.vessel_next_event;
  if (reserve_) in.reserve = reserve_->safety;
  in.big_m = cfg_.big_m;
  if (in.start_day > in.end_day) in.start_day = in.end_day;
  return build_time_expanded(*world_, fc, in);
}

void OnlineLp::resolve(const Engine& engine, const ArrivalEvent& event) {
  const TimeExpandedNetwork ten = build_network(engine, event);
  plan_ = extract_plan(ten, solve_min_cost_flow(ten.net));
  plan_day_ = event.day;
  ++solves_;
}

double OnlineLp::act(const Engine& engine, const ArrivalEvent& event) {
  if (!plan_ || event.day >= plan_day_ + cfg_.execute_days ||
      !plan_->x.contains({event.vessel, event.k}))
    resolve(engine, event);
  return move_to_action(plan_->at(event.vessel, event.k), engine.preview(event));
}

OfflineResult offline_optimal(const World& world, const std::vector<Order>& orders,
                              long long big_m) {
  OfflineResult r;
  for (const auto& o : orders)
    if (o.day < world.config.episode_days) r.ordered += o.quantity;
  const SndForecast fc = snd_profile(orders, world.config, world.timetable, world.config.t_ret);
  const TimeExpandedNetwork ten = build_time_expanded(world, fc, offline_input(world, big_m));
  r.plan = extract_plan(ten, solve_min_cost_flow(ten.net));
  r.shortage = r.plan.shortage;
  r.ratio = r.ordered == 0 ? 1.0 : 1.0 - static_cast<double>(r.shortage) / r.ordered;
  return r;
}

}  // namespace ecr
