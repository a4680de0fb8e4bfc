#include "ecr/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ecr {

long round_half_away(double x) { return std::lround(x); }

long EnvState::vessel_laden_total(int vessel) const {
  const auto& l = vessel_ladens[vessel];
  return std::accumulate(l.begin(), l.end(), 0L);
}

namespace {

// Last history row that is final for a state: today's shortage row is final
// once the day is open.
int last_shortage_row(const EnvState& s) { return s.day_open ? s.day : s.day - 1; }

bool same_history(const EnvState& a, const EnvState& b) {
  if (!a.history || !b.history) return a.history == b.history;
  const int rows = last_shortage_row(a);
  for (int d = 0; d <= rows; ++d) {
    if (a.history->shortage[d] != b.history->shortage[d]) return false;
    if (a.history->cum_shortage[d] != b.history->cum_shortage[d]) return false;
  }
  for (int d = 0; d < a.day; ++d)
    if (a.history->end_stock[d] != b.history->end_stock[d]) return false;
  return true;
}

}  // namespace

bool same_state(const EnvState& a, const EnvState& b) {
  return a.day == b.day && a.day_open == b.day_open && a.awaiting_action == b.awaiting_action &&
         a.next_call == b.next_call && a.order_cursor == b.order_cursor &&
         a.port_stock == b.port_stock && a.yesterday_stock == b.yesterday_stock &&
         a.pending_returns == b.pending_returns && a.laden_yard == b.laden_yard &&
         a.vessel_next_event == b.vessel_next_event && a.vessel_empties == b.vessel_empties &&
         a.vessel_ladens == b.vessel_ladens && a.counters == b.counters && same_history(a, b);
}

Snapshot::Snapshot(ArrivalEvent event, EnvState state)
    : event_(event), state_(std::move(state)) {}

long Snapshot::past_stock(int port, int past_day) const {
  if (past_day < 0 || past_day >= state_.day)
    throw std::out_of_range("past_stock: day " + std::to_string(past_day) + " is not in the past");
  return state_.history->end_stock[past_day][port];
}

long Snapshot::cum_shortage(int port, int through_day) const {
  through_day = std::min(through_day, last_shortage_row(state_));
  if (through_day < 0) return 0;
  return state_.history->cum_shortage[through_day][port];
}

long Snapshot::shortage_between(int port, int from_day, int to_day) const {
  return cum_shortage(port, to_day) - cum_shortage(port, from_day);
}

bool Snapshot::operator==(const Snapshot& other) const {
  return event_ == other.event_ && same_state(state_, other.state_);
}

Engine::Engine(std::shared_ptr<const World> world) : world_(std::move(world)) { reset({}); }

void Engine::reset(std::vector<Order> orders) {
  const auto& cfg = world_->config;
  const size_t P = cfg.ports.size();
  const size_t V = cfg.vessels.size();
  const size_t T = static_cast<size_t>(cfg.episode_days);
  orders_ = std::move(orders);
  std::stable_sort(orders_.begin(), orders_.end(),
                   [](const Order& a, const Order& b) { return a.day < b.day; });

  EnvState s;
  const auto init = cfg.scaled_initial_stock();
  s.port_stock.assign(init.begin(), init.end());
  s.yesterday_stock = s.port_stock;
  s.laden_yard.assign(P, {});
  s.vessel_next_event.assign(V, 0);
  s.vessel_empties.assign(V, 0);
  s.vessel_ladens.assign(V, std::vector<long>(P, 0));
  s.counters.assign(P, {});
  s.history = std::make_shared<History>();
  s.history->end_stock.assign(T, std::vector<long>(P, 0));
  s.history->shortage.assign(T, std::vector<long>(P, 0));
  s.history->cum_shortage.assign(T, std::vector<long>(P, 0));
  state_ = std::move(s);
  pending_.reset();
  log_.clear();
}

bool Engine::done() const { return state_.day >= world_->config.episode_days; }

void Engine::credit_returns() {
  auto& s = state_;
  size_t n = 0;
  while (n < s.pending_returns.size() && s.pending_returns[n].day <= s.day) {
    s.port_stock[s.pending_returns[n].port] += s.pending_returns[n].count;
    ++n;
  }
  s.pending_returns.erase(s.pending_returns.begin(), s.pending_returns.begin() + n);
}

void Engine::open_day() {
  auto& s = state_;
  const int d = s.day;
  s.yesterday_stock = s.port_stock;
  auto& shortage = s.history->shortage[d];
  while (s.order_cursor < orders_.size() && orders_[s.order_cursor].day < d) ++s.order_cursor;
  while (s.order_cursor < orders_.size() && orders_[s.order_cursor].day == d) {
    const Order& o = orders_[s.order_cursor++];
    auto& c = s.counters[o.origin];
    c.ordered += o.quantity;
    if (o.quantity > s.port_stock[o.origin]) {
      c.failed += o.quantity;
      shortage[o.origin] += o.quantity;
    } else {
      s.port_stock[o.origin] -= o.quantity;
      s.laden_yard[o.origin].push_back({d, o.dest, o.quantity});
    }
  }
  auto& cum = s.history->cum_shortage[d];
  for (size_t p = 0; p < cum.size(); ++p)
    cum[p] = shortage[p] + (d > 0 ? s.history->cum_shortage[d - 1][p] : 0);
  credit_returns();
  s.day_open = true;
}

void Engine::close_day() {
  auto& s = state_;
  s.history->end_stock[s.day] = s.port_stock;
  ++s.day;
  s.day_open = false;
}

std::optional<ArrivalEvent> Engine::advance_until_event() {
  if (state_.awaiting_action) throw std::logic_error("advance_until_event: pending event not executed");
  const auto& calls = world_->timetable.ordered;
  const int T = world_->config.episode_days;
  while (state_.day < T) {
    if (!state_.day_open) open_day();
    if (state_.next_call < calls.size() && calls[state_.next_call].day == state_.day) {
      const CallEvent& c = calls[state_.next_call];
      ArrivalEvent ev{c.day, c.port, c.vessel, state_.vessel_next_event[c.vessel], state_.next_call};
      state_.awaiting_action = true;
      pending_ = ev;
      return ev;
    }
    close_day();
  }
  return std::nullopt;
}

StagePreview Engine::preview(const ArrivalEvent& ev) const {
  const auto& s = state_;
  const auto& cfg = world_->config;
  const int cap = cfg.vessels[ev.vessel].capacity;
  const int route = cfg.vessels[ev.vessel].route_index;
  long laden = s.vessel_laden_total(ev.vessel) - s.vessel_ladens[ev.vessel][ev.port];
  long free = cap - laden - s.vessel_empties[ev.vessel];
  for (const auto& lot : s.laden_yard[ev.port]) {
    if (free <= 0) break;
    if (cfg.route_serves(route, lot.dest)) free -= std::min<long>(free, lot.count);
  }
  return {s.port_stock[ev.port], s.vessel_empties[ev.vessel], std::max(0L, free), cap};
}

ActionOutcome Engine::execute_action(const ArrivalEvent& ev, double a) {
  if (!(a >= -1.0 && a <= 1.0)) throw std::invalid_argument("action outside [-1, 1]");
  if (!state_.awaiting_action || !pending_ || !(*pending_ == ev))
    throw std::logic_error("execute_action: event is not the pending event");
  auto& s = state_;
  const auto& cfg = world_->config;
  const int v = ev.vessel;
  const int port = ev.port;
  const int route = cfg.vessels[v].route_index;
  const long cap = cfg.vessels[v].capacity;
  ActionOutcome out;

  // Stage 1: discharge ladens bound here; they return as empties after t_ret.
  if (long n = s.vessel_ladens[v][port]; n > 0) {
    s.vessel_ladens[v][port] = 0;
    out.discharged_laden = n;
    s.counters[port].imported_laden += n;
    const int due = s.day + cfg.t_ret;
    if (due <= s.day) {
      s.port_stock[port] += n;
    } else {
      ReturnLot lot{due, port, static_cast<int>(n)};
      auto it = std::upper_bound(s.pending_returns.begin(), s.pending_returns.end(), lot,
                                 [](const ReturnLot& x, const ReturnLot& y) { return x.day < y.day; });
      s.pending_returns.insert(it, lot);
    }
  }

  // Stage 2: empty discharge.
  if (a < 0) {
    const long n = std::min(s.vessel_empties[v], round_half_away(-a * s.vessel_empties[v]));
    s.vessel_empties[v] -= n;
    s.port_stock[port] += n;
    out.discharged_empty = n;
    s.counters[port].imported_empty += n;
  }

  // Stage 3: laden loading, FIFO by received day; lots may split.
  long free = cap - s.vessel_laden_total(v) - s.vessel_empties[v];
  auto& yard = s.laden_yard[port];
  for (auto& lot : yard) {
    if (free <= 0) break;
    if (!cfg.route_serves(route, lot.dest)) continue;
    const long take = std::min<long>(free, lot.count);
    lot.count -= static_cast<int>(take);
    s.vessel_ladens[v][lot.dest] += take;
    free -= take;
    out.loaded_laden += take;
  }
  yard.erase(std::remove_if(yard.begin(), yard.end(), [](const LadenLot& l) { return l.count == 0; }),
             yard.end());
  s.counters[port].exported_laden += out.loaded_laden;

  // Stage 4: empty loading.
  if (a > 0) {
    const long room = std::min(free, s.port_stock[port]);
    const long n = std::min(room, round_half_away(a * room));
    s.port_stock[port] -= n;
    s.vessel_empties[v] += n;
    out.loaded_empty = n;
    s.counters[port].exported_empty += n;
  }

  ++s.vessel_next_event[v];
  ++s.next_call;
  s.awaiting_action = false;
  pending_.reset();
  if (log_on_) log_.push_back({ev, a, out, s.port_stock[port], s.vessel_empties[v]});
  return out;
}

Snapshot Engine::snapshot(const ArrivalEvent& ev) const { return Snapshot(ev, state_); }

Snapshot Engine::final_snapshot() const {
  ArrivalEvent none{state_.day, -1, -1, -1, state_.next_call};
  return Snapshot(none, state_);
}

Census Engine::container_census() const {
  Census c;
  const auto& s = state_;
  for (long x : s.port_stock) c.in_ports += x;
  for (size_t v = 0; v < s.vessel_empties.size(); ++v) {
    c.on_vessels_empty += s.vessel_empties[v];
    c.on_vessels_laden += s.vessel_laden_total(static_cast<int>(v));
  }
  for (const auto& yard : s.laden_yard)
    for (const auto& lot : yard) c.in_yards += lot.count;
  for (const auto& r : s.pending_returns) c.in_returns += r.count;
  return c;
}

double fulfillment_ratio(const EnvState& state) {
  long ordered = 0, failed = 0;
  for (const auto& c : state.counters) {
    ordered += c.ordered;
    failed += c.failed;
  }
  if (ordered == 0) return 1.0;
  return static_cast<double>(ordered - failed) / static_cast<double>(ordered);
}

// --- serialization ---------------------------------------------------------

void to_json(nlohmann::json& j, const EnvState& s) {
  using nlohmann::json;
  json yard = json::array();
  for (const auto& lots : s.laden_yard) {
    json arr = json::array();
    for (const auto& l : lots) arr.push_back({l.received_day, l.dest, l.count});
    yard.push_back(std::move(arr));
  }
  json returns = json::array();
  for (const auto& r : s.pending_returns) returns.push_back({r.day, r.port, r.count});
  json counters = json::array();
  for (const auto& c : s.counters)
    counters.push_back({c.ordered, c.failed, c.imported_laden, c.imported_empty, c.exported_laden,
                        c.exported_empty});
  json shortage = json::array(), end_stock = json::array();
  if (s.history) {
    for (int d = 0; d <= last_shortage_row(s); ++d) shortage.push_back(s.history->shortage[d]);
    for (int d = 0; d < s.day; ++d) end_stock.push_back(s.history->end_stock[d]);
  }
  j = json{{"day", s.day},
           {"day_open", s.day_open},
           {"awaiting_action", s.awaiting_action},
           {"next_call", s.next_call},
           {"order_cursor", s.order_cursor},
           {"port_stock", s.port_stock},
           {"yesterday_stock", s.yesterday_stock},
           {"pending_returns", returns},
           {"laden_yard", yard},
           {"vessel_next_event", s.vessel_next_event},
           {"vessel_empties", s.vessel_empties},
           {"vessel_ladens", s.vessel_ladens},
           {"counters", counters},
           {"history_rows", static_cast<int>(s.history ? s.history->shortage.size() : 0)},
           {"shortage", shortage},
           {"end_stock", end_stock}};
}

void from_json(const nlohmann::json& j, EnvState& s) {
  s.day = j.at("day").get<int>();
  s.day_open = j.at("day_open").get<bool>();
  s.awaiting_action = j.at("awaiting_action").get<bool>();
  s.next_call = j.at("next_call").get<size_t>();
  s.order_cursor = j.at("order_cursor").get<size_t>();
  s.port_stock = j.at("port_stock").get<std::vector<long>>();
  s.yesterday_stock = j.at("yesterday_stock").get<std::vector<long>>();
  s.pending_returns.clear();
  for (const auto& r : j.at("pending_returns"))
    s.pending_returns.push_back({r[0].get<int>(), r[1].get<int>(), r[2].get<int>()});
  s.laden_yard.clear();
  for (const auto& lots : j.at("laden_yard")) {
    std::vector<LadenLot> v;
    for (const auto& l : lots) v.push_back({l[0].get<int>(), l[1].get<int>(), l[2].get<int>()});
    s.laden_yard.push_back(std::move(v));
  }
  s.vessel_next_event = j.at("vessel_next_event").get<std::vector<int>>();
  s.vessel_empties = j.at("vessel_empties").get<std::vector<long>>();
  s.vessel_ladens = j.at("vessel_ladens").get<std::vector<std::vector<long>>>();
  s.counters.clear();
  for (const auto& c : j.at("counters"))
    s.counters.push_back({c[0].get<long>(), c[1].get<long>(), c[2].get<long>(), c[3].get<long>(),
                          c[4].get<long>(), c[5].get<long>()});
  const size_t rows = j.at("history_rows").get<size_t>();
  const size_t P = s.port_stock.size();
  s.history = std::make_shared<History>();
  s.history->end_stock.assign(rows, std::vector<long>(P, 0));
  s.history->shortage.assign(rows, std::vector<long>(P, 0));
  s.history->cum_shortage.assign(rows, std::vector<long>(P, 0));
  const auto& sh = j.at("shortage");
  for (size_t d = 0; d < sh.size(); ++d) {
    s.history->shortage[d] = sh[d].get<std::vector<long>>();
    for (size_t p = 0; p < P; ++p)
      s.history->cum_shortage[d][p] =
          s.history->shortage[d][p] + (d > 0 ? s.history->cum_shortage[d - 1][p] : 0);
  }
  const auto& es = j.at("end_stock");
  for (size_t d = 0; d < es.size(); ++d) s.history->end_stock[d] = es[d].get<std::vector<long>>();
}

nlohmann::json snapshot_to_json(const Snapshot& snap) {
  const auto& e = snap.event();
  return nlohmann::json{{"event", {e.day, e.port, e.vessel, e.k, e.call}}, {"state", snap.state()}};
}

Snapshot snapshot_from_json(const nlohmann::json& j) {
  const auto& e = j.at("event");
  ArrivalEvent ev{e[0].get<int>(), e[1].get<int>(), e[2].get<int>(), e[3].get<int>(),
                  e[4].get<size_t>()};
  return Snapshot(ev, j.at("state").get<EnvState>());
}

}  // namespace ecr
