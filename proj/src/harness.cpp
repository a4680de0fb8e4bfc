#include "ecr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <mutex>
#include <thread>

#include "ecr/ordergen.hpp"

namespace ecr {

double ratio_of(double ordered, double failed) {
  if (failed > ordered) throw std::invalid_argument("failed exceeds ordered");
  return ordered > 0 ? (ordered - failed) / ordered : 1.0;
}

EpisodeReport make_report(const Engine& engine, const std::string& policy, uint64_t seed) {
  const auto& cfg = engine.world().config;
  const auto& s = engine.state();
  EpisodeReport r;
  r.policy = policy;
  r.seed = seed;
  r.fulfillment_ratio = fulfillment_ratio(s);
  for (size_t i = 0; i < cfg.ports.size(); ++i) {
    const auto& c = s.counters[i];
    PortRow row;
    row.port = cfg.ports[i].code;
    row.region = cfg.ports[i].region;
    row.total = static_cast<double>(c.ordered);
    row.failed = static_cast<double>(c.failed);
    row.imported_laden = static_cast<double>(c.imported_laden);
    row.imported_empty = static_cast<double>(c.imported_empty);
    row.exported_laden = static_cast<double>(c.exported_laden);
    row.exported_empty = static_cast<double>(c.exported_empty);
    row.ratio = ratio_of(row.total, row.failed);
    r.ports.push_back(std::move(row));
  }
  return r;
}

RunSummary summarize(const std::string& policy, const std::vector<EpisodeReport>& reports) {
  RunSummary s;
  s.policy = policy;
  s.episodes = reports.size();
  if (reports.empty()) return s;
  double sum = 0;
  for (const auto& r : reports) sum += r.fulfillment_ratio;
  s.mean = sum / static_cast<double>(reports.size());
  if (reports.size() >= 2) {
    double ss = 0;
    for (const auto& r : reports) ss += (r.fulfillment_ratio - s.mean) * (r.fulfillment_ratio - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(reports.size() - 1));
  }
  return s;
}

std::string format_percent(const RunSummary& s) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << 100.0 * s.mean;
  if (s.stddev) out << " ± " << 100.0 * *s.stddev;
  return out.str();
}

int worker_count(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* cap = std::getenv("ECR_LAB_THREADS")) {
    const int c = std::atoi(cap);
    if (c >= 1) n = std::min(n, c);
  }
  return n;
}

Evaluation run_evaluation(std::shared_ptr<const World> world, const DemandModel& model,
                          const PolicyFactory& make_policy, const std::vector<uint64_t>& seeds,
                          int threads) {
  Evaluation ev;
  ev.episodes.resize(seeds.size());
  const int workers = std::min<int>(worker_count(threads), std::max<size_t>(1, seeds.size()));
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto work = [&] {
    try {
      auto policy = make_policy();
      for (size_t i = next++; i < seeds.size(); i = next++) {
        auto orders = generate_orders(model, world->config, world->config.episode_days, seeds[i]);
        Engine engine(world);
        engine.reset(std::move(orders));
        policy->begin_episode(engine);
        while (auto e = engine.advance_until_event())
          engine.execute_action(*e, policy->act(engine, *e));
        ev.episodes[i] = make_report(engine, policy->name(), seeds[i]);
      }
    } catch (...) {
      std::lock_guard lock(failure_lock);
      if (!failure) failure = std::current_exception();
      next = seeds.size();
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  ev.summary = summarize(seeds.empty() ? make_policy()->name() : ev.episodes.front().policy,
                         ev.episodes);
  return ev;
}

std::vector<uint64_t> evaluation_seeds(uint64_t base, int count) {
  std::vector<uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(evaluation_seed(base, i));
  return out;
}

std::vector<SweepRow> staleness_sweep(std::shared_ptr<const World> world, const DemandModel& model,
                                      const PolicyBundle& bundle, const std::vector<int>& ks,
                                      const std::vector<uint64_t>& seeds, int threads) {
  if (bundle.features.level != AwarenessLevel::diplomatic)
    throw std::invalid_argument("staleness sweep needs a diplomatic-level policy");
  std::vector<SweepRow> rows;
  for (int k : ks) {
    if (k < 0) throw std::invalid_argument("staleness k must be >= 0");
    PolicyBundle delayed = bundle;
    delayed.features.staleness_k = k;
    delayed.layout_hash = state_layout(world->config, delayed.features).hash();
    auto factory = [&] { return std::make_unique<MarlPolicy>(delayed, world); };
    auto ev = run_evaluation(world, model, factory, seeds, threads);
    rows.push_back({k, ev.summary});
  }
  return rows;
}

std::vector<PortRow> regional_statistics(const std::vector<EpisodeReport>& reports) {
  std::vector<PortRow> out;
  if (reports.empty()) return out;
  out = reports.front().ports;
  for (auto& row : out) row.total = row.failed = row.imported_laden = row.imported_empty =
      row.exported_laden = row.exported_empty = row.ratio = 0;
  const double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    if (r.ports.size() != out.size()) throw std::invalid_argument("reports cover different ports");
    for (size_t i = 0; i < out.size(); ++i) {
      const auto& p = r.ports[i];
      out[i].total += p.total / n;
      out[i].failed += p.failed / n;
      out[i].imported_laden += p.imported_laden / n;
      out[i].imported_empty += p.imported_empty / n;
      out[i].exported_laden += p.exported_laden / n;
      out[i].exported_empty += p.exported_empty / n;
      out[i].ratio += p.ratio / n;
    }
  }
  return out;
}

// --- CSV -------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void put_row(std::ostream& out, const PortRow& p) {
  out << p.port << ',' << p.region << ',' << p.total << ',' << p.failed << ',' << p.imported_laden
      << ',' << p.imported_empty << ',' << p.exported_laden << ',' << p.exported_empty << ','
      << p.ratio;
}

constexpr const char* kPortColumns =
    "port,region,total,failed,imported_laden,imported_empty,exported_laden,exported_empty,ratio";

}  // namespace

void write_summary_csv(std::ostream& out, const std::vector<RunSummary>& rows) {
  out << "policy,episodes,mean,std,mean_pct,std_pct\n";
  for (const auto& r : rows) {
    out << r.policy << ',' << r.episodes << ',' << std::setprecision(17) << r.mean << ',';
    if (r.stddev) out << *r.stddev;
    out << ',' << std::fixed << std::setprecision(2) << 100 * r.mean << ',';
    if (r.stddev) out << 100 * *r.stddev;
    out << std::defaultfloat << '\n';
  }
}

void write_episode_csv(std::ostream& out, const std::vector<EpisodeReport>& reports) {
  out << "policy,seed,episode_ratio," << kPortColumns << '\n';
  out << std::setprecision(17);
  for (const auto& r : reports) {
    for (const auto& p : r.ports) {
      out << r.policy << ',' << r.seed << ',' << r.fulfillment_ratio << ',';
      put_row(out, p);
      out << '\n';
    }
  }
}

std::vector<EpisodeReport> read_episode_csv(std::istream& in) {
  std::vector<EpisodeReport> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 12) throw std::runtime_error("episode csv line " + std::to_string(lineno) +
                                                 ": expected 12 fields");
    const uint64_t seed = std::stoull(f[1]);
    if (out.empty() || out.back().policy != f[0] || out.back().seed != seed) {
      out.push_back({f[0], seed, std::stod(f[2]), {}});
    }
    PortRow p;
    p.port = f[3];
    p.region = f[4];
    p.total = std::stod(f[5]);
    p.failed = std::stod(f[6]);
    p.imported_laden = std::stod(f[7]);
    p.imported_empty = std::stod(f[8]);
    p.exported_laden = std::stod(f[9]);
    p.exported_empty = std::stod(f[10]);
    p.ratio = std::stod(f[11]);
    out.back().ports.push_back(std::move(p));
  }
  return out;
}

void write_regional_csv(std::ostream& out, const std::string& policy,
                        const std::vector<PortRow>& rows, bool header) {
  if (header) out << "policy," << kPortColumns << '\n';
  out << std::setprecision(10);
  for (const auto& p : rows) {
    out << policy << ',';
    put_row(out, p);
    out << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "k,episodes,mean,std\n" << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.k << ',' << r.summary.episodes << ',' << r.summary.mean << ',';
    if (r.summary.stddev) out << *r.summary.stddev;
    out << '\n';
  }
}

}  // namespace ecr
