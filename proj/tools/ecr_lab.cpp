// ecr-lab: command-line front end for the simulator, learners and baselines.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "ecr/baselines.hpp"
#include "ecr/harness.hpp"
#include "ecr/learner.hpp"

namespace fs = std::filesystem;
using namespace ecr;

namespace {

struct Globals {
  std::string scenario;
  uint64_t seed = 1;
  std::string out = "out";
  double scale = 0;  // 0 keeps the scenario's own value
  int threads = 0;
};

std::shared_ptr<const World> load_world(const Globals& g) {
  ScenarioConfig cfg = g.scenario.empty() ? builtin_scenario() : load_scenario_file(g.scenario);
  if (g.scale > 0) {
    cfg.container_scale = g.scale;
    cfg.finalize();
  }
  return make_world(std::move(cfg));
}

std::ofstream open_out(const Globals& g, const std::string& name) {
  fs::create_directories(g.out);
  std::ofstream f(fs::path(g.out) / name);
  if (!f) throw std::runtime_error("cannot write " + (fs::path(g.out) / name).string());
  return f;
}

std::vector<Order> load_orders(const std::string& path, const ScenarioConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open order trace '" + path + "'");
  return read_order_trace(in, cfg);
}

ThresholdTable read_thresholds(const std::string& path, const ScenarioConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open threshold file '" + path + "'");
  ThresholdTable t;
  t.safety.assign(cfg.ports.size(), 0);
  t.excess.assign(cfg.ports.size(), 0);
  std::string code;
  long s, e;
  while (in >> code >> s >> e) {
    const int p = cfg.port_index(code);
    if (p < 0) throw std::runtime_error("threshold file: unknown port " + code);
    if (s < 0 || s > e) throw std::runtime_error("threshold file: need 0 <= safety <= excess");
    t.safety[p] = s;
    t.excess[p] = e;
  }
  return t;
}

struct BaselineOpts {
  std::string policy = "norepo";
  int horizon = 100;
  int window = 7;
  int ic_p = -1, ic_q = -1;
  std::string thresholds;
  int grid_seeds = 4;
};

ThresholdTable resolve_thresholds(std::shared_ptr<const World> world, const DemandModel& model,
                                  const Globals& g, const BaselineOpts& o) {
  if (!o.thresholds.empty()) return read_thresholds(o.thresholds, world->config);
  std::vector<std::vector<Order>> fit, held_out;
  const int days = world->config.episode_days;
  for (int i = 0; i < o.grid_seeds; ++i) {
    fit.push_back(generate_orders(model, world->config, days, mix_seed(g.seed ^ 0x1C, 2 * i)));
    held_out.push_back(generate_orders(model, world->config, days, mix_seed(g.seed ^ 0x1C, 2 * i + 1)));
  }
  if (o.ic_p >= 0 && o.ic_q >= 0) return fit_thresholds(*world, fit, o.ic_p, o.ic_q);
  const auto best = search_thresholds(world, fit, held_out);
  std::cerr << "ic thresholds: p=" << best.p << " q=" << best.q << " (held-out mean "
            << best.mean_ratio << ")\n";
  return best.table;
}

PolicyFactory baseline_factory(std::shared_ptr<const World> world, const DemandModel& model,
                               const Globals& g, const BaselineOpts& o) {
  if (o.policy == "norepo") return [] { return std::make_unique<NoReposition>(); };
  if (o.policy == "ic") {
    auto table = resolve_thresholds(world, model, g, o);
    return [table] { return std::make_unique<InventoryControl>(table); };
  }
  RollingConfig rc{o.horizon, o.window};
  if (o.policy == "online-lp")
    return [world, rc] { return std::make_unique<OnlineLp>(world, rc); };
  if (o.policy == "online-lp-ic") {
    auto table = resolve_thresholds(world, model, g, o);
    return [world, rc, table] { return std::make_unique<OnlineLp>(world, rc, table); };
  }
  throw std::runtime_error("unknown policy '" + o.policy + "'");
}

void emit_evaluation(const Globals& g, const Evaluation& ev) {
  auto s = open_out(g, "summary.csv");
  write_summary_csv(s, {ev.summary});
  auto e = open_out(g, "episodes.csv");
  write_episode_csv(e, ev.episodes);
  auto r = open_out(g, "regional.csv");
  write_regional_csv(r, ev.summary.policy, regional_statistics(ev.episodes));
  std::cout << ev.summary.policy << ": " << format_percent(ev.summary) << " % over "
            << ev.summary.episodes << " episodes\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empty-container repositioning lab"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--scenario", g.scenario, "Scenario file (default: built-in network)");
  app.add_option("--seed", g.seed, "Base seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--container-scale", g.scale, "Override container_scale")
      ->check(CLI::PositiveNumber);
  app.add_option("--threads", g.threads, "Worker threads (ECR_LAB_THREADS caps this)");

  // generate
  auto* gen = app.add_subcommand("generate", "Write order traces from the demand model");
  int gen_count = 1;
  gen->add_option("--count", gen_count, "Number of traces")->check(CLI::PositiveNumber);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run one episode and log its trajectory");
  BaselineOpts sim_opts;
  std::string sim_orders, sim_checkpoint;
  sim->add_option("--policy", sim_opts.policy, "norepo | ic | online-lp | online-lp-ic");
  sim->add_option("--checkpoint", sim_checkpoint, "Policy bundle directory (overrides --policy)");
  sim->add_option("--orders", sim_orders, "Order trace file (default: generated from --seed)");
  sim->add_option("--horizon", sim_opts.horizon);
  sim->add_option("--window", sim_opts.window);

  // train
  auto* train = app.add_subcommand("train", "Train one Q-network per route");
  TrainConfig tc;
  FeatureConfig fc;
  RewardConfig rc;
  std::string level = "diplomatic";
  train->add_option("--level", level, "self | territorial | diplomatic");
  train->add_option("--episodes", tc.episodes);
  train->add_option("--lr", tc.lr);
  train->add_option("--gamma", tc.gamma);
  train->add_option("--batch", tc.batch);
  train->add_option("--updates", tc.updates_per_episode, "Updates per episode");
  train->add_option("--capacity", tc.capacity, "Replay capacity");
  train->add_option("--eps-start", tc.eps_start);
  train->add_option("--eps-end", tc.eps_end);
  train->add_option("--eps-anneal", tc.eps_anneal_episodes, "Episodes to anneal epsilon over");
  train->add_option("--reward-scale", tc.reward_scale);
  train->add_option("--target-sync", tc.target_sync_episodes, "Episodes between target syncs");
  train->add_option("--select-every", tc.select_every,
                    "Keep the best greedy weights, checked every N episodes (0: final weights)");
  train->add_option("--select-episodes", tc.select_episodes, "Held-out traces per check");
  train->add_option("--alpha", rc.alpha);
  train->add_option("--n", fc.n, "Successor ports in the territorial state");
  train->add_option("--m", fc.m, "Future vessels in the territorial state");
  train->add_option("--k", fc.staleness_k, "Staleness of cross-route aggregates (days)");
  std::optional<double> train_norm;
  train->add_option("--norm", train_norm, "Container normalisation (default: scenario total)");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Evaluate a trained bundle greedily");
  std::string eval_checkpoint;
  int eval_episodes = 20;
  eval->add_option("--checkpoint", eval_checkpoint)->required();
  eval->add_option("--episodes", eval_episodes)->check(CLI::PositiveNumber);

  // baseline
  auto* base = app.add_subcommand("baseline", "Evaluate a non-learning policy");
  BaselineOpts bopts;
  int base_episodes = 20;
  base->add_option("--policy", bopts.policy, "norepo | ic | online-lp | online-lp-ic | offline-lp");
  base->add_option("--episodes", base_episodes)->check(CLI::PositiveNumber);
  base->add_option("--horizon", bopts.horizon, "Planning horizon H in days");
  base->add_option("--window", bopts.window, "Executed window W in days");
  base->add_option("--ic-p", bopts.ic_p, "Safety percentile (skips the grid search)");
  base->add_option("--ic-q", bopts.ic_q, "Excess percentile (skips the grid search)");
  base->add_option("--thresholds", bopts.thresholds, "File of 'PORT safety excess' lines");
  base->add_option("--grid-seeds", bopts.grid_seeds, "Traces per side of the threshold search");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Staleness or container-scale sweep of a bundle");
  std::string sweep_checkpoint, sweep_kind = "staleness";
  std::vector<int> sweep_k{0, 1, 10, 30, 50};
  std::vector<double> sweep_scales{0.8, 1.0, 1.5};
  int sweep_episodes = 20;
  sweep->add_option("--checkpoint", sweep_checkpoint)->required();
  sweep->add_option("--kind", sweep_kind, "staleness | scale");
  sweep->add_option("--k", sweep_k, "Staleness values")->delimiter(',');
  sweep->add_option("--scales", sweep_scales, "Container scales")->delimiter(',');
  sweep->add_option("--episodes", sweep_episodes)->check(CLI::PositiveNumber);

  // describe-state
  auto* desc = app.add_subcommand("describe-state", "Print the state layout of a level");
  FeatureConfig dfc;
  std::string dlevel = "diplomatic";
  desc->add_option("--level", dlevel);
  desc->add_option("--n", dfc.n);
  desc->add_option("--m", dfc.m);

  CLI11_PARSE(app, argc, argv);

  try {
    auto world = load_world(g);
    const auto& cfg = world->config;
    const DemandModel model = DemandModel::from_scenario(cfg);

    if (*gen) {
      for (int i = 0; i < gen_count; ++i) {
        auto f = open_out(g, "orders_" + std::to_string(i) + ".txt");
        write_order_trace(f, generate_orders(model, cfg, cfg.episode_days, evaluation_seed(g.seed, i)),
                          cfg);
      }
      std::cout << "wrote " << gen_count << " trace(s) to " << g.out << '\n';
    } else if (*sim) {
      std::unique_ptr<Policy> policy;
      if (!sim_checkpoint.empty())
        policy = std::make_unique<MarlPolicy>(PolicyBundle::load(sim_checkpoint), world);
      else
        policy = baseline_factory(world, model, g, sim_opts)();
      auto orders = sim_orders.empty()
                        ? generate_orders(model, cfg, cfg.episode_days, evaluation_seed(g.seed, 0))
                        : load_orders(sim_orders, cfg);
      Engine engine = run_episode(world, *policy, std::move(orders), true);
      auto t = open_out(g, "trajectory.csv");
      t << "day,port,vessel,k,action,discharged_laden,discharged_empty,loaded_laden,loaded_empty,"
           "port_stock,vessel_empties\n";
      for (const auto& r : engine.trajectory())
        t << r.event.day << ',' << cfg.ports[r.event.port].code << ','
          << cfg.vessels[r.event.vessel].id << ',' << r.event.k << ',' << r.action << ','
          << r.outcome.discharged_laden << ',' << r.outcome.discharged_empty << ','
          << r.outcome.loaded_laden << ',' << r.outcome.loaded_empty << ',' << r.port_stock_after
          << ',' << r.vessel_empties_after << '\n';
      const auto report = make_report(engine, policy->name(), g.seed);
      auto r = open_out(g, "regional.csv");
      write_regional_csv(r, policy->name(), report.ports);
      std::cout << policy->name() << ": fulfillment " << report.fulfillment_ratio << '\n';
    } else if (*train) {
      fc.level = parse_awareness(level);
      fc.norm = train_norm.value_or(cfg.total_containers > 0 ? cfg.total_containers : fc.norm);
      tc.seed = g.seed;
      const auto start = std::chrono::steady_clock::now();
      auto result = run_training(world, model, fc, rc, tc, [&](const CurvePoint& p) {
        if (p.episode % 50 == 0 || p.episode + 1 == tc.episodes)
          std::cerr << "episode " << p.episode << " eps " << p.epsilon << " ratio "
                    << p.fulfillment_ratio << " loss " << p.mean_loss << '\n';
      });
      result.bundle.save((fs::path(g.out) / "checkpoint").string());
      auto c = open_out(g, "curve.csv");
      write_curve_csv(c, result.curve);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::cout << "trained " << tc.episodes << " episodes in " << secs << " s; bundle at "
                << (fs::path(g.out) / "checkpoint").string() << '\n';
      if (tc.select_every > 0)
        std::cout << "kept weights after episode " << result.selected_episode << " (held-out "
                  << result.selected_ratio << ")\n";
    } else if (*eval) {
      const PolicyBundle bundle = PolicyBundle::load(eval_checkpoint);
      auto ev = run_evaluation(world, model,
                               [&] { return std::make_unique<MarlPolicy>(bundle, world); },
                               evaluation_seeds(g.seed, eval_episodes), g.threads);
      emit_evaluation(g, ev);
    } else if (*base) {
      const auto seeds = evaluation_seeds(g.seed, base_episodes);
      if (bopts.policy == "offline-lp") {
        std::vector<EpisodeReport> reports;
        for (uint64_t s : seeds) {
          const auto r = offline_optimal(*world, generate_orders(model, cfg, cfg.episode_days, s));
          reports.push_back({"offline-lp", s, r.ratio, {}});
        }
        const auto summary = summarize("offline-lp", reports);
        auto f = open_out(g, "summary.csv");
        write_summary_csv(f, {summary});
        std::cout << "offline-lp: " << format_percent(summary) << " % over " << summary.episodes
                  << " episodes\n";
      } else {
        auto ev = run_evaluation(world, model, baseline_factory(world, model, g, bopts), seeds,
                                 g.threads);
        emit_evaluation(g, ev);
      }
    } else if (*sweep) {
      const PolicyBundle bundle = PolicyBundle::load(sweep_checkpoint);
      const auto seeds = evaluation_seeds(g.seed, sweep_episodes);
      if (sweep_kind == "staleness") {
        const auto rows = staleness_sweep(world, model, bundle, sweep_k, seeds, g.threads);
        auto f = open_out(g, "sweep.csv");
        write_sweep_csv(f, rows);
        for (const auto& r : rows) std::cout << "k=" << r.k << ": " << format_percent(r.summary) << '\n';
      } else if (sweep_kind == "scale") {
        std::vector<RunSummary> rows;
        for (double scale : sweep_scales) {
          ScenarioConfig scaled = cfg;
          scaled.container_scale = scale;
          scaled.finalize();
          auto w = make_world(std::move(scaled));
          auto ev = run_evaluation(w, model, [&] { return std::make_unique<MarlPolicy>(bundle, w); },
                                   seeds, g.threads);
          ev.summary.policy = "scale_" + std::to_string(scale).substr(0, 4);
          std::cout << ev.summary.policy << ": " << format_percent(ev.summary) << '\n';
          rows.push_back(ev.summary);
        }
        auto f = open_out(g, "sweep.csv");
        write_summary_csv(f, rows);
      } else {
        throw std::runtime_error("unknown sweep kind '" + sweep_kind + "'");
      }
    } else if (*desc) {
      dfc.level = parse_awareness(dlevel);
      const auto layout = state_layout(cfg, dfc);
      std::cout << layout.describe();
      std::cout << "total " << layout.size << " values, layout hash " << layout.hash() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "ecr-lab: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
