#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "ecr/learner.hpp"

namespace ecr {

void TrainConfig::validate() const {
  if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  if (!(eps_end >= 0 && eps_end <= eps_start && eps_start <= 1))
    throw std::invalid_argument("need 0 <= eps_end <= eps_start <= 1");
  if (eps_anneal_episodes < 0) throw std::invalid_argument("eps_anneal_episodes must be >= 0");
  if (!(gamma >= 0 && gamma < 1)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (batch < 1 || static_cast<size_t>(batch) > capacity)
    throw std::invalid_argument("need 1 <= batch <= capacity");
  if (!(lr > 0)) throw std::invalid_argument("lr must be > 0");
  if (updates_per_episode < 0) throw std::invalid_argument("updates_per_episode must be >= 0");
  if (select_every < 0) throw std::invalid_argument("select_every must be >= 0");
  if (select_every > 0 && select_episodes < 1)
    throw std::invalid_argument("select_episodes must be >= 1");
}

double epsilon(int episode, const TrainConfig& cfg) {
  if (episode >= cfg.eps_anneal_episodes) return cfg.eps_end;
  const double frac = static_cast<double>(episode) / cfg.eps_anneal_episodes;
  return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac;
}

uint64_t training_seed(uint64_t base, int episode) {
  return mix_seed(base, 2 * static_cast<uint64_t>(episode));
}

uint64_t evaluation_seed(uint64_t base, int index) {
  return mix_seed(base, 2 * static_cast<uint64_t>(index) + 1);
}

namespace {

int epsilon_greedy(const QNetwork& net, const std::vector<double>& s, double eps,
                   std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (eps > 0 && coin(rng) < eps) {
    std::uniform_int_distribution<int> any(0, kNumActions - 1);
    return any(rng);
  }
  return net.greedy_action(s);
}

struct AgentMemory {
  std::optional<Snapshot> snap;
  std::vector<double> state;
  int action = 0;
  int port = 0;
};

double delayed_reward(const Snapshot& prev, const Snapshot& now, int port, int route,
                      const World& world, const FeatureConfig& fc, const RewardConfig& rc) {
  const double r_self = reward_self(prev, now, port, rc);
  if (fc.level != AwarenessLevel::diplomatic) return r_self;
  return reward_diplomatic(r_self, reward_cross(prev, now, world, route, rc), rc);
}

// Mean greedy fulfillment of `nets` over fixed traces.
double greedy_score(std::shared_ptr<const World> world, const std::vector<QNetwork>& nets,
                    const FeatureConfig& fc, const std::vector<std::vector<Order>>& traces) {
  const auto& cfg = world->config;
  Engine engine(world);
  double sum = 0;
  for (const auto& orders : traces) {
    engine.reset(orders);
    while (auto ev = engine.advance_until_event()) {
      const auto s = build_state(engine.snapshot(*ev), *world, fc).values;
      const int a = nets[cfg.vessels[ev->vessel].route_index].greedy_action(s);
      engine.execute_action(*ev, action_decode(a));
    }
    sum += fulfillment_ratio(engine.state());
  }
  return sum / traces.size();
}

}  // namespace

TrainResult run_training(std::shared_ptr<const World> world, const DemandModel& model,
                         const FeatureConfig& features, const RewardConfig& rewards,
                         const TrainConfig& train, const EpisodeCallback& on_episode) {
  features.validate();
  rewards.validate();
  train.validate();
  const auto& cfg = world->config;
  const StateLayout layout = state_layout(cfg, features);
  const size_t R = cfg.routes.size();

  TrainResult result;
  result.bundle.features = features;
  result.bundle.rewards = rewards;
  result.bundle.layout_hash = layout.hash();
  std::mt19937_64 init_rng(mix_seed(train.seed, 0xC0FFEE));
  std::vector<ReplayBuffer> replay;
  std::vector<AdamOptimizer> opt;
  for (size_t r = 0; r < R; ++r) {
    result.bundle.route_ids.push_back(cfg.routes[r].id);
    QNetwork net(layout.size);
    net.init_uniform(init_rng);
    result.bundle.nets.push_back(std::move(net));
    replay.emplace_back(train.capacity, mix_seed(train.seed, 0xB0F + r));
    opt.emplace_back(result.bundle.nets.back().params().size(), train.lr);
  }
  std::vector<QNetwork> targets = result.bundle.nets;
  std::mt19937_64 explore_rng(mix_seed(train.seed, 0xE4F));

  std::vector<std::vector<Order>> held_out;
  if (train.select_every > 0)
    for (int i = 0; i < train.select_episodes; ++i)
      held_out.push_back(generate_orders(model, cfg, cfg.episode_days,
                                         training_seed(mix_seed(train.seed, 0x5E1EC7), i)));
  std::vector<QNetwork> best;

  Engine engine(world);
  for (int ep = 0; ep < train.episodes; ++ep) {
    const double eps = epsilon(ep, train);
    engine.reset(generate_orders(model, cfg, cfg.episode_days, training_seed(train.seed, ep)));
    std::vector<AgentMemory> agents(cfg.vessels.size());

    while (auto ev = engine.advance_until_event()) {
      const int route = cfg.vessels[ev->vessel].route_index;
      Snapshot snap = engine.snapshot(*ev);
      std::vector<double> s = build_state(snap, *world, features).values;
      AgentMemory& mem = agents[ev->vessel];
      if (mem.snap) {
        const double r = delayed_reward(*mem.snap, snap, mem.port, route, *world, features, rewards);
        replay[route].push({std::move(mem.state), mem.action, r * train.reward_scale, s, false});
      }
      const int a = epsilon_greedy(result.bundle.nets[route], s, eps, explore_rng);
      engine.execute_action(*ev, action_decode(a));
      mem.snap.emplace(std::move(snap));
      mem.state = std::move(s);
      mem.action = a;
      mem.port = ev->port;
    }

    double loss_sum = 0;
    long loss_count = 0;
    for (int l = 0; l < train.updates_per_episode; ++l) {
      for (size_t r = 0; r < R; ++r) {
        if (replay[r].size() < static_cast<size_t>(train.batch)) continue;
        const auto batch = replay[r].sample(train.batch);
        const QNetwork* target = train.target_sync_episodes > 0 ? &targets[r] : nullptr;
        loss_sum += train_step(result.bundle.nets[r], opt[r], batch, train.gamma, target);
        ++loss_count;
      }
    }
    if (train.target_sync_episodes > 0 && (ep + 1) % train.target_sync_episodes == 0)
      targets = result.bundle.nets;

    CurvePoint pt{ep, eps, fulfillment_ratio(engine.state()),
                  loss_count ? loss_sum / loss_count : 0.0};
    result.curve.push_back(pt);
    if (on_episode) on_episode(pt);

    if (train.select_every > 0 && ((ep + 1) % train.select_every == 0 || ep + 1 == train.episodes)) {
      const double score = greedy_score(world, result.bundle.nets, features, held_out);
      if (best.empty() || score > result.selected_ratio) {
        best = result.bundle.nets;
        result.selected_ratio = score;
        result.selected_episode = ep;
      }
    }
  }
  if (!best.empty()) result.bundle.nets = std::move(best);
  else result.selected_episode = train.episodes - 1;
  return result;
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "episode,epsilon,fulfillment_ratio,mean_loss\n";
  out << std::setprecision(10);
  for (const auto& p : curve)
    out << p.episode << ',' << p.epsilon << ',' << p.fulfillment_ratio << ',' << p.mean_loss << '\n';
}

// --- bundles ---------------------------------------------------------------

void PolicyBundle::save(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["level"] = to_string(features.level);
  manifest["n"] = features.n;
  manifest["m"] = features.m;
  manifest["staleness_k"] = features.staleness_k;
  manifest["norm"] = features.norm;
  manifest["alpha"] = rewards.alpha;
  manifest["f_base"] = rewards.f_base;
  manifest["g_scale"] = rewards.g_scale;
  manifest["routes"] = nlohmann::json::array();
  for (size_t r = 0; r < nets.size(); ++r) {
    const std::string file = "route_" + route_ids[r] + ".qnet";
    manifest["routes"].push_back({{"id", route_ids[r]}, {"file", file}});
  }
  manifest["layout_hash"] = std::to_string(layout_hash);
  for (size_t r = 0; r < nets.size(); ++r)
    save_checkpoint((fs::path(dir) / manifest["routes"][r]["file"].get<std::string>()).string(),
                    nets[r], layout_hash);
  std::ofstream out(fs::path(dir) / "policy.json");
  out << manifest.dump(2) << '\n';
}

PolicyBundle PolicyBundle::load(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(dir) / "policy.json");
  if (!in) throw std::runtime_error("no policy.json in '" + dir + "'");
  const auto manifest = nlohmann::json::parse(in);
  PolicyBundle b;
  b.features.level = parse_awareness(manifest.at("level").get<std::string>());
  b.features.n = manifest.at("n").get<int>();
  b.features.m = manifest.at("m").get<int>();
  b.features.staleness_k = manifest.at("staleness_k").get<int>();
  b.features.norm = manifest.at("norm").get<double>();
  b.rewards.alpha = manifest.at("alpha").get<double>();
  b.rewards.f_base = manifest.at("f_base").get<double>();
  b.rewards.g_scale = manifest.at("g_scale").get<double>();
  b.layout_hash = std::stoull(manifest.at("layout_hash").get<std::string>());
  for (const auto& r : manifest.at("routes")) {
    b.route_ids.push_back(r.at("id").get<std::string>());
    b.nets.push_back(load_checkpoint((fs::path(dir) / r.at("file").get<std::string>()).string(),
                                     b.layout_hash));
  }
  return b;
}

MarlPolicy::MarlPolicy(PolicyBundle bundle, std::shared_ptr<const World> world, double eps,
                       uint64_t seed)
    : bundle_(std::move(bundle)), world_(std::move(world)), eps_(eps), rng_(seed) {
  const auto& cfg = world_->config;
  if (bundle_.nets.size() != cfg.routes.size())
    throw std::invalid_argument("policy bundle has " + std::to_string(bundle_.nets.size()) +
                                " networks for " + std::to_string(cfg.routes.size()) + " routes");
  for (size_t r = 0; r < cfg.routes.size(); ++r)
    if (bundle_.route_ids[r] != cfg.routes[r].id)
      throw std::invalid_argument("policy bundle route order does not match the scenario");
  const auto layout = state_layout(cfg, bundle_.features);
  if (layout.hash() != bundle_.layout_hash)
    throw std::invalid_argument("checkpoint layout hash does not match the feature configuration");
}

std::string MarlPolicy::name() const {
  switch (bundle_.features.level) {
    case AwarenessLevel::self: return "sa-marl";
    case AwarenessLevel::territorial: return "ta-marl";
    case AwarenessLevel::diplomatic: return "da-marl";
  }
  return "marl";
}

double MarlPolicy::act(const Engine& engine, const ArrivalEvent& event) {
  const int route = world_->config.vessels[event.vessel].route_index;
  const auto s = build_state(engine.snapshot(event), *world_, bundle_.features).values;
  return action_decode(epsilon_greedy(bundle_.nets[route], s, eps_, rng_));
}

}  // namespace ecr
