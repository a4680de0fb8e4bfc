#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "ecr/baselines.hpp"
#include "ecr/learner.hpp"
#include "gradcheck.hpp"
#include "helpers.hpp"

using namespace ecr;
using namespace ecr::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ecr_learner_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

Experience exp_row(std::vector<double> s, int a, double r, std::vector<double> s2, bool terminal = false) {
  return {std::move(s), a, r, std::move(s2), terminal};
}

}  // namespace

TEST_CASE("action decoding") {
  CHECK(action_decode(0) == -1.0);
  CHECK(action_decode(10) == 0.0);
  CHECK(action_decode(20) == 1.0);
  CHECK(action_decode(13) == doctest::Approx(0.3));
  CHECK_THROWS_AS(action_decode(21), std::out_of_range);
  CHECK_THROWS_AS(action_decode(-1), std::out_of_range);
}

TEST_CASE("network shape and initialization") {
  CHECK(QNetwork::param_count(27) == 16 * 27 + 16 + 16 * 16 + 16 + 21 * 16 + 21);
  std::mt19937_64 rng(1);
  QNetwork net(27);
  net.init_uniform(rng);
  const double l1 = std::sqrt(6.0 / (27 + 16));
  for (size_t i = 0; i < 16 * 27; ++i) CHECK(std::abs(net.params()[i]) <= l1);
  for (size_t i = 16 * 27; i < 16 * 27 + 16; ++i) CHECK(net.params()[i] == 0.0);
  CHECK_THROWS_AS(net.forward(std::vector<double>(26, 0.0)), std::invalid_argument);
}

TEST_CASE("forward pass matches a hand computation") {
  QNetwork net(2);
  auto& p = net.params();
  std::fill(p.begin(), p.end(), 0.0);
  // Layout: W1 (16x2), b1, W2 (16x16), b2, W3 (21x16), b3.
  const size_t b1 = 32, w2 = 48, b2 = w2 + 256, w3 = b2 + 16, b3 = w3 + 21 * 16;
  p[0] = 1.0;   // h1[0] = relu(s0 - 2 s1)
  p[1] = -2.0;
  p[2] = -1.0;  // h1[1] = relu(-s0 + 0.5)
  p[b1 + 1] = 0.5;
  p[w2 + 0] = 3.0;  // h2[0] = relu(3 h1[0] + h1[1])
  p[w2 + 1] = 1.0;
  p[b2 + 1] = -1.0;  // h2[1] = relu(-1) = 0
  p[w3 + 5 * 16 + 0] = 2.0;
  p[b3 + 5] = 0.25;
  p[b3 + 7] = 10.0;
  const std::vector<double> s = {3.0, 0.5};
  // h1 = (2, 0); h2[0] = 6; q5 = 12.25; q7 = 10.
  const auto q = net.forward(s);
  CHECK(q[5] == 12.25);
  CHECK(q[7] == 10.0);
  CHECK(q[0] == 0.0);
  CHECK(net.greedy_action(s) == 5);
  p[b3 + 7] = 12.25;
  CHECK(net.greedy_action(s) == 5);  // ties go to the lower index
}

TEST_CASE("backprop agrees with central differences") {
  for (size_t dim : {27u, 56u, 60u}) CHECK(worst_gradient_error(dim, 12, dim) < 1e-4);
}

TEST_CASE("loss gradient is the mean of per-row gradients") {
  std::mt19937_64 rng(3);
  QNetwork net(5);
  net.init_uniform(rng);
  const std::vector<Experience> rows = {exp_row({1, 0, 2, 0, 1}, 3, 0, {}),
                                        exp_row({0, 1, 1, 1, 0}, 17, 0, {})};
  std::vector<const Experience*> batch = {&rows[0], &rows[1]};
  const std::vector<double> y = {0.5, -1.0};
  std::vector<double> grad;
  const double loss = mse_loss_gradient(net, batch, y, grad);
  const double e0 = net.forward(rows[0].s)[3] - 0.5, e1 = net.forward(rows[1].s)[17] + 1.0;
  CHECK(loss == doctest::Approx((e0 * e0 + e1 * e1) / 2));
  // Finite difference on the loss itself for a handful of coordinates.
  auto& p = net.params();
  for (size_t i : {0ul, 7ul, 90ul, p.size() - 1, p.size() - 6}) {
    const double keep = p[i], h = 1e-6;
    std::vector<double> tmp;
    p[i] = keep + h;
    const double up = mse_loss_gradient(net, batch, y, tmp);
    p[i] = keep - h;
    const double down = mse_loss_gradient(net, batch, y, tmp);
    p[i] = keep;
    CHECK(grad[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("temporal-difference targets") {
  QNetwork net(1);
  std::fill(net.params().begin(), net.params().end(), 0.0);
  const size_t b3 = QNetwork::param_count(1) - kNumActions;
  net.params()[b3 + 4] = 2.0;
  net.params()[b3 + 9] = 3.0;
  const std::vector<Experience> rows = {exp_row({0}, 0, 1.5, {0}), exp_row({0}, 0, 1.5, {0}, true)};
  std::vector<const Experience*> batch = {&rows[0], &rows[1]};
  const auto y = td_targets(net, batch, 0.9);
  CHECK(y[0] == doctest::Approx(1.5 + 0.9 * 3.0));
  CHECK(y[1] == 1.5);
  CHECK(td_targets(net, batch, 0.0)[0] == 1.5);
}

TEST_CASE("first Adam step moves each parameter by the learning rate") {
  AdamOptimizer opt(3, 0.01);
  std::vector<double> p = {1.0, 2.0, 3.0};
  opt.step(p, {0.5, -4.0, 0.0});
  CHECK(p[0] == doctest::Approx(0.99));
  CHECK(p[1] == doctest::Approx(2.01));
  CHECK(p[2] == 3.0);
}

TEST_CASE("training steps reduce a fixed regression loss") {
  std::mt19937_64 rng(9);
  QNetwork net(3);
  net.init_uniform(rng);
  AdamOptimizer opt(net.params().size(), 1e-2);
  std::vector<Experience> rows;
  for (int i = 0; i < 8; ++i)
    rows.push_back(exp_row({i * 0.1, 1.0 - i * 0.1, 0.5}, i % kNumActions, i * 0.25, {}, true));
  std::vector<const Experience*> batch;
  for (const auto& r : rows) batch.push_back(&r);
  const double first = train_step(net, opt, batch, 0.99);
  double last = first;
  for (int i = 0; i < 300; ++i) last = train_step(net, opt, batch, 0.99);
  CHECK(last < first * 0.1);
}

TEST_CASE("replay buffer is a FIFO ring") {
  ReplayBuffer buf(3, 1);
  CHECK_THROWS_AS(ReplayBuffer(0, 1), std::invalid_argument);
  for (int i = 0; i < 5; ++i) buf.push(exp_row({double(i)}, 0, i, {}));
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).r == 2);
  CHECK(buf.at(1).r == 3);
  CHECK(buf.at(2).r == 4);
  CHECK_THROWS_AS(buf.at(3), std::out_of_range);
  const auto batch = buf.sample(50);
  CHECK(batch.size() == 50);
  for (const auto* e : batch) CHECK(e->r >= 2);
}

TEST_CASE("epsilon schedule") {
  TrainConfig cfg;
  CHECK(epsilon(0, cfg) == 0.5);
  CHECK(epsilon(4000, cfg) == doctest::Approx(0.255));
  CHECK(epsilon(8000, cfg) == 0.01);
  CHECK(epsilon(9999, cfg) == 0.01);
  cfg.eps_anneal_episodes = 0;
  CHECK(epsilon(0, cfg) == 0.01);
  cfg = {};
  cfg.gamma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.eps_end = 0.9;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("training and evaluation seeds never collide") {
  std::set<uint64_t> train, eval;
  for (int i = 0; i < 500; ++i) {
    train.insert(training_seed(1, i));
    eval.insert(evaluation_seed(1, i));
  }
  for (uint64_t s : eval) CHECK(train.count(s) == 0);
}

TEST_CASE("checkpoints round trip bit for bit") {
  const auto dir = scratch("ckpt");
  std::mt19937_64 rng(4);
  QNetwork net(60);
  net.init_uniform(rng);
  std::normal_distribution<double> noise(0, 1);
  for (double& x : net.params()) x += noise(rng) * 1e-3;
  const auto path = (dir / "a.qnet").string();
  save_checkpoint(path, net, 0xfeed);
  const QNetwork back = load_checkpoint(path, 0xfeed);
  CHECK(back.input_dim() == 60);
  CHECK(same_bits(back.params(), net.params()));
  CHECK_THROWS_AS(load_checkpoint(path, 0xbeef), std::runtime_error);
  CHECK_THROWS_AS(load_checkpoint((dir / "missing").string(), 0xfeed), std::runtime_error);
  {
    std::ofstream junk(dir / "junk.qnet", std::ios::binary);
    junk << "not a network";
  }
  CHECK_THROWS_AS(load_checkpoint((dir / "junk.qnet").string(), 0xfeed), std::runtime_error);
  // A truncated file is refused.
  const auto size = fs::file_size(path);
  fs::copy_file(path, dir / "short.qnet");
  fs::resize_file(dir / "short.qnet", size - 8);
  CHECK_THROWS_AS(load_checkpoint((dir / "short.qnet").string(), 0xfeed), std::runtime_error);
}

TEST_CASE("short training run is reproducible and its bundle reloads") {
  const auto world = world_from(two_route_text(60, 12));
  const auto model = DemandModel::from_scenario(world->config);
  FeatureConfig fc;
  fc.level = AwarenessLevel::diplomatic;
  TrainConfig tc;
  tc.episodes = 3;
  tc.eps_anneal_episodes = 2;
  tc.updates_per_episode = 8;
  tc.batch = 4;
  tc.seed = 5;
  int calls = 0;
  const auto a = run_training(world, model, fc, RewardConfig{}, tc, [&](const CurvePoint&) { ++calls; });
  const auto b = run_training(world, model, fc, RewardConfig{}, tc);
  CHECK(calls == 3);
  REQUIRE(a.curve.size() == 3);
  CHECK(a.curve[0].epsilon == 0.5);
  CHECK(a.curve[2].epsilon == 0.01);
  REQUIRE(a.bundle.nets.size() == 2);
  for (size_t r = 0; r < 2; ++r) CHECK(same_bits(a.bundle.nets[r].params(), b.bundle.nets[r].params()));
  CHECK(a.bundle.layout_hash == state_layout(world->config, fc).hash());

  const auto dir = scratch("bundle");
  a.bundle.save(dir.string());
  const auto back = PolicyBundle::load(dir.string());
  CHECK(back.features.level == AwarenessLevel::diplomatic);
  CHECK(back.route_ids == a.bundle.route_ids);
  for (size_t r = 0; r < 2; ++r) CHECK(same_bits(back.nets[r].params(), a.bundle.nets[r].params()));

  // The greedy policy plays identically from the reloaded bundle.
  MarlPolicy p1(a.bundle, world), p2(back, world);
  CHECK(p1.name() == "da-marl");
  const auto orders = generate_orders(model, world->config, world->config.episode_days, 2);
  const auto e1 = run_episode(world, p1, orders, false);
  const auto e2 = run_episode(world, p2, orders, false);
  CHECK(fulfillment_ratio(e1.state()) == fulfillment_ratio(e2.state()));

  // A bundle for a different feature layout is refused.
  PolicyBundle wrong = a.bundle;
  wrong.features.level = AwarenessLevel::self;
  CHECK_THROWS_AS(MarlPolicy(wrong, world), std::invalid_argument);
  PolicyBundle short_bundle = a.bundle;
  short_bundle.nets.pop_back();
  CHECK_THROWS_AS(MarlPolicy(short_bundle, world), std::invalid_argument);
}

TEST_CASE("held-out selection returns the best checked weights") {
  const auto world = world_from(two_route_text(60, 12));
  const auto& cfg = world->config;
  const auto model = DemandModel::from_scenario(cfg);
  FeatureConfig fc;
  fc.level = AwarenessLevel::territorial;
  TrainConfig tc;
  tc.episodes = 5;
  tc.eps_anneal_episodes = 3;
  tc.updates_per_episode = 8;
  tc.batch = 4;
  tc.seed = 9;
  const auto plain = run_training(world, model, fc, RewardConfig{}, tc);
  CHECK(plain.selected_episode == 4);

  tc.select_every = 2;
  tc.select_episodes = 2;
  const auto picked = run_training(world, model, fc, RewardConfig{}, tc);
  // Checks happen after episodes 1, 3 and the last one.
  CHECK(std::set<int>{1, 3, 4}.count(picked.selected_episode) == 1);
  std::vector<std::vector<Order>> held_out;
  for (int i = 0; i < 2; ++i)
    held_out.push_back(generate_orders(model, cfg, cfg.episode_days, training_seed(mix_seed(9, 0x5E1EC7), i)));
  double score = 0;
  for (const auto& o : held_out) {
    MarlPolicy p(picked.bundle, world);
    score += fulfillment_ratio(run_episode(world, p, o, false).state()) / 2;
  }
  CHECK(score == doctest::Approx(picked.selected_ratio).epsilon(1e-12));
  if (picked.selected_episode == 4)
    for (size_t r = 0; r < 2; ++r) CHECK(same_bits(picked.bundle.nets[r].params(), plain.bundle.nets[r].params()));

  tc.select_episodes = 0;
  CHECK_THROWS_AS(run_training(world, model, fc, RewardConfig{}, tc), std::invalid_argument);
}
