#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ecr/features.hpp"
#include "ecr/ordergen.hpp"
#include "ecr/policy.hpp"
#include "ecr/rewards.hpp"

namespace ecr {

constexpr int kNumActions = 21;
constexpr int kHiddenUnits = 16;

using QValues = std::array<double, kNumActions>;

/// Action index 0..20 to a in [-1, 1] in steps of 0.1.
double action_decode(int index);

/// input -> 16 ReLU -> 16 ReLU -> 21 linear. Parameters live in one flat vector
/// laid out as W1 (16 x in, row-major), b1, W2 (16 x 16), b2, W3 (21 x 16), b3.
class QNetwork {
 public:
  QNetwork() = default;
  explicit QNetwork(size_t input_dim);

  size_t input_dim() const { return input_dim_; }
  static size_t param_count(size_t input_dim);

  /// Uniform in +-sqrt(6 / (fan_in + fan_out)) per weight matrix, zero biases.
  void init_uniform(std::mt19937_64& rng);

  QValues forward(std::span<const double> s) const;
  int greedy_action(std::span<const double> s) const;  // lowest index on ties

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  /// Forward pass keeping activations, and its adjoint: `backward` adds
  /// dq * dQ(s, action)/dparams into grad.
  struct Cache {
    std::array<double, kHiddenUnits> h1{}, h2{};
    QValues q{};
  };
  QValues forward_cached(std::span<const double> s, Cache& cache) const;
  void backward(std::span<const double> s, const Cache& cache, int action, double dq,
                std::vector<double>& grad) const;

 private:
  size_t input_dim_ = 0;
  std::vector<double> params_;
};

struct Experience {
  std::vector<double> s;
  int a = 0;
  double r = 0;
  std::vector<double> s_next;
  bool terminal = false;
};

/// Fixed-capacity FIFO ring with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  ReplayBuffer(size_t capacity, uint64_t seed);
  void push(Experience e);
  size_t size() const { return items_.size(); }
  size_t capacity() const { return capacity_; }
  const Experience& at(size_t i) const;  // 0 = oldest
  std::vector<const Experience*> sample(size_t batch);

 private:
  size_t capacity_;
  size_t head_ = 0;  // next slot to overwrite once full
  std::vector<Experience> items_;
  std::mt19937_64 rng_;
};

class AdamOptimizer {
 public:
  AdamOptimizer(size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(std::vector<double>& params, const std::vector<double>& grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

/// Targets y = r + gamma * max_a' Q(s', a'); y = r for terminal rows.
std::vector<double> td_targets(const QNetwork& target_net, std::span<const Experience* const> batch,
                               double gamma);

/// Mean squared error on the taken actions against fixed targets; fills grad.
double mse_loss_gradient(const QNetwork& net, std::span<const Experience* const> batch,
                         std::span<const double> targets, std::vector<double>& grad);

/// One DQN update with targets from `target_net` (the same network unless a
/// target network is enabled). Returns the pre-step loss; throws on non-finite loss.
double train_step(QNetwork& net, AdamOptimizer& opt, std::span<const Experience* const> batch,
                  double gamma, const QNetwork* target_net = nullptr);

struct TrainConfig {
  int episodes = 10000;
  double eps_start = 0.5;
  double eps_end = 0.01;
  int eps_anneal_episodes = 8000;
  double lr = 1e-4;
  int batch = 32;
  double gamma = 0.99;
  int updates_per_episode = 128;
  size_t capacity = 100000;
  uint64_t seed = 1;
  double reward_scale = 1.0;     // multiplies rewards before they enter replay
  int target_sync_episodes = 0;  // 0: targets from the online network
  // Every `select_every` episodes the greedy policy plays `select_episodes` held-out
  // training traces; the best-scoring weights are returned. 0 keeps the final weights.
  int select_every = 0;
  int select_episodes = 4;

  void validate() const;
};

double epsilon(int episode, const TrainConfig& cfg);

struct CurvePoint {
  int episode = 0;
  double epsilon = 0;
  double fulfillment_ratio = 0;
  double mean_loss = 0;
};

/// One Q-network per route plus the feature and reward settings it was trained with.
struct PolicyBundle {
  FeatureConfig features;
  RewardConfig rewards;
  std::vector<std::string> route_ids;
  std::vector<QNetwork> nets;
  uint64_t layout_hash = 0;

  void save(const std::string& dir) const;
  static PolicyBundle load(const std::string& dir);
};

void save_checkpoint(const std::string& path, const QNetwork& net, uint64_t layout_hash);
QNetwork load_checkpoint(const std::string& path, uint64_t expected_layout_hash);

/// Greedy (epsilon = 0 by default) execution of a trained bundle.
class MarlPolicy : public Policy {
 public:
  MarlPolicy(PolicyBundle bundle, std::shared_ptr<const World> world, double eps = 0.0,
             uint64_t seed = 0);
  std::string name() const override;
  double act(const Engine& engine, const ArrivalEvent& event) override;
  FeatureConfig& features() { return bundle_.features; }
  const PolicyBundle& bundle() const { return bundle_; }

 private:
  PolicyBundle bundle_;
  std::shared_ptr<const World> world_;
  double eps_;
  std::mt19937_64 rng_;
};

struct TrainResult {
  PolicyBundle bundle;
  std::vector<CurvePoint> curve;
  int selected_episode = -1;  // last episode of the returned weights
  double selected_ratio = 0;  // their held-out greedy score (selection only)
};

using EpisodeCallback = std::function<void(const CurvePoint&)>;

/// Episodes draw order traces from even seed streams; evaluation uses odd ones.
uint64_t training_seed(uint64_t base, int episode);
uint64_t evaluation_seed(uint64_t base, int index);

TrainResult run_training(std::shared_ptr<const World> world, const DemandModel& model,
                         const FeatureConfig& features, const RewardConfig& rewards,
                         const TrainConfig& train, const EpisodeCallback& on_episode = {});

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace ecr
