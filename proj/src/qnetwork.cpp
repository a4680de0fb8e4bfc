#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "ecr/learner.hpp"

namespace ecr {

namespace {

constexpr size_t H = kHiddenUnits;
constexpr size_t A = kNumActions;

struct Offsets {
  size_t w1, b1, w2, b2, w3, b3, end;
  explicit Offsets(size_t in)
      : w1(0), b1(H * in), w2(b1 + H), b2(w2 + H * H), w3(b2 + H), b3(w3 + A * H), end(b3 + A) {}
};

}  // namespace

double action_decode(int index) {
  if (index < 0 || index >= kNumActions)
    throw std::out_of_range("action index " + std::to_string(index) + " outside 0..20");
  return -1.0 + 0.1 * index;
}

QNetwork::QNetwork(size_t input_dim)
    : input_dim_(input_dim), params_(param_count(input_dim), 0.0) {}

size_t QNetwork::param_count(size_t input_dim) { return Offsets(input_dim).end; }

void QNetwork::init_uniform(std::mt19937_64& rng) {
  const Offsets o(input_dim_);
  auto fill = [&](size_t begin, size_t fan_in, size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (size_t i = 0; i < fan_in * fan_out; ++i) params_[begin + i] = u(rng);
  };
  std::fill(params_.begin(), params_.end(), 0.0);
  fill(o.w1, input_dim_, H);
  fill(o.w2, H, H);
  fill(o.w3, H, A);
}

QValues QNetwork::forward_cached(std::span<const double> s, Cache& c) const {
  if (s.size() != input_dim_)
    throw std::invalid_argument("forward: input has " + std::to_string(s.size()) +
                                " values, network expects " + std::to_string(input_dim_));
  const Offsets o(input_dim_);
  const double* p = params_.data();
  for (size_t i = 0; i < H; ++i) {
    double z = p[o.b1 + i];
    const double* w = p + o.w1 + i * input_dim_;
    for (size_t j = 0; j < input_dim_; ++j) z += w[j] * s[j];
    c.h1[i] = z > 0 ? z : 0.0;
  }
  for (size_t i = 0; i < H; ++i) {
    double z = p[o.b2 + i];
    const double* w = p + o.w2 + i * H;
    for (size_t j = 0; j < H; ++j) z += w[j] * c.h1[j];
    c.h2[i] = z > 0 ? z : 0.0;
  }
  for (size_t i = 0; i < A; ++i) {
    double z = p[o.b3 + i];
    const double* w = p + o.w3 + i * H;
    for (size_t j = 0; j < H; ++j) z += w[j] * c.h2[j];
    c.q[i] = z;
  }
  return c.q;
}

QValues QNetwork::forward(std::span<const double> s) const {
  Cache c;
  return forward_cached(s, c);
}

int QNetwork::greedy_action(std::span<const double> s) const {
  const QValues q = forward(s);
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

void QNetwork::backward(std::span<const double> s, const Cache& c, int action, double dq,
                        std::vector<double>& grad) const {
  const Offsets o(input_dim_);
  const double* p = params_.data();
  double* g = grad.data();
  // Output layer: only the taken action carries gradient.
  g[o.b3 + action] += dq;
  std::array<double, H> d2{};
  for (size_t j = 0; j < H; ++j) {
    g[o.w3 + action * H + j] += dq * c.h2[j];
    d2[j] = c.h2[j] > 0 ? dq * p[o.w3 + action * H + j] : 0.0;
  }
  std::array<double, H> d1{};
  for (size_t i = 0; i < H; ++i) {
    if (d2[i] == 0.0) continue;
    g[o.b2 + i] += d2[i];
    for (size_t j = 0; j < H; ++j) {
      g[o.w2 + i * H + j] += d2[i] * c.h1[j];
      d1[j] += d2[i] * p[o.w2 + i * H + j];
    }
  }
  for (size_t i = 0; i < H; ++i) {
    if (c.h1[i] <= 0 || d1[i] == 0.0) continue;
    g[o.b1 + i] += d1[i];
    double* gw = g + o.w1 + i * input_dim_;
    for (size_t j = 0; j < input_dim_; ++j) gw[j] += d1[i] * s[j];
  }
}

AdamOptimizer::AdamOptimizer(size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void AdamOptimizer::step(std::vector<double>& params, const std::vector<double>& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

ReplayBuffer::ReplayBuffer(size_t capacity, uint64_t seed) : capacity_(capacity), rng_(seed) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be > 0");
}

void ReplayBuffer::push(Experience e) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(e));
  } else {
    items_[head_] = std::move(e);
    head_ = (head_ + 1) % capacity_;
  }
}

const Experience& ReplayBuffer::at(size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("replay index");
  return items_[(head_ + i) % items_.size()];
}

std::vector<const Experience*> ReplayBuffer::sample(size_t batch) {
  std::vector<const Experience*> out;
  if (items_.empty()) return out;
  std::uniform_int_distribution<size_t> pick(0, items_.size() - 1);
  out.reserve(batch);
  for (size_t i = 0; i < batch; ++i) out.push_back(&items_[pick(rng_)]);
  return out;
}

std::vector<double> td_targets(const QNetwork& target_net, std::span<const Experience* const> batch,
                               double gamma) {
  std::vector<double> y;
  y.reserve(batch.size());
  for (const Experience* e : batch) {
    double t = e->r;
    if (!e->terminal && gamma != 0.0) {
      const QValues q = target_net.forward(e->s_next);
      t += gamma * *std::max_element(q.begin(), q.end());
    }
    y.push_back(t);
  }
  return y;
}

double mse_loss_gradient(const QNetwork& net, std::span<const Experience* const> batch,
                         std::span<const double> targets, std::vector<double>& grad) {
  grad.assign(net.params().size(), 0.0);
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const double n = static_cast<double>(batch.size());
  double loss = 0;
  QNetwork::Cache cache;
  for (size_t b = 0; b < batch.size(); ++b) {
    const Experience& e = *batch[b];
    const QValues q = net.forward_cached(e.s, cache);
    const double err = q[e.a] - targets[b];
    loss += err * err;
    net.backward(e.s, cache, e.a, 2.0 * err / n, grad);
  }
  return loss / n;
}

double train_step(QNetwork& net, AdamOptimizer& opt, std::span<const Experience* const> batch,
                  double gamma, const QNetwork* target_net) {
  const auto y = td_targets(target_net ? *target_net : net, batch, gamma);
  std::vector<double> grad;
  const double loss = mse_loss_gradient(net, batch, y, grad);
  if (!std::isfinite(loss)) throw std::runtime_error("train_step: non-finite loss (training diverged)");
  opt.step(net.params(), grad);
  return loss;
}

// --- checkpoints -----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'E', 'C', 'R', 'Q', 'N', 'E', 'T', '\0'};
constexpr uint32_t kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO writes the native layout and assumes little-endian");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint truncated");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const QNetwork& net, uint64_t layout_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  put<uint32_t>(out, kFormatVersion);
  put<uint64_t>(out, layout_hash);
  put<uint32_t>(out, static_cast<uint32_t>(net.input_dim()));
  for (double p : net.params()) put<double>(out, p);
  if (!out) throw std::runtime_error("failed writing checkpoint '" + path + "'");
}

QNetwork load_checkpoint(const std::string& path, uint64_t expected_layout_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("'" + path + "' is not a Q-network checkpoint");
  if (get<uint32_t>(in) != kFormatVersion) throw std::runtime_error("unsupported checkpoint version");
  if (get<uint64_t>(in) != expected_layout_hash)
    throw std::runtime_error("checkpoint '" + path + "' was trained on a different feature layout");
  QNetwork net(get<uint32_t>(in));
  for (double& p : net.params()) p = get<double>(in);
  return net;
}

}  // namespace ecr
