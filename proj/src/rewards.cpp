#include "ecr/rewards.hpp"

#include <cmath>
#include <stdexcept>

namespace ecr {

void RewardConfig::validate() const {
  if (!(alpha >= 0 && alpha <= 1)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (!(f_base > 0 && f_base < 1)) throw std::invalid_argument("f_base must lie in (0, 1)");
  if (!(g_scale > 0)) throw std::invalid_argument("g_scale must be > 0");
}

double RewardConfig::f(double x) const { return 1.0 - std::pow(f_base, x); }
double RewardConfig::g(double y) const { return g_scale * y; }

namespace {

void check_order(const Snapshot& prev, const Snapshot& now) {
  if (prev.day() > now.day() || (prev.day() == now.day() && prev.event().call > now.event().call))
    throw std::invalid_argument("reward: snapshots out of order");
}

}  // namespace

double reward_self(const Snapshot& prev, const Snapshot& now, int port, const RewardConfig& cfg) {
  check_order(prev, now);
  const double stock = static_cast<double>(now.stock(port));
  const double shortage = static_cast<double>(now.shortage_between(port, prev.day(), now.day()));
  return cfg.f(stock) - cfg.g(shortage);
}

double reward_cross(const Snapshot& prev, const Snapshot& now, const World& world, int route,
                    const RewardConfig& cfg) {
  check_order(prev, now);
  const auto& cr = world.config.crossing[route];
  if (cr.empty()) return 0.0;
  double xi1 = 0, xi2 = 0;
  for (int r : cr) {
    const auto& ports = world.config.route_ports[r];
    double stock = 0, shortage = 0;
    for (int p : ports) {
      stock += static_cast<double>(now.stock(p));
      shortage += static_cast<double>(now.shortage_between(p, prev.day(), now.day()));
    }
    xi1 += stock / static_cast<double>(ports.size());
    xi2 += shortage / static_cast<double>(ports.size());
  }
  xi1 /= static_cast<double>(cr.size());
  xi2 /= static_cast<double>(cr.size());
  return cfg.f(xi1) - cfg.g(xi2);
}

double reward_diplomatic(double r_self, double r_cross, const RewardConfig& cfg) {
  return cfg.alpha * r_self + (1.0 - cfg.alpha) * r_cross;
}

}  // namespace ecr
