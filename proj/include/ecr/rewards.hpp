#pragma once

#include "ecr/engine.hpp"
#include "ecr/scenario.hpp"

namespace ecr {

struct RewardConfig {
  double alpha = 0.5;   // weight of the self term in the diplomatic mix
  double f_base = 0.5;  // f(x) = 1 - f_base^x
  double g_scale = 5.0; // g(y) = g_scale * y

  void validate() const;
  double f(double x) const;
  double g(double y) const;
};

/// f(stock at `now`) - g(shortage over (prev.day, now.day]) at `port`.
double reward_self(const Snapshot& prev, const Snapshot& now, int port, const RewardConfig& cfg);

/// Same shape as reward_self with both terms replaced by a mean over crossing
/// routes of the mean over each route's ports. No crossing routes gives 0.
double reward_cross(const Snapshot& prev, const Snapshot& now, const World& world, int route,
                    const RewardConfig& cfg);

double reward_diplomatic(double r_self, double r_cross, const RewardConfig& cfg);

}  // namespace ecr
