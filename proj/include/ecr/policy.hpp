#pragma once

#include <string>

#include "ecr/engine.hpp"

namespace ecr {

/// Anything that answers arrival events with an action in [-1, 1].
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void begin_episode(const Engine& /*engine*/) {}
  virtual double act(const Engine& engine, const ArrivalEvent& event) = 0;
};

}  // namespace ecr
