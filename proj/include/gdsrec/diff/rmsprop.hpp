#pragma once

#include <span>
#include <unordered_map>

#include "gdsrec/diff/tape.hpp"

namespace gdsrec::diff {

struct RmsPropConfig {
  double learning_rate = 1e-3;
  double rho = 0.9;
  double epsilon = 1e-8;
};

// Per-parameter squared-gradient accumulator:
//   s <- rho s + (1 - rho) g^2,  theta <- theta - lr * g / (sqrt(s) + eps).
// The gradient is zeroed after each step.
class RmsProp {
 public:
  explicit RmsProp(RmsPropConfig config);

  void step(Parameter& param);
  void step(std::span<Parameter* const> params);

  const RmsPropConfig& config() const { return config_; }

 private:
  RmsPropConfig config_;
  std::unordered_map<const Parameter*, Mat> accum_;
};

}  // namespace gdsrec::diff
