#include "gdsrec/diff/rmsprop.hpp"

#include "gdsrec/errors.hpp"

namespace gdsrec::diff {

RmsProp::RmsProp(RmsPropConfig config) : config_(config) {
  // rho = 0 degenerates to sign-gradient descent; still well defined.
  if (!(config_.rho >= 0.0 && config_.rho < 1.0)) {
    throw ConfigError("rmsprop rho must lie in [0, 1)");
  }
}

void RmsProp::step(Parameter& param) {
  auto [it, inserted] =
      accum_.try_emplace(&param, Mat::Zero(param.value.rows(), param.value.cols()));
  Mat& s = it->second;
  s.array() = config_.rho * s.array() + (1.0 - config_.rho) * param.grad.array().square();
  param.value.array() -=
      config_.learning_rate * param.grad.array() / (s.array().sqrt() + config_.epsilon);
  param.zero_grad();
}

void RmsProp::step(std::span<Parameter* const> params) {
  for (Parameter* p : params) step(*p);
}

}  // namespace gdsrec::diff
