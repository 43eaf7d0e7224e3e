#include "gdsrec/diff/tape.hpp"

#include <algorithm>
#include <cmath>

#include "gdsrec/errors.hpp"

namespace gdsrec::diff {

namespace {
constexpr double kProbClamp = 1e-12;
}

ValueRef Tape::push(Vec value, std::function<void(Tape&)> backprop) {
  nodes_.push_back(Node{std::move(value), Vec(), std::move(backprop)});
  return ValueRef{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(ValueRef r) const {
  if (r.id < 0 || r.id >= static_cast<int>(nodes_.size())) {
    throw InternalError("value handle does not belong to this tape");
  }
  return nodes_[static_cast<std::size_t>(r.id)];
}

Vec& Tape::grad_of(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) n.grad = Vec::Zero(n.value.size());
  return n.grad;
}

const Vec& Tape::value(ValueRef r) const { return node(r).value; }

double Tape::scalar(ValueRef r) const {
  check_scalar(r, "scalar()");
  return node(r).value[0];
}

void Tape::check_scalar(ValueRef r, const char* what) const {
  if (node(r).value.size() != 1) {
    throw InternalError(std::string(what) + " expects a size-1 value");
  }
}

ValueRef Tape::constant(Vec v) { return push(std::move(v)); }

ValueRef Tape::embedding(Parameter& table, Eigen::Index row) {
  if (row < 0 || row >= table.value.rows()) {
    throw InternalError("embedding row " + std::to_string(row) + " out of bounds for " +
                        table.name);
  }
  Vec v = table.value.row(row).transpose();
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(v), [&table, row, out](Tape& t) {
    const Vec& g = t.nodes_[out].grad;
    auto& rows = t.row_grads_[&table];
    auto [it, inserted] = rows.try_emplace(row, g);
    if (!inserted) it->second += g;
  });
}

ValueRef Tape::affine(Parameter& W, ValueRef x, Parameter& b) {
  const Vec& xv = value(x);
  if (W.value.cols() != xv.size() || W.value.rows() != b.value.rows() || b.value.cols() != 1) {
    throw InternalError("affine shape mismatch for " + W.name);
  }
  Vec y = W.value * xv + b.value.col(0);
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(y), [&W, &b, x, out](Tape& t) {
    const Vec& g = t.nodes_[out].grad;
    const Vec& xv2 = t.nodes_[x.id].value;
    auto [wit, winserted] = t.dense_grads_.try_emplace(&W, g * xv2.transpose());
    if (!winserted) wit->second.noalias() += g * xv2.transpose();
    auto [bit, binserted] = t.dense_grads_.try_emplace(&b, g);
    if (!binserted) bit->second.noalias() += g;
    t.grad_of(x.id).noalias() += W.value.transpose() * g;
  });
}

ValueRef Tape::matvec(Parameter& W, ValueRef x) {
  const Vec& xv = value(x);
  if (W.value.cols() != xv.size()) {
    throw InternalError("matvec shape mismatch for " + W.name);
  }
  Vec y = W.value * xv;
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(y), [&W, x, out](Tape& t) {
    const Vec& g = t.nodes_[out].grad;
    const Vec& xv2 = t.nodes_[x.id].value;
    auto [wit, winserted] = t.dense_grads_.try_emplace(&W, g * xv2.transpose());
    if (!winserted) wit->second.noalias() += g * xv2.transpose();
    t.grad_of(x.id).noalias() += W.value.transpose() * g;
  });
}

ValueRef Tape::tanh(ValueRef x) {
  Vec y = value(x).array().tanh();
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(y), [x, out](Tape& t) {
    const Node& n = t.nodes_[out];
    t.grad_of(x.id).array() += n.grad.array() * (1.0 - n.value.array().square());
  });
}

ValueRef Tape::relu(ValueRef x) {
  Vec y = value(x).cwiseMax(0.0);
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(y), [x, out](Tape& t) {
    const Node& n = t.nodes_[out];
    t.grad_of(x.id).array() +=
        n.grad.array() * (n.value.array() > 0.0).cast<double>();
  });
}

ValueRef Tape::sigmoid(ValueRef x) {
  Vec y = (1.0 / (1.0 + (-value(x).array()).exp()));
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(y), [x, out](Tape& t) {
    const Node& n = t.nodes_[out];
    t.grad_of(x.id).array() += n.grad.array() * n.value.array() * (1.0 - n.value.array());
  });
}

ValueRef Tape::exp(ValueRef x) {
  Vec y = value(x).array().exp();
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(y), [x, out](Tape& t) {
    const Node& n = t.nodes_[out];
    t.grad_of(x.id).array() += n.grad.array() * n.value.array();
  });
}

ValueRef Tape::concat(ValueRef a, ValueRef b) {
  const Vec& av = value(a);
  const Vec& bv = value(b);
  Vec y(av.size() + bv.size());
  y << av, bv;
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(y), [a, b, out](Tape& t) {
    const Vec& g = t.nodes_[out].grad;
    const auto na = t.nodes_[a.id].value.size();
    const auto nb = t.nodes_[b.id].value.size();
    if (na > 0) t.grad_of(a.id) += g.head(na);
    if (nb > 0) t.grad_of(b.id) += g.tail(nb);
  });
}

ValueRef Tape::sum(const std::vector<ValueRef>& xs) {
  if (xs.empty()) throw InternalError("sum over an empty set");
  Vec y = value(xs[0]);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const Vec& v = value(xs[i]);
    if (v.size() != y.size()) throw InternalError("sum over mismatched sizes");
    y += v;
  }
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(y), [xs, out](Tape& t) {
    const Vec& g = t.nodes_[out].grad;
    for (ValueRef x : xs) t.grad_of(x.id) += g;
  });
}

ValueRef Tape::scale(ValueRef x, double c) {
  Vec y = c * value(x);
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(y), [x, c, out](Tape& t) {
    t.grad_of(x.id) += c * t.nodes_[out].grad;
  });
}

ValueRef Tape::add_const(ValueRef x, double c) {
  Vec y = value(x).array() + c;
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(y), [x, out](Tape& t) {
    t.grad_of(x.id) += t.nodes_[out].grad;
  });
}

ValueRef Tape::mul(ValueRef s, ValueRef x) {
  check_scalar(s, "mul weight");
  const double sv = node(s).value[0];
  Vec y = sv * value(x);
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(y), [s, x, out](Tape& t) {
    const Vec& g = t.nodes_[out].grad;
    const Vec& xv = t.nodes_[x.id].value;
    t.grad_of(s.id)[0] += g.dot(xv);
    t.grad_of(x.id) += t.nodes_[s.id].value[0] * g;
  });
}

ValueRef Tape::div(ValueRef a, ValueRef b) {
  check_scalar(a, "div numerator");
  check_scalar(b, "div denominator");
  const double av = node(a).value[0];
  const double bv = node(b).value[0];
  Vec y(1);
  y[0] = av / bv;
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(y), [a, b, out](Tape& t) {
    const double g = t.nodes_[out].grad[0];
    const double an = t.nodes_[a.id].value[0];
    const double bn = t.nodes_[b.id].value[0];
    t.grad_of(a.id)[0] += g / bn;
    t.grad_of(b.id)[0] -= g * an / (bn * bn);
  });
}

ValueRef Tape::mse_loss(const std::vector<ValueRef>& preds, const std::vector<double>& targets) {
  if (preds.empty() || preds.size() != targets.size()) {
    throw InternalError("mse_loss needs equal non-empty prediction/target lists");
  }
  const double n = static_cast<double>(preds.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    check_scalar(preds[i], "mse_loss prediction");
    const double e = node(preds[i]).value[0] - targets[i];
    acc += e * e;
  }
  Vec y(1);
  y[0] = acc / (2.0 * n);
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(y), [preds, targets, n, out](Tape& t) {
    const double g = t.nodes_[out].grad[0];
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const double e = t.nodes_[preds[i].id].value[0] - targets[i];
      t.grad_of(preds[i].id)[0] += g * e / n;
    }
  });
}

ValueRef Tape::bce_loss(const std::vector<ValueRef>& probs, const std::vector<int>& labels) {
  if (probs.empty() || probs.size() != labels.size()) {
    throw InternalError("bce_loss needs equal non-empty probability/label lists");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    check_scalar(probs[i], "bce_loss probability");
    const double p = std::clamp(node(probs[i]).value[0], kProbClamp, 1.0 - kProbClamp);
    const double y = static_cast<double>(labels[i]);
    acc -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  Vec v(1);
  v[0] = acc;
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(v), [probs, labels, out](Tape& t) {
    const double g = t.nodes_[out].grad[0];
    for (std::size_t i = 0; i < probs.size(); ++i) {
      const double p = t.nodes_[probs[i].id].value[0];
      if (p <= kProbClamp || p >= 1.0 - kProbClamp) continue;  // clamp is flat
      const double y = static_cast<double>(labels[i]);
      t.grad_of(probs[i].id)[0] -= g * (y / p - (1.0 - y) / (1.0 - p));
    }
  });
}

void Tape::backward(ValueRef loss) {
  backward_local(loss);
  add_gradients();
}

void Tape::backward_local(ValueRef loss) {
  if (backward_done_) {
    throw InternalError("backward called twice on the same tape; reset() first");
  }
  check_scalar(loss, "backward loss");
  grad_of(loss.id)[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.size() == 0) continue;
    if (n.backprop) n.backprop(*this);
  }
  backward_done_ = true;
}

void Tape::add_gradients(double factor) {
  for (auto& [param, g] : dense_grads_) {
    param->grad.noalias() += factor * g;
  }
  for (auto& [param, rows] : row_grads_) {
    for (auto& [row, g] : rows) {
      param->grad.row(row).noalias() += factor * g.transpose();
    }
  }
}

void Tape::reset() {
  nodes_.clear();
  dense_grads_.clear();
  row_grads_.clear();
  backward_done_ = false;
}

std::vector<ValueRef> softmax_over_set(Tape& tape, const std::vector<ValueRef>& scores) {
  if (scores.empty()) throw InternalError("softmax over an empty set");
  double max_score = tape.scalar(scores[0]);
  for (std::size_t i = 1; i < scores.size(); ++i) {
    max_score = std::max(max_score, tape.scalar(scores[i]));
  }
  std::vector<ValueRef> exps;
  exps.reserve(scores.size());
  for (ValueRef s : scores) exps.push_back(tape.exp(tape.add_const(s, -max_score)));
  const ValueRef z = tape.sum(exps);
  std::vector<ValueRef> weights;
  weights.reserve(scores.size());
  for (ValueRef e : exps) weights.push_back(tape.div(e, z));
  return weights;
}

ValueRef weighted_sum(Tape& tape, const std::vector<ValueRef>& weights,
                      const std::vector<ValueRef>& vectors) {
  if (weights.empty() || weights.size() != vectors.size()) {
    throw InternalError("weighted_sum needs equal non-empty weight/vector lists");
  }
  std::vector<ValueRef> terms;
  terms.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    terms.push_back(tape.mul(weights[i], vectors[i]));
  }
  return tape.sum(terms);
}

}  // namespace gdsrec::diff
