#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace gdsrec::diff {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A named trainable tensor with its gradient accumulator. Vector-shaped
// parameters are stored as single-column matrices.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;

  Parameter() = default;
  Parameter(std::string n, Mat v)
      : name(std::move(n)), value(std::move(v)), grad(Mat::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
};

// Handle to a value recorded on a tape.
struct ValueRef {
  int id = -1;
};

// Define-by-run record of primitive operations over column vectors. Scalars
// are size-1 vectors. Reverse accumulation visits nodes in reverse recording
// order; parameter gradients land in tape-private buffers first so multiple
// tapes can run backward concurrently and be reduced afterwards.
class Tape {
 public:
  ValueRef constant(Vec v);

  // Row `row` of an embedding table; backward touches only that row.
  ValueRef embedding(Parameter& table, Eigen::Index row);

  ValueRef affine(Parameter& W, ValueRef x, Parameter& b);  // W x + b
  ValueRef matvec(Parameter& W, ValueRef x);                // W x

  ValueRef tanh(ValueRef x);
  ValueRef relu(ValueRef x);
  ValueRef sigmoid(ValueRef x);
  ValueRef exp(ValueRef x);

  ValueRef concat(ValueRef a, ValueRef b);
  ValueRef sum(const std::vector<ValueRef>& xs);  // elementwise, equal sizes
  ValueRef scale(ValueRef x, double c);
  ValueRef add_const(ValueRef x, double c);
  ValueRef mul(ValueRef s, ValueRef x);  // s is scalar
  ValueRef div(ValueRef a, ValueRef b);  // both scalar

  // (1 / 2n) * sum_i (pred_i - target_i)^2
  ValueRef mse_loss(const std::vector<ValueRef>& preds, const std::vector<double>& targets);

  // -sum_i [y_i log p_i + (1 - y_i) log(1 - p_i)], probabilities clamped at 1e-12.
  ValueRef bce_loss(const std::vector<ValueRef>& probs, const std::vector<int>& labels);

  const Vec& value(ValueRef r) const;
  double scalar(ValueRef r) const;

  // Reverse pass from a scalar loss, then flushes parameter gradients.
  void backward(ValueRef loss);

  // Reverse pass only; gradients stay in tape-private buffers until
  // add_gradients is called. Running either backward twice without reset
  // is an error.
  void backward_local(ValueRef loss);
  void add_gradients(double factor = 1.0);

  // Drops all recorded nodes and buffers so the tape can record a new graph.
  void reset();

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Vec value;
    Vec grad;  // empty until an adjoint reaches the node
    std::function<void(Tape&)> backprop;
  };

  ValueRef push(Vec value, std::function<void(Tape&)> backprop = {});
  Vec& grad_of(int id);
  const Node& node(ValueRef r) const;
  void check_scalar(ValueRef r, const char* what) const;

  std::vector<Node> nodes_;
  std::unordered_map<Parameter*, Mat> dense_grads_;
  std::unordered_map<Parameter*, std::unordered_map<Eigen::Index, Vec>> row_grads_;
  bool backward_done_ = false;

  friend struct TapeAccess;
};

// Softmax over a set of scalar scores, stabilized by subtracting the max.
std::vector<ValueRef> softmax_over_set(Tape& tape, const std::vector<ValueRef>& scores);

// sum_i w_i * v_i, differentiable through both weights and vectors.
ValueRef weighted_sum(Tape& tape, const std::vector<ValueRef>& weights,
                      const std::vector<ValueRef>& vectors);

}  // namespace gdsrec::diff
