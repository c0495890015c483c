#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mdsyn/rng.hpp"
#include "mdsyn/tensor.hpp"

namespace mdsyn {

// A named trainable tensor. Gradients accumulate across backward passes and
// are consumed (then zeroed) by the optimizer step.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)),
        grad(value.rows(), value.cols()),
        adam_m(value.rows(), value.cols()),
        adam_v(value.rows(), value.cols()) {}

  void zero_grad() { std::fill(grad.values().begin(), grad.values().end(), 0.0); }
};

// Records one forward pass; replays it in reverse for gradients. One tape per
// sample, single-threaded. Gradients of Parameter leaves are flushed into
// Parameter.grad by backward().
class Tape {
public:
  using NodeId = int;

  NodeId constant(Tensor v);
  NodeId param(Parameter& p);

  NodeId matmul(NodeId a, NodeId b);
  NodeId transpose(NodeId a);
  NodeId add(NodeId a, NodeId b);
  NodeId add_rowvec(NodeId x, NodeId bias);
  NodeId relu(NodeId a);
  NodeId gelu(NodeId a);
  NodeId scale(NodeId a, double s);
  NodeId concat_cols(const std::vector<NodeId>& parts);
  NodeId concat_rows(const std::vector<NodeId>& parts);
  NodeId mean_rows(NodeId a);
  NodeId max_rows(NodeId a);
  NodeId softmax_rows(NodeId a);
  // Per-row normalization with eps 1e-5 inside the sqrt; gain/bias are 1xC.
  NodeId layer_norm(NodeId x, NodeId gain, NodeId bias);
  // Inverted dropout; identity when !training or rate == 0.
  NodeId dropout(NodeId a, double rate, bool training, Rng& rng);
  // Select rows of a table by index; gradients scatter-add back.
  NodeId gather_rows(NodeId table, std::vector<int> indices);
  // probs is NxK rows summing to 1; labels in [0,K). Mean negative log
  // likelihood with the log clamped at ln(1e-12). Output is 1x1.
  NodeId cross_entropy(NodeId probs, std::vector<int> labels);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and runs the recorded ops in reverse.
  void backward(NodeId loss);

private:
  struct Node {
    Tensor value;
    Tensor grad;  // allocated lazily, only when needs_grad
    bool needs_grad = false;
    Parameter* bound = nullptr;
    std::function<void(Tape&)> back;
  };

  NodeId push(Node n);
  Tensor& grad_of(NodeId id);
  bool any_needs_grad(const std::vector<NodeId>& ids) const;

  std::vector<Node> nodes_;
};

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Throws NumericError naming the offending
// parameter if a gradient is non-finite; the step is aborted before any
// parameter is touched.
class Adam {
public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  void step(const std::vector<Parameter*>& params);
  long steps_taken() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

private:
  AdamConfig cfg_;
  long t_ = 0;
};

// Glorot-uniform initialization: U(-limit, limit), limit = sqrt(6/(fan_in+fan_out)).
Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace mdsyn
