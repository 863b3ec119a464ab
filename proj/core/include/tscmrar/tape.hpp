#pragma once

#include <cstddef>
#include <vector>

#include "tscmrar/ops.hpp"
#include "tscmrar/tensor.hpp"

namespace tscmrar {

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

// Linear record of a forward pass. Each recording method evaluates its op
// immediately and appends a node; backward() walks the nodes in reverse and
// accumulates d(loss)/d(param) into every ParamTensor::grad that was
// registered with param(). Constants never receive gradients.
//
// A Tape is single-use: record, backward once, then clear().
class Tape {
 public:
  Var constant(Tensor value);
  // The tape keeps a pointer to `p`; it must outlive the recording.
  Var param(ParamTensor& p);
  // Read-only reference to an external tensor that receives no gradient.
  Var frozen(const Tensor& t);

  Var conv1d(Var input, Var weights, Var bias, const ConvSpec& spec);
  Var relu(Var x);
  Var add(Var a, Var b);
  Var dense(Var x, Var weights, Var bias);
  Var softmax(Var logits);
  Var cross_entropy(Var probs, std::size_t target_index);
  Var sum_of_squares(Var x);
  Var scale(Var x, double factor);

  const Tensor& value(Var v) const;
  double scalar(Var v) const;

  // `loss` must be a one-element value recorded on this tape.
  void backward(Var loss);

  void clear();
  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Kind {
    kConstant,
    kParam,
    kFrozen,
    kConv1d,
    kRelu,
    kAdd,
    kDense,
    kSoftmax,
    kCrossEntropy,
    kSumOfSquares,
    kScale,
  };

  struct Node {
    Kind kind;
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t c = 0;
    ConvSpec spec{};
    std::size_t target = 0;
    double factor = 0.0;
    Tensor value{};
    ParamTensor* param = nullptr;
    const Tensor* external = nullptr;
    bool requires_grad = false;
  };

  const Node& node(Var v) const;
  Var push(Node n);

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

}  // namespace tscmrar
