#include "tscmrar/tape.hpp"

#include <string>
#include <utility>

#include "tscmrar/error.hpp"

namespace tscmrar {

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) {
    throw NumericError("tape: variable " + std::to_string(v.id) +
                       " was not recorded on this tape");
  }
  return nodes_[v.id];
}

Var Tape::push(Node n) {
  if (consumed_) {
    throw NumericError("tape: recording after backward; call clear() first");
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
  const Node& n = node(v);
  if (n.kind == Kind::kParam) return n.param->value;
  if (n.kind == Kind::kFrozen) return *n.external;
  return n.value;
}

double Tape::scalar(Var v) const {
  const Tensor& t = value(v);
  if (t.size() != 1) throw ShapeError("tape: value " + t.shape().str() + " is not a scalar");
  return t[0];
}

Var Tape::constant(Tensor value) {
  Node n{.kind = Kind::kConstant};
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::param(ParamTensor& p) {
  Node n{.kind = Kind::kParam};
  n.param = &p;
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::frozen(const Tensor& t) {
  Node n{.kind = Kind::kFrozen};
  n.external = &t;
  return push(std::move(n));
}

Var Tape::conv1d(Var input, Var weights, Var bias, const ConvSpec& spec) {
  Node n{.kind = Kind::kConv1d, .a = input.id, .b = weights.id, .c = bias.id, .spec = spec};
  n.value = tscmrar::conv1d(value(input), value(weights), value(bias), spec);
  n.requires_grad = node(input).requires_grad || node(weights).requires_grad ||
                    node(bias).requires_grad;
  return push(std::move(n));
}

Var Tape::relu(Var x) {
  Node n{.kind = Kind::kRelu, .a = x.id};
  n.value = tscmrar::relu(value(x));
  n.requires_grad = node(x).requires_grad;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  Node n{.kind = Kind::kAdd, .a = a.id, .b = b.id};
  n.value = tscmrar::add(value(a), value(b));
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  return push(std::move(n));
}

Var Tape::dense(Var x, Var weights, Var bias) {
  Node n{.kind = Kind::kDense, .a = x.id, .b = weights.id, .c = bias.id};
  n.value = tscmrar::dense(value(x), value(weights), value(bias));
  n.requires_grad = node(x).requires_grad || node(weights).requires_grad ||
                    node(bias).requires_grad;
  return push(std::move(n));
}

Var Tape::softmax(Var logits) {
  Node n{.kind = Kind::kSoftmax, .a = logits.id};
  n.value = tscmrar::softmax(value(logits));
  n.requires_grad = node(logits).requires_grad;
  return push(std::move(n));
}

Var Tape::cross_entropy(Var probs, std::size_t target_index) {
  Node n{.kind = Kind::kCrossEntropy, .a = probs.id, .target = target_index};
  n.value = Tensor::scalar(tscmrar::cross_entropy(value(probs), target_index));
  n.requires_grad = node(probs).requires_grad;
  return push(std::move(n));
}

Var Tape::sum_of_squares(Var x) {
  Node n{.kind = Kind::kSumOfSquares, .a = x.id};
  n.value = Tensor::scalar(tscmrar::sum_of_squares(value(x)));
  n.requires_grad = node(x).requires_grad;
  return push(std::move(n));
}

Var Tape::scale(Var x, double factor) {
  Node n{.kind = Kind::kScale, .a = x.id, .factor = factor};
  n.value = value(x);
  for (double& v : n.value.data()) v *= factor;
  n.requires_grad = node(x).requires_grad;
  return push(std::move(n));
}

void Tape::backward(Var loss) {
  if (nodes_.empty()) throw NumericError("tape: backward without a recorded forward pass");
  if (consumed_) throw NumericError("tape: backward already ran on this recording");
  if (value(loss).size() != 1) {
    throw ShapeError("tape: backward needs a scalar loss, got " +
                     value(loss).shape().str());
  }
  consumed_ = true;

  std::vector<Tensor> adjoint(nodes_.size());
  adjoint[loss.id] = Tensor::scalar(1.0);
  // Returns the adjoint buffer for node `id`, or null if it needs no gradient.
  auto grad_of = [&](std::size_t id) -> Tensor* {
    const Node& n = nodes_[id];
    if (!n.requires_grad) return nullptr;
    if (adjoint[id].empty()) adjoint[id] = Tensor(value(Var{id}).shape());
    return &adjoint[id];
  };

  for (std::size_t i = loss.id + 1; i-- > 0;) {
    if (adjoint[i].empty()) continue;
    const Node& n = nodes_[i];
    const Tensor& g = adjoint[i];
    switch (n.kind) {
      case Kind::kConstant:
      case Kind::kFrozen:
        break;
      case Kind::kParam: {
        Tensor& target = n.param->grad;
        for (std::size_t j = 0; j < target.size(); ++j) target[j] += g[j];
        break;
      }
      case Kind::kConv1d: {
        Tensor* gw = grad_of(n.b);
        Tensor* gb = grad_of(n.c);
        Tensor scratch_w, scratch_b;
        if (!gw) scratch_w = Tensor(value(Var{n.b}).shape()), gw = &scratch_w;
        if (!gb) scratch_b = Tensor(value(Var{n.c}).shape()), gb = &scratch_b;
        conv1d_backward(value(Var{n.a}), value(Var{n.b}), n.spec, g,
                        grad_of(n.a), *gw, *gb);
        break;
      }
      case Kind::kRelu:
        if (Tensor* gx = grad_of(n.a)) relu_backward(value(Var{n.a}), g, *gx);
        break;
      case Kind::kAdd:
        for (std::size_t id : {n.a, n.b}) {
          if (Tensor* gx = grad_of(id)) {
            for (std::size_t j = 0; j < gx->size(); ++j) (*gx)[j] += g[j];
          }
        }
        break;
      case Kind::kDense: {
        Tensor* gw = grad_of(n.b);
        Tensor* gb = grad_of(n.c);
        Tensor scratch_w, scratch_b;
        if (!gw) scratch_w = Tensor(value(Var{n.b}).shape()), gw = &scratch_w;
        if (!gb) scratch_b = Tensor(value(Var{n.c}).shape()), gb = &scratch_b;
        dense_backward(value(Var{n.a}), value(Var{n.b}), g, grad_of(n.a), *gw, *gb);
        break;
      }
      case Kind::kSoftmax:
        if (Tensor* gx = grad_of(n.a)) softmax_backward(n.value, g, *gx);
        break;
      case Kind::kCrossEntropy:
        if (Tensor* gx = grad_of(n.a)) {
          cross_entropy_backward(value(Var{n.a}), n.target, g[0], *gx);
        }
        break;
      case Kind::kSumOfSquares:
        if (Tensor* gx = grad_of(n.a)) {
          const Tensor& x = value(Var{n.a});
          for (std::size_t j = 0; j < x.size(); ++j) (*gx)[j] += 2.0 * x[j] * g[0];
        }
        break;
      case Kind::kScale:
        if (Tensor* gx = grad_of(n.a)) {
          for (std::size_t j = 0; j < gx->size(); ++j) (*gx)[j] += n.factor * g[j];
        }
        break;
    }
    adjoint[i] = Tensor();
  }
}

void Tape::clear() {
  nodes_.clear();
  consumed_ = false;
}

}  // namespace tscmrar
