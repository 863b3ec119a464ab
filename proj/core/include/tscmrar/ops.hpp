#pragma once

// Forward kernels and their hand-written adjoints. All functions are pure;
// the *_backward variants accumulate (+=) into the gradient outputs they are
// given, so a caller can sum contributions from several uses of a tensor.

#include <cstddef>

#include "tscmrar/tensor.hpp"

namespace tscmrar {

// Stride-1, zero-padded 1-D convolution. padding() keeps the length.
struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_size = 3;

  std::size_t padding() const { return (kernel_size - 1) / 2; }
  Shape weight_shape() const { return {out_channels, in_channels, kernel_size}; }
  Shape bias_shape() const { return {out_channels}; }

  // Throws ShapeError on zero counts or an even kernel.
  void validate() const;
};

inline constexpr double kProbabilityClip = 1e-12;

// input [c_in x L], weights [c_out x c_in x M], bias [c_out] -> [c_out x L].
// Pre-activation only; apply relu() separately.
Tensor conv1d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const ConvSpec& spec);
Tensor relu(const Tensor& input);
Tensor add(const Tensor& a, const Tensor& b);
// input [D] (any shape with D elements), weights [K x D], bias [K] -> [K].
Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias);
Tensor softmax(const Tensor& logits);
// -ln(max(probs[target], kProbabilityClip)).
double cross_entropy(const Tensor& probs, std::size_t target_index);
double sum_of_squares(const Tensor& t);

// grad_input may be null when the input needs no gradient.
void conv1d_backward(const Tensor& input, const Tensor& weights,
                     const ConvSpec& spec, const Tensor& grad_out,
                     Tensor* grad_input, Tensor& grad_weights, Tensor& grad_bias);
void relu_backward(const Tensor& input, const Tensor& grad_out, Tensor& grad_input);
void dense_backward(const Tensor& input, const Tensor& weights,
                    const Tensor& grad_out, Tensor* grad_input,
                    Tensor& grad_weights, Tensor& grad_bias);
void softmax_backward(const Tensor& probs, const Tensor& grad_out,
                      Tensor& grad_logits);
void cross_entropy_backward(const Tensor& probs, std::size_t target_index,
                            double grad_loss, Tensor& grad_probs);

}  // namespace tscmrar
