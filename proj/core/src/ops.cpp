#include "tscmrar/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tscmrar/error.hpp"

namespace tscmrar {

namespace {

std::string dims(const Shape& s) { return s.str(); }

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.shape().rank() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " +
                     std::to_string(rank) + ", got " + dims(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + dims(a.shape()) +
                     " vs " + dims(b.shape()));
  }
}

void check_conv_shapes(const Tensor& input, const Tensor& weights,
                       const ConvSpec& spec) {
  spec.validate();
  require_rank(input, 2, "conv1d input");
  if (input.shape()[0] != spec.in_channels) {
    throw ShapeError("conv1d: input channels " + std::to_string(input.shape()[0]) +
                     " != spec in_channels " + std::to_string(spec.in_channels));
  }
  if (input.shape()[1] == 0) throw ShapeError("conv1d: input length is 0");
  if (weights.shape() != spec.weight_shape()) {
    throw ShapeError("conv1d: weights " + dims(weights.shape()) +
                     " != expected " + dims(spec.weight_shape()) +
                     " (out_channels x in_channels x kernel_size)");
  }
}

// Micro-tile kept in registers: kRowBlock rows by kLaneBlock positions.
constexpr std::size_t kRowBlock = 4;
#if defined(__AVX__)
constexpr std::size_t kLaneBlock = 8;
#else
constexpr std::size_t kLaneBlock = 4;
#endif

std::size_t round_up(std::size_t n, std::size_t to) { return (n + to - 1) / to * to; }

// Scratch matrices reused across calls on the same thread.
struct ConvScratch {
  std::vector<double> cols;    // [K x Lp], cols[r][p] = input[c][p + m - pad], r = c*taps + m
  std::vector<double> cols_t;  // [L x Kp] transpose of cols
  std::vector<double> grad;    // gemm output
  std::vector<double> grad_pad;  // [Cout x Lp] grad_out with zero tail
};

ConvScratch& scratch() {
  thread_local ConvScratch s;
  return s;
}

// Fills cols as a [K x Lp] matrix, zero beyond the valid range.
void im2col(const double* in, std::size_t in_channels, std::size_t length,
            std::size_t taps, std::size_t pad, std::size_t lp, std::vector<double>& cols) {
  cols.assign(in_channels * taps * lp, 0.0);
  for (std::size_t c = 0; c < in_channels; ++c) {
    const double* src = in + c * length;
    for (std::size_t m = 0; m < taps; ++m) {
      double* dst = cols.data() + (c * taps + m) * lp;
      for (std::size_t p = 0; p < length; ++p) {
        const std::size_t q = p + m;
        if (q >= pad && q - pad < length) dst[p] = src[q - pad];
      }
    }
  }
}

// out[i][p] (i < rows, p < lp) = sum_r a[i * a_stride + r * a_step] * b[r * lp + p]
// for r < depth. Accumulation order over r is fixed. `a` is first packed into
// panels of kRowBlock rows so the micro-tile has no ragged edges.
void gemm_rows(const double* a, std::size_t a_stride, std::size_t a_step,
               const double* b, std::size_t depth, std::size_t rows, std::size_t lp,
               double* out) {
  thread_local std::vector<double> panel;
  const std::size_t padded_rows = round_up(rows, kRowBlock);
  panel.assign(padded_rows * depth, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t base = (i / kRowBlock) * depth * kRowBlock + i % kRowBlock;
    for (std::size_t r = 0; r < depth; ++r) {
      panel[base + r * kRowBlock] = a[i * a_stride + r * a_step];
    }
  }
  for (std::size_t i0 = 0; i0 < rows; i0 += kRowBlock) {
    const double* w0 = panel.data() + i0 * depth;
    const std::size_t ni = std::min(kRowBlock, rows - i0);
    for (std::size_t p0 = 0; p0 < lp; p0 += kLaneBlock) {
      double acc[kRowBlock][kLaneBlock] = {};
      for (std::size_t r = 0; r < depth; ++r) {
        const double* x = b + r * lp + p0;
        const double* w = w0 + r * kRowBlock;
        for (std::size_t ii = 0; ii < kRowBlock; ++ii) {
          for (std::size_t pp = 0; pp < kLaneBlock; ++pp) acc[ii][pp] += w[ii] * x[pp];
        }
      }
      for (std::size_t ii = 0; ii < ni; ++ii) {
        std::copy(acc[ii], acc[ii] + kLaneBlock, out + (i0 + ii) * lp + p0);
      }
    }
  }
}

}  // namespace

void ConvSpec::validate() const {
  if (in_channels == 0) throw ShapeError("ConvSpec: in_channels must be positive");
  if (out_channels == 0) throw ShapeError("ConvSpec: out_channels must be positive");
  if (kernel_size == 0 || kernel_size % 2 == 0) {
    throw ShapeError("ConvSpec: kernel_size must be odd, got " +
                     std::to_string(kernel_size));
  }
}

Tensor conv1d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const ConvSpec& spec) {
  check_conv_shapes(input, weights, spec);
  if (bias.shape() != spec.bias_shape()) {
    throw ShapeError("conv1d: bias " + dims(bias.shape()) + " != expected " +
                     dims(spec.bias_shape()));
  }
  const std::size_t length = input.shape()[1];
  const std::size_t depth = spec.in_channels * spec.kernel_size;
  const std::size_t lp = round_up(length, kLaneBlock);
  ConvScratch& s = scratch();
  im2col(input.data().data(), spec.in_channels, length, spec.kernel_size, spec.padding(),
         lp, s.cols);
  s.grad.resize(spec.out_channels * lp);
  gemm_rows(weights.data().data(), depth, 1, s.cols.data(), depth, spec.out_channels, lp,
            s.grad.data());
  Tensor out(Shape{spec.out_channels, length});
  for (std::size_t j = 0; j < spec.out_channels; ++j) {
    for (std::size_t p = 0; p < length; ++p) out.at(j, p) = bias[j] + s.grad[j * lp + p];
  }
  return out;
}

void conv1d_backward(const Tensor& input, const Tensor& weights,
                     const ConvSpec& spec, const Tensor& grad_out,
                     Tensor* grad_input, Tensor& grad_weights, Tensor& grad_bias) {
  check_conv_shapes(input, weights, spec);
  const std::size_t length = input.shape()[1];
  if (grad_out.shape() != Shape{spec.out_channels, length}) {
    throw ShapeError("conv1d_backward: grad_out " + dims(grad_out.shape()));
  }
  const std::size_t taps = spec.kernel_size;
  const std::size_t pad = spec.padding();
  const std::size_t cout = spec.out_channels;
  const std::size_t depth = spec.in_channels * taps;
  const std::size_t lp = round_up(length, kLaneBlock);
  const std::size_t kp = round_up(depth, kLaneBlock);
  ConvScratch& s = scratch();

  for (std::size_t j = 0; j < cout; ++j) {
    const double* g = grad_out.data().data() + j * length;
    double gb = 0.0;
    for (std::size_t p = 0; p < length; ++p) gb += g[p];
    grad_bias[j] += gb;
  }

  // grad_weights[j][r] += sum_p grad_out[j][p] * cols[r][p], computed as
  // grad_out [Cout x L] times cols_t [L x Kp].
  im2col(input.data().data(), spec.in_channels, length, taps, pad, lp, s.cols);
  s.cols_t.assign(length * kp, 0.0);
  for (std::size_t r = 0; r < depth; ++r) {
    for (std::size_t p = 0; p < length; ++p) s.cols_t[p * kp + r] = s.cols[r * lp + p];
  }
  s.grad.resize(cout * kp);
  gemm_rows(grad_out.data().data(), length, 1, s.cols_t.data(), length, cout, kp,
            s.grad.data());
  double* gw = grad_weights.data().data();
  for (std::size_t j = 0; j < cout; ++j) {
    for (std::size_t r = 0; r < depth; ++r) gw[j * depth + r] += s.grad[j * kp + r];
  }

  if (!grad_input) return;
  // grad_cols [K x Lp] = weights^T [K x Cout] times grad_out [Cout x Lp], then
  // scattered back onto the unpadded input positions.
  s.grad_pad.assign(cout * lp, 0.0);
  for (std::size_t j = 0; j < cout; ++j) {
    for (std::size_t p = 0; p < length; ++p) {
      s.grad_pad[j * lp + p] = grad_out.data()[j * length + p];
    }
  }
  s.grad.resize(depth * lp);
  gemm_rows(weights.data().data(), 1, depth, s.grad_pad.data(), cout, depth, lp,
            s.grad.data());
  double* gin = grad_input->data().data();
  for (std::size_t c = 0; c < spec.in_channels; ++c) {
    for (std::size_t m = 0; m < taps; ++m) {
      const double* row = s.grad.data() + (c * taps + m) * lp;
      for (std::size_t p = 0; p < length; ++p) {
        const std::size_t q = p + m;
        if (q >= pad && q - pad < length) gin[c * length + q - pad] += row[p];
      }
    }
  }
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

void relu_backward(const Tensor& input, const Tensor& grad_out, Tensor& grad_input) {
  require_same_shape(input, grad_out, "relu_backward");
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input[i] > 0.0) grad_input[i] += grad_out[i];
  }
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  require_rank(weights, 2, "dense weights");
  const std::size_t rows = weights.shape()[0];
  const std::size_t cols = weights.shape()[1];
  if (input.size() != cols) {
    throw ShapeError("dense: input length " + std::to_string(input.size()) +
                     " != weights columns " + std::to_string(cols));
  }
  if (bias.shape() != Shape{rows}) {
    throw ShapeError("dense: bias " + dims(bias.shape()) + " != [" +
                     std::to_string(rows) + "]");
  }
  Tensor out(Shape{rows});
  const double* x = input.data().data();
  for (std::size_t k = 0; k < rows; ++k) {
    const double* w = weights.data().data() + k * cols;
    double acc = 0.0;
    for (std::size_t d = 0; d < cols; ++d) acc += w[d] * x[d];
    out[k] = bias[k] + acc;
  }
  return out;
}

void dense_backward(const Tensor& input, const Tensor& weights,
                    const Tensor& grad_out, Tensor* grad_input,
                    Tensor& grad_weights, Tensor& grad_bias) {
  const std::size_t rows = weights.shape()[0];
  const std::size_t cols = weights.shape()[1];
  if (grad_out.size() != rows || input.size() != cols) {
    throw ShapeError("dense_backward: shape mismatch");
  }
  const double* x = input.data().data();
  for (std::size_t k = 0; k < rows; ++k) {
    const double g = grad_out[k];
    grad_bias[k] += g;
    double* gw = grad_weights.data().data() + k * cols;
    for (std::size_t d = 0; d < cols; ++d) gw[d] += g * x[d];
    if (grad_input) {
      const double* w = weights.data().data() + k * cols;
      double* gx = grad_input->data().data();
      for (std::size_t d = 0; d < cols; ++d) gx[d] += g * w[d];
    }
  }
}

Tensor softmax(const Tensor& logits) {
  if (logits.size() == 0) throw ShapeError("softmax: empty logits");
  const auto values = logits.data();
  const double max = *std::max_element(values.begin(), values.end());
  Tensor out(Shape{logits.size()});
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(values[k] - max);
    total += out[k];
  }
  for (double& v : out.data()) v /= total;
  return out;
}

void softmax_backward(const Tensor& probs, const Tensor& grad_out,
                      Tensor& grad_logits) {
  double dot = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) dot += grad_out[k] * probs[k];
  for (std::size_t k = 0; k < probs.size(); ++k) {
    grad_logits[k] += probs[k] * (grad_out[k] - dot);
  }
}

double cross_entropy(const Tensor& probs, std::size_t target_index) {
  if (target_index >= probs.size()) {
    throw DataError("cross_entropy: target index " + std::to_string(target_index) +
                    " out of range for " + std::to_string(probs.size()) +
                    " classes");
  }
  return -std::log(std::max(probs[target_index], kProbabilityClip));
}

void cross_entropy_backward(const Tensor& probs, std::size_t target_index,
                            double grad_loss, Tensor& grad_probs) {
  const double p = probs[target_index];
  if (p > kProbabilityClip) grad_probs[target_index] += -grad_loss / p;
}

double sum_of_squares(const Tensor& t) {
  double acc = 0.0;
  for (double v : t.data()) acc += v * v;
  return acc;
}

}  // namespace tscmrar
