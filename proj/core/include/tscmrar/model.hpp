#pragma once

// Tree-structure convolutional network.
//
// A window of k one-hot events is folded by k-1 basic modules, newest first:
//
//   f_1 = B_1(e[t-1], e[t]),   f_i = B_i(f_{i-1}, e[t-i])   for i = 2..k-1
//
// where each basic module is
//
//   h   = relu(conv_event(event)) + relu(conv_feature(feature))
//   r   = conv_c(relu(conv_b(relu(conv_a(h)))))
//   out = relu(h + r)
//
// All convolutions use kernel 3, stride 1 and zero padding 1, so every
// feature map keeps the vocabulary length. Output channels run
// 16, 32, 64, 64, ... The last feature map is flattened channel-major and fed
// to two dense + softmax heads (resident, activity).

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tscmrar/casas.hpp"
#include "tscmrar/ops.hpp"
#include "tscmrar/tape.hpp"
#include "tscmrar/tensor.hpp"
#include "tscmrar/windowing.hpp"

namespace tscmrar {

inline constexpr std::size_t kKernelSize = 3;

struct ChannelPlan {
  std::vector<std::size_t> out_channels;  // one entry per basic module

  // k-1 modules: 16, 32, then 64 for the rest.
  static ChannelPlan for_window(std::size_t k);

  std::size_t modules() const { return out_channels.size(); }
  // Channels entering the feature branch; module 0 sees a raw event.
  std::size_t feature_in(std::size_t module) const {
    return module == 0 ? 1 : out_channels[module - 1];
  }
  bool operator==(const ChannelPlan&) const = default;
};

enum class ModuleTensor : std::size_t {
  kEventWeight,
  kEventBias,
  kFeatureWeight,
  kFeatureBias,
  kResAWeight,
  kResABias,
  kResBWeight,
  kResBBias,
  kResCWeight,
  kResCBias,
};
inline constexpr std::size_t kTensorsPerModule = 10;

enum class HeadTensor : std::size_t {
  kResidentWeight,
  kResidentBias,
  kActivityWeight,
  kActivityBias,
};

// Every trainable tensor of the network, in a fixed order with stable names
// ("module3.res_b.weight", "activity_head.bias", ...).
class ModelParams {
 public:
  // All tensors zero.
  ModelParams(std::size_t k, std::size_t vocab_size, LabelSpace labels = {});

  std::size_t window_size() const { return k_; }
  std::size_t vocab_size() const { return vocab_size_; }
  const LabelSpace& labels() const { return labels_; }
  const ChannelPlan& plan() const { return plan_; }
  std::size_t module_count() const { return plan_.modules(); }
  std::size_t head_input_size() const;

  ConvSpec event_conv(std::size_t module) const;
  ConvSpec feature_conv(std::size_t module) const;
  ConvSpec residual_conv(std::size_t module) const;

  std::vector<ParamTensor>& tensors() { return tensors_; }
  const std::vector<ParamTensor>& tensors() const { return tensors_; }
  std::size_t index_of(std::size_t module, ModuleTensor which) const;
  std::size_t index_of(HeadTensor which) const;
  ParamTensor& at(std::size_t module, ModuleTensor which) {
    return tensors_[index_of(module, which)];
  }
  const ParamTensor& at(std::size_t module, ModuleTensor which) const {
    return tensors_[index_of(module, which)];
  }
  ParamTensor& at(HeadTensor which) { return tensors_[index_of(which)]; }
  const ParamTensor& at(HeadTensor which) const { return tensors_[index_of(which)]; }
  const ParamTensor* find(std::string_view name) const;

  std::size_t parameter_count() const;
  void zero_grad();

 private:
  std::size_t k_;
  std::size_t vocab_size_;
  LabelSpace labels_;
  ChannelPlan plan_;
  std::vector<ParamTensor> tensors_;
};

// Weights uniform in +-sqrt(6 / fan_in), biases zero. Throws DataError if k < 2.
ModelParams init_params(std::size_t k, std::size_t vocab_size, std::uint64_t seed,
                        LabelSpace labels = {});

// Tape handles for every tensor of a ModelParams, in tensors() order.
class ModelVars {
 public:
  // Registers the tensors as trainable: backward() fills their grads.
  static ModelVars trainable(Tape& tape, ModelParams& params);
  // Registers read-only references; safe on shared, frozen params.
  static ModelVars frozen(Tape& tape, const ModelParams& params);

  const ModelParams& params() const { return *params_; }
  Var operator()(std::size_t module, ModuleTensor which) const {
    return vars_[params_->index_of(module, which)];
  }
  Var operator()(HeadTensor which) const { return vars_[params_->index_of(which)]; }
  std::span<const Var> all() const { return vars_; }

 private:
  const ModelParams* params_ = nullptr;
  std::vector<Var> vars_;
};

struct PredictionVars {
  Var resident_probs;
  Var activity_probs;
};

Var record_basic_module(Tape& tape, Var feature, Var event, const ModelVars& vars,
                        std::size_t module);
// Returns the top feature map [c_last x N].
Var record_tree(Tape& tape, const SampleWindow& window, const ModelVars& vars);
PredictionVars record_predict(Tape& tape, const SampleWindow& window,
                              const ModelVars& vars);

struct Prediction {
  Tensor resident_probs;
  Tensor activity_probs;

  LabelPair label() const;  // argmax of each head, lowest index on ties
};

Tensor basic_module(const Tensor& feature, const Tensor& event,
                    const ModelParams& params, std::size_t module);
Tensor tree_forward(const SampleWindow& window, const ModelParams& params);
Prediction predict(const SampleWindow& window, const ModelParams& params);

}  // namespace tscmrar
