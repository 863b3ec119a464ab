#include "tscmrar/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tscmrar/error.hpp"
#include "tscmrar/random.hpp"

namespace tscmrar {

namespace {

constexpr std::array<std::string_view, kTensorsPerModule> kModuleTensorNames = {
    "event_conv.weight", "event_conv.bias", "feature_conv.weight", "feature_conv.bias",
    "res_a.weight",      "res_a.bias",      "res_b.weight",        "res_b.bias",
    "res_c.weight",      "res_c.bias",
};

std::size_t argmax(const Tensor& t) {
  const auto d = t.data();
  return static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
}

}  // namespace

ChannelPlan ChannelPlan::for_window(std::size_t k) {
  if (k < 2) throw DataError("window size k must be >= 2, got " + std::to_string(k));
  ChannelPlan plan;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    plan.out_channels.push_back(i == 0 ? 16 : i == 1 ? 32 : 64);
  }
  return plan;
}

ModelParams::ModelParams(std::size_t k, std::size_t vocab_size, LabelSpace labels)
    : k_(k), vocab_size_(vocab_size), labels_(labels), plan_(ChannelPlan::for_window(k)) {
  if (vocab_size == 0) throw DataError("vocabulary size must be positive");
  if (labels.residents == 0 || labels.activities == 0) {
    throw DataError("label space must have at least one resident and one activity");
  }
  tensors_.reserve(module_count() * kTensorsPerModule + 4);
  for (std::size_t m = 0; m < module_count(); ++m) {
    const std::string prefix = "module" + std::to_string(m + 1) + ".";
    const ConvSpec specs[] = {event_conv(m), feature_conv(m), residual_conv(m),
                              residual_conv(m), residual_conv(m)};
    for (std::size_t conv = 0; conv < 5; ++conv) {
      tensors_.emplace_back(prefix + std::string(kModuleTensorNames[2 * conv]),
                            Tensor(specs[conv].weight_shape()), ParamRole::kWeight);
      tensors_.emplace_back(prefix + std::string(kModuleTensorNames[2 * conv + 1]),
                            Tensor(specs[conv].bias_shape()), ParamRole::kBias);
    }
  }
  const std::size_t d = head_input_size();
  tensors_.emplace_back("resident_head.weight", Tensor(Shape{labels.residents, d}));
  tensors_.emplace_back("resident_head.bias", Tensor(Shape{labels.residents}),
                        ParamRole::kBias);
  tensors_.emplace_back("activity_head.weight", Tensor(Shape{labels.activities, d}));
  tensors_.emplace_back("activity_head.bias", Tensor(Shape{labels.activities}),
                        ParamRole::kBias);
}

std::size_t ModelParams::head_input_size() const {
  return plan_.out_channels.back() * vocab_size_;
}

ConvSpec ModelParams::event_conv(std::size_t module) const {
  return {1, plan_.out_channels.at(module), kKernelSize};
}

ConvSpec ModelParams::feature_conv(std::size_t module) const {
  return {plan_.feature_in(module), plan_.out_channels.at(module), kKernelSize};
}

ConvSpec ModelParams::residual_conv(std::size_t module) const {
  const std::size_t c = plan_.out_channels.at(module);
  return {c, c, kKernelSize};
}

std::size_t ModelParams::index_of(std::size_t module, ModuleTensor which) const {
  if (module >= module_count()) {
    throw DataError("module " + std::to_string(module) + " out of range");
  }
  return module * kTensorsPerModule + static_cast<std::size_t>(which);
}

std::size_t ModelParams::index_of(HeadTensor which) const {
  return module_count() * kTensorsPerModule + static_cast<std::size_t>(which);
}

const ParamTensor* ModelParams::find(std::string_view name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.value.size();
  return n;
}

void ModelParams::zero_grad() {
  for (auto& t : tensors_) t.zero_grad();
}

ModelParams init_params(std::size_t k, std::size_t vocab_size, std::uint64_t seed,
                        LabelSpace labels) {
  ModelParams params(k, vocab_size, labels);
  Rng rng(seed);
  for (auto& t : params.tensors()) {
    if (t.role == ParamRole::kBias) continue;
    const auto& shape = t.value.shape();
    // conv [out x in x M] and dense [out x in] both have fan_in = numel / out
    const double fan_in = static_cast<double>(shape.numel() / shape[0]);
    const double limit = std::sqrt(6.0 / fan_in);
    for (double& v : t.value.data()) v = rng.uniform(-limit, limit);
  }
  return params;
}

ModelVars ModelVars::trainable(Tape& tape, ModelParams& params) {
  ModelVars vars;
  vars.params_ = &params;
  for (auto& t : params.tensors()) vars.vars_.push_back(tape.param(t));
  return vars;
}

ModelVars ModelVars::frozen(Tape& tape, const ModelParams& params) {
  ModelVars vars;
  vars.params_ = &params;
  for (const auto& t : params.tensors()) vars.vars_.push_back(tape.frozen(t.value));
  return vars;
}

Var record_basic_module(Tape& tape, Var feature, Var event, const ModelVars& vars,
                        std::size_t module) {
  const ModelParams& p = vars.params();
  using enum ModuleTensor;
  const Var event_map = tape.relu(tape.conv1d(event, vars(module, kEventWeight),
                                              vars(module, kEventBias),
                                              p.event_conv(module)));
  const Var feature_map = tape.relu(tape.conv1d(feature, vars(module, kFeatureWeight),
                                                vars(module, kFeatureBias),
                                                p.feature_conv(module)));
  const Var merged = tape.add(event_map, feature_map);

  const ConvSpec res = p.residual_conv(module);
  Var r = tape.relu(tape.conv1d(merged, vars(module, kResAWeight), vars(module, kResABias), res));
  r = tape.relu(tape.conv1d(r, vars(module, kResBWeight), vars(module, kResBBias), res));
  r = tape.conv1d(r, vars(module, kResCWeight), vars(module, kResCBias), res);
  return tape.relu(tape.add(merged, r));
}

Var record_tree(Tape& tape, const SampleWindow& window, const ModelVars& vars) {
  const ModelParams& p = vars.params();
  const std::size_t k = p.window_size();
  if (window.size() != k) {
    throw ShapeError("window has " + std::to_string(window.size()) +
                     " events but the model expects k=" + std::to_string(k));
  }
  for (const auto& e : window.embeddings) {
    if (e.shape() != Shape{1, p.vocab_size()}) {
      throw ShapeError("window embedding " + e.shape().str() + " != [1x" +
                       std::to_string(p.vocab_size()) + "]");
    }
  }
  Var feature = tape.constant(window.embeddings[k - 2]);
  for (std::size_t m = 0; m < p.module_count(); ++m) {
    const Var event = tape.constant(window.embeddings[m == 0 ? k - 1 : k - 2 - m]);
    feature = record_basic_module(tape, feature, event, vars, m);
  }
  return feature;
}

PredictionVars record_predict(Tape& tape, const SampleWindow& window,
                              const ModelVars& vars) {
  const Var top = record_tree(tape, window, vars);
  using enum HeadTensor;
  PredictionVars out;
  out.resident_probs =
      tape.softmax(tape.dense(top, vars(kResidentWeight), vars(kResidentBias)));
  out.activity_probs =
      tape.softmax(tape.dense(top, vars(kActivityWeight), vars(kActivityBias)));
  return out;
}

LabelPair Prediction::label() const {
  return {argmax(resident_probs), argmax(activity_probs)};
}

Tensor basic_module(const Tensor& feature, const Tensor& event,
                    const ModelParams& params, std::size_t module) {
  Tape tape;
  const ModelVars vars = ModelVars::frozen(tape, params);
  const Var out = record_basic_module(tape, tape.constant(feature),
                                      tape.constant(event), vars, module);
  return tape.value(out);
}

Tensor tree_forward(const SampleWindow& window, const ModelParams& params) {
  Tape tape;
  const ModelVars vars = ModelVars::frozen(tape, params);
  return tape.value(record_tree(tape, window, vars));
}

Prediction predict(const SampleWindow& window, const ModelParams& params) {
  Tape tape;
  const ModelVars vars = ModelVars::frozen(tape, params);
  const PredictionVars out = record_predict(tape, window, vars);
  return {tape.value(out.resident_probs), tape.value(out.activity_probs)};
}

}  // namespace tscmrar
