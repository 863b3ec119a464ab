#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "support.hpp"
#include "tscmrar/error.hpp"
#include "tscmrar/gradcheck.hpp"
#include "tscmrar/model.hpp"
#include "tscmrar/training.hpp"

using namespace tscmrar;

namespace {

// Straight-line re-implementation of the basic module with plain loops.
using Map = std::vector<std::vector<double>>;  // [channels][length]

Map to_map(const Tensor& t) {
  Map m(t.shape()[0], std::vector<double>(t.shape()[1]));
  for (std::size_t c = 0; c < m.size(); ++c) {
    for (std::size_t p = 0; p < m[c].size(); ++p) m[c][p] = t.at(c, p);
  }
  return m;
}

Map conv3(const Map& x, const Tensor& w, const Tensor& b) {
  const std::size_t len = x[0].size();
  Map out(w.shape()[0], std::vector<double>(len, 0.0));
  for (std::size_t j = 0; j < out.size(); ++j) {
    for (std::size_t p = 0; p < len; ++p) {
      double s = b[j];
      for (std::size_t c = 0; c < x.size(); ++c) {
        if (p >= 1) s += w.at(j, c, 0) * x[c][p - 1];
        s += w.at(j, c, 1) * x[c][p];
        if (p + 1 < len) s += w.at(j, c, 2) * x[c][p + 1];
      }
      out[j][p] = s;
    }
  }
  return out;
}

Map relu_map(Map m) {
  for (auto& row : m) {
    for (double& v : row) v = v > 0.0 ? v : 0.0;
  }
  return m;
}

Map add_map(Map a, const Map& b) {
  for (std::size_t c = 0; c < a.size(); ++c) {
    for (std::size_t p = 0; p < a[c].size(); ++p) a[c][p] += b[c][p];
  }
  return a;
}

Map oracle_module(const Map& feature, const Map& event, const ModelParams& params, std::size_t m) {
  auto v = [&](ModuleTensor t) -> const Tensor& { return params.at(m, t).value; };
  const Map h = add_map(relu_map(conv3(event, v(ModuleTensor::kEventWeight), v(ModuleTensor::kEventBias))),
                        relu_map(conv3(feature, v(ModuleTensor::kFeatureWeight), v(ModuleTensor::kFeatureBias))));
  const Map a = relu_map(conv3(h, v(ModuleTensor::kResAWeight), v(ModuleTensor::kResABias)));
  const Map b = relu_map(conv3(a, v(ModuleTensor::kResBWeight), v(ModuleTensor::kResBBias)));
  const Map r = conv3(b, v(ModuleTensor::kResCWeight), v(ModuleTensor::kResCBias));
  return relu_map(add_map(h, r));
}

// Newest pair first, then fold older events in.
Map oracle_tree(const SampleWindow& w, const ModelParams& params) {
  const std::size_t k = w.size();
  Map f = oracle_module(to_map(w.embeddings[k - 2]), to_map(w.embeddings[k - 1]), params, 0);
  for (std::size_t m = 1; m + 1 < k; ++m) {
    f = oracle_module(f, to_map(w.embeddings[k - 2 - m]), params, m);
  }
  return f;
}

ModelParams random_params(std::size_t k, std::uint64_t seed, double bias_scale) {
  ModelParams p = init_params(k, 37, seed);
  Rng rng(seed + 1000);
  for (auto& t : p.tensors()) {
    if (t.role == ParamRole::kBias) {
      for (double& v : t.value.data()) v = rng.uniform(-bias_scale, bias_scale);
    }
  }
  return p;
}

SampleWindow random_window(std::size_t k, Rng& rng, std::size_t pads = 0) {
  std::vector<int> s(k, kPadSensor);
  for (std::size_t i = pads; i < k; ++i) s[i] = static_cast<int>(rng.below(37));
  return window_from_sensors(s, {static_cast<std::size_t>(rng.below(2)),
                                 static_cast<std::size_t>(rng.below(15))},
                             37);
}

void check_close(const Tensor& got, const Map& want) {
  REQUIRE(got.shape()[0] == want.size());
  REQUIRE(got.shape()[1] == want[0].size());
  for (std::size_t c = 0; c < want.size(); ++c) {
    for (std::size_t p = 0; p < want[c].size(); ++p) {
      REQUIRE(got.at(c, p) == doctest::Approx(want[c][p]).epsilon(1e-10).scale(1.0));
    }
  }
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("structure for k=8") {
  const ModelParams p(8, 37);
  CHECK(p.module_count() == 7);
  CHECK(p.plan().out_channels == std::vector<std::size_t>{16, 32, 64, 64, 64, 64, 64});
  CHECK(p.head_input_size() == 2368);
  CHECK(p.tensors().size() == 7 * kTensorsPerModule + 4);
  CHECK(p.at(HeadTensor::kResidentWeight).value.shape() == Shape{2, 2368});
  CHECK(p.at(HeadTensor::kActivityWeight).value.shape() == Shape{15, 2368});
  CHECK(p.at(0, ModuleTensor::kFeatureWeight).value.shape() == Shape{16, 1, 3});
  CHECK(p.at(1, ModuleTensor::kFeatureWeight).value.shape() == Shape{32, 16, 3});
  CHECK(p.at(6, ModuleTensor::kEventWeight).value.shape() == Shape{64, 1, 3});
  CHECK(p.at(6, ModuleTensor::kResCWeight).value.shape() == Shape{64, 64, 3});
  CHECK(p.find("module3.res_b.weight") != nullptr);
  CHECK(p.find("activity_head.bias") != nullptr);
  CHECK(p.find("module8.res_b.weight") == nullptr);
}

TEST_CASE("parameter count matches an independent tally") {
  for (std::size_t k : {2u, 3u, 5u, 8u, 10u}) {
    std::size_t expected = 0;
    std::size_t prev = 1, last = 0;
    for (std::size_t m = 0; m + 1 < k; ++m) {
      const std::size_t c = m == 0 ? 16 : m == 1 ? 32 : 64;
      expected += (c * 1 * 3 + c) + (c * prev * 3 + c) + 3 * (c * c * 3 + c);
      prev = c;
      last = c;
    }
    expected += (last * 37 + 1) * 2 + (last * 37 + 1) * 15;
    CAPTURE(k);
    CHECK(ModelParams(k, 37).parameter_count() == expected);
  }
  CHECK(ModelParams(8, 37).parameter_count() == 295937);
  CHECK(ChannelPlan::for_window(2).out_channels == std::vector<std::size_t>{16});
}

TEST_CASE("init_params") {
  const ModelParams a = init_params(8, 37, 5);
  const ModelParams b = init_params(8, 37, 5);
  const ModelParams c = init_params(8, 37, 6);
  bool differs = false;
  for (std::size_t i = 0; i < a.tensors().size(); ++i) {
    const auto& t = a.tensors()[i];
    CHECK(t.value == b.tensors()[i].value);
    differs = differs || !(t.value == c.tensors()[i].value);
    if (t.role == ParamRole::kBias) {
      for (double v : t.value.data()) CHECK(v == 0.0);
    } else {
      const auto& s = t.value.shape();
      const double limit = std::sqrt(6.0 / static_cast<double>(s.numel() / s[0]));
      double lo = 0.0, hi = 0.0;
      for (double v : t.value.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      CHECK(lo >= -limit);
      CHECK(hi <= limit);
      CHECK(hi > 0.5 * limit);  // actually spread, not degenerate
    }
  }
  CHECK(differs);
  CHECK_THROWS_AS(init_params(1, 37, 1), DataError);
}

TEST_CASE("basic module with zero parameters is zero") {
  const ModelParams p(8, 37);
  Rng rng(1);
  const Tensor out = basic_module(test::random_tensor(Shape{16, 37}, rng),
                                  test::random_tensor(Shape{1, 37}, rng), p, 1);
  CHECK(out.shape() == Shape{32, 37});
  for (double v : out.data()) CHECK(v == 0.0);
}

TEST_CASE("zero residual path passes h through") {
  ModelParams p = random_params(8, 3, 0.1);
  for (auto which : {ModuleTensor::kResCWeight, ModuleTensor::kResCBias}) {
    p.at(2, which).value.fill(0.0);
  }
  Rng rng(2);
  const Tensor feature = test::random_tensor(Shape{32, 37}, rng);
  const Tensor event = one_hot(5, 37);
  const Tensor out = basic_module(feature, event, p, 2);
  const Tensor h = add(relu(conv1d(event, p.at(2, ModuleTensor::kEventWeight).value,
                                   p.at(2, ModuleTensor::kEventBias).value, p.event_conv(2))),
                       relu(conv1d(feature, p.at(2, ModuleTensor::kFeatureWeight).value,
                                   p.at(2, ModuleTensor::kFeatureBias).value, p.feature_conv(2))));
  CHECK(out == h);
}

TEST_CASE("basic module matches the straight-line oracle") {
  Rng rng(3);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const ModelParams p = random_params(8, seed, 0.2);
    for (std::size_t m = 0; m < p.module_count(); ++m) {
      const Tensor feature =
          test::random_tensor(Shape{p.plan().feature_in(m), 37}, rng, -1.0, 1.0);
      const Tensor event = test::random_tensor(Shape{1, 37}, rng);
      CAPTURE(seed);
      CAPTURE(m);
      check_close(basic_module(feature, event, p, m), oracle_module(to_map(feature), to_map(event), p, m));
    }
  }
}

TEST_CASE("tree_forward matches the oracle fold") {
  Rng rng(4);
  for (std::size_t k : {2u, 3u, 8u}) {
    const ModelParams p = random_params(k, 10 + k, 0.1);
    for (std::size_t pads : {std::size_t{0}, k - 1}) {
      const SampleWindow w = random_window(k, rng, pads);
      const Tensor out = tree_forward(w, p);
      CAPTURE(k);
      CAPTURE(pads);
      check_close(out, oracle_tree(w, p));
    }
  }
}

TEST_CASE("tree_forward shapes, zeros and determinism") {
  Rng rng(5);
  const SampleWindow target_only = random_window(8, rng, 7);
  const Tensor zero = tree_forward(target_only, ModelParams(8, 37));
  CHECK(zero.shape() == Shape{64, 37});
  for (double v : zero.data()) CHECK(v == 0.0);

  const ModelParams p = init_params(8, 37, 9);
  const SampleWindow w = random_window(8, rng);
  CHECK(tree_forward(w, p) == tree_forward(w, p));
  CHECK_THROWS_AS(tree_forward(random_window(6, rng), p), ShapeError);
}

TEST_CASE("predict") {
  Rng rng(6);
  const Prediction uniform = predict(random_window(8, rng), ModelParams(8, 37));
  for (double v : uniform.resident_probs.data()) CHECK(v == doctest::Approx(0.5));
  for (double v : uniform.activity_probs.data()) CHECK(v == doctest::Approx(1.0 / 15.0));
  CHECK(uniform.label() == LabelPair{0, 0});  // ties go to the lowest index

  const ModelParams p = init_params(8, 37, 7);
  for (int i = 0; i < 5; ++i) {
    const Prediction pr = predict(random_window(8, rng), p);
    const auto sum = [](const Tensor& t) { return std::accumulate(t.data().begin(), t.data().end(), 0.0); };
    CHECK(sum(pr.resident_probs) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sum(pr.activity_probs) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(pr.resident_probs.size() == 2);
    CHECK(pr.activity_probs.size() == 15);
  }
}

TEST_CASE("heads read the top feature map channel-major") {
  // With only head weight (0, c*37 + p) set and zero bias, the resident logit 0
  // equals the tree output at (c, p) and logit 1 is zero.
  ModelParams p = random_params(3, 21, 0.1);
  Rng rng(7);
  const SampleWindow w = random_window(3, rng);
  const Tensor top = tree_forward(w, p);
  std::size_t c = 0, pos = 0;
  for (std::size_t i = 0; i < top.shape()[0]; ++i) {
    for (std::size_t j = 0; j < top.shape()[1]; ++j) {
      if (top.at(i, j) > top.at(c, pos)) c = i, pos = j;
    }
  }
  auto& head = p.at(HeadTensor::kResidentWeight).value;
  head.fill(0.0);
  head.at(0, c * 37 + pos) = 1.0;
  p.at(HeadTensor::kResidentBias).value.fill(0.0);
  const Prediction pr = predict(w, p);
  const double z0 = top.at(c, pos);
  REQUIRE(z0 != 0.0);
  CHECK(pr.resident_probs[0] == doctest::Approx(1.0 / (1.0 + std::exp(-z0))));
}

TEST_CASE("full network gradient check, small window") {
  ModelParams p = random_params(3, 31, 0.1);
  Rng rng(8);
  const SampleWindow w = random_window(3, rng);
  const LossFn loss = [&](Tape& tape) {
    const auto vars = ModelVars::trainable(tape, p);
    return record_joint_loss(tape, record_predict(tape, w, vars), w.label, vars, 0.0004);
  };
  const auto report = gradient_check(loss, p.tensors(), 60, 3);
  CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("every module's tensors get gradient") {
  ModelParams p = random_params(8, 41, 0.1);
  Rng rng(9);
  const SampleWindow w = random_window(8, rng);
  Tape tape;
  const auto vars = ModelVars::trainable(tape, p);
  tape.backward(record_joint_loss(tape, record_predict(tape, w, vars), w.label, vars, 0.0));
  for (const auto& t : p.tensors()) {
    const bool any = std::any_of(t.grad.data().begin(), t.grad.data().end(),
                                 [](double g) { return g != 0.0; });
    CAPTURE(t.name);
    CHECK(any);
  }
}

}  // TEST_SUITE
