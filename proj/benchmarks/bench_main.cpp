#include <benchmark/benchmark.h>

#include <vector>

#include "tscmrar/baselines.hpp"
#include "tscmrar/model.hpp"
#include "tscmrar/ops.hpp"
#include "tscmrar/random.hpp"
#include "tscmrar/training.hpp"
#include "tscmrar/windowing.hpp"

using namespace tscmrar;

namespace {

constexpr std::size_t kVocab = 37;

Tensor random_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

std::vector<SampleWindow> random_windows(std::size_t count, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SampleWindow> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<int> sensors(k);
    for (int& s : sensors) s = static_cast<int>(rng.below(kVocab));
    out.push_back(window_from_sensors(
        sensors, {static_cast<std::size_t>(rng.below(2)), static_cast<std::size_t>(rng.below(15))},
        kVocab));
  }
  return out;
}

// args: in_channels, out_channels, kernel_size
void BM_Conv1dForward(benchmark::State& state) {
  const ConvSpec spec{static_cast<std::size_t>(state.range(0)),
                      static_cast<std::size_t>(state.range(1)),
                      static_cast<std::size_t>(state.range(2))};
  Rng rng(1);
  const Tensor x = random_tensor({spec.in_channels, kVocab}, rng);
  const Tensor w = random_tensor(spec.weight_shape(), rng);
  const Tensor b = random_tensor(spec.bias_shape(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(conv1d(x, w, b, spec));
}
BENCHMARK(BM_Conv1dForward)->Args({1, 16, 1})->Args({16, 16, 5})->Args({64, 64, 5});

void BM_Conv1dBackward(benchmark::State& state) {
  const ConvSpec spec{static_cast<std::size_t>(state.range(0)),
                      static_cast<std::size_t>(state.range(1)),
                      static_cast<std::size_t>(state.range(2))};
  Rng rng(2);
  const Tensor x = random_tensor({spec.in_channels, kVocab}, rng);
  const Tensor w = random_tensor(spec.weight_shape(), rng);
  const Tensor g = random_tensor({spec.out_channels, kVocab}, rng);
  Tensor gx(x.shape()), gw(w.shape()), gb(spec.bias_shape());
  for (auto _ : state) {
    conv1d_backward(x, w, spec, g, &gx, gw, gb);
    benchmark::DoNotOptimize(gw.data().data());
  }
}
BENCHMARK(BM_Conv1dBackward)->Args({16, 16, 5})->Args({64, 64, 5});

void BM_Predict(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const ModelParams params = init_params(k, kVocab, 3);
  const auto windows = random_windows(1, k, 4);
  for (auto _ : state) benchmark::DoNotOptimize(predict(windows.front(), params));
}
BENCHMARK(BM_Predict)->Arg(3)->Arg(8);

// One epoch over 64 windows at batch 16, i.e. 4 forward/backward/Adam steps.
void BM_TrainEpoch(benchmark::State& state) {
  const std::size_t k = 8;
  const auto windows = random_windows(64, k, 5);
  TrainConfig config;
  config.batch_size = 16;
  ModelParams params = init_params(k, kVocab, 6);
  AdamState adam = AdamState::for_params(params.tensors());
  std::size_t epoch = 0;
  for (auto _ : state) benchmark::DoNotOptimize(train_epoch(windows, params, adam, config, epoch++));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * windows.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_KnnPredict(benchmark::State& state) {
  const auto train = flatten(random_windows(static_cast<std::size_t>(state.range(0)), 8, 7));
  const auto query = flatten(random_windows(1, 8, 8).front());
  for (auto _ : state) benchmark::DoNotOptimize(knn_predict(train, query, kDefaultNeighbors));
}
BENCHMARK(BM_KnnPredict)->Arg(1000)->Arg(6000);

void BM_DecisionTreeFit(benchmark::State& state) {
  const auto train = flatten(random_windows(static_cast<std::size_t>(state.range(0)), 8, 9));
  for (auto _ : state) benchmark::DoNotOptimize(dt_fit(train));
}
BENCHMARK(BM_DecisionTreeFit)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
