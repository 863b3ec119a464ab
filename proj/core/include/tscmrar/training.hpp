#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "tscmrar/model.hpp"
#include "tscmrar/windowing.hpp"

namespace tscmrar {

struct TrainConfig {
  std::size_t batch_size = 128;     // alpha
  double l2_weight = 0.0004;        // beta
  double learning_rate = 0.0002;    // gamma
  std::size_t epochs = 25;
  std::uint64_t seed = 1;           // root seed; init and shuffles derive from it
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  // Throws DataError on a zero batch size, negative beta or non-positive gamma.
  void validate() const;
};

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;

  static AdamState for_params(std::span<const ParamTensor> params);
};

// Records  CE(resident) + CE(activity) + beta * sum ||W||^2  (weights only).
Var record_joint_loss(Tape& tape, const PredictionVars& pred, const LabelPair& label,
                      const ModelVars& vars, double l2_weight);
// Adds beta * sum ||W||^2 over weight tensors of `vars` to the tape.
Var record_l2(Tape& tape, const ModelVars& vars, double l2_weight);

double l2_penalty(const ModelParams& params);
double joint_loss(const Prediction& pred, const LabelPair& label,
                  const ModelParams& params, double l2_weight);

// Bias-corrected Adam update in place, then zeroes every grad. Throws
// DataError if the parameter list is empty or does not match the state.
void adam_step(std::span<ParamTensor> params, AdamState& state, double learning_rate,
               double beta1, double beta2, double eps);

struct EpochStats {
  double avg_loss = 0.0;  // mean of batch losses
  double max_batch_loss = 0.0;
  double min_batch_loss = 0.0;
  std::size_t batches = 0;
};

// Batch sizes for n windows: full batches of `batch_size`, last one partial.
std::vector<std::size_t> batch_sizes(std::size_t n, std::size_t batch_size);

// One pass over `windows` in an order that depends only on their contents and
// (config.seed, epoch). Each batch: forward, mean joint loss, backward, one
// Adam step.
EpochStats train_epoch(std::span<const SampleWindow> windows, ModelParams& params,
                       AdamState& state, const TrainConfig& config, std::size_t epoch);

struct FitResult {
  ModelParams params;
  std::vector<EpochStats> log;
};

using EpochCallback = std::function<void(std::size_t epoch, const EpochStats&)>;

// Initializes from derive_seed(config.seed, "init") and trains config.epochs
// epochs. Throws DataError on an empty training set.
FitResult fit(std::span<const SampleWindow> windows, const TrainConfig& config,
              std::size_t k, std::size_t vocab_size, LabelSpace labels = {},
              const EpochCallback& on_epoch = {});

// "epoch,avg_loss,max_batch_loss,min_batch_loss", epochs 1-based.
void write_loss_log_csv(std::ostream& out, std::span<const EpochStats> log);

struct SweepGrid {
  std::vector<std::size_t> batch_sizes{64, 128, 256};
  std::vector<double> l2_weights{0.0001, 0.0003, 0.0005, 0.0007, 0.0009};
  std::vector<double> learning_rates{0.0001, 0.0003, 0.0005, 0.0007, 0.0009};
  std::size_t tuning_epochs = 15;

  std::size_t size() const {
    return batch_sizes.size() * l2_weights.size() * learning_rates.size();
  }
};

struct SweepRow {
  std::size_t batch_size = 0;
  double l2_weight = 0.0;
  double learning_rate = 0.0;
  double max_loss = 0.0;  // over epoch losses
  double avg_loss = 0.0;
  double min_loss = 0.0;
};

// One model per grid point (alpha-major, then beta, then gamma), each trained
// for tuning_epochs from the same seed. `jobs` > 1 trains points on worker
// threads; results do not depend on it.
std::vector<SweepRow> sweep(std::span<const SampleWindow> windows, const SweepGrid& grid,
                            const TrainConfig& base, std::size_t k,
                            std::size_t vocab_size, LabelSpace labels = {},
                            std::size_t jobs = 1);

// "alpha,beta,gamma,max_loss,avg_loss,min_loss".
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace tscmrar
