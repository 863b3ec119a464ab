#include "tscmrar/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "tscmrar/error.hpp"
#include "tscmrar/random.hpp"

namespace tscmrar {

void TrainConfig::validate() const {
  if (batch_size == 0) throw DataError("batch size (alpha) must be positive");
  if (!(l2_weight >= 0.0)) throw DataError("L2 weight (beta) must be >= 0");
  if (!(learning_rate > 0.0)) throw DataError("learning rate (gamma) must be > 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw DataError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw DataError("Adam epsilon must be > 0");
}

AdamState AdamState::for_params(std::span<const ParamTensor> params) {
  AdamState state;
  for (const auto& p : params) {
    state.first_moment.emplace_back(p.value.shape());
    state.second_moment.emplace_back(p.value.shape());
  }
  return state;
}

Var record_l2(Tape& tape, const ModelVars& vars, double l2_weight) {
  const auto& tensors = vars.params().tensors();
  const auto handles = vars.all();
  Var total{};
  bool first = true;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].role != ParamRole::kWeight) continue;
    const Var sq = tape.sum_of_squares(handles[i]);
    total = first ? sq : tape.add(total, sq);
    first = false;
  }
  if (first) return tape.constant(Tensor::scalar(0.0));
  return tape.scale(total, l2_weight);
}

Var record_joint_loss(Tape& tape, const PredictionVars& pred, const LabelPair& label,
                      const ModelVars& vars, double l2_weight) {
  const Var ce = tape.add(tape.cross_entropy(pred.resident_probs, label.resident),
                          tape.cross_entropy(pred.activity_probs, label.activity));
  if (l2_weight == 0.0) return ce;
  return tape.add(ce, record_l2(tape, vars, l2_weight));
}

double l2_penalty(const ModelParams& params) {
  double total = 0.0;
  for (const auto& t : params.tensors()) {
    if (t.role == ParamRole::kWeight) total += sum_of_squares(t.value);
  }
  return total;
}

double joint_loss(const Prediction& pred, const LabelPair& label,
                  const ModelParams& params, double l2_weight) {
  double loss = cross_entropy(pred.resident_probs, label.resident) +
                cross_entropy(pred.activity_probs, label.activity);
  if (l2_weight != 0.0) loss += l2_weight * l2_penalty(params);
  return loss;
}

void adam_step(std::span<ParamTensor> params, AdamState& state, double learning_rate,
               double beta1, double beta2, double eps) {
  if (params.empty()) throw DataError("adam_step: no parameters");
  if (state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw DataError("adam_step: optimizer state does not match the parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(beta1, t);
  const double correction2 = 1.0 - std::pow(beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamTensor& p = params[i];
    Tensor& m = state.first_moment[i];
    Tensor& v = state.second_moment[i];
    if (m.shape() != p.value.shape() || v.shape() != p.value.shape()) {
      throw ShapeError("adam_step: moment shape mismatch for '" + p.name + "'");
    }
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad[j];
      m[j] = beta1 * m[j] + (1.0 - beta1) * g;
      v[j] = beta2 * v[j] + (1.0 - beta2) * g * g;
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p.value[j] -= learning_rate * m_hat / (std::sqrt(v_hat) + eps);
    }
    p.zero_grad();
  }
}

std::vector<std::size_t> batch_sizes(std::size_t n, std::size_t batch_size) {
  if (batch_size == 0) throw DataError("batch size must be positive");
  std::vector<std::size_t> sizes(n / batch_size, batch_size);
  if (n % batch_size) sizes.push_back(n % batch_size);
  return sizes;
}

EpochStats train_epoch(std::span<const SampleWindow> windows, ModelParams& params,
                       AdamState& state, const TrainConfig& config, std::size_t epoch) {
  config.validate();
  if (windows.empty()) throw DataError("train_epoch: no training windows");

  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return window_less(windows[a], windows[b]);
  });
  Rng rng(derive_seed(config.seed, "shuffle", epoch));
  rng.shuffle(order);

  EpochStats stats;
  stats.min_batch_loss = INFINITY;
  stats.max_batch_loss = -INFINITY;
  double loss_sum = 0.0;
  std::size_t cursor = 0;
  Tape tape;
  for (std::size_t size : batch_sizes(windows.size(), config.batch_size)) {
    params.zero_grad();
    const double inv = 1.0 / static_cast<double>(size);
    double ce_sum = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      const SampleWindow& w = windows[order[cursor++]];
      tape.clear();
      const ModelVars vars = ModelVars::trainable(tape, params);
      const PredictionVars pred = record_predict(tape, w, vars);
      const Var ce = record_joint_loss(tape, pred, w.label, vars, 0.0);
      ce_sum += tape.scalar(ce);
      tape.backward(tape.scale(ce, inv));
    }
    double batch_loss = ce_sum * inv;
    if (config.l2_weight != 0.0) {
      tape.clear();
      const ModelVars vars = ModelVars::trainable(tape, params);
      const Var l2 = record_l2(tape, vars, config.l2_weight);
      batch_loss += tape.scalar(l2);
      tape.backward(l2);
    }
    if (!std::isfinite(batch_loss)) {
      throw NumericError("training diverged: batch loss is not finite at epoch " +
                         std::to_string(epoch + 1));
    }
    adam_step(params.tensors(), state, config.learning_rate, config.adam_beta1,
              config.adam_beta2, config.adam_eps);
    loss_sum += batch_loss;
    stats.max_batch_loss = std::max(stats.max_batch_loss, batch_loss);
    stats.min_batch_loss = std::min(stats.min_batch_loss, batch_loss);
    ++stats.batches;
  }
  stats.avg_loss = loss_sum / static_cast<double>(stats.batches);
  return stats;
}

FitResult fit(std::span<const SampleWindow> windows, const TrainConfig& config,
              std::size_t k, std::size_t vocab_size, LabelSpace labels,
              const EpochCallback& on_epoch) {
  config.validate();
  if (windows.empty()) throw DataError("fit: training set is empty");
  FitResult result{init_params(k, vocab_size, derive_seed(config.seed, "init"), labels), {}};
  AdamState state = AdamState::for_params(result.params.tensors());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    result.log.push_back(train_epoch(windows, result.params, state, config, epoch));
    if (on_epoch) on_epoch(epoch, result.log.back());
  }
  return result;
}

void write_loss_log_csv(std::ostream& out, std::span<const EpochStats> log) {
  out << "epoch,avg_loss,max_batch_loss,min_batch_loss\n";
  out.precision(17);
  for (std::size_t i = 0; i < log.size(); ++i) {
    out << i + 1 << ',' << log[i].avg_loss << ',' << log[i].max_batch_loss << ','
        << log[i].min_batch_loss << '\n';
  }
}

std::vector<SweepRow> sweep(std::span<const SampleWindow> windows, const SweepGrid& grid,
                            const TrainConfig& base, std::size_t k,
                            std::size_t vocab_size, LabelSpace labels,
                            std::size_t jobs) {
  if (grid.tuning_epochs == 0) throw DataError("sweep: tuning_epochs must be >= 1");
  std::vector<SweepRow> rows;
  for (std::size_t a : grid.batch_sizes) {
    for (double b : grid.l2_weights) {
      for (double g : grid.learning_rates) rows.push_back({a, b, g});
    }
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        TrainConfig config = base;
        config.batch_size = rows[i].batch_size;
        config.l2_weight = rows[i].l2_weight;
        config.learning_rate = rows[i].learning_rate;
        config.epochs = grid.tuning_epochs;
        const FitResult fitted = fit(windows, config, k, vocab_size, labels);
        double sum = 0.0;
        rows[i].max_loss = -INFINITY;
        rows[i].min_loss = INFINITY;
        for (const auto& e : fitted.log) {
          sum += e.avg_loss;
          rows[i].max_loss = std::max(rows[i].max_loss, e.avg_loss);
          rows[i].min_loss = std::min(rows[i].min_loss, e.avg_loss);
        }
        rows[i].avg_loss = sum / static_cast<double>(fitted.log.size());
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, rows.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "alpha,beta,gamma,max_loss,avg_loss,min_loss\n";
  for (const auto& r : rows) {
    out << std::setprecision(6) << r.batch_size << ',' << r.l2_weight << ','
        << r.learning_rate << ',' << std::setprecision(17) << r.max_loss << ','
        << r.avg_loss << ',' << r.min_loss << '\n';
  }
}

}  // namespace tscmrar
