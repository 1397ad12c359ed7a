#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seagull/network.hpp"
#include "seagull/tasks.hpp"

namespace seagull {

enum class LossKind { mae, mse };
enum class OptimizerKind { sgd, rmsprop, adam };

std::string_view to_string(LossKind k);
std::string_view to_string(OptimizerKind k);
LossKind loss_from_string(std::string_view s);
OptimizerKind optimizer_from_string(std::string_view s);

/// MAE = mean |y - yhat| with subgradient sign(yhat - y) / N (0 at ties);
/// MSE = mean (y - yhat)^2 with gradient 2 (yhat - y) / N.
std::pair<double, std::vector<double>> loss_value_and_grad(LossKind kind,
                                                           std::span<const double> y_true,
                                                           std::span<const double> y_pred);
double loss_value(LossKind kind, std::span<const double> y_true, std::span<const double> y_pred);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 100;
  double base_lr = 0.003;
  std::size_t lr_halving_period = 100;
  LossKind loss = LossKind::mae;
  std::uint64_t seed = 1;
  bool shuffle = true;

  /// Throws ConfigError on epochs == 0, batch_size == 0, or a bad lr.
  void validate() const;
};

/// base_lr * 2^-(epoch / lr_halving_period), integer division.
double lr_at_epoch(const TrainConfig& config, std::size_t epoch);

class OptimizerState {
 public:
  OptimizerKind kind = OptimizerKind::rmsprop;
  double learning_rate = 0.003;
  double momentum = 0.0;  // sgd
  double decay = 0.9;     // rmsprop rho
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Updates net in place with step size lr. Accumulators are created on
  /// the first call and must shape-match on every later one.
  void step(Network& net, const Gradients& grads, double lr);

  std::size_t steps_taken() const noexcept { return steps_; }
  const std::vector<Matrix>& first_moments() const noexcept { return first_; }
  const std::vector<Matrix>& second_moments() const noexcept { return second_; }

 private:
  std::vector<Matrix> first_;   // sgd velocity, adam m
  std::vector<Matrix> second_;  // rmsprop / adam v
  std::size_t steps_ = 0;
};

OptimizerState make_optimizer(OptimizerKind kind, double learning_rate);

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  /// CSV with columns epoch,lr,train_loss,test_loss,seconds.
  std::string to_csv(bool include_time = true) const;
};

struct TrainResult {
  Network network;
  TrainHistory history;
};

/// Mini-batch training. Each epoch shuffles with stream (seed, "shuffle",
/// epoch) via Fisher-Yates, keeps the final partial batch, and records the
/// size-weighted mean batch loss plus the test loss in inference mode.
/// Throws TrainingDivergedError when a batch loss or parameter goes non-finite.
TrainResult train(Network net, const Dataset& train_data, const Dataset& test_data,
                  const TrainConfig& config, OptimizerState optimizer);

/// Inference-mode predictions as a flat vector (single-output networks).
std::vector<double> predict(const Network& net, const Matrix& x);

}  // namespace seagull
