#include "seagull/optim.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "seagull/errors.hpp"

namespace seagull {

std::string_view to_string(LossKind k) { return k == LossKind::mae ? "mae" : "mse"; }

std::string_view to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::rmsprop: return "rmsprop";
    case OptimizerKind::adam: return "adam";
  }
  return "?";
}

LossKind loss_from_string(std::string_view s) {
  if (s == "mae") return LossKind::mae;
  if (s == "mse") return LossKind::mse;
  throw ConfigError("unknown loss '" + std::string(s) + "'");
}

OptimizerKind optimizer_from_string(std::string_view s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "rmsprop") return OptimizerKind::rmsprop;
  if (s == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer '" + std::string(s) + "'");
}

namespace {

void check_lengths(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw DimensionError("loss: " + std::to_string(y_true.size()) + " targets vs " +
                         std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw DimensionError("loss: empty input");
}

}  // namespace

std::pair<double, std::vector<double>> loss_value_and_grad(LossKind kind,
                                                           std::span<const double> y_true,
                                                           std::span<const double> y_pred) {
  check_lengths(y_true, y_pred);
  const double n = static_cast<double>(y_true.size());
  std::vector<double> grad(y_true.size());
  double total = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double r = y_pred[i] - y_true[i];
    if (kind == LossKind::mae) {
      total += std::abs(r);
      grad[i] = r > 0.0 ? 1.0 / n : r < 0.0 ? -1.0 / n : 0.0;
    } else {
      total += r * r;
      grad[i] = 2.0 * r / n;
    }
  }
  return {total / n, std::move(grad)};
}

double loss_value(LossKind kind, std::span<const double> y_true, std::span<const double> y_pred) {
  check_lengths(y_true, y_pred);
  double total = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double r = y_pred[i] - y_true[i];
    total += kind == LossKind::mae ? std::abs(r) : r * r;
  }
  return total / static_cast<double>(y_true.size());
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train config: epochs must be at least 1");
  if (batch_size == 0) throw ConfigError("train config: batch_size must be at least 1");
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) {
    throw ConfigError("train config: base_lr must be positive");
  }
  if (lr_halving_period == 0) throw ConfigError("train config: lr_halving_period must be at least 1");
}

double lr_at_epoch(const TrainConfig& config, std::size_t epoch) {
  return std::ldexp(config.base_lr, -static_cast<int>(epoch / config.lr_halving_period));
}

OptimizerState make_optimizer(OptimizerKind kind, double learning_rate) {
  if (!(learning_rate > 0.0)) throw ConfigError("optimizer learning rate must be positive");
  OptimizerState s;
  s.kind = kind;
  s.learning_rate = learning_rate;
  return s;
}

void OptimizerState::step(Network& net, const Gradients& grads, double lr) {
  auto params = net.parameters();
  auto g = grads.parameters();
  if (params.size() != g.size()) {
    throw DimensionError("optimizer: " + std::to_string(g.size()) + " gradients for " +
                         std::to_string(params.size()) + " parameters");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k]->rows() != g[k]->rows() || params[k]->cols() != g[k]->cols()) {
      throw DimensionError("optimizer: gradient " + g[k]->shape_string() + " vs parameter " +
                           params[k]->shape_string());
    }
  }
  if (first_.empty() && second_.empty()) {
    for (const Matrix* p : params) {
      first_.emplace_back(p->rows(), p->cols());
      second_.emplace_back(p->rows(), p->cols());
    }
  } else if (first_.size() != params.size()) {
    throw DimensionError("optimizer accumulators do not match the network");
  }
  ++steps_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(steps_));

  for (std::size_t k = 0; k < params.size(); ++k) {
    auto w = params[k]->values();
    auto gv = g[k]->values();
    auto m = first_[k].values();
    auto v = second_[k].values();
    if (m.size() != w.size()) throw DimensionError("optimizer accumulator shape mismatch");
    switch (kind) {
      case OptimizerKind::sgd:
        for (std::size_t i = 0; i < w.size(); ++i) {
          m[i] = momentum * m[i] - lr * gv[i];
          w[i] += m[i];
        }
        break;
      case OptimizerKind::rmsprop:
        for (std::size_t i = 0; i < w.size(); ++i) {
          v[i] = decay * v[i] + (1.0 - decay) * gv[i] * gv[i];
          w[i] -= lr * gv[i] / (std::sqrt(v[i]) + epsilon);
        }
        break;
      case OptimizerKind::adam:
        for (std::size_t i = 0; i < w.size(); ++i) {
          m[i] = beta1 * m[i] + (1.0 - beta1) * gv[i];
          v[i] = beta2 * v[i] + (1.0 - beta2) * gv[i] * gv[i];
          w[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + epsilon);
        }
        break;
    }
  }
}

std::string TrainHistory::to_csv(bool include_time) const {
  std::string out = include_time ? "epoch,lr,train_loss,test_loss,seconds\n"
                                 : "epoch,lr,train_loss,test_loss\n";
  for (const auto& e : epochs) {
    out += std::to_string(e.epoch) + ',' + format_double(e.lr) + ',' +
           format_double(e.train_loss) + ',' + format_double(e.test_loss);
    if (include_time) out += ',' + format_double(e.seconds);
    out += '\n';
  }
  return out;
}

std::vector<double> predict(const Network& net, const Matrix& x) {
  Rng unused(0);
  Matrix p = forward(net, x, false, unused).predictions;
  return {p.values().begin(), p.values().end()};
}

TrainResult train(Network net, const Dataset& train_data, const Dataset& test_data,
                  const TrainConfig& config, OptimizerState optimizer) {
  config.validate();
  train_data.validate();
  test_data.validate();
  if (net.layers().empty()) throw DimensionError("train: empty network");
  if (train_data.dim() != net.input_dim() || test_data.dim() != net.input_dim()) {
    throw DimensionError("train: dataset dimension does not match network input " +
                         std::to_string(net.input_dim()));
  }
  if (net.output_dim() != 1) throw DimensionError("train: regression expects one output");
  if (train_data.size() == 0) throw DimensionError("train: empty training set");

  const std::size_t n = train_data.size();
  const std::size_t d = train_data.dim();
  std::vector<std::size_t> order(n);
  TrainHistory history;
  history.epochs.reserve(config.epochs);
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at_epoch(config, epoch);
    std::iota(order.begin(), order.end(), 0);
    if (config.shuffle) {
      Rng shuffle_rng = Rng::stream(config.seed, "shuffle", epoch);
      for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    Rng dropout_rng = Rng::stream(config.seed, "dropout", epoch);

    double weighted_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      const std::size_t b = end - begin;
      Matrix xb(b, d);
      std::vector<double> yb(b);
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t src = order[begin + i];
        auto from = train_data.x.row(src);
        std::copy(from.begin(), from.end(), xb.row(i).begin());
        yb[i] = train_data.y[src];
      }
      auto fwd = forward(net, xb, true, dropout_rng);
      auto [loss, grad] = loss_value_and_grad(config.loss, yb, fwd.predictions.values());
      if (!std::isfinite(loss)) {
        throw TrainingDivergedError("training loss became non-finite at epoch " +
                                        std::to_string(epoch) + ", batch " +
                                        std::to_string(batch_index),
                                    epoch, batch_index);
      }
      weighted_loss += loss * static_cast<double>(b);
      const Gradients grads = backward(net, fwd.cache, Matrix(b, 1, std::move(grad)));
      net.update_running_stats(fwd.cache);
      optimizer.step(net, grads, lr);
      for (const Matrix* p : std::as_const(net).parameters()) {
        if (!p->all_finite()) {
          throw TrainingDivergedError("parameters became non-finite at epoch " +
                                          std::to_string(epoch) + ", batch " +
                                          std::to_string(batch_index),
                                      epoch, batch_index);
        }
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = weighted_loss / static_cast<double>(n);
    rec.test_loss = test_data.size() > 0
                        ? loss_value(config.loss, test_data.y, predict(net, test_data.x))
                        : 0.0;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    history.epochs.push_back(rec);
  }
  return {std::move(net), std::move(history)};
}

}  // namespace seagull
