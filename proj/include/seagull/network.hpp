#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seagull/activation.hpp"
#include "seagull/matrix.hpp"
#include "seagull/rng.hpp"

namespace seagull {

inline constexpr double kBatchNormMomentum = 0.9;
inline constexpr double kBatchNormEpsilon = 1e-5;

/// One dense layer: out = dropout(batchnorm(g(in * W + 1 b))).
struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  ActivationSpec activation = identity_activation();
  bool has_bias = true;
  bool batch_norm = false;
  double dropout_rate = 0.0;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct DenseLayer {
  LayerSpec spec;
  Matrix weights;       // in_dim x out_dim
  Matrix bias;          // 1 x out_dim, zero when !has_bias
  Matrix bn_gamma;      // 1 x out_dim when batch_norm
  Matrix bn_beta;       // 1 x out_dim when batch_norm
  Matrix running_mean;  // 1 x out_dim when batch_norm
  Matrix running_var;   // 1 x out_dim when batch_norm

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct LayerCache {
  Matrix input;          // A^{r-1}
  Matrix pre_activation; // Z^r
  Matrix activated;      // g(Z^r)
  Matrix normalized;     // batch-norm x-hat, when batch_norm
  Matrix batch_inv_std;  // 1 x out_dim, when batch_norm
  Matrix batch_mean;     // 1 x out_dim, when batch_norm
  Matrix batch_var;      // 1 x out_dim, when batch_norm
  Matrix dropout_mask;   // already scaled by 1 / (1 - rate); empty if unused
  bool training = false;
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  std::size_t batch_size = 0;
};

struct LayerGradients {
  Matrix weights;
  Matrix bias;      // empty when !has_bias
  Matrix bn_gamma;  // empty when !batch_norm
  Matrix bn_beta;
};

struct Gradients {
  std::vector<LayerGradients> layers;
  /// Views in the same order as Network::parameters().
  std::vector<const Matrix*> parameters() const;
};

class Network {
 public:
  Network() = default;

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t input_dim() const { return layers_.front().spec.in_dim; }
  std::size_t output_dim() const { return layers_.back().spec.out_dim; }
  std::size_t hidden_count() const noexcept { return layers_.empty() ? 0 : layers_.size() - 1; }

  /// Trainable parameter matrices: per layer W, then b (if has_bias), then
  /// gamma and beta (if batch_norm).
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;

  /// Folds the batch statistics of a training forward pass into the
  /// running averages used at inference.
  void update_running_stats(const ForwardCache& cache);

  std::vector<LayerSpec> specs() const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  friend Network init_network(const std::vector<LayerSpec>&, std::uint64_t);
  friend Network network_from_json(const std::string&);

  std::vector<DenseLayer> layers_;
  std::uint64_t seed_ = 0;
};

/// Checks chaining, dropout range, and that identity appears only last.
void validate_specs(const std::vector<LayerSpec>& specs);

/// Glorot-uniform weights in +-sqrt(6 / (in + out)), zero biases, unit
/// batch-norm scale. Deterministic for a fixed seed.
Network init_network(const std::vector<LayerSpec>& specs, std::uint64_t seed);

/// Hidden layers of the given widths with one activation, and a linear
/// 1-output head.
std::vector<LayerSpec> mlp_specs(std::size_t input_dim, const std::vector<std::size_t>& widths,
                                 const ActivationSpec& activation, bool first_layer_bias = true);

struct ForwardResult {
  Matrix predictions;
  ForwardCache cache;
};

/// Evaluates the network on the rows of x. With training = true, dropout
/// masks are drawn from rng and batch-norm uses batch statistics; otherwise
/// the pass is deterministic and rng is untouched.
ForwardResult forward(const Network& net, const Matrix& x, bool training, Rng& rng);

/// Reverse-mode gradients of sum(loss_grad .* predictions) for the pass
/// recorded in cache.
Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& loss_grad);

/// Copy of net with hidden layer `layer_index` switched to new_act.
Network substitute_activation(const Network& net, std::size_t layer_index,
                              const ActivationSpec& new_act);

/// Inference closure over a frozen copy of net.
std::function<Matrix(const Matrix&)> predict_fn(const Network& net);

std::string network_to_json(const Network& net);
Network network_from_json(const std::string& text);

}  // namespace seagull
