#include "seagull/network.hpp"

#include <cmath>
#include <memory>

#include <json.hpp>

#include "seagull/errors.hpp"
#include "seagull/linalg.hpp"

namespace seagull {

namespace {

void add_row_inplace(Matrix& m, const Matrix& row) {
  auto r = row.row(0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto mi = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) mi[j] += r[j];
  }
}

Matrix column_sums(const Matrix& m) {
  Matrix out(1, m.cols());
  auto o = out.row(0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto mi = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) o[j] += mi[j];
  }
  return out;
}

void hadamard_inplace(Matrix& a, const Matrix& b) {
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) av[i] *= bv[i];
}

}  // namespace

std::vector<const Matrix*> Gradients::parameters() const {
  std::vector<const Matrix*> out;
  for (const auto& l : layers) {
    out.push_back(&l.weights);
    if (!l.bias.empty()) out.push_back(&l.bias);
    if (!l.bn_gamma.empty()) {
      out.push_back(&l.bn_gamma);
      out.push_back(&l.bn_beta);
    }
  }
  return out;
}

std::vector<Matrix*> Network::parameters() {
  std::vector<Matrix*> out;
  for (auto& l : layers_) {
    out.push_back(&l.weights);
    if (l.spec.has_bias) out.push_back(&l.bias);
    if (l.spec.batch_norm) {
      out.push_back(&l.bn_gamma);
      out.push_back(&l.bn_beta);
    }
  }
  return out;
}

std::vector<const Matrix*> Network::parameters() const {
  std::vector<const Matrix*> out;
  for (Matrix* m : const_cast<Network*>(this)->parameters()) out.push_back(m);
  return out;
}

void Network::update_running_stats(const ForwardCache& cache) {
  if (cache.layers.size() != layers_.size()) throw DimensionError("cache does not match network");
  for (std::size_t r = 0; r < layers_.size(); ++r) {
    auto& l = layers_[r];
    const auto& c = cache.layers[r];
    if (!l.spec.batch_norm || !c.training) continue;
    for (std::size_t j = 0; j < l.spec.out_dim; ++j) {
      l.running_mean(0, j) = kBatchNormMomentum * l.running_mean(0, j) +
                             (1.0 - kBatchNormMomentum) * c.batch_mean(0, j);
      l.running_var(0, j) = kBatchNormMomentum * l.running_var(0, j) +
                            (1.0 - kBatchNormMomentum) * c.batch_var(0, j);
    }
  }
}

std::vector<LayerSpec> Network::specs() const {
  std::vector<LayerSpec> out;
  for (const auto& l : layers_) out.push_back(l.spec);
  return out;
}

void validate_specs(const std::vector<LayerSpec>& specs) {
  if (specs.empty()) throw DimensionError("network needs at least one layer");
  for (std::size_t r = 0; r < specs.size(); ++r) {
    const auto& s = specs[r];
    if (s.in_dim == 0 || s.out_dim == 0) throw DimensionError("layer dimensions must be positive");
    if (r + 1 < specs.size() && s.out_dim != specs[r + 1].in_dim) {
      throw DimensionError("layer " + std::to_string(r) + " outputs " + std::to_string(s.out_dim) +
                           " but layer " + std::to_string(r + 1) + " expects " +
                           std::to_string(specs[r + 1].in_dim));
    }
    if (!(s.dropout_rate >= 0.0 && s.dropout_rate < 1.0)) {
      throw DomainError("dropout rate must lie in [0, 1)");
    }
    if (r + 1 < specs.size() && s.activation.kind() == ActivationKind::identity) {
      throw DomainError("identity activation is only allowed on the output layer");
    }
  }
}

Network init_network(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
  validate_specs(specs);
  Network net;
  net.seed_ = seed;
  for (std::size_t r = 0; r < specs.size(); ++r) {
    const auto& s = specs[r];
    Rng rng = Rng::stream(seed, "init", r);
    const double limit = std::sqrt(6.0 / static_cast<double>(s.in_dim + s.out_dim));
    DenseLayer layer;
    layer.spec = s;
    layer.weights = Matrix(s.in_dim, s.out_dim);
    for (double& w : layer.weights.values()) w = rng.uniform(-limit, limit);
    layer.bias = Matrix(1, s.out_dim);
    if (s.batch_norm) {
      layer.bn_gamma = Matrix(1, s.out_dim, 1.0);
      layer.bn_beta = Matrix(1, s.out_dim);
      layer.running_mean = Matrix(1, s.out_dim);
      layer.running_var = Matrix(1, s.out_dim, 1.0);
    }
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

std::vector<LayerSpec> mlp_specs(std::size_t input_dim, const std::vector<std::size_t>& widths,
                                 const ActivationSpec& activation, bool first_layer_bias) {
  std::vector<LayerSpec> specs;
  std::size_t in = input_dim;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    LayerSpec s;
    s.in_dim = in;
    s.out_dim = widths[i];
    s.activation = activation;
    s.has_bias = i > 0 || first_layer_bias;
    specs.push_back(s);
    in = widths[i];
  }
  LayerSpec head;
  head.in_dim = in;
  head.out_dim = 1;
  specs.push_back(head);
  return specs;
}

ForwardResult forward(const Network& net, const Matrix& x, bool training, Rng& rng) {
  if (net.layers().empty()) throw DimensionError("forward on an empty network");
  if (x.cols() != net.input_dim()) {
    throw DimensionError("forward: input has " + std::to_string(x.cols()) +
                         " columns, network expects " + std::to_string(net.input_dim()));
  }
  ForwardResult result;
  result.cache.batch_size = x.rows();
  result.cache.layers.reserve(net.layers().size());
  Matrix current = x;
  const double n = static_cast<double>(x.rows());
  for (const auto& layer : net.layers()) {
    const auto& s = layer.spec;
    LayerCache c;
    c.training = training;
    c.pre_activation = matmul(current, layer.weights);
    if (s.has_bias) add_row_inplace(c.pre_activation, layer.bias);
    c.input = std::move(current);
    c.activated = apply_elementwise(s.activation, c.pre_activation);
    Matrix out = c.activated;

    if (s.batch_norm) {
      c.batch_mean = Matrix(1, s.out_dim);
      c.batch_var = Matrix(1, s.out_dim);
      if (training) {
        c.batch_mean = column_means(out);
        for (std::size_t i = 0; i < out.rows(); ++i)
          for (std::size_t j = 0; j < s.out_dim; ++j) {
            const double d = out(i, j) - c.batch_mean(0, j);
            c.batch_var(0, j) += d * d;
          }
        for (double& v : c.batch_var.values()) v /= n;
      } else {
        c.batch_mean = layer.running_mean;
        c.batch_var = layer.running_var;
      }
      c.batch_inv_std = Matrix(1, s.out_dim);
      for (std::size_t j = 0; j < s.out_dim; ++j)
        c.batch_inv_std(0, j) = 1.0 / std::sqrt(c.batch_var(0, j) + kBatchNormEpsilon);
      c.normalized = Matrix(out.rows(), s.out_dim);
      for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < s.out_dim; ++j) {
          const double xh = (out(i, j) - c.batch_mean(0, j)) * c.batch_inv_std(0, j);
          c.normalized(i, j) = xh;
          out(i, j) = layer.bn_gamma(0, j) * xh + layer.bn_beta(0, j);
        }
    }

    if (training && s.dropout_rate > 0.0) {
      const double keep_scale = 1.0 / (1.0 - s.dropout_rate);
      c.dropout_mask = Matrix(out.rows(), out.cols());
      for (double& m : c.dropout_mask.values()) m = rng.uniform() < s.dropout_rate ? 0.0 : keep_scale;
      hadamard_inplace(out, c.dropout_mask);
    }

    current = std::move(out);
    result.cache.layers.push_back(std::move(c));
  }
  result.predictions = std::move(current);
  return result;
}

Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& loss_grad) {
  const auto& layers = net.layers();
  if (cache.layers.size() != layers.size()) {
    throw DimensionError("backward: cache has " + std::to_string(cache.layers.size()) +
                         " layers, network has " + std::to_string(layers.size()));
  }
  if (loss_grad.rows() != cache.batch_size || loss_grad.cols() != net.output_dim()) {
    throw DimensionError("backward: loss gradient shape " + loss_grad.shape_string() +
                         " does not match the cached batch");
  }
  Gradients grads;
  grads.layers.resize(layers.size());
  Matrix upstream = loss_grad;
  const double n = static_cast<double>(cache.batch_size);

  for (std::size_t r = layers.size(); r-- > 0;) {
    const auto& layer = layers[r];
    const auto& s = layer.spec;
    const auto& c = cache.layers[r];
    if (c.pre_activation.rows() != cache.batch_size || c.pre_activation.cols() != s.out_dim ||
        c.input.cols() != s.in_dim) {
      throw DimensionError("backward: stale cache for layer " + std::to_string(r));
    }
    auto& g = grads.layers[r];

    if (!c.dropout_mask.empty()) hadamard_inplace(upstream, c.dropout_mask);

    if (s.batch_norm) {
      g.bn_gamma = Matrix(1, s.out_dim);
      g.bn_beta = Matrix(1, s.out_dim);
      Matrix d_act(upstream.rows(), s.out_dim);
      for (std::size_t j = 0; j < s.out_dim; ++j) {
        double sum_d = 0.0;
        double sum_dx = 0.0;
        for (std::size_t i = 0; i < upstream.rows(); ++i) {
          sum_d += upstream(i, j);
          sum_dx += upstream(i, j) * c.normalized(i, j);
        }
        g.bn_beta(0, j) = sum_d;
        g.bn_gamma(0, j) = sum_dx;
        const double gamma = layer.bn_gamma(0, j);
        const double inv_std = c.batch_inv_std(0, j);
        for (std::size_t i = 0; i < upstream.rows(); ++i) {
          if (c.training) {
            // d xhat = gamma * d; the sums above scale by gamma as well.
            d_act(i, j) = gamma * inv_std / n *
                          (n * upstream(i, j) - sum_d - c.normalized(i, j) * sum_dx);
          } else {
            d_act(i, j) = gamma * inv_std * upstream(i, j);
          }
        }
      }
      upstream = std::move(d_act);
    }

    Matrix dz = derivative_from_output(s.activation, c.pre_activation, c.activated);
    hadamard_inplace(dz, upstream);
    g.weights = matmul_transpose_a(c.input, dz);
    if (s.has_bias) g.bias = column_sums(dz);
    if (r > 0) upstream = matmul_transpose_b(dz, layer.weights);
  }
  return grads;
}

Network substitute_activation(const Network& net, std::size_t layer_index,
                              const ActivationSpec& new_act) {
  if (layer_index >= net.hidden_count()) {
    throw DomainError("substitute_activation: layer " + std::to_string(layer_index) +
                      " is not a hidden layer (hidden count " +
                      std::to_string(net.hidden_count()) + ")");
  }
  if (new_act.kind() == ActivationKind::identity) {
    throw DomainError("substitute_activation: identity is not allowed on a hidden layer");
  }
  Network out = net;
  out.layers()[layer_index].spec.activation = new_act;
  return out;
}

std::function<Matrix(const Matrix&)> predict_fn(const Network& net) {
  auto frozen = std::make_shared<const Network>(net);
  return [frozen](const Matrix& x) {
    Rng unused(0);
    return forward(*frozen, x, false, unused).predictions;
  };
}

namespace {

nlohmann::ordered_json matrix_json(const Matrix& m) {
  return std::vector<double>(m.values().begin(), m.values().end());
}

Matrix matrix_from(const nlohmann::json& j, std::size_t rows, std::size_t cols) {
  if (j.is_null()) return {};
  auto v = j.get<std::vector<double>>();
  return Matrix(rows, cols, std::move(v));
}

}  // namespace

std::string network_to_json(const Network& net) {
  nlohmann::ordered_json root;
  root["seed"] = net.seed();
  auto layers = nlohmann::ordered_json::array();
  for (const auto& l : net.layers()) {
    nlohmann::ordered_json j;
    j["in_dim"] = l.spec.in_dim;
    j["out_dim"] = l.spec.out_dim;
    j["activation"] = l.spec.activation.label();
    j["has_bias"] = l.spec.has_bias;
    j["batch_norm"] = l.spec.batch_norm;
    j["dropout_rate"] = l.spec.dropout_rate;
    j["weights"] = matrix_json(l.weights);
    j["bias"] = matrix_json(l.bias);
    if (l.spec.batch_norm) {
      j["bn_gamma"] = matrix_json(l.bn_gamma);
      j["bn_beta"] = matrix_json(l.bn_beta);
      j["running_mean"] = matrix_json(l.running_mean);
      j["running_var"] = matrix_json(l.running_var);
    }
    layers.push_back(std::move(j));
  }
  root["layers"] = std::move(layers);
  return root.dump(1);
}

Network network_from_json(const std::string& text) {
  const auto root = nlohmann::json::parse(text);
  Network net;
  net.seed_ = root.at("seed").get<std::uint64_t>();
  for (const auto& j : root.at("layers")) {
    DenseLayer l;
    l.spec.in_dim = j.at("in_dim").get<std::size_t>();
    l.spec.out_dim = j.at("out_dim").get<std::size_t>();
    l.spec.activation = activation_from_label(j.at("activation").get<std::string>());
    l.spec.has_bias = j.at("has_bias").get<bool>();
    l.spec.batch_norm = j.at("batch_norm").get<bool>();
    l.spec.dropout_rate = j.at("dropout_rate").get<double>();
    l.weights = matrix_from(j.at("weights"), l.spec.in_dim, l.spec.out_dim);
    l.bias = matrix_from(j.at("bias"), 1, l.spec.out_dim);
    if (l.spec.batch_norm) {
      l.bn_gamma = matrix_from(j.at("bn_gamma"), 1, l.spec.out_dim);
      l.bn_beta = matrix_from(j.at("bn_beta"), 1, l.spec.out_dim);
      l.running_mean = matrix_from(j.at("running_mean"), 1, l.spec.out_dim);
      l.running_var = matrix_from(j.at("running_var"), 1, l.spec.out_dim);
    }
    net.layers_.push_back(std::move(l));
  }
  validate_specs(net.specs());
  return net;
}

}  // namespace seagull
