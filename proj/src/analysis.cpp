#include "seagull/analysis.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "seagull/errors.hpp"
#include "seagull/linalg.hpp"
#include "seagull/rng.hpp"

namespace seagull {

namespace {

constexpr std::size_t kDirectionAttempts = 64;
constexpr std::size_t kBiasBudget = 64;
constexpr double kMinProjectionGap = 1e-9;

struct Projection {
  std::vector<double> direction;
  std::vector<double> values;  // c_k = x_k . direction
};

// Unit direction on which all rows of x project to distinct values.
Projection distinct_projection(const Matrix& x, std::uint64_t seed, std::string_view purpose) {
  for (std::size_t attempt = 0; attempt < kDirectionAttempts; ++attempt) {
    Rng rng = Rng::stream(seed, purpose, attempt);
    Projection p;
    p.direction.resize(x.cols());
    double norm = 0.0;
    for (double& v : p.direction) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (double& v : p.direction) v /= norm;
    p.values.resize(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double c = 0.0;
      auto row = x.row(i);
      for (std::size_t j = 0; j < x.cols(); ++j) c += row[j] * p.direction[j];
      p.values[i] = c;
    }
    std::vector<double> sorted = p.values;
    std::sort(sorted.begin(), sorted.end());
    bool distinct = true;
    for (std::size_t i = 1; i < sorted.size() && distinct; ++i)
      distinct = sorted[i] - sorted[i - 1] > kMinProjectionGap;
    if (distinct) return p;
  }
  throw DomainError("no direction with distinct projections after " +
                    std::to_string(kDirectionAttempts) + " draws; are the rows distinct?");
}

void check_rank_inputs(const Matrix& x, std::size_t m) {
  if (x.rows() == 0 || x.cols() == 0) throw DimensionError("rank construction: empty X");
  if (m == 0 || m > x.rows()) {
    throw DomainError("rank construction: need 1 <= m <= N, got m = " + std::to_string(m) +
                      ", N = " + std::to_string(x.rows()));
  }
}

Matrix outer(std::span<const double> w, std::span<const double> t) {
  Matrix out(w.size(), t.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j) out(i, j) = w[i] * t[j];
  return out;
}

}  // namespace

HeadSolution solve_head(const Matrix& g_matrix, std::span<const double> y, double rcond) {
  if (g_matrix.rows() != y.size()) {
    throw DimensionError("solve_head: G has " + std::to_string(g_matrix.rows()) + " rows but y has " +
                         std::to_string(y.size()) + " entries");
  }
  if (y.size() < 2) throw DimensionError("solve_head: need at least two samples");
  const std::size_t n = g_matrix.rows();
  const std::size_t m = g_matrix.cols();
  const Matrix means = column_means(g_matrix);
  Matrix centered = g_matrix;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) centered(i, j) -= means(0, j);

  const Matrix alpha_col = matmul(pinv(centered, rcond), Matrix::column_vector(y));
  HeadSolution out;
  out.alpha.assign(alpha_col.values().begin(), alpha_col.values().end());
  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= static_cast<double>(n);
  out.beta = y_mean;
  for (std::size_t j = 0; j < m; ++j) out.beta -= means(0, j) * out.alpha[j];

  out.residual.resize(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = out.beta;
    for (std::size_t j = 0; j < m; ++j) fit += g_matrix(i, j) * out.alpha[j];
    out.residual[i] = y[i] - fit;
    ss += out.residual[i] * out.residual[i];
  }
  out.residual_norm = std::sqrt(ss);
  return out;
}

std::string_view to_string(RankConstruction c) {
  switch (c) {
    case RankConstruction::random: return "random";
    case RankConstruction::rank1_smooth: return "rank1_smooth";
    case RankConstruction::relu_staircase: return "relu_staircase";
  }
  return "?";
}

std::string rank_report_to_json(const RankReport& r) {
  nlohmann::ordered_json j;
  j["activation"] = r.activation;
  j["construction"] = to_string(r.construction);
  j["d"] = r.d;
  j["N"] = r.n;
  j["m"] = r.m;
  j["achieved_rank"] = r.achieved_rank;
  j["theoretical_bound"] = r.theoretical_bound ? nlohmann::ordered_json(*r.theoretical_bound)
                                               : nlohmann::ordered_json(nullptr);
  j["tolerance"] = r.tolerance;
  j["draws_used"] = r.draws_used;
  return j.dump();
}

std::uint64_t polynomial_rank_bound(std::size_t d, std::size_t p) {
  if (d < 1) throw DomainError("polynomial_rank_bound: d must be at least 1");
  // C(d + p, p) built as a running product C(d + i, i), each step exact.
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= p; ++i) {
    const std::uint64_t factor = d + i;
    const std::uint64_t g = std::gcd(result, i);
    const std::uint64_t reduced = result / g;
    const std::uint64_t rest = i / g;  // divides factor after reduction
    const std::uint64_t f = factor / rest;
    if (reduced != 0 && f > std::numeric_limits<std::uint64_t>::max() / reduced) {
      throw DomainError("polynomial_rank_bound: C(" + std::to_string(d + p) + ", " +
                        std::to_string(p) + ") overflows 64 bits");
    }
    result = reduced * f;
  }
  return result;
}

Matrix hidden_features(const Matrix& x, const Matrix& w, const Matrix& bias_row,
                       const ActivationSpec& g) {
  Matrix z = matmul(x, w);
  if (bias_row.rows() != 1 || bias_row.cols() != z.cols()) {
    throw DimensionError("hidden_features: bias " + bias_row.shape_string() + " vs " +
                         z.shape_string());
  }
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t j = 0; j < z.cols(); ++j) z(i, j) += bias_row(0, j);
  return apply_elementwise(g, z);
}

HiddenWeights construct_rank1_weights(const Matrix& x, std::size_t m, const ActivationSpec& g,
                                      std::uint64_t seed) {
  check_rank_inputs(x, m);
  const Projection proj = distinct_projection(x, seed, "rank1-direction");
  std::vector<double> t(m);
  for (std::size_t k = 0; k < m; ++k) t[k] = static_cast<double>(k + 1);
  const Matrix w = outer(proj.direction, t);

  Rng b0_rng = Rng::stream(seed, "rank1-b0");
  HiddenWeights best;
  best.w_matrix = w;
  bool have_best = false;
  for (std::size_t draw = 0; draw < kBiasBudget; ++draw) {
    double b0 = draw == 0 ? 0.5 : draw == 1 ? 1.0 : b0_rng.uniform(-2.0, 2.0);
    if (b0 == 0.0) continue;
    // g(c_i t_k + b0) directly; mathematically equal to g(XW + 1b).
    Matrix features(x.rows(), m);
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t k = 0; k < m; ++k) features(i, k) = g.evaluate(proj.values[i] * t[k] + b0);
    const SvdResult s = svd(features);
    const std::size_t rank = numerical_rank_from_singular_values(s.singular_values, x.rows(), m);
    if (!have_best || rank > best.achieved_rank) {
      have_best = true;
      best.bias_row = Matrix(1, m, b0);
      best.achieved_rank = rank;
      best.tolerance = rank_tolerance(s.singular_values, x.rows(), m);
    }
    best.draws_used = draw + 1;
    if (rank == m) break;
  }
  return best;
}

HiddenWeights construct_relu_staircase(const Matrix& x, std::size_t m, std::uint64_t seed) {
  check_rank_inputs(x, m);
  const Projection proj = distinct_projection(x, seed, "staircase-direction");
  std::vector<double> c = proj.values;
  std::sort(c.begin(), c.end(), std::greater<>());
  Matrix bias(1, m);
  for (std::size_t k = 0; k < m; ++k) {
    // c_k > s_k >= c_{k+1}; past the last point any threshold below c_N works.
    const double s = k + 1 < c.size() ? 0.5 * (c[k] + c[k + 1]) : c[k] - 1.0;
    bias(0, k) = -s;
  }
  HiddenWeights out;
  out.w_matrix = outer(proj.direction, std::vector<double>(m, 1.0));
  out.bias_row = bias;
  const Matrix features = hidden_features(x, out.w_matrix, out.bias_row, catalog_get("relu"));
  const SvdResult s = svd(features);
  out.achieved_rank = numerical_rank_from_singular_values(s.singular_values, x.rows(), m);
  out.tolerance = rank_tolerance(s.singular_values, x.rows(), m);
  out.draws_used = 1;
  return out;
}

RankReport random_rank_trial(const Matrix& x, std::size_t m, const ActivationSpec& g,
                             std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "random-rank");
  Matrix w(x.cols(), m);
  Matrix b(1, m);
  for (double& v : w.values()) v = rng.normal();
  for (double& v : b.values()) v = rng.normal();
  const Matrix features = hidden_features(x, w, b, g);
  const SvdResult s = svd(features);
  RankReport r;
  r.activation = g.label();
  r.construction = RankConstruction::random;
  r.d = x.cols();
  r.n = x.rows();
  r.m = m;
  r.achieved_rank = numerical_rank_from_singular_values(s.singular_values, x.rows(), m);
  r.tolerance = rank_tolerance(s.singular_values, x.rows(), m);
  r.draws_used = 1;
  if (g.kind() == ActivationKind::monomial) {
    r.theoretical_bound = polynomial_rank_bound(x.cols(), static_cast<std::size_t>(g.exponent()));
  }
  return r;
}

std::string exchangeability_report_to_json(const ExchangeabilityReport& r) {
  nlohmann::ordered_json j;
  j["swap_gap"] = r.swap_gap;
  j["antisym_gap"] = r.antisym_gap;
  j["samples"] = r.samples;
  j["k"] = r.k;
  j["d"] = r.d;
  return j.dump();
}

ExchangeabilityReport check_exchangeability(const Predictor& predict, std::size_t k, std::size_t d,
                                            std::size_t n_samples, std::uint64_t seed) {
  if (k == 0 || 2 * k > d) throw DomainError("check_exchangeability: need 1 <= k and 2k <= d");
  Rng rng = Rng::stream(seed, "exchangeability");
  Matrix original(n_samples, d);
  Matrix swapped(n_samples, d);
  Matrix plus(n_samples, d);
  Matrix minus(n_samples, d);
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (std::size_t j = 0; j < d; ++j) original(s, j) = rng.uniform(-2.0, 2.0);
    for (std::size_t j = 0; j < d; ++j) swapped(s, j) = original(s, j);
    for (std::size_t j = 0; j < k; ++j) {
      swapped(s, j) = original(s, j + k);
      swapped(s, j + k) = original(s, j);
      plus(s, j) = original(s, j);
      plus(s, j + k) = -original(s, j);
      minus(s, j) = -original(s, j);
      minus(s, j + k) = original(s, j);
    }
  }
  const Matrix fo = predict(original);
  const Matrix fs = predict(swapped);
  const Matrix fp = predict(plus);
  const Matrix fm = predict(minus);
  ExchangeabilityReport r;
  r.samples = n_samples;
  r.k = k;
  r.d = d;
  r.antisym_gaps.resize(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    r.swap_gap = std::max(r.swap_gap, std::abs(fo(s, 0) - fs(s, 0)));
    r.antisym_gaps[s] = std::abs(fp(s, 0) - fm(s, 0));
    r.antisym_gap = std::max(r.antisym_gap, r.antisym_gaps[s]);
  }
  return r;
}

std::vector<Permutation> nine_dim_permutation_universe() {
  std::vector<Permutation> out;
  std::array<std::size_t, 3> order = {0, 1, 2};
  // Row permutations: point p of the result is point order[p] of the input.
  do {
    Permutation perm(9);
    for (std::size_t p = 0; p < 3; ++p)
      for (std::size_t c = 0; c < 3; ++c) perm[p * 3 + c] = order[p] * 3 + c;
    out.push_back(std::move(perm));
  } while (std::next_permutation(order.begin(), order.end()));
  order = {0, 1, 2};
  // Column permutations: coordinate c of every point becomes coordinate order[c].
  do {
    Permutation perm(9);
    for (std::size_t p = 0; p < 3; ++p)
      for (std::size_t c = 0; c < 3; ++c) perm[p * 3 + c] = p * 3 + order[c];
    out.push_back(std::move(perm));
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

std::vector<Permutation> block_transpositions(std::size_t points, std::size_t width) {
  std::vector<Permutation> out;
  for (std::size_t a = 0; a < points; ++a) {
    for (std::size_t b = a + 1; b < points; ++b) {
      Permutation perm(points * width);
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t c = 0; c < width; ++c) std::swap(perm[a * width + c], perm[b * width + c]);
      out.push_back(std::move(perm));
    }
  }
  return out;
}

std::vector<Permutation> permutation_universe_for(const TaskSpec& task) {
  if (task.dim == 9) return nine_dim_permutation_universe();
  if (task.dim == 25) return block_transpositions(5, 5);
  throw DomainError("no permutation universe declared for dimension " + std::to_string(task.dim));
}

std::vector<double> apply_permutation(const Permutation& perm, std::span<const double> x) {
  if (perm.size() != x.size()) throw DimensionError("permutation length does not match input");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[i] = x[perm[i]];
  return out;
}

std::size_t count_invariant_permutations(const LabelFn& label_fn,
                                         const std::vector<Permutation>& candidates,
                                         std::size_t n_samples, double tol, std::uint64_t seed,
                                         const std::function<std::vector<double>(Rng&)>& sampler) {
  if (candidates.empty()) throw DomainError("count_invariant_permutations: no candidates");
  Rng rng = Rng::stream(seed, "permutation-count");
  std::vector<std::vector<double>> inputs;
  std::vector<double> labels;
  std::size_t attempts = 0;
  while (inputs.size() < n_samples) {
    if (++attempts > 1000 * (n_samples + 1)) throw Error("could not draw non-singular samples");
    std::vector<double> x = sampler(rng);
    try {
      const double f = label_fn(x);
      if (!std::isfinite(f)) continue;
      // Skip inputs whose permuted images are singular so every candidate is
      // judged on the same sample set.
      for (const auto& p : candidates) (void)label_fn(apply_permutation(p, x));
      labels.push_back(f);
      inputs.push_back(std::move(x));
    } catch (const SingularInputError&) {
    }
  }
  std::size_t count = 0;
  for (const auto& p : candidates) {
    bool invariant = true;
    for (std::size_t s = 0; s < inputs.size() && invariant; ++s) {
      const double fp = label_fn(apply_permutation(p, inputs[s]));
      invariant = std::abs(fp - labels[s]) <= tol * std::max(1.0, std::abs(labels[s]));
    }
    count += invariant;
  }
  return count;
}

std::size_t count_invariant_permutations(const TaskSpec& task,
                                         const std::vector<Permutation>& candidates,
                                         std::size_t n_samples, double tol, std::uint64_t seed) {
  return count_invariant_permutations(task.label_fn, candidates, n_samples, tol, seed,
                                      [&task](Rng& rng) { return sample_input(task, rng); });
}

}  // namespace seagull
