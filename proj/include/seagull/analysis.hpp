#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "seagull/activation.hpp"
#include "seagull/matrix.hpp"
#include "seagull/tasks.hpp"

namespace seagull {

// ---------------------------------------------------------------------------
// Closed-form output layer
// ---------------------------------------------------------------------------

/// Least-squares affine head for a fixed hidden representation G:
///   alpha = (G - 1 * mean_rows(G))^+ y,   beta = mean(y) - mean_rows(G) * alpha,
/// with residual r = y - (G alpha + beta 1).
struct HeadSolution {
  std::vector<double> alpha;
  double beta = 0.0;
  std::vector<double> residual;
  double residual_norm = 0.0;
};

HeadSolution solve_head(const Matrix& g_matrix, std::span<const double> y,
                        double rcond = 1e-12);

// ---------------------------------------------------------------------------
// Rank experiments
// ---------------------------------------------------------------------------

enum class RankConstruction { random, rank1_smooth, relu_staircase };
std::string_view to_string(RankConstruction c);

struct RankReport {
  std::string activation;
  RankConstruction construction = RankConstruction::random;
  std::size_t d = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t achieved_rank = 0;
  std::optional<std::size_t> theoretical_bound;
  double tolerance = 0.0;
  std::size_t draws_used = 0;
};

std::string rank_report_to_json(const RankReport& r);

/// C(d + p, p), the rank ceiling of g(XW + 1b) for a degree-p polynomial g
/// on d-dimensional inputs. Throws DomainError when it overflows 64 bits.
std::uint64_t polynomial_rank_bound(std::size_t d, std::size_t p);

struct HiddenWeights {
  Matrix w_matrix;  // d x m
  Matrix bias_row;  // 1 x m
  std::size_t achieved_rank = 0;
  double tolerance = 0.0;
  std::size_t draws_used = 0;
};

/// g(X W + 1 b), entrywise.
Matrix hidden_features(const Matrix& x, const Matrix& w, const Matrix& bias_row,
                       const ActivationSpec& g);

/// Rank-one construction W = w t^T, b = (b0, ..., b0): w is a unit direction
/// giving distinct projections, t_k = k, and b0 is searched over
/// {0.5, 1.0} followed by Uniform(-2, 2) draws (64 candidates in total)
/// until g(XW + 1b) reaches rank m. Returns the best candidate found with
/// its rank. Throws DomainError if distinct projections cannot be found.
HiddenWeights construct_rank1_weights(const Matrix& x, std::size_t m, const ActivationSpec& g,
                                      std::uint64_t seed);

/// ReLU staircase: with projections sorted c_1 > ... > c_N, W = w 1^T and
/// b_k = -(c_k + c_{k+1}) / 2, so column k of relu(XW + 1b) is non-zero on
/// exactly the k largest projections.
HiddenWeights construct_relu_staircase(const Matrix& x, std::size_t m, std::uint64_t seed = 0);

/// Random W, b (standard normal) and the rank of g(XW + 1b).
RankReport random_rank_trial(const Matrix& x, std::size_t m, const ActivationSpec& g,
                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// Exchangeability
// ---------------------------------------------------------------------------

using Predictor = std::function<Matrix(const Matrix&)>;

struct ExchangeabilityReport {
  double swap_gap = 0.0;      // max |f(u, v, w) - f(v, u, w)|
  double antisym_gap = 0.0;   // max |f(u, -u, 0) - f(-u, u, 0)|
  std::size_t samples = 0;
  std::size_t k = 0;
  std::size_t d = 0;
  /// Per-sample antisymmetric gaps, in sampling order.
  std::vector<double> antisym_gaps;
};

std::string exchangeability_report_to_json(const ExchangeabilityReport& r);

/// Probes predict on n_samples inputs drawn uniformly from [-2, 2]^d, with
/// u = x[0..k), v = x[k..2k), w = the rest.
ExchangeabilityReport check_exchangeability(const Predictor& predict, std::size_t k, std::size_t d,
                                            std::size_t n_samples, std::uint64_t seed);

/// (pi x)_i = x[perm[i]].
using Permutation = std::vector<std::size_t>;

/// The 12 candidates for 9-d tasks viewed as a 3x3 array with rows u, v, w:
/// the 6 permutations of the rows followed by the 6 permutations of the
/// columns (coordinate axes).
std::vector<Permutation> nine_dim_permutation_universe();
/// All swaps of two of `points` consecutive blocks of width `width`.
std::vector<Permutation> block_transpositions(std::size_t points, std::size_t width);
/// The universe matching a task's dimension (9 -> 12 candidates, 25 -> 10
/// point transpositions).
std::vector<Permutation> permutation_universe_for(const TaskSpec& task);

std::vector<double> apply_permutation(const Permutation& perm, std::span<const double> x);

/// Number of candidates with max_i |f(pi x_i) - f(x_i)| <= tol * max(1, |f(x_i)|)
/// over n_samples inputs drawn by `sampler`.
std::size_t count_invariant_permutations(const LabelFn& label_fn,
                                         const std::vector<Permutation>& candidates,
                                         std::size_t n_samples, double tol, std::uint64_t seed,
                                         const std::function<std::vector<double>(Rng&)>& sampler);
/// Same, sampling from the task's own input distribution and skipping
/// singular draws.
std::size_t count_invariant_permutations(const TaskSpec& task,
                                         const std::vector<Permutation>& candidates,
                                         std::size_t n_samples, double tol, std::uint64_t seed);

}  // namespace seagull
