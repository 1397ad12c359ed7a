#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seagull/matrix.hpp"
#include "seagull/rng.hpp"

namespace seagull {

/// Two equal-length, disjoint coordinate index sets declared interchangeable.
struct ExchangeBlock {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
  friend bool operator==(const ExchangeBlock&, const ExchangeBlock&) = default;
};

struct Dataset {
  Matrix x;
  std::vector<double> y;
  std::string task_name;
  std::vector<ExchangeBlock> exchange_blocks;
  std::uint64_t seed = 0;
  double noise_fraction = 0.0;
  std::size_t resample_count = 0;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t dim() const noexcept { return x.cols(); }
  /// Throws DimensionError if x and y disagree or a block is malformed.
  void validate() const;
};

enum class Sampler { uniform_cube, standard_gaussian, unit_sphere_triples };
enum class LabelTransform { none, log1p, exp_over_100, sin, q };
enum class Wave { cosine, sine };

using LabelFn = std::function<double(std::span<const double>)>;

struct TaskSpec {
  std::string name;
  std::size_t dim = 0;
  LabelFn label_fn;
  Sampler sampler = Sampler::uniform_cube;
  double cube_lo = -2.0;
  double cube_hi = 2.0;
  std::vector<ExchangeBlock> exchange_blocks;
  /// Number of entries of the task's candidate permutation universe that
  /// leave the label unchanged, as measured by count_invariant_permutations.
  std::size_t invariant_permutation_count = 0;
};

// Label functions. Inputs are the flattened point coordinates
// u = x[0..2], v = x[3..5], w = x[6..8] (or five 5-d points for the simplex).

/// Area of the triangle (u, v, w) via 1/2 sqrt(A^2 + B^2 + C^2).
double triangle_area(std::span<const double> x);
double det3_target(std::span<const double> x, Wave wave);
/// Solid angle of three unit vectors: 2 atan(z) with z = |u.(v x w)| / den,
/// plus 2 pi when den = 1 + u.v + v.w + w.u is negative. Throws
/// SingularInputError when |den| < 1e-9.
double solid_angle(std::span<const double> x);
/// solid_angle with the ninth coordinate negated.
double psi_target(std::span<const double> x);
/// |det| / 120 of the 5 x 5 matrix whose rows are x[0..4], ..., x[20..24].
double simplex_volume_25(std::span<const double> x);

double apply_transform(LabelTransform kind, double f);
std::vector<double> transform_labels(LabelTransform kind, std::span<const double> f);

std::string_view to_string(LabelTransform t);
LabelTransform transform_from_string(std::string_view s);

/// Names accepted by make_task: triangle_area, det3_cosine, det3_sine,
/// solid_angle, psi, simplex_volume_25.
const std::vector<std::string>& task_names();
TaskSpec make_task(std::string_view name, LabelTransform transform = LabelTransform::none);

/// Draws one input from the task's sampler.
std::vector<double> sample_input(const TaskSpec& task, Rng& rng);

/// Samples n inputs, labels them, and resamples inputs whose label function
/// raises SingularInputError. Throws Error after 1000 consecutive resamples.
Dataset generate_dataset(const TaskSpec& task, std::size_t n, std::uint64_t seed);

struct NoisyLabels {
  std::vector<double> y;
  /// Set when fraction > 0 but the labels are constant, so no noise was added.
  bool constant_labels = false;
};

/// y + N(0, (fraction * sample_std(y))^2), i.i.d., from stream (seed, "label-noise").
NoisyLabels add_label_noise(std::span<const double> y, double fraction, std::uint64_t seed);

/// Writes `<stem>.csv` (header x1..xd,y) and `<stem>.json` (metadata).
void write_dataset(const Dataset& d, const std::string& stem);
Dataset read_dataset(const std::string& stem);

}  // namespace seagull
