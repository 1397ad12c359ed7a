#include "seagull/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "seagull/errors.hpp"

namespace seagull {

namespace {

void require_dim(std::span<const double> x, std::size_t d, const char* fn) {
  if (x.size() != d) {
    throw DimensionError(std::string(fn) + ": expected " + std::to_string(d) +
                         " coordinates, got " + std::to_string(x.size()));
  }
}

double det3(std::span<const double> m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

std::vector<std::size_t> range(std::size_t lo, std::size_t n) {
  std::vector<std::size_t> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = lo + i;
  return r;
}

// All pairwise swaps among `points` consecutive blocks of width `width`.
std::vector<ExchangeBlock> pairwise_blocks(std::size_t points, std::size_t width) {
  std::vector<ExchangeBlock> out;
  for (std::size_t a = 0; a < points; ++a)
    for (std::size_t b = a + 1; b < points; ++b)
      out.push_back({range(a * width, width), range(b * width, width)});
  return out;
}

constexpr std::size_t kMaxConsecutiveResamples = 1000;

}  // namespace

void Dataset::validate() const {
  if (x.rows() != y.size()) {
    throw DimensionError("dataset: x has " + std::to_string(x.rows()) + " rows but y has " +
                         std::to_string(y.size()) + " labels");
  }
  for (const auto& b : exchange_blocks) {
    if (b.first.size() != b.second.size() || b.first.empty()) {
      throw DimensionError("dataset: exchange block sides differ in length");
    }
    for (std::size_t i : b.first) {
      if (i >= dim()) throw DimensionError("dataset: exchange index out of range");
      if (std::find(b.second.begin(), b.second.end(), i) != b.second.end()) {
        throw DimensionError("dataset: exchange block sides overlap");
      }
    }
    for (std::size_t i : b.second)
      if (i >= dim()) throw DimensionError("dataset: exchange index out of range");
  }
}

double triangle_area(std::span<const double> x) {
  require_dim(x, 9, "triangle_area");
  // x[k] here is x_{k+1} in the usual 1-based naming.
  const double a = (x[3] - x[0]) * (x[7] - x[1]) - (x[6] - x[0]) * (x[4] - x[1]);
  const double b = (x[3] - x[0]) * (x[8] - x[2]) - (x[6] - x[0]) * (x[5] - x[2]);
  const double c = (x[4] - x[1]) * (x[8] - x[2]) - (x[7] - x[1]) * (x[5] - x[2]);
  return 0.5 * std::sqrt(a * a + b * b + c * c);
}

double det3_target(std::span<const double> x, Wave wave) {
  require_dim(x, 9, "det3_target");
  const double d = det3(x);
  return wave == Wave::cosine ? std::cos(d) : std::sin(d);
}

double solid_angle(std::span<const double> x) {
  require_dim(x, 9, "solid_angle");
  const double* u = x.data();
  const double* v = x.data() + 3;
  const double* w = x.data() + 6;
  const double cross[3] = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
                           u[0] * v[1] - u[1] * v[0]};
  const double triple = cross[0] * w[0] + cross[1] * w[1] + cross[2] * w[2];
  const double uv = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  const double vw = v[0] * w[0] + v[1] * w[1] + v[2] * w[2];
  const double wu = w[0] * u[0] + w[1] * u[1] + w[2] * u[2];
  const double den = 1.0 + uv + vw + wu;
  if (std::abs(den) < 1e-9) throw SingularInputError("solid_angle: denominator vanishes");
  const double z = std::abs(triple) / den;
  return den > 0.0 ? 2.0 * std::atan(z) : 2.0 * std::numbers::pi + 2.0 * std::atan(z);
}

double psi_target(std::span<const double> x) {
  require_dim(x, 9, "psi_target");
  double flipped[9];
  std::copy(x.begin(), x.end(), flipped);
  flipped[8] = -flipped[8];
  return solid_angle(flipped);
}

double simplex_volume_25(std::span<const double> x) {
  require_dim(x, 25, "simplex_volume_25");
  double a[25];
  std::copy(x.begin(), x.end(), a);
  double det = 1.0;
  for (int col = 0; col < 5; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 5; ++r)
      if (std::abs(a[r * 5 + col]) > std::abs(a[pivot * 5 + col])) pivot = r;
    if (a[pivot * 5 + col] == 0.0) return 0.0;
    if (pivot != col) {
      for (int c = 0; c < 5; ++c) std::swap(a[pivot * 5 + c], a[col * 5 + c]);
      det = -det;
    }
    const double p = a[col * 5 + col];
    det *= p;
    for (int r = col + 1; r < 5; ++r) {
      const double f = a[r * 5 + col] / p;
      for (int c = col; c < 5; ++c) a[r * 5 + c] -= f * a[col * 5 + c];
    }
  }
  return std::abs(det) / 120.0;
}

double apply_transform(LabelTransform kind, double f) {
  switch (kind) {
    case LabelTransform::none: return f;
    case LabelTransform::log1p: return std::log1p(f);
    case LabelTransform::exp_over_100: return std::exp(f) / 100.0;
    case LabelTransform::sin: return std::sin(f);
    case LabelTransform::q:
      if (!(f > -1.0)) throw DomainError("transform q requires f > -1, got " + format_double(f));
      return std::sqrt((f * f + 3.0) / (f + 1.0));
  }
  return f;
}

std::vector<double> transform_labels(LabelTransform kind, std::span<const double> f) {
  std::vector<double> out(f.size());
  std::transform(f.begin(), f.end(), out.begin(), [kind](double v) { return apply_transform(kind, v); });
  return out;
}

std::string_view to_string(LabelTransform t) {
  switch (t) {
    case LabelTransform::none: return "none";
    case LabelTransform::log1p: return "log1p";
    case LabelTransform::exp_over_100: return "exp_over_100";
    case LabelTransform::sin: return "sin";
    case LabelTransform::q: return "q";
  }
  return "none";
}

LabelTransform transform_from_string(std::string_view s) {
  if (s == "none" || s.empty()) return LabelTransform::none;
  if (s == "log1p") return LabelTransform::log1p;
  if (s == "exp_over_100") return LabelTransform::exp_over_100;
  if (s == "sin") return LabelTransform::sin;
  if (s == "q") return LabelTransform::q;
  throw DomainError("unknown label transform '" + std::string(s) + "'");
}

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = {"triangle_area", "det3_cosine", "det3_sine",
                                                 "solid_angle",   "psi",         "simplex_volume_25"};
  return names;
}

TaskSpec make_task(std::string_view name, LabelTransform transform) {
  TaskSpec t;
  t.name = std::string(name);
  t.dim = 9;
  LabelFn base;
  if (name == "triangle_area") {
    base = triangle_area;
    t.sampler = Sampler::uniform_cube;
    t.exchange_blocks = pairwise_blocks(3, 3);
    t.invariant_permutation_count = 12;
  } else if (name == "det3_cosine") {
    base = [](std::span<const double> x) { return det3_target(x, Wave::cosine); };
    t.sampler = Sampler::standard_gaussian;
    t.exchange_blocks = pairwise_blocks(3, 3);
    t.invariant_permutation_count = 12;
  } else if (name == "det3_sine") {
    base = [](std::span<const double> x) { return det3_target(x, Wave::sine); };
    t.sampler = Sampler::standard_gaussian;
    // Even permutations of rows or columns keep the determinant, so only
    // the three cyclic shifts of each kind survive.
    t.invariant_permutation_count = 6;
  } else if (name == "solid_angle") {
    base = solid_angle;
    t.sampler = Sampler::unit_sphere_triples;
    t.exchange_blocks = pairwise_blocks(3, 3);
    t.invariant_permutation_count = 12;
  } else if (name == "psi") {
    base = psi_target;
    t.sampler = Sampler::unit_sphere_triples;
    t.exchange_blocks = {{range(0, 3), range(3, 3)}};
    t.invariant_permutation_count = 4;
  } else if (name == "simplex_volume_25") {
    base = simplex_volume_25;
    t.dim = 25;
    t.sampler = Sampler::standard_gaussian;
    t.exchange_blocks = pairwise_blocks(5, 5);
    t.invariant_permutation_count = 10;
  } else {
    throw DomainError("unknown task '" + std::string(name) + "'");
  }
  if (transform == LabelTransform::none) {
    t.label_fn = std::move(base);
  } else {
    t.name += "+" + std::string(to_string(transform));
    t.label_fn = [base = std::move(base), transform](std::span<const double> x) {
      return apply_transform(transform, base(x));
    };
  }
  return t;
}

std::vector<double> sample_input(const TaskSpec& task, Rng& rng) {
  std::vector<double> x(task.dim);
  switch (task.sampler) {
    case Sampler::uniform_cube:
      for (double& v : x) v = rng.uniform(task.cube_lo, task.cube_hi);
      break;
    case Sampler::standard_gaussian:
      for (double& v : x) v = rng.normal();
      break;
    case Sampler::unit_sphere_triples:
      if (task.dim % 3 != 0) throw DimensionError("sphere sampler needs a multiple of 3 coordinates");
      for (std::size_t p = 0; p < task.dim; p += 3) {
        double norm = 0.0;
        do {
          for (std::size_t k = 0; k < 3; ++k) x[p + k] = rng.normal();
          norm = std::sqrt(x[p] * x[p] + x[p + 1] * x[p + 1] + x[p + 2] * x[p + 2]);
        } while (norm < 1e-12);
        for (std::size_t k = 0; k < 3; ++k) x[p + k] /= norm;
      }
      break;
  }
  return x;
}

Dataset generate_dataset(const TaskSpec& task, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("generate_dataset: n must be at least 1");
  Rng rng = Rng::stream(seed, "dataset:" + task.name);
  Dataset d;
  d.task_name = task.name;
  d.exchange_blocks = task.exchange_blocks;
  d.seed = seed;
  std::vector<double> xs;
  xs.reserve(n * task.dim);
  d.y.reserve(n);
  std::size_t consecutive = 0;
  while (d.y.size() < n) {
    std::vector<double> x = sample_input(task, rng);
    double label = 0.0;
    bool ok = true;
    try {
      label = task.label_fn(x);
      ok = std::isfinite(label);
    } catch (const SingularInputError&) {
      ok = false;
    }
    if (!ok) {
      ++d.resample_count;
      if (++consecutive >= kMaxConsecutiveResamples) {
        throw Error("generate_dataset(" + task.name + "): " +
                    std::to_string(kMaxConsecutiveResamples) + " consecutive singular draws");
      }
      continue;
    }
    consecutive = 0;
    xs.insert(xs.end(), x.begin(), x.end());
    d.y.push_back(label);
  }
  d.x = Matrix(n, task.dim, std::move(xs));
  return d;
}

NoisyLabels add_label_noise(std::span<const double> y, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0)) throw DomainError("add_label_noise: fraction must be non-negative");
  NoisyLabels out{std::vector<double>(y.begin(), y.end()), false};
  if (fraction == 0.0 || y.empty()) return out;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double sd = y.size() > 1 ? std::sqrt(ss / static_cast<double>(y.size() - 1)) : 0.0;
  if (sd == 0.0) {
    out.constant_labels = true;
    return out;
  }
  Rng rng = Rng::stream(seed, "label-noise");
  const double scale = fraction * sd;
  for (double& v : out.y) v += scale * rng.normal();
  return out;
}

void write_dataset(const Dataset& d, const std::string& stem) {
  d.validate();
  {
    std::ofstream f(stem + ".csv", std::ios::binary);
    if (!f) throw IoError("cannot open '" + stem + ".csv' for writing");
    for (std::size_t c = 0; c < d.dim(); ++c) f << 'x' << (c + 1) << ',';
    f << "y\n";
    for (std::size_t r = 0; r < d.size(); ++r) {
      for (double v : d.x.row(r)) f << format_double(v) << ',';
      f << format_double(d.y[r]) << '\n';
    }
    if (!f) throw IoError("write to '" + stem + ".csv' failed");
  }
  nlohmann::ordered_json meta;
  meta["task"] = d.task_name;
  meta["seed"] = d.seed;
  meta["noise_fraction"] = d.noise_fraction;
  meta["samples"] = d.size();
  meta["dim"] = d.dim();
  meta["resample_count"] = d.resample_count;
  auto blocks = nlohmann::ordered_json::array();
  for (const auto& b : d.exchange_blocks) blocks.push_back({b.first, b.second});
  meta["exchange_blocks"] = blocks;
  std::ofstream f(stem + ".json", std::ios::binary);
  if (!f) throw IoError("cannot open '" + stem + ".json' for writing");
  f << meta.dump(2) << '\n';
}

Dataset read_dataset(const std::string& stem) {
  std::ifstream meta_file(stem + ".json", std::ios::binary);
  if (!meta_file) throw IoError("cannot open '" + stem + ".json'");
  const auto meta = nlohmann::json::parse(meta_file);
  std::ifstream f(stem + ".csv", std::ios::binary);
  if (!f) throw IoError("cannot open '" + stem + ".csv'");
  std::stringstream ss;
  ss << f.rdbuf();
  std::string text = ss.str();
  const auto nl = text.find('\n');
  if (nl == std::string::npos) throw IoError("'" + stem + ".csv' has no header");
  const Matrix all = matrix_from_csv(std::string_view(text).substr(nl + 1));
  if (all.cols() < 2) throw IoError("'" + stem + ".csv' needs at least one feature and y");

  Dataset d;
  const std::size_t dim = all.cols() - 1;
  std::vector<double> xs;
  xs.reserve(all.rows() * dim);
  for (std::size_t r = 0; r < all.rows(); ++r) {
    auto row = all.row(r);
    xs.insert(xs.end(), row.begin(), row.end() - 1);
    d.y.push_back(row.back());
  }
  d.x = Matrix(all.rows(), dim, std::move(xs));
  d.task_name = meta.at("task").get<std::string>();
  d.seed = meta.at("seed").get<std::uint64_t>();
  d.noise_fraction = meta.at("noise_fraction").get<double>();
  d.resample_count = meta.value("resample_count", std::size_t{0});
  for (const auto& b : meta.at("exchange_blocks")) {
    d.exchange_blocks.push_back(
        {b.at(0).get<std::vector<std::size_t>>(), b.at(1).get<std::vector<std::size_t>>()});
  }
  d.validate();
  return d;
}

}  // namespace seagull
