#include "seagull/activation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "seagull/errors.hpp"

namespace seagull {

namespace {

inline double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

// One exp of -|x| serves both signs; the select avoids a data-dependent branch.
inline double sigmoid(double x) {
  const double e = std::exp(-std::abs(x));
  return (x >= 0.0 ? 1.0 : e) / (1.0 + e);
}

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// tanh|x| = -e / (2 + e) with e = expm1(-2|x|); within an ulp of std::tanh and
// cheaper on typical pre-activations.
inline double tanh_fast(double x) {
  const double e = std::expm1(-2.0 * std::abs(x));
  return std::copysign(-e / (2.0 + e), x);
}

// |x|^alpha with the two endpoints of the family evaluated exactly, so that
// g1(alpha = 2) is bit-identical to seagull and g2(alpha = 1) to llu.
inline double abs_pow(double x, double alpha) {
  if (alpha == 2.0) return x * x;
  const double a = std::abs(x);
  if (alpha == 1.0) return a;
  return std::pow(a, alpha);
}

// alpha * |x|^(alpha - 1)
inline double abs_pow_slope(double x, double alpha) {
  if (alpha == 2.0) return 2.0 * std::abs(x);
  if (alpha == 1.0) return 1.0;
  return alpha * std::pow(std::abs(x), alpha - 1.0);
}

inline double int_pow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

template <typename F>
Matrix map(const Matrix& m, F f) {
  Matrix out(m.rows(), m.cols());
  auto in = m.values();
  auto o = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = f(in[i]);
  return out;
}

}  // namespace

double ActivationSpec::evaluate(double x) const noexcept {
  const double a = alpha_.value_or(1.0);
  switch (kind_) {
    case ActivationKind::identity: return x;
    case ActivationKind::relu: return x > 0.0 ? x : 0.0;
    case ActivationKind::elu: return elu(x);
    case ActivationKind::sigmoid: return sigmoid(x);
    case ActivationKind::tanh: return tanh_fast(x);
    case ActivationKind::softplus: return softplus(x);
    case ActivationKind::seagull: return std::log1p(x * x);
    case ActivationKind::llu: return sign(x) * std::log1p(std::abs(x));
    case ActivationKind::g1: return std::log1p(abs_pow(x, a));
    case ActivationKind::g2: return sign(x) * std::log1p(abs_pow(x, a));
    case ActivationKind::g3: return x > 0.0 ? std::log1p(abs_pow(x, a)) : 0.0;
    case ActivationKind::monomial: return int_pow(x, exponent_);
  }
  return x;
}

double ActivationSpec::derivative(double x) const noexcept {
  const double a = alpha_.value_or(1.0);
  switch (kind_) {
    case ActivationKind::identity: return 1.0;
    case ActivationKind::relu: return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::elu: return x > 0.0 ? 1.0 : std::exp(x);
    case ActivationKind::sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case ActivationKind::tanh: {
      const double t = tanh_fast(x);
      return 1.0 - t * t;
    }
    case ActivationKind::softplus: return sigmoid(x);
    case ActivationKind::seagull: return 2.0 * x / (1.0 + x * x);
    case ActivationKind::llu: return 1.0 / (1.0 + std::abs(x));
    case ActivationKind::g1:
      if (a == 2.0) return 2.0 * x / (1.0 + x * x);
      return sign(x) * abs_pow_slope(x, a) / (1.0 + abs_pow(x, a));
    case ActivationKind::g2: return abs_pow_slope(x, a) / (1.0 + abs_pow(x, a));
    case ActivationKind::g3:
      // At 0 this is the right-hand limit.
      return x >= 0.0 ? abs_pow_slope(x, a) / (1.0 + abs_pow(x, a)) : 0.0;
    case ActivationKind::monomial: return exponent_ * int_pow(x, exponent_ - 1);
  }
  return 1.0;
}

std::string ActivationSpec::label() const {
  if (alpha_) return name_ + ":" + format_double(*alpha_);
  if (kind_ == ActivationKind::monomial) return "pow" + std::to_string(exponent_);
  return name_;
}

ActivationSpec catalog_get(std::string_view name, std::optional<double> alpha) {
  const bool family = name == "g1" || name == "g2" || name == "g3";
  if (family) {
    if (!alpha) throw DomainError("activation '" + std::string(name) + "' requires alpha");
    if (!(*alpha >= 1.0 && *alpha <= 2.0)) {
      throw DomainError("activation '" + std::string(name) + "': alpha " +
                        format_double(*alpha) + " outside [1, 2]");
    }
  } else if (alpha) {
    throw DomainError("activation '" + std::string(name) + "' takes no alpha");
  }

  ActivationSpec s;
  s.name_ = std::string(name);
  s.alpha_ = alpha;
  if (name == "relu") {
    s.kind_ = ActivationKind::relu;
    s.smoothness_ = Smoothness::piecewise;
    s.growth_ = Growth::linear;
  } else if (name == "elu") {
    s.kind_ = ActivationKind::elu;
    s.smoothness_ = Smoothness::c1;
    s.growth_ = Growth::linear;
  } else if (name == "sigmoid") {
    s.kind_ = ActivationKind::sigmoid;
    s.growth_ = Growth::bounded;
  } else if (name == "tanh") {
    s.kind_ = ActivationKind::tanh;
    s.growth_ = Growth::bounded;
  } else if (name == "softplus") {
    s.kind_ = ActivationKind::softplus;
    s.growth_ = Growth::linear;
  } else if (name == "seagull") {
    s.kind_ = ActivationKind::seagull;
    s.is_even_ = true;
    s.growth_ = Growth::logarithmic;
  } else if (name == "llu") {
    s.kind_ = ActivationKind::llu;
    s.smoothness_ = Smoothness::c1;
    s.growth_ = Growth::logarithmic;
  } else if (name == "g1") {
    s.kind_ = ActivationKind::g1;
    s.is_even_ = true;
    s.growth_ = Growth::logarithmic;
    s.smoothness_ = *alpha == 2.0 ? Smoothness::c_infinity
                    : *alpha == 1.0 ? Smoothness::c0
                                    : Smoothness::c1;
  } else if (name == "g2") {
    s.kind_ = ActivationKind::g2;
    s.growth_ = Growth::logarithmic;
    s.smoothness_ = Smoothness::c1;
  } else if (name == "g3") {
    s.kind_ = ActivationKind::g3;
    s.growth_ = Growth::logarithmic;
    s.smoothness_ = *alpha == 1.0 ? Smoothness::c0 : Smoothness::c1;
  } else {
    throw DomainError("unknown activation '" + std::string(name) + "'");
  }
  return s;
}

ActivationSpec activation_from_label(std::string_view label) {
  if (label == "identity") return identity_activation();
  if (label.starts_with("pow")) {
    int p = 0;
    const auto digits = label.substr(3);
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), p);
    if (ec != std::errc() || end != digits.data() + digits.size()) {
      throw DomainError("bad activation label '" + std::string(label) + "'");
    }
    return monomial_activation(p);
  }
  const auto colon = label.find(':');
  if (colon == std::string_view::npos) return catalog_get(label);
  return catalog_get(label.substr(0, colon), parse_double(label.substr(colon + 1)));
}

ActivationSpec identity_activation() { return ActivationSpec{}; }

ActivationSpec monomial_activation(int p) {
  if (p < 1) throw DomainError("monomial activation needs p >= 1");
  ActivationSpec s;
  s.name_ = "pow" + std::to_string(p);
  s.kind_ = ActivationKind::monomial;
  s.exponent_ = p;
  s.is_even_ = p % 2 == 0;
  s.growth_ = p == 1 ? Growth::linear : Growth::polynomial;
  return s;
}

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names = {"relu", "elu",     "sigmoid", "tanh", "softplus",
                                                 "seagull", "llu", "g1",      "g2",   "g3"};
  return names;
}

const std::vector<std::string>& baseline_names() {
  static const std::vector<std::string> names = {"relu", "elu", "sigmoid", "tanh", "softplus"};
  return names;
}

Matrix apply_elementwise(const ActivationSpec& spec, const Matrix& m) {
  // The hot kinds get dedicated loops; everything else goes through evaluate().
  switch (spec.kind()) {
    case ActivationKind::identity: return m;
    case ActivationKind::relu: return map(m, [](double x) { return x > 0.0 ? x : 0.0; });
    case ActivationKind::seagull: return map(m, [](double x) { return std::log1p(x * x); });
    case ActivationKind::tanh: return map(m, tanh_fast);
    case ActivationKind::sigmoid: return map(m, sigmoid);
    case ActivationKind::elu: return map(m, elu);
    case ActivationKind::softplus: return map(m, softplus);
    default: return map(m, [&spec](double x) { return spec.evaluate(x); });
  }
}

Matrix derivative_elementwise(const ActivationSpec& spec, const Matrix& m) {
  switch (spec.kind()) {
    case ActivationKind::identity: return Matrix(m.rows(), m.cols(), 1.0);
    case ActivationKind::relu: return map(m, [](double x) { return x > 0.0 ? 1.0 : 0.0; });
    case ActivationKind::seagull:
      return map(m, [](double x) { return 2.0 * x / (1.0 + x * x); });
    case ActivationKind::softplus: return map(m, sigmoid);
    default: return map(m, [&spec](double x) { return spec.derivative(x); });
  }
}

Matrix derivative_from_output(const ActivationSpec& spec, const Matrix& z, const Matrix& out) {
  if (z.rows() != out.rows() || z.cols() != out.cols()) {
    throw DimensionError("derivative_from_output: shapes " + z.shape_string() + " and " +
                         out.shape_string() + " differ");
  }
  switch (spec.kind()) {
    case ActivationKind::sigmoid:
      return map(out, [](double s) { return s * (1.0 - s); });
    case ActivationKind::tanh:
      return map(out, [](double t) { return 1.0 - t * t; });
    case ActivationKind::elu:
      // expm1(z) + 1 on z <= 0 and z + 1 > 1 beyond, so min() picks the slope.
      return map(out, [](double a) { return std::min(a + 1.0, 1.0); });
    case ActivationKind::softplus: {
      // exp(z - softplus(z)) = e^z / (1 + e^z), the logistic slope.
      Matrix d(z.rows(), z.cols());
      auto zv = z.values();
      auto ov = out.values();
      auto dv = d.values();
      for (std::size_t i = 0; i < zv.size(); ++i) dv[i] = std::exp(zv[i] - ov[i]);
      return d;
    }
    default: return derivative_elementwise(spec, z);
  }
}

std::string_view to_string(Smoothness s) {
  switch (s) {
    case Smoothness::c0: return "C0";
    case Smoothness::c1: return "C1";
    case Smoothness::c_infinity: return "C_infinity";
    case Smoothness::piecewise: return "piecewise";
  }
  return "?";
}

std::string_view to_string(Growth g) {
  switch (g) {
    case Growth::bounded: return "bounded";
    case Growth::logarithmic: return "logarithmic";
    case Growth::linear: return "linear";
    case Growth::polynomial: return "polynomial";
  }
  return "?";
}

}  // namespace seagull
