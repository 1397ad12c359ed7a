#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seagull/matrix.hpp"

namespace seagull {

enum class ActivationKind {
  identity,
  relu,
  elu,
  sigmoid,
  tanh,
  softplus,
  seagull,  // log(1 + x^2)
  llu,      // sign(x) log(1 + |x|)
  g1,       // log(1 + |x|^alpha)
  g2,       // sign(x) log(1 + |x|^alpha)
  g3,       // log(1 + x^alpha) for x > 0, else 0
  monomial, // x^p, used only by the rank experiments
};

enum class Smoothness { c0, c1, c_infinity, piecewise };
enum class Growth { bounded, logarithmic, linear, polynomial };

/// A scalar activation with its analytic derivative and declared properties.
///
/// Specs are small immutable values; evaluation dispatches on `kind`, so
/// they are cheap to copy and safe to share across threads.
class ActivationSpec {
 public:
  ActivationSpec() = default;

  const std::string& name() const noexcept { return name_; }
  ActivationKind kind() const noexcept { return kind_; }
  bool is_even() const noexcept { return is_even_; }
  Smoothness smoothness() const noexcept { return smoothness_; }
  Growth growth() const noexcept { return growth_; }
  std::optional<double> alpha() const noexcept { return alpha_; }
  int exponent() const noexcept { return exponent_; }

  double evaluate(double x) const noexcept;
  double derivative(double x) const noexcept;

  /// Identifier that catalog_get accepts back ("g1:1.5" style for the
  /// parameterised family).
  std::string label() const;

  friend bool operator==(const ActivationSpec& a, const ActivationSpec& b) {
    return a.kind_ == b.kind_ && a.alpha_ == b.alpha_ && a.exponent_ == b.exponent_;
  }

 private:
  friend ActivationSpec catalog_get(std::string_view, std::optional<double>);
  friend ActivationSpec identity_activation();
  friend ActivationSpec monomial_activation(int);

  std::string name_ = "identity";
  ActivationKind kind_ = ActivationKind::identity;
  bool is_even_ = false;
  Smoothness smoothness_ = Smoothness::c_infinity;
  Growth growth_ = Growth::linear;
  std::optional<double> alpha_;
  int exponent_ = 1;
};

/// Looks up one of relu, elu, sigmoid, tanh, softplus, seagull, llu, g1, g2,
/// g3. The g-family requires alpha in [1, 2]; the others reject it.
/// Throws DomainError for unknown names or a bad alpha.
ActivationSpec catalog_get(std::string_view name, std::optional<double> alpha = std::nullopt);

/// Parses a label produced by ActivationSpec::label(), also accepting
/// "identity".
ActivationSpec activation_from_label(std::string_view label);

ActivationSpec identity_activation();
/// g(t) = t^p for p >= 1.
ActivationSpec monomial_activation(int p);

const std::vector<std::string>& catalog_names();
/// The five conventional activations used as baselines.
const std::vector<std::string>& baseline_names();

Matrix apply_elementwise(const ActivationSpec& spec, const Matrix& m);
Matrix derivative_elementwise(const ActivationSpec& spec, const Matrix& m);
/// derivative_elementwise(spec, z) given also out = apply_elementwise(spec, z).
/// Sigmoid, tanh, elu and softplus read the slope off `out` instead of
/// re-evaluating it; sigmoid and tanh are bit-identical, elu and softplus
/// agree to rounding.
Matrix derivative_from_output(const ActivationSpec& spec, const Matrix& z, const Matrix& out);

std::string_view to_string(Smoothness s);
std::string_view to_string(Growth g);

}  // namespace seagull
