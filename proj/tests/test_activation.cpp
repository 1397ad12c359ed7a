#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "seagull/activation.hpp"
#include "seagull/analysis.hpp"
#include "seagull/errors.hpp"
#include "seagull/linalg.hpp"
#include "test_util.hpp"

using namespace seagull;
using seagull::testing::random_matrix;

namespace {

std::vector<ActivationSpec> every_spec() {
  std::vector<ActivationSpec> out;
  for (const auto& name : catalog_names()) {
    if (name == "g1" || name == "g2" || name == "g3") {
      for (double a : {1.0, 1.25, 1.5, 2.0}) out.push_back(catalog_get(name, a));
    } else {
      out.push_back(catalog_get(name));
    }
  }
  return out;
}

}  // namespace

TEST(Catalog, ScalarExamples) {
  const double ln2 = std::log(2.0);
  EXPECT_EQ(catalog_get("seagull").evaluate(0.0), 0.0);
  EXPECT_DOUBLE_EQ(catalog_get("seagull").evaluate(1.0), ln2);
  EXPECT_DOUBLE_EQ(catalog_get("llu").evaluate(-1.0), -ln2);
  EXPECT_EQ(catalog_get("relu").evaluate(-3.0), 0.0);
  EXPECT_DOUBLE_EQ(catalog_get("seagull").derivative(1.0), 1.0);
  EXPECT_EQ(catalog_get("seagull").derivative(0.0), 0.0);
  EXPECT_EQ(catalog_get("relu").derivative(0.0), 0.0);
  EXPECT_DOUBLE_EQ(catalog_get("llu").derivative(-3.0), 0.25);
  EXPECT_EQ(catalog_get("g3", 1.5).evaluate(-2.0), 0.0);
  EXPECT_DOUBLE_EQ(catalog_get("softplus").evaluate(100.0), 100.0);
  EXPECT_DOUBLE_EQ(catalog_get("elu").evaluate(-1.0), std::expm1(-1.0));
}

TEST(Catalog, DeclaredProperties) {
  const auto s = catalog_get("seagull");
  EXPECT_TRUE(s.is_even());
  EXPECT_EQ(s.growth(), Growth::logarithmic);
  EXPECT_EQ(s.smoothness(), Smoothness::c_infinity);
  EXPECT_FALSE(catalog_get("llu").is_even());
  EXPECT_TRUE(catalog_get("g1", 1.3).is_even());
  EXPECT_EQ(catalog_get("sigmoid").growth(), Growth::bounded);
  EXPECT_EQ(catalog_get("relu").growth(), Growth::linear);
  EXPECT_EQ(catalog_get("g2", 1.7).alpha(), 1.7);
}

TEST(Catalog, RejectsBadNamesAndAlpha) {
  EXPECT_THROW(catalog_get("swish"), DomainError);
  EXPECT_THROW(catalog_get("g1"), DomainError);
  EXPECT_THROW(catalog_get("g2", 2.5), DomainError);
  EXPECT_THROW(catalog_get("g3", 0.5), DomainError);
  EXPECT_THROW(activation_from_label("powx"), DomainError);
}

TEST(Catalog, LabelsRoundTrip) {
  for (const auto& spec : every_spec()) {
    EXPECT_EQ(activation_from_label(spec.label()), spec) << spec.label();
  }
  EXPECT_EQ(activation_from_label("pow3"), monomial_activation(3));
  EXPECT_EQ(catalog_get("g1", 1.5).label(), "g1:1.5");
}

TEST(Elementwise, HandExamples) {
  const double ln2 = std::log(2.0);
  const Matrix s = apply_elementwise(catalog_get("seagull"), Matrix{{0, 1}, {-1, 2}});
  EXPECT_EQ(s(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(s(0, 1), ln2);
  EXPECT_DOUBLE_EQ(s(1, 0), ln2);
  EXPECT_DOUBLE_EQ(s(1, 1), std::log(5.0));
  EXPECT_EQ(apply_elementwise(catalog_get("relu"), Matrix{{-1, 2}}), (Matrix{{0, 2}}));
}

TEST(Elementwise, MatchesScalarLoopExactly) {
  const Matrix m = random_matrix(13, 11, 9, -6.0, 6.0);
  for (const auto& spec : every_spec()) {
    const Matrix v = apply_elementwise(spec, m);
    const Matrix d = derivative_elementwise(spec, m);
    for (std::size_t i = 0; i < m.size(); ++i) {
      ASSERT_EQ(v.values()[i], spec.evaluate(m.values()[i])) << spec.label();
      ASSERT_EQ(d.values()[i], spec.derivative(m.values()[i])) << spec.label();
    }
  }
}

TEST(Elementwise, DerivativeFromOutputMatchesDirectDerivative) {
  const Matrix m = random_matrix(13, 11, 10, -6.0, 6.0);
  for (const auto& spec : every_spec()) {
    const Matrix direct = derivative_elementwise(spec, m);
    const Matrix reused = derivative_from_output(spec, m, apply_elementwise(spec, m));
    if (spec.kind() == ActivationKind::elu || spec.kind() == ActivationKind::softplus) {
      EXPECT_LE(seagull::testing::max_abs_diff(direct, reused), 4e-15) << spec.label();
    } else {
      EXPECT_EQ(direct, reused) << spec.label();
    }
  }
  EXPECT_THROW(derivative_from_output(catalog_get("tanh"), Matrix(2, 2), Matrix(2, 3)),
               DimensionError);
}

TEST(Derivative, MatchesCentralDifference) {
  const double h = 1e-5;
  std::vector<double> xs;
  for (int k = -50; k <= 50; ++k)
    if (k != 0) xs.push_back(0.1 * k);
  Rng rng(5);
  for (int k = 0; k < 400; ++k) {
    const double x = rng.uniform(-8.0, 8.0);
    if (std::abs(x) > 0.05) xs.push_back(x);
  }
  for (const auto& spec : every_spec()) {
    for (double x : xs) {
      const double fd = (spec.evaluate(x + h) - spec.evaluate(x - h)) / (2 * h);
      const double an = spec.derivative(x);
      EXPECT_LE(std::abs(fd - an), 1e-6 * std::max(1.0, std::abs(an))) << spec.label() << " at " << x;
    }
  }
}

TEST(Property, EvenSpecsAreBitSymmetric) {
  Rng rng(17);
  for (const auto& spec : every_spec()) {
    if (!spec.is_even()) continue;
    for (int k = 0; k < 10000; ++k) {
      const double x = rng.uniform(-100.0, 100.0);
      ASSERT_EQ(spec.evaluate(x), spec.evaluate(-x)) << spec.label() << " at " << x;
    }
  }
}

TEST(Property, DeclaredEvennessIsTruthful) {
  for (const auto& spec : every_spec()) {
    if (spec.is_even()) continue;
    bool differs = false;
    for (double x : {0.5, 1.0, 2.0, 3.0}) differs |= spec.evaluate(x) != spec.evaluate(-x);
    EXPECT_TRUE(differs) << spec.label();
  }
}

TEST(Property, GrowthRates) {
  const double x = 1e6;
  EXPECT_NEAR(catalog_get("seagull").evaluate(x) / std::log(x), 2.0, 0.02);
  for (const char* name : {"relu", "elu", "softplus"}) {
    EXPECT_NEAR(catalog_get(name).evaluate(x) / x, 1.0, 1e-9) << name;
  }
  EXPECT_NEAR(catalog_get("llu").evaluate(x) / std::log(x), 1.0, 0.01);
}

TEST(Property, FamilyCoincidences) {
  const auto seagull = catalog_get("seagull");
  const auto g1 = catalog_get("g1", 2.0);
  const auto llu = catalog_get("llu");
  const auto g2 = catalog_get("g2", 1.0);
  Rng rng(3);
  for (int k = 0; k < 5000; ++k) {
    const double x = rng.uniform(-50.0, 50.0);
    ASSERT_EQ(g1.evaluate(x), seagull.evaluate(x));
    ASSERT_EQ(g1.derivative(x), seagull.derivative(x));
    ASSERT_EQ(g2.evaluate(x), llu.evaluate(x));
    ASSERT_EQ(g2.derivative(x), llu.derivative(x));
  }
}

TEST(Property, NonPolynomialRankCertificate) {
  const Matrix x = random_matrix(50, 1, 21, -2.0, 2.0);
  for (const auto& spec : every_spec()) {
    const auto h = construct_rank1_weights(x, 10, spec, 4);
    const Matrix g = hidden_features(x, h.w_matrix, h.bias_row, spec);
    EXPECT_GT(numerical_rank(g), 4u) << spec.label();
  }
  // The bound itself is tight for a true polynomial.
  for (int p = 1; p <= 3; ++p) {
    const auto h = construct_rank1_weights(x, 10, monomial_activation(p), 4);
    EXPECT_EQ(h.achieved_rank, static_cast<std::size_t>(p + 1));
  }
}
