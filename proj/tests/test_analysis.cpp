#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

#include "seagull/analysis.hpp"
#include "seagull/errors.hpp"
#include "seagull/linalg.hpp"
#include "seagull/network.hpp"
#include "test_util.hpp"

using namespace seagull;
using seagull::testing::random_matrix;

namespace {

// Least squares on [G | 1] through the normal equations.
Eigen::VectorXd normal_equations(const Matrix& g, std::span<const double> y) {
  const auto n = static_cast<Eigen::Index>(g.rows());
  const auto m = static_cast<Eigen::Index>(g.cols());
  Eigen::MatrixXd a(n, m + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = g(i, j);
    a(i, m) = 1.0;
    b(i) = y[i];
  }
  return (a.transpose() * a).ldlt().solve(a.transpose() * b);
}

}  // namespace

TEST(SolveHead, ExactAffineFit) {
  const std::vector<double> y = {2, 4, 6};
  const auto h = solve_head(Matrix{{1}, {2}, {3}}, y);
  EXPECT_NEAR(h.alpha[0], 2.0, 1e-12);
  EXPECT_NEAR(h.beta, 0.0, 1e-12);
  EXPECT_NEAR(h.residual_norm, 0.0, 1e-12);
}

TEST(SolveHead, ConstantTarget) {
  const std::vector<double> y(20, 1.7);
  const auto h = solve_head(random_matrix(20, 4, 1), y);
  for (double a : h.alpha) EXPECT_NEAR(a, 0.0, 1e-12);
  EXPECT_NEAR(h.beta, 1.7, 1e-12);
}

TEST(SolveHead, NormalEquationsOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix g = random_matrix(50, 8, seed, -2.0, 2.0);
    Rng rng(seed);
    std::vector<double> y(50);
    for (double& v : y) v = rng.normal();
    const auto h = solve_head(g, y);
    const Eigen::VectorXd theta = normal_equations(g, y);
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(h.alpha[j], theta(j), 1e-8);
    EXPECT_NEAR(h.beta, theta(8), 1e-8);
  }
}

TEST(SolveHead, ResidualOrthogonality) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix g = random_matrix(40 + seed, 1 + seed, seed + 20, -3.0, 3.0);
    Rng rng(seed);
    std::vector<double> y(g.rows());
    for (double& v : y) v = 5.0 * rng.normal() + 2.0;
    const auto h = solve_head(g, y);
    const Matrix means = column_means(g);
    double ynorm = 0.0;
    double rsum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      ynorm += y[i] * y[i];
      rsum += h.residual[i];
    }
    ynorm = std::sqrt(ynorm);
    EXPECT_LE(std::abs(rsum), 1e-8 * ynorm * std::sqrt(double(y.size())));
    for (std::size_t j = 0; j < g.cols(); ++j) {
      double dot = 0.0;
      double cn = 0.0;
      for (std::size_t i = 0; i < g.rows(); ++i) {
        dot += (g(i, j) - means(0, j)) * h.residual[i];
        cn += std::pow(g(i, j) - means(0, j), 2);
      }
      EXPECT_LE(std::abs(dot), 1e-8 * std::sqrt(cn) * ynorm);
    }
  }
}

TEST(SolveHead, ShapeErrors) {
  EXPECT_THROW(solve_head(Matrix(3, 2), std::vector<double>{1, 2}), DimensionError);
}

TEST(PolynomialBound, Values) {
  EXPECT_EQ(polynomial_rank_bound(2, 2), 6u);
  EXPECT_EQ(polynomial_rank_bound(9, 1), 10u);
  EXPECT_EQ(polynomial_rank_bound(1, 0), 1u);
  EXPECT_EQ(polynomial_rank_bound(9, 2), 55u);
  EXPECT_EQ(polynomial_rank_bound(30, 30), 118264581564861424ull);
  EXPECT_THROW(polynomial_rank_bound(100, 100), DomainError);
}

TEST(Rank, PolynomialCeiling) {
  for (int p = 1; p <= 3; ++p)
    for (std::size_t d : {2, 3, 9}) {
      const auto bound = polynomial_rank_bound(d, p);
      const Matrix x = random_matrix(200, d, 10 * p + d);
      for (std::uint64_t t = 0; t < 5; ++t) {
        const auto r = random_rank_trial(x, std::min<std::size_t>(4 * bound, 200), monomial_activation(p), t);
        EXPECT_LE(r.achieved_rank, bound) << "p " << p << " d " << d;
        ASSERT_TRUE(r.theoretical_bound.has_value());
        EXPECT_EQ(*r.theoretical_bound, bound);
      }
    }
}

TEST(Rank, PolynomialSquareNineDims) {
  const Matrix x = random_matrix(100, 9, 3, -2.0, 2.0);
  const auto h = construct_rank1_weights(x, 60, monomial_activation(2), 1);
  EXPECT_LE(h.achieved_rank, 55u);
  const auto r = random_rank_trial(x, 100, monomial_activation(2), 2);
  EXPECT_LE(r.achieved_rank, 55u);
}

TEST(Rank, SeagullEscapesPolynomialCeiling) {
  const Matrix x = random_matrix(200, 2, 4, -2.0, 2.0);
  const auto h = construct_rank1_weights(x, 12, catalog_get("seagull"), 3);
  EXPECT_EQ(h.achieved_rank, 12u);
  EXPECT_EQ(numerical_rank(hidden_features(x, h.w_matrix, h.bias_row, catalog_get("seagull"))), 12u);
  EXPECT_GT(h.achieved_rank, polynomial_rank_bound(2, 2));
}

TEST(Rank, Rank1ConstructionShape) {
  const Matrix x = random_matrix(100, 9, 5, -2.0, 2.0);
  const auto h = construct_rank1_weights(x, 20, catalog_get("seagull"), 7);
  EXPECT_EQ(numerical_rank(h.w_matrix), 1u);
  for (double b : h.bias_row.values()) EXPECT_EQ(b, h.bias_row(0, 0));
  EXPECT_NE(h.bias_row(0, 0), 0.0);
  EXPECT_EQ(h.achieved_rank, 20u);
  EXPECT_LE(h.draws_used, 64u);
  EXPECT_GT(h.tolerance, 0.0);
  const auto one = construct_rank1_weights(x, 1, catalog_get("tanh"), 7);
  EXPECT_EQ(one.achieved_rank, 1u);
}

TEST(Rank, Rank1RejectsDuplicates) {
  Matrix x(4, 2, 1.0);
  EXPECT_THROW(construct_rank1_weights(x, 2, catalog_get("seagull"), 1), DomainError);
  EXPECT_THROW(construct_rank1_weights(random_matrix(4, 2, 1), 5, catalog_get("seagull"), 1),
               DomainError);
}

TEST(Rank, StaircaseTriangularPattern) {
  const Matrix x = random_matrix(5, 1, 9);
  const auto h = construct_relu_staircase(x, 3);
  const Matrix g = hidden_features(x, h.w_matrix, h.bias_row, catalog_get("relu"));
  EXPECT_EQ(numerical_rank(g), 3u);
  // Order rows by projection, largest first; column k is non-zero on
  // exactly the k+1 largest.
  std::vector<std::size_t> order = {0, 1, 2, 3, 4};
  const Matrix proj = matmul(x, h.w_matrix);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return proj(a, 0) > proj(b, 0); });
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t r = 0; r < 5; ++r) EXPECT_EQ(g(order[r], k) > 0.0, r <= k) << k << " " << r;
}

TEST(Rank, StaircaseAlwaysExact) {
  for (std::size_t n : {10, 50, 200}) {
    const Matrix x = random_matrix(n, 4, n, -2.0, 2.0);
    for (std::size_t m = 1; m <= n; m += (n < 20 ? 1 : 13)) {
      const auto h = construct_relu_staircase(x, m);
      EXPECT_EQ(h.achieved_rank, m);
    }
    EXPECT_EQ(construct_relu_staircase(x, n).achieved_rank, n);
  }
}

TEST(Rank, ReportJson) {
  const Matrix x = random_matrix(30, 2, 1);
  const auto r = random_rank_trial(x, 10, monomial_activation(2), 1);
  const std::string j = rank_report_to_json(r);
  EXPECT_NE(j.find("\"theoretical_bound\":6"), std::string::npos) << j;
  EXPECT_LE(r.achieved_rank, std::min(r.n, r.m));
}

TEST(Exchangeability, TargetItselfIsExchangeable) {
  const Predictor f = [](const Matrix& x) {
    Matrix out(x.rows(), 1);
    for (std::size_t i = 0; i < x.rows(); ++i) out(i, 0) = triangle_area(x.row(i));
    return out;
  };
  const auto r = check_exchangeability(f, 3, 9, 500, 1);
  EXPECT_LE(r.swap_gap, 1e-12);
  EXPECT_EQ(r.samples, 500u);
  EXPECT_GE(r.antisym_gap, 0.0);
}

TEST(Exchangeability, RandomReluNetIsNot) {
  auto specs = mlp_specs(9, {20, 20}, catalog_get("relu"), false);
  const Network net = init_network(specs, 3);
  const auto r = check_exchangeability(predict_fn(net), 4, 9, 100, 2);
  std::size_t over = 0;
  for (double g : r.antisym_gaps) over += g > 1e-6;
  EXPECT_GE(over, 95u);
  EXPECT_THROW(check_exchangeability(predict_fn(net), 5, 9, 10, 2), DomainError);
}

TEST(Permutations, Universe) {
  const auto u = nine_dim_permutation_universe();
  ASSERT_EQ(u.size(), 12u);
  for (const auto& p : u) {
    std::vector<std::size_t> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(sorted[i], i);
  }
  const Permutation id = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_EQ(u.front(), id);
  EXPECT_EQ(u[6], id);
  const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_EQ(apply_permutation({3, 4, 5, 0, 1, 2, 6, 7, 8}, x),
            (std::vector<double>{4, 5, 6, 1, 2, 3, 7, 8, 9}));
  EXPECT_EQ(block_transpositions(5, 5).size(), 10u);
  EXPECT_EQ(permutation_universe_for(make_task("simplex_volume_25")).size(), 10u);
}

TEST(Permutations, CountsOverUniverse) {
  const auto u = nine_dim_permutation_universe();
  EXPECT_EQ(count_invariant_permutations(make_task("triangle_area"), u, 100, 1e-9, 1), 12u);
  EXPECT_EQ(count_invariant_permutations(make_task("det3_cosine"), u, 100, 1e-9, 1), 12u);
  EXPECT_EQ(count_invariant_permutations(make_task("simplex_volume_25"),
                                         block_transpositions(5, 5), 100, 1e-9, 1),
            10u);
  // Row permutations only: the solid angle is symmetric in its three points,
  // psi only in the first two.
  const std::vector<Permutation> rows(u.begin(), u.begin() + 6);
  EXPECT_EQ(count_invariant_permutations(make_task("solid_angle"), rows, 100, 1e-9, 1), 6u);
  EXPECT_EQ(count_invariant_permutations(make_task("psi"), rows, 100, 1e-9, 1), 2u);
}
