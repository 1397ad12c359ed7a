#pragma once

#include <cstddef>
#include <vector>

#include "seagull/matrix.hpp"

namespace seagull {

/// Thin SVD, m = u * diag(singular_values) * vt.
///
/// For an r x c input with k = min(r, c): u is r x k with orthonormal
/// columns, vt is k x c with orthonormal rows, and singular_values holds k
/// non-negative values in non-increasing order.
struct SvdResult {
  Matrix u;
  std::vector<double> singular_values;
  Matrix vt;
};

inline constexpr double kDefaultPinvRcond = 1e-12;

/// a * b. Throws DimensionError naming both shapes when a.cols != b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);
/// transpose(a) * b without materializing the transpose.
Matrix matmul_transpose_a(const Matrix& a, const Matrix& b);
/// a * transpose(b) without materializing the transpose.
Matrix matmul_transpose_b(const Matrix& a, const Matrix& b);

/// One-sided (Hestenes) Jacobi SVD. Throws ConvergenceError if the sweeps
/// do not settle within `max_sweeps`.
SvdResult svd(const Matrix& m, std::size_t max_sweeps = 80);

/// Moore-Penrose pseudoinverse; singular values at or below
/// rcond * sigma_max are treated as zero.
Matrix pinv(const Matrix& m, double rcond = kDefaultPinvRcond);

/// Count of singular values strictly above
/// tol_factor * max(rows, cols) * machine_epsilon * sigma_max.
std::size_t numerical_rank(const Matrix& m, double tol_factor = 1.0);
/// Same threshold, applied to precomputed singular values.
std::size_t numerical_rank_from_singular_values(std::span<const double> singular_values,
                                                std::size_t rows, std::size_t cols,
                                                double tol_factor = 1.0);
double rank_tolerance(std::span<const double> singular_values, std::size_t rows,
                      std::size_t cols, double tol_factor = 1.0);

/// 1 x cols row of per-column means (the mean taken over rows).
Matrix column_means(const Matrix& m);

}  // namespace seagull
