#include "seagull/linalg.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "seagull/errors.hpp"

namespace seagull {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> view(const Matrix& m) {
  return {m.values().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

Eigen::Map<RowMajor> view(Matrix& m) {
  return {m.values().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

[[noreturn]] void shape_mismatch(const char* op, const Matrix& a, const Matrix& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                       b.shape_string());
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// Jacobi SVD for rows >= cols. Columns are kept as separate contiguous
// vectors so each rotation touches two cache-friendly arrays.
SvdResult svd_tall(const Matrix& m, std::size_t max_sweeps) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  std::vector<std::vector<double>> w(cols, std::vector<double>(rows));
  std::vector<std::vector<double>> v(cols, std::vector<double>(cols, 0.0));
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) w[j][i] = m(i, j);
    v[j][j] = 1.0;
  }

  const double eps = std::numeric_limits<double>::epsilon();
  double frob2 = 0.0;
  for (const auto& col : w) frob2 += dot(col, col);
  // Columns at rounding-noise level cannot be orthogonalised further.
  const double negligible = eps * eps * frob2;
  std::size_t sweep = 0;
  for (;; ++sweep) {
    if (sweep == max_sweeps) {
      throw ConvergenceError("jacobi svd did not converge after " + std::to_string(sweep) +
                                 " sweeps",
                             sweep);
    }
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        const double alpha = dot(w[p], w[p]);
        const double beta = dot(w[q], w[q]);
        const double gamma = dot(w[p], w[q]);
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha) * std::sqrt(beta)) continue;
        if (alpha <= negligible || beta <= negligible) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double wp = w[p][i];
          const double wq = w[q][i];
          w[p][i] = c * wp - s * wq;
          w[q][i] = s * wp + c * wq;
        }
        for (std::size_t i = 0; i < cols; ++i) {
          const double vp = v[p][i];
          const double vq = v[q][i];
          v[p][i] = c * vp - s * vq;
          v[q][i] = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(cols);
  for (std::size_t j = 0; j < cols; ++j) sigma[j] = std::sqrt(dot(w[j], w[j]));
  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  SvdResult out{Matrix(rows, cols), std::vector<double>(cols), Matrix(cols, cols)};
  std::vector<std::vector<double>> u_cols;
  u_cols.reserve(cols);
  std::vector<std::size_t> missing;
  for (std::size_t k = 0; k < cols; ++k) {
    const std::size_t j = order[k];
    out.singular_values[k] = sigma[j];
    for (std::size_t i = 0; i < cols; ++i) out.vt(k, i) = v[j][i];
    std::vector<double> col(rows, 0.0);
    if (sigma[j] > std::numeric_limits<double>::min() * 1e3 && sigma[j] * sigma[j] > negligible) {
      for (std::size_t i = 0; i < rows; ++i) col[i] = w[j][i] / sigma[j];
    } else {
      out.singular_values[k] = 0.0;
      missing.push_back(k);
    }
    u_cols.push_back(std::move(col));
  }

  // Null singular values leave u columns undetermined; complete them to an
  // orthonormal set by Gram-Schmidt over the standard basis.
  std::size_t basis = 0;
  for (std::size_t k : missing) {
    while (basis < rows) {
      std::vector<double> cand(rows, 0.0);
      cand[basis++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t o = 0; o < cols; ++o) {
          if (o == k) continue;
          const double proj = dot(cand, u_cols[o]);
          for (std::size_t i = 0; i < rows; ++i) cand[i] -= proj * u_cols[o][i];
        }
      }
      const double norm = std::sqrt(dot(cand, cand));
      if (norm > 1e-8) {
        for (double& x : cand) x /= norm;
        u_cols[k] = std::move(cand);
        break;
      }
    }
  }

  for (std::size_t k = 0; k < cols; ++k)
    for (std::size_t i = 0; i < rows; ++i) out.u(i, k) = u_cols[k][i];
  return out;
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) shape_mismatch("matmul", a, b);
  Matrix out(a.rows(), b.cols());
  view(out).noalias() = view(a) * view(b);
  return out;
}

Matrix matmul_transpose_a(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) shape_mismatch("matmul_transpose_a", a, b);
  Matrix out(a.cols(), b.cols());
  view(out).noalias() = view(a).transpose() * view(b);
  return out;
}

Matrix matmul_transpose_b(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) shape_mismatch("matmul_transpose_b", a, b);
  Matrix out(a.rows(), b.rows());
  view(out).noalias() = view(a) * view(b).transpose();
  return out;
}

SvdResult svd(const Matrix& m, std::size_t max_sweeps) {
  if (!m.all_finite()) throw NonFiniteError("svd input contains non-finite entries");
  if (m.rows() >= m.cols()) return svd_tall(m, max_sweeps);
  SvdResult t = svd_tall(m.transposed(), max_sweeps);
  return SvdResult{t.vt.transposed(), std::move(t.singular_values), t.u.transposed()};
}

Matrix pinv(const Matrix& m, double rcond) {
  if (!(rcond >= 0.0)) throw DomainError("pinv: rcond must be non-negative");
  const SvdResult s = svd(m);
  Matrix out(m.cols(), m.rows());
  if (s.singular_values.empty()) return out;
  const double cutoff = rcond * s.singular_values.front();
  for (std::size_t k = 0; k < s.singular_values.size(); ++k) {
    const double sigma = s.singular_values[k];
    if (sigma <= cutoff || sigma == 0.0) continue;
    const double inv = 1.0 / sigma;
    for (std::size_t i = 0; i < m.cols(); ++i) {
      const double vi = s.vt(k, i) * inv;
      if (vi == 0.0) continue;
      auto row = out.row(i);
      for (std::size_t j = 0; j < m.rows(); ++j) row[j] += vi * s.u(j, k);
    }
  }
  return out;
}

double rank_tolerance(std::span<const double> singular_values, std::size_t rows,
                      std::size_t cols, double tol_factor) {
  if (!(tol_factor > 0.0)) throw DomainError("numerical_rank: tol_factor must be positive");
  const double sigma_max = singular_values.empty() ? 0.0 : singular_values.front();
  return tol_factor * static_cast<double>(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon() * sigma_max;
}

std::size_t numerical_rank_from_singular_values(std::span<const double> singular_values,
                                                std::size_t rows, std::size_t cols,
                                                double tol_factor) {
  const double tol = rank_tolerance(singular_values, rows, cols, tol_factor);
  return static_cast<std::size_t>(std::count_if(singular_values.begin(), singular_values.end(),
                                                [tol](double s) { return s > tol; }));
}

std::size_t numerical_rank(const Matrix& m, double tol_factor) {
  if (!(tol_factor > 0.0)) throw DomainError("numerical_rank: tol_factor must be positive");
  const SvdResult s = svd(m);
  return numerical_rank_from_singular_values(s.singular_values, m.rows(), m.cols(), tol_factor);
}

Matrix column_means(const Matrix& m) {
  if (m.rows() == 0) throw DimensionError("column_means: matrix has no rows");
  Matrix out(1, m.cols());
  auto o = out.row(0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) o[c] += row[c];
  }
  for (double& x : o) x /= static_cast<double>(m.rows());
  return out;
}

}  // namespace seagull
