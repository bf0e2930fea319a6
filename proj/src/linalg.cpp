#include "orthoaugm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "orthoaugm/errors.hpp"

namespace orthoaugm {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool all_finite(const Vector& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double norm_inf(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (x.size() != a.cols()) throw DimensionMismatch("matvec: size mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    const double* row = a.data().data() + r * a.cols();
    for (std::size_t c = 0; c < a.cols(); ++c) s += row[c] * x[c];
    y[r] = s;
  }
  return y;
}

Vector matvec_transpose(const Matrix& a, const Vector& x) {
  if (x.size() != a.rows()) throw DimensionMismatch("matvec_transpose: size mismatch");
  Vector y(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double xr = x[r];
    const double* row = a.data().data() + r * a.cols();
    for (std::size_t c = 0; c < a.cols(); ++c) y[c] += row[c] * xr;
  }
  return y;
}

namespace {

constexpr double kRankTol = 1e-10;

// Applies the reflector stored in column j of a (unit leading entry implied)
// to the vector segment y[j..m).
void apply_reflector(const Matrix& a, std::size_t j, double tau, Vector& y) {
  const std::size_t m = a.rows();
  double s = y[j];
  for (std::size_t i = j + 1; i < m; ++i) s += a(i, j) * y[i];
  s *= tau;
  y[j] -= s;
  for (std::size_t i = j + 1; i < m; ++i) y[i] -= a(i, j) * s;
}

}  // namespace

RegressorFactorization factorize(const Matrix& phi) {
  const std::size_t m = phi.rows();
  const std::size_t n = phi.cols();
  if (n == 0 || m <= n) {
    throw DimensionMismatch("factorize: regressor must be tall (rows > cols >= 1)");
  }
  if (!phi.all_finite()) throw NonFinite("factorize: input contains NaN/Inf");

  Matrix a = phi;  // reflectors accumulate below the diagonal
  Vector tau(n, 0.0);

  for (std::size_t j = 0; j < n; ++j) {
    double xnorm2 = 0.0;
    for (std::size_t i = j + 1; i < m; ++i) xnorm2 += a(i, j) * a(i, j);
    const double alpha = a(j, j);
    if (xnorm2 == 0.0) {
      tau[j] = 0.0;
      continue;
    }
    const double beta = -std::copysign(std::sqrt(alpha * alpha + xnorm2), alpha);
    tau[j] = (beta - alpha) / beta;
    const double inv = 1.0 / (alpha - beta);
    for (std::size_t i = j + 1; i < m; ++i) a(i, j) *= inv;
    a(j, j) = beta;
    // update trailing columns
    for (std::size_t k = j + 1; k < n; ++k) {
      double s = a(j, k);
      for (std::size_t i = j + 1; i < m; ++i) s += a(i, j) * a(i, k);
      s *= tau[j];
      a(j, k) -= s;
      for (std::size_t i = j + 1; i < m; ++i) a(i, k) -= a(i, j) * s;
    }
  }

  double max_diag = 0.0;
  double min_diag = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const double d = std::abs(a(j, j));
    max_diag = std::max(max_diag, d);
    min_diag = std::min(min_diag, d);
  }
  if (max_diag == 0.0 || min_diag < kRankTol * max_diag) {
    throw RankDeficient(
        "factorize: regressor matrix is rank deficient; baseline parameters "
        "are not identifiable from this data set");
  }

  RegressorFactorization fact;
  fact.phi = phi;
  fact.cond_estimate = max_diag / min_diag;

  fact.r_upper = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) fact.r_upper(i, j) = a(i, j);

  // Back-accumulate the thin Q from the reflectors, column by column.
  fact.q_thin = Matrix(m, n);
  Vector col(m);
  for (std::size_t c = 0; c < n; ++c) {
    std::fill(col.begin(), col.end(), 0.0);
    col[c] = 1.0;
    for (std::size_t j = n; j-- > 0;) {
      if (tau[j] != 0.0) apply_reflector(a, j, tau[j], col);
    }
    for (std::size_t i = 0; i < m; ++i) fact.q_thin(i, c) = col[i];
  }

  // Normalize signs so the diagonal of R is positive; makes the
  // factorization unique and keeps Q == phi for already-orthonormal input.
  for (std::size_t j = 0; j < n; ++j) {
    if (fact.r_upper(j, j) < 0.0) {
      for (std::size_t k = j; k < n; ++k) fact.r_upper(j, k) = -fact.r_upper(j, k);
      for (std::size_t i = 0; i < m; ++i) fact.q_thin(i, j) = -fact.q_thin(i, j);
    }
  }

  if (!fact.q_thin.all_finite() || !fact.r_upper.all_finite()) {
    throw NonFinite("factorize: factorization produced non-finite values");
  }
  return fact;
}

Vector solve_least_squares(const RegressorFactorization& fact, const Vector& b) {
  if (b.size() != fact.phi.rows()) {
    throw DimensionMismatch("solve_least_squares: rhs length " + std::to_string(b.size()) +
                            " != " + std::to_string(fact.phi.rows()) + " rows");
  }
  const std::size_t n = fact.r_upper.rows();
  Vector x = matvec_transpose(fact.q_thin, b);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= fact.r_upper(ii, k) * x[k];
    x[ii] = s / fact.r_upper(ii, ii);
  }
  return x;
}

Vector apply_projector(const RegressorFactorization& fact, const Vector& v) {
  if (v.size() != fact.phi.rows()) {
    throw DimensionMismatch("apply_projector: vector length " + std::to_string(v.size()) +
                            " != " + std::to_string(fact.phi.rows()) + " rows");
  }
  const Vector w = matvec_transpose(fact.q_thin, v);
  Vector out = v;
  const std::size_t m = fact.q_thin.rows();
  const std::size_t n = fact.q_thin.cols();
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    const double* row = fact.q_thin.data().data() + i * n;
    for (std::size_t c = 0; c < n; ++c) s += row[c] * w[c];
    out[i] -= s;
  }
  return out;
}

double smallest_singular_value(const RegressorFactorization& fact) {
  const std::size_t n = fact.r_upper.rows();
  Vector z(n, 1.0);
  double norm = norm2(z);
  for (double& v : z) v /= norm;
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    // w = R^-T z  (forward substitution)
    Vector w(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = z[i];
      for (std::size_t k = 0; k < i; ++k) s -= fact.r_upper(k, i) * w[k];
      w[i] = s / fact.r_upper(i, i);
    }
    // z2 = R^-1 w (back substitution)
    for (std::size_t ii = n; ii-- > 0;) {
      double s = w[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= fact.r_upper(ii, k) * w[k];
      w[ii] = s / fact.r_upper(ii, ii);
    }
    lambda = norm2(w);
    for (std::size_t i = 0; i < n; ++i) z[i] = w[i] / lambda;
  }
  return 1.0 / std::sqrt(lambda);
}

}  // namespace orthoaugm
