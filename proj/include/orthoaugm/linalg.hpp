#pragma once

#include <cstddef>
#include <vector>

namespace orthoaugm {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Value type; all kernels below treat
/// inputs as immutable and are safe to call from independent threads.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }

  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

bool all_finite(const Vector& v);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);
double norm_inf(const Vector& v);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);

/// y = A x
Vector matvec(const Matrix& a, const Vector& x);
/// y = A^T x
Vector matvec_transpose(const Matrix& a, const Vector& x);

/// Thin orthogonal factorization of a tall regressor matrix: phi = q_thin *
/// r_upper with orthonormal columns in q_thin and positive diagonal in
/// r_upper. cond_estimate is the ratio of the largest to the smallest
/// absolute diagonal entry of r_upper (a cheap conditioning surrogate, not a
/// true condition number).
struct RegressorFactorization {
  Matrix phi;
  Matrix q_thin;
  Matrix r_upper;
  double cond_estimate = 1.0;
};

/// Householder QR of a tall matrix (rows > cols required).
/// Throws NonFinite on NaN/Inf input and RankDeficient when any diagonal of
/// R falls below 1e-10 times the largest one.
RegressorFactorization factorize(const Matrix& phi);

/// argmin_x ||phi x - b||_2 via back-substitution of r_upper on q_thin^T b.
Vector solve_least_squares(const RegressorFactorization& fact, const Vector& b);

/// v - q_thin (q_thin^T v): projection onto the orthogonal complement of the
/// column space of phi. The full projector matrix is never materialized.
Vector apply_projector(const RegressorFactorization& fact, const Vector& v);

/// Smallest singular value of phi, computed by inverse power iteration on
/// r_upper^T r_upper.
double smallest_singular_value(const RegressorFactorization& fact);

}  // namespace orthoaugm
