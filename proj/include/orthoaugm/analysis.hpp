#pragma once

#include <filesystem>
#include <optional>

#include "orthoaugm/augmentation.hpp"
#include "orthoaugm/linalg.hpp"
#include "orthoaugm/regressor.hpp"

namespace orthoaugm {

/// Closed-form diagnostics for a trained model against the true baseline.
struct ErrorReport {
  /// ||theta_b_true - theta_b_hat||_2
  double theta_b_error = 0.0;
  /// ||(Phi^T Phi)^-1 Phi^T Delta||_2: the baseline error the orthogonal
  /// structure commits when the data is not orthogonal to the unmodeled
  /// terms. Zero exactly when the defect below is zero.
  double theoretical_orth_error = 0.0;
  /// ||(Phi^T Phi)^-1 Phi^T (F - Delta)||_2: the corresponding error of the
  /// standard additive structure for the network output F it settled on.
  std::optional<double> theoretical_std_error;
  /// ||Phi^T Delta||_2, the amount by which the data set violates the
  /// orthogonality-of-data condition.
  double orthogonality_defect = 0.0;
};

/// ||Phi^T Delta||_2 with exactly rounded column sums, so symmetric data
/// sets that cancel in exact arithmetic report a defect of exactly zero.
double orthogonality_defect(const Matrix& phi, const Vector& delta);

double theoretical_orth_error(const RegressorFactorization& fact, const Vector& delta);

double theoretical_std_error(const RegressorFactorization& fact, const Vector& f_ann,
                             const Vector& delta);

/// Asymptotic parameter covariance estimate: sandwich of the per-sample
/// prediction Jacobians [phi(x_k) | J~(x_k)] with the (diagonal) residual
/// covariance in the middle. For the orthogonal structure J~ is the
/// projected network Jacobian: the stacked Jacobian columns are projected
/// onto the complement of span(Phi) over the given data set.
struct CovarianceReport {
  Matrix p_hat;               // n_theta x n_theta
  std::size_t n_theta_b = 0;  // leading block size (baseline parameters)
  /// Largest |entry| in the off-diagonal baseline-network blocks of p_hat.
  double max_cross_block = 0.0;
  Matrix sigma_hat;       // residual covariance as used (off-diagonals zeroed)
  Matrix sigma_hat_full;  // full residual covariance, for diagnostics
};

/// Throws SingularGram when the stacked Jacobian Gram matrix is rank
/// deficient and MissingThetaAux for an unfrozen orthogonal model.
CovarianceReport estimate_covariance(const AugmentedModel& model, const Dataset& ds);

void save_covariance_json(const std::filesystem::path& path, const CovarianceReport& report);
/// Plain CSV dump of p_hat (one row per line) for external plotting.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

/// Shewchuk-style exactly rounded sum; returns +-0.0 when the exact sum of
/// the inputs is zero.
double exact_sum(const Vector& values);

}  // namespace orthoaugm
