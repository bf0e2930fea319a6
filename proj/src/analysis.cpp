#include "orthoaugm/analysis.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "orthoaugm/errors.hpp"

namespace orthoaugm {

double exact_sum(const Vector& values) {
  // Grow-expansion accumulation: partials stay non-overlapping and sorted by
  // magnitude, so the final left-to-right sum is exact.
  std::vector<double> partials;
  for (double x : values) {
    std::size_t used = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[used++] = lo;
      x = hi;
    }
    partials.resize(used);
    partials.push_back(x);
  }
  double total = 0.0;
  for (double p : partials) total += p;
  return total;
}

double orthogonality_defect(const Matrix& phi, const Vector& delta) {
  if (delta.size() != phi.rows()) {
    throw DimensionMismatch("orthogonality_defect: Delta length must match Phi rows");
  }
  double sq = 0.0;
  Vector products(phi.rows());
  for (std::size_t j = 0; j < phi.cols(); ++j) {
    for (std::size_t i = 0; i < phi.rows(); ++i) products[i] = phi(i, j) * delta[i];
    const double col = exact_sum(products);
    sq += col * col;
  }
  return std::sqrt(sq);
}

double theoretical_orth_error(const RegressorFactorization& fact, const Vector& delta) {
  return norm2(solve_least_squares(fact, delta));
}

double theoretical_std_error(const RegressorFactorization& fact, const Vector& f_ann,
                             const Vector& delta) {
  if (f_ann.size() != delta.size()) {
    throw DimensionMismatch("theoretical_std_error: F and Delta lengths differ");
  }
  Vector diff(f_ann.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = f_ann[i] - delta[i];
  return norm2(solve_least_squares(fact, diff));
}

CovarianceReport estimate_covariance(const AugmentedModel& model, const Dataset& ds) {
  const std::vector<Sample> states = build_states(ds);
  const std::size_t n = states.size();
  const std::size_t n_y = ds.lag.n_y;
  const std::size_t nb = model.theta_b.size();
  const std::size_t na = model.mlp.theta.size();
  const std::size_t n_theta = nb + na;

  const Matrix phi = assemble_phi(model.basis, states);
  const RegressorFactorization fact = factorize(phi);

  // Residual covariance from the frozen model's 1-step-ahead predictions.
  Matrix sigma_full(n_y, n_y);
  for (std::size_t k = 0; k < n; ++k) {
    const Vector yhat = predict_test(model, states[k].x);
    for (std::size_t a = 0; a < n_y; ++a) {
      const double ra = states[k].y[a] - yhat[a];
      for (std::size_t b = 0; b < n_y; ++b) {
        const double rb = states[k].y[b] - yhat[b];
        sigma_full(a, b) += ra * rb / static_cast<double>(n);
      }
    }
  }
  Matrix sigma(n_y, n_y);
  for (std::size_t a = 0; a < n_y; ++a) sigma(a, a) = sigma_full(a, a);

  // Stacked prediction Jacobian Psi = [Phi | J], with J projected columnwise
  // for the orthogonal structure.
  Matrix psi(n * n_y, n_theta);
  for (std::size_t k = 0; k < n; ++k) {
    const Matrix jac = jacobian_params(model.mlp, states[k].x);
    for (std::size_t c = 0; c < n_y; ++c) {
      for (std::size_t j = 0; j < nb; ++j) psi(k * n_y + c, j) = phi(k * n_y + c, j);
      for (std::size_t j = 0; j < na; ++j) psi(k * n_y + c, nb + j) = jac(c, j);
    }
  }
  if (model.structure == Structure::orthogonal) {
    if (!model.theta_aux) {
      throw MissingThetaAux("estimate_covariance: orthogonal model is not frozen");
    }
    Vector col(n * n_y);
    for (std::size_t j = 0; j < na; ++j) {
      for (std::size_t i = 0; i < n * n_y; ++i) col[i] = psi(i, nb + j);
      const Vector proj = apply_projector(fact, col);
      for (std::size_t i = 0; i < n * n_y; ++i) psi(i, nb + j) = proj[i];
    }
  }

  RegressorFactorization psi_fact;
  try {
    psi_fact = factorize(psi);
  } catch (const RankDeficient&) {
    throw SingularGram(
        "estimate_covariance: a diagonal block of the Jacobian Gram matrix is "
        "rank deficient");
  }

  // Middle factor (2/N) sum_k psi_k^T Sigma psi_k with diagonal Sigma.
  Matrix middle(n_theta, n_theta);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t c = 0; c < n_y; ++c) {
      const double w = 2.0 * sigma(c, c) / static_cast<double>(n);
      const double* row = psi.data().data() + (k * n_y + c) * n_theta;
      for (std::size_t a = 0; a < n_theta; ++a) {
        const double wa = w * row[a];
        double* out = middle.data().data() + a * n_theta;
        for (std::size_t b = 0; b < n_theta; ++b) out[b] += wa * row[b];
      }
    }
  }

  // A = (1/N) Psi^T Psi = (1/N) R^T R, so A^-1 x = N R^-1 R^-T x.
  const Matrix& r = psi_fact.r_upper;
  auto solve_gram = [&](Vector& x) {
    for (std::size_t i = 0; i < n_theta; ++i) {
      double s = x[i];
      for (std::size_t k = 0; k < i; ++k) s -= r(k, i) * x[k];
      x[i] = s / r(i, i);
    }
    for (std::size_t ii = n_theta; ii-- > 0;) {
      double s = x[ii];
      for (std::size_t k = ii + 1; k < n_theta; ++k) s -= r(ii, k) * x[k];
      x[ii] = s / r(ii, ii);
    }
    for (double& v : x) v *= static_cast<double>(n);
  };

  // P = A^-1 M A^-1, applied column-by-column and then row-by-row.
  Matrix p_hat(n_theta, n_theta);
  Vector work(n_theta);
  for (std::size_t col = 0; col < n_theta; ++col) {
    for (std::size_t i = 0; i < n_theta; ++i) work[i] = middle(i, col);
    solve_gram(work);
    for (std::size_t i = 0; i < n_theta; ++i) p_hat(i, col) = work[i];
  }
  for (std::size_t row = 0; row < n_theta; ++row) {
    for (std::size_t i = 0; i < n_theta; ++i) work[i] = p_hat(row, i);
    solve_gram(work);
    for (std::size_t i = 0; i < n_theta; ++i) p_hat(row, i) = work[i];
  }

  CovarianceReport report;
  report.n_theta_b = nb;
  report.max_cross_block = 0.0;
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = nb; j < n_theta; ++j) {
      report.max_cross_block = std::max(report.max_cross_block,
                                        std::max(std::abs(p_hat(i, j)), std::abs(p_hat(j, i))));
    }
  }
  report.p_hat = std::move(p_hat);
  report.sigma_hat = std::move(sigma);
  report.sigma_hat_full = std::move(sigma_full);
  return report;
}

namespace {

std::vector<Vector> matrix_rows(const Matrix& m) {
  std::vector<Vector> rows(m.rows(), Vector(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
  return rows;
}

}  // namespace

void save_covariance_json(const std::filesystem::path& path, const CovarianceReport& report) {
  nlohmann::json j;
  j["n_theta"] = report.p_hat.rows();
  j["n_theta_b"] = report.n_theta_b;
  j["max_cross_block"] = report.max_cross_block;
  j["p_hat"] = matrix_rows(report.p_hat);
  j["sigma_hat"] = matrix_rows(report.sigma_hat);
  j["sigma_hat_full"] = matrix_rows(report.sigma_hat_full);
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << format_g17(m(i, j));
    }
    out << "\n";
  }
  if (!out) throw std::ios_base::failure("failed writing " + path.string());
}

}  // namespace orthoaugm
