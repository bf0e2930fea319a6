#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "orthoaugm/analysis.hpp"
#include "orthoaugm/augmentation.hpp"
#include "orthoaugm/optimize.hpp"
#include "orthoaugm/regressor.hpp"

namespace orthoaugm {

/// The cubic NFIR benchmark system y = t0 + t1 u + t2 u^2 + t3 u^3 + e.
/// The baseline model covers the odd terms {u, u^3}; the constant and the
/// quadratic are the unmodeled part.
struct TrueSystem {
  std::array<double, 4> theta_star{0.01, 1.0, -0.5, 0.1};
  double sigma_e = 0.0;

  /// True baseline parameters in basis order {u, u^3}.
  Vector baseline_theta() const { return {theta_star[1], theta_star[3]}; }
  /// Unmodeled terms: t0 + t2 u^2 (an even function of u).
  double unmodeled(double u) const { return theta_star[0] + theta_star[2] * (u * u); }
};

/// Input excitation designs:
///   d1  half the samples drawn N(0, 0.3^2), the other half their negation
///       (sign-symmetric by construction)
///   d2  all samples drawn N(0, 0.3^2)
///   d3  all samples drawn N(-0.01, 0.3^2) (asymmetric)
enum class InputDesign { d1, d2, d3 };

std::string to_string(InputDesign k);
InputDesign input_design_from_string(const std::string& s);

std::vector<double> gen_input(InputDesign kind, std::size_t n, std::uint64_t seed);

/// Pointwise polynomial evaluation plus additive noise.
std::vector<double> simulate_nfir(const TrueSystem& sys, const std::vector<double>& u,
                                  const std::vector<double>& e);

/// Noise level for a target SNR: sigma_e = std(y_clean) * 10^(-snr_db/20)
/// (population standard deviation; amplitude-ratio convention).
double sigma_from_snr(const std::vector<double>& y_clean, double snr_db);

struct ExperimentConfig {
  InputDesign dataset_kind = InputDesign::d1;
  std::size_t n_samples = 1024;
  std::optional<double> snr_db;  // absent = noiseless
  std::size_t n_monte_carlo = 10;
  std::uint64_t data_seed = 1;
  std::uint64_t base_model_seed = 100;
  std::vector<std::uint64_t> model_seeds;  // derived from base when empty
  TrainSchedule schedule;
  std::array<double, 2> theta_b_init{0.8, 0.03};
  std::vector<std::size_t> mlp_hidden{16};
  std::size_t n_test = 1024;
  std::uint64_t test_seed = 9000;
  std::vector<Structure> structures{Structure::standard, Structure::orthogonal};

  std::vector<std::uint64_t> resolved_model_seeds() const;
  MlpSpec mlp_spec() const;
};

/// NFIR dataset (n_a = n_b = 0, scalar IO) for a given excitation design.
/// Returns the dataset and the calibrated noise level.
struct GeneratedData {
  Dataset dataset;
  double sigma_e = 0.0;
};
GeneratedData make_dataset(const ExperimentConfig& cfg, InputDesign kind, std::size_t n,
                           std::uint64_t seed);

/// Everything recorded about one trained model in a study.
struct RunRecord {
  std::size_t run_id = 0;
  Structure structure = Structure::standard;
  InputDesign dataset = InputDesign::d1;
  std::size_t n = 0;
  std::optional<double> snr_db;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;

  double test_rmse = 0.0;
  double theta_b_err = 0.0;
  Vector theta_b;
  double final_loss = 0.0;
  double wall_ms = 0.0;

  ErrorReport error_report;
  std::optional<CovarianceReport> covariance;
  /// Learning component on a u grid: (u, f_ann_projected, delta_true).
  std::vector<std::array<double, 3>> learning_curve;
  std::optional<AugmentedModel> model;
};

struct StudyResult {
  double sigma_e = 0.0;
  std::vector<RunRecord> runs;
};

/// Monte Carlo study over network initializations: one dataset drawn from
/// the data seed, then per model seed both structures are trained on it and
/// evaluated on a shared noise-free test set.
StudyResult run_monte_carlo(const ExperimentConfig& cfg, std::size_t jobs = 1);

struct SweepPoint {
  std::size_t n = 0;
  Structure structure = Structure::standard;
  double mean_error = 0.0;
  double std_error = 0.0;
  std::size_t n_ok = 0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<RunRecord> runs;
};

/// Baseline-error trend over data length: per N, n_monte_carlo runs with
/// fresh data and fresh initialization per run, aggregated as mean +- std
/// of ||theta_b_hat - theta_b_true||_2 per structure.
SweepResult run_consistency_sweep(const ExperimentConfig& cfg,
                                  const std::vector<std::size_t>& n_values,
                                  std::size_t jobs = 1);

/// Results CSV rows:
/// run_id,structure,dataset,N,snr_db,seed,test_rmse,theta_b_err,theta_b_0,
/// ...,theta_b_n,final_loss,wall_ms,status
void write_results_csv(const std::filesystem::path& path, const std::vector<RunRecord>& runs);

/// Learning-component curve CSV: `u,f_ann_projected,delta_true` (one file
/// per run; the caller picks the path).
void write_learning_curve_csv(const std::filesystem::path& path, const RunRecord& run);

/// Sweep aggregate CSV: `N,structure,mean_theta_b_err,std_theta_b_err,n_ok`.
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& points);

}  // namespace orthoaugm
