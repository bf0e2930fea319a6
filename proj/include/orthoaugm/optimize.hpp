#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "orthoaugm/augmentation.hpp"
#include "orthoaugm/linalg.hpp"

namespace orthoaugm {

/// Smooth objective over a flat parameter vector. eval writes the gradient
/// into grad (resized by the callee) and returns the value.
struct Objective {
  std::function<double(const Vector& theta, Vector& grad)> eval;
  std::size_t dim = 0;
};

/// Two-phase training schedule: full-batch Adam for warmup, then L-BFGS
/// with a strong Wolfe line search for the final digits.
///
/// Defaults follow the common settings: Adam lr 1e-3, betas (0.9, 0.999),
/// eps 1e-8; L-BFGS memory 10, c1 = 1e-4, c2 = 0.9.
struct TrainSchedule {
  std::size_t adam_epochs = 500;
  double adam_lr = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  std::size_t lbfgs_iters = 1000;
  std::size_t lbfgs_memory = 10;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;

  /// Stop L-BFGS when the max-norm of the gradient drops below this.
  double grad_tol = 1e-10;

  void validate() const;
};

/// Full-batch Adam with bias-corrected moments. Deterministic: no
/// shuffling, fixed iteration order. Appends the objective value at each
/// iterate to *history when given. Throws NonFiniteObjective if the value
/// or gradient leaves the floating-point range.
Vector adam_run(const Objective& obj, Vector theta0, const TrainSchedule& schedule,
                std::vector<double>* history = nullptr);

struct LineSearchResult {
  double step = 0.0;
  double value = 0.0;
  Vector grad;
  std::size_t evals = 0;
  bool success = false;
  /// Both strong Wolfe inequalities at the accepted step.
  bool sufficient_decrease = false;
  bool curvature = false;
};

/// Strong Wolfe line search (bracket + zoom with cubic interpolation).
/// Gives up after max_evals objective evaluations and reports the best
/// point seen so far with success = false.
LineSearchResult wolfe_line_search(const Objective& obj, const Vector& x0, double f0,
                                   const Vector& g0, const Vector& direction, double c1,
                                   double c2, std::size_t max_evals = 50);

struct LbfgsResult {
  Vector theta;
  double value = 0.0;
  Vector grad;
  std::size_t iterations = 0;
  bool converged = false;
  /// Set when a line search failed; theta is the best iterate reached.
  bool line_search_failed = false;
};

/// Limited-memory BFGS with two-loop recursion. Curvature pairs with
/// s^T y <= 1e-10 ||s|| ||y|| are skipped. Stops at the iteration cap or
/// when ||g||_inf < grad_tol.
LbfgsResult lbfgs_run(const Objective& obj, Vector theta0, const TrainSchedule& schedule,
                      std::vector<double>* history = nullptr);

struct HistoryEntry {
  std::size_t iter = 0;
  std::string phase;  // "adam" or "lbfgs"
  double loss = 0.0;
};

struct TrainResult {
  AugmentedModel model;
  std::vector<HistoryEntry> history;
  double final_loss = 0.0;
  bool line_search_failed = false;
};

/// Joint estimation of baseline and network parameters: the two blocks
/// share one flat vector, Adam runs first, L-BFGS second, and the model is
/// frozen at the end. Deterministic for fixed (model0, schedule, data).
TrainResult train(const TrainingContext& ctx, const AugmentedModel& model0,
                  const TrainSchedule& schedule);

/// Writes training history as CSV `iter,phase,loss`.
void write_history_csv(const std::filesystem::path& path,
                       const std::vector<HistoryEntry>& history);

}  // namespace orthoaugm
