#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "orthoaugm/linalg.hpp"
#include "orthoaugm/mlp.hpp"
#include "orthoaugm/regressor.hpp"

namespace orthoaugm {

/// Additive augmentation structure. `standard` adds the network output
/// directly to the baseline prediction; `orthogonal` first removes the part
/// of the stacked network output that the baseline regressor can represent,
/// so the two components cannot compete for the same dynamics.
enum class Structure { standard, orthogonal };

std::string to_string(Structure s);
Structure structure_from_string(const std::string& s);

/// Baseline + learning component with the parameters needed to predict.
/// theta_aux is absent while the model is in training (it is an implicit
/// function of the network parameters) and is frozen by freeze() afterwards;
/// it only ever exists for the orthogonal structure.
struct AugmentedModel {
  Structure structure = Structure::standard;
  Vector theta_b;
  MlpParams mlp;
  std::optional<Vector> theta_aux;
  BaselineBasis basis;
  LagSpec lag;
};

/// Immutable per-training-set cache: the factorized regressor matrix, the
/// lagged states and the stacked targets. The projection uses exactly the
/// states the loss is evaluated on.
struct TrainingContext {
  RegressorFactorization fact;
  std::vector<Sample> states;
  Vector targets;

  std::size_t sample_count() const { return states.size(); }

  static TrainingContext build(const Dataset& ds, const BaselineBasis& basis);
  static TrainingContext build(std::vector<Sample> states, const BaselineBasis& basis);
};

/// Least-squares coefficient of the stacked network output on the regressor
/// columns: the baseline-representable part of the learning component.
Vector compute_theta_aux(const TrainingContext& ctx, const MlpParams& mlp);

/// Stacked training-set prediction for the given parameters.
Vector predict_train(const TrainingContext& ctx, const Vector& theta_b, const MlpParams& mlp,
                     Structure structure);

/// Single-sample prediction with frozen parameters; this is also the
/// 1-step-ahead predictor when x is assembled from measured past IO data.
/// Throws MissingThetaAux for an unfrozen orthogonal model.
Vector predict_test(const AugmentedModel& model, const Vector& x);

struct LossGrad {
  double value = 0.0;
  Vector grad_theta_b;
  Vector grad_theta_a;
};

/// Mean squared prediction error V = (1/N) ||Y - Yhat||_2^2 and its exact
/// gradient. In orthogonal mode the gradient w.r.t. the network parameters
/// flows through the projection (the projector is self-adjoint, so it is
/// applied to the upstream residual).
LossGrad loss_and_grad(const TrainingContext& ctx, const Vector& theta_b, const MlpParams& mlp,
                       Structure structure);

/// Stores theta_aux computed from the final network parameters (orthogonal
/// structure; a no-op for standard). Idempotent.
AugmentedModel freeze(const TrainingContext& ctx, AugmentedModel model);

void save_model_json(const std::filesystem::path& path, const AugmentedModel& model);
AugmentedModel load_model_json(const std::filesystem::path& path);

}  // namespace orthoaugm
