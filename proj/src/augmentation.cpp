#include "orthoaugm/augmentation.hpp"

#include <fstream>

#include "json.hpp"
#include "orthoaugm/errors.hpp"

namespace orthoaugm {

std::string to_string(Structure s) {
  return s == Structure::standard ? "standard" : "orthogonal";
}

Structure structure_from_string(const std::string& s) {
  if (s == "standard") return Structure::standard;
  if (s == "orthogonal") return Structure::orthogonal;
  throw DimensionMismatch("unknown structure '" + s + "'");
}

TrainingContext TrainingContext::build(const Dataset& ds, const BaselineBasis& basis) {
  return build(build_states(ds), basis);
}

TrainingContext TrainingContext::build(std::vector<Sample> states, const BaselineBasis& basis) {
  TrainingContext ctx;
  ctx.states = std::move(states);
  const Matrix phi = assemble_phi(basis, ctx.states);
  ctx.fact = factorize(phi);
  ctx.targets.reserve(ctx.states.size() * basis.n_outputs);
  for (const Sample& s : ctx.states) {
    ctx.targets.insert(ctx.targets.end(), s.y.begin(), s.y.end());
  }
  return ctx;
}

Vector compute_theta_aux(const TrainingContext& ctx, const MlpParams& mlp) {
  return solve_least_squares(ctx.fact, forward_batch(mlp, ctx.states));
}

Vector predict_train(const TrainingContext& ctx, const Vector& theta_b, const MlpParams& mlp,
                     Structure structure) {
  Vector f = forward_batch(mlp, ctx.states);
  if (structure == Structure::orthogonal) f = apply_projector(ctx.fact, f);
  Vector yhat = matvec(ctx.fact.phi, theta_b);
  for (std::size_t i = 0; i < yhat.size(); ++i) yhat[i] += f[i];
  return yhat;
}

Vector predict_test(const AugmentedModel& model, const Vector& x) {
  const Matrix phi_x = model.basis.eval(x);
  Vector y = matvec(phi_x, model.theta_b);
  const Vector f = forward(model.mlp, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += f[i];
  if (model.structure == Structure::orthogonal) {
    if (!model.theta_aux) {
      throw MissingThetaAux("predict_test: orthogonal model has no frozen theta_aux");
    }
    const Vector correction = matvec(phi_x, *model.theta_aux);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= correction[i];
  }
  return y;
}

LossGrad loss_and_grad(const TrainingContext& ctx, const Vector& theta_b, const MlpParams& mlp,
                       Structure structure) {
  const std::size_t n = ctx.sample_count();
  MlpBatchCache cache;
  Vector f = forward_batch_cached(mlp, ctx.states, cache);
  if (structure == Structure::orthogonal) f = apply_projector(ctx.fact, f);

  Vector residual = matvec(ctx.fact.phi, theta_b);
  for (std::size_t i = 0; i < residual.size(); ++i) {
    residual[i] = ctx.targets[i] - (residual[i] + f[i]);
  }

  LossGrad out;
  out.value = dot(residual, residual) / static_cast<double>(n);

  const double scale = -2.0 / static_cast<double>(n);
  out.grad_theta_b = matvec_transpose(ctx.fact.phi, residual);
  for (double& g : out.grad_theta_b) g *= scale;

  Vector upstream = (structure == Structure::orthogonal)
                        ? apply_projector(ctx.fact, residual)
                        : residual;
  out.grad_theta_a = backprop_cached(mlp, ctx.states, upstream, cache);
  for (double& g : out.grad_theta_a) g *= scale;
  return out;
}

AugmentedModel freeze(const TrainingContext& ctx, AugmentedModel model) {
  if (model.structure == Structure::orthogonal) {
    model.theta_aux = compute_theta_aux(ctx, model.mlp);
  } else {
    model.theta_aux.reset();
  }
  return model;
}

void save_model_json(const std::filesystem::path& path, const AugmentedModel& model) {
  nlohmann::json j;
  j["structure"] = to_string(model.structure);
  j["theta_b"] = model.theta_b;
  if (model.theta_aux) {
    j["theta_aux"] = *model.theta_aux;
  } else {
    j["theta_aux"] = nullptr;
  }
  j["mlp"] = {{"layer_sizes", model.mlp.spec.layer_sizes}, {"theta_a", model.mlp.theta}};
  j["basis"] = model.basis.names();
  j["lag"] = {{"n_a", model.lag.n_a}, {"n_b", model.lag.n_b},
              {"n_u", model.lag.n_u}, {"n_y", model.lag.n_y}};
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::ios_base::failure("failed writing " + path.string());
}

AugmentedModel load_model_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  AugmentedModel model;
  model.structure = structure_from_string(j.at("structure").get<std::string>());
  model.theta_b = j.at("theta_b").get<Vector>();
  if (!j.at("theta_aux").is_null()) {
    model.theta_aux = j.at("theta_aux").get<Vector>();
  }
  model.mlp.spec.layer_sizes = j.at("mlp").at("layer_sizes").get<std::vector<std::size_t>>();
  model.mlp.theta = j.at("mlp").at("theta_a").get<Vector>();
  model.mlp.spec.validate();
  const auto& lag = j.at("lag");
  model.lag.n_a = lag.at("n_a").get<std::size_t>();
  model.lag.n_b = lag.at("n_b").get<std::size_t>();
  model.lag.n_u = lag.at("n_u").get<std::size_t>();
  model.lag.n_y = lag.at("n_y").get<std::size_t>();
  model.basis = BaselineBasis::parse(j.at("basis").get<std::vector<std::string>>(), model.lag);
  return model;
}

}  // namespace orthoaugm
