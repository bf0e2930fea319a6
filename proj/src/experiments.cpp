#include "orthoaugm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include "orthoaugm/errors.hpp"
#include "orthoaugm/rng.hpp"

namespace orthoaugm {

namespace {

constexpr double kInputStd = 0.3;
constexpr double kD3Mean = -0.01;
constexpr std::size_t kCurvePoints = 201;  // u grid on [-1, 1]

// Seed-stream tags so data, noise and model draws never collide.
constexpr std::uint64_t kTagData = 0x64617461;
constexpr std::uint64_t kTagNoise = 0x6e6f6973;
constexpr std::uint64_t kTagModel = 0x6d6f646c;

}  // namespace

std::string to_string(InputDesign k) {
  switch (k) {
    case InputDesign::d1: return "d1";
    case InputDesign::d2: return "d2";
    default: return "d3";
  }
}

InputDesign input_design_from_string(const std::string& s) {
  if (s == "d1" || s == "D1") return InputDesign::d1;
  if (s == "d2" || s == "D2") return InputDesign::d2;
  if (s == "d3" || s == "D3") return InputDesign::d3;
  throw DimensionMismatch("unknown input design '" + s + "'");
}

std::vector<double> gen_input(InputDesign kind, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw InsufficientData("gen_input: need at least 2 samples");
  Rng rng(seed);
  std::vector<double> u(n);
  switch (kind) {
    case InputDesign::d1: {
      if (n % 2 != 0) throw OddLengthD1();
      const std::size_t half = n / 2;
      for (std::size_t i = 0; i < half; ++i) u[i] = rng.normal(0.0, kInputStd);
      for (std::size_t i = 0; i < half; ++i) u[half + i] = -u[i];
      break;
    }
    case InputDesign::d2:
      for (double& v : u) v = rng.normal(0.0, kInputStd);
      break;
    case InputDesign::d3:
      for (double& v : u) v = rng.normal(kD3Mean, kInputStd);
      break;
  }
  return u;
}

std::vector<double> simulate_nfir(const TrueSystem& sys, const std::vector<double>& u,
                                  const std::vector<double>& e) {
  if (u.size() != e.size()) {
    throw DimensionMismatch("simulate_nfir: input and noise lengths differ");
  }
  std::vector<double> y(u.size());
  const auto& t = sys.theta_star;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double uk = u[k];
    const double u2 = uk * uk;
    y[k] = t[0] + t[1] * uk + t[2] * u2 + t[3] * (u2 * uk) + e[k];
  }
  return y;
}

double sigma_from_snr(const std::vector<double>& y_clean, double snr_db) {
  if (y_clean.size() < 2) throw DegenerateSignal("sigma_from_snr: need at least 2 samples");
  double mean = 0.0;
  for (double v : y_clean) mean += v;
  mean /= static_cast<double>(y_clean.size());
  double var = 0.0;
  for (double v : y_clean) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y_clean.size());
  const double sd = std::sqrt(var);
  if (sd == 0.0) throw DegenerateSignal("sigma_from_snr: constant signal has no SNR");
  if (std::isinf(snr_db)) return 0.0;
  return sd * std::pow(10.0, -snr_db / 20.0);
}

std::vector<std::uint64_t> ExperimentConfig::resolved_model_seeds() const {
  if (!model_seeds.empty()) return model_seeds;
  std::vector<std::uint64_t> seeds(n_monte_carlo);
  for (std::size_t i = 0; i < n_monte_carlo; ++i) {
    seeds[i] = Rng::derive(base_model_seed, Rng::derive(kTagModel, i));
  }
  return seeds;
}

MlpSpec ExperimentConfig::mlp_spec() const {
  MlpSpec spec;
  spec.layer_sizes.push_back(1);
  for (std::size_t h : mlp_hidden) spec.layer_sizes.push_back(h);
  spec.layer_sizes.push_back(1);
  return spec;
}

GeneratedData make_dataset(const ExperimentConfig& cfg, InputDesign kind, std::size_t n,
                           std::uint64_t seed) {
  const std::vector<double> u = gen_input(kind, n, Rng::derive(seed, kTagData));
  TrueSystem sys;
  const std::vector<double> zeros(n, 0.0);
  const std::vector<double> y_clean = simulate_nfir(sys, u, zeros);

  GeneratedData out;
  out.sigma_e = cfg.snr_db ? sigma_from_snr(y_clean, *cfg.snr_db) : 0.0;
  std::vector<double> e(n, 0.0);
  if (out.sigma_e > 0.0) {
    Rng noise(Rng::derive(seed, kTagNoise));
    for (double& v : e) v = noise.normal(0.0, out.sigma_e);
  }
  const std::vector<double> y = simulate_nfir(sys, u, e);

  out.dataset.lag = LagSpec{0, 0, 1, 1};
  out.dataset.inputs.reserve(n);
  out.dataset.outputs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.dataset.inputs.push_back({u[k]});
    out.dataset.outputs.push_back({y[k]});
  }
  return out;
}

namespace {

struct SharedEval {
  TrainingContext ctx;
  Vector delta;                     // unmodeled terms at the training samples
  std::vector<Sample> test_states;  // noise-free test set
  Vector test_targets;
  Dataset dataset;  // training data (for the covariance estimate)
};

SharedEval prepare_eval(const ExperimentConfig& cfg, const Dataset& ds,
                        const BaselineBasis& basis) {
  SharedEval ev;
  ev.dataset = ds;
  ev.ctx = TrainingContext::build(ds, basis);

  TrueSystem sys;
  ev.delta.reserve(ev.ctx.states.size());
  for (const Sample& s : ev.ctx.states) ev.delta.push_back(sys.unmodeled(s.x[0]));

  const std::vector<double> u_test = gen_input(InputDesign::d2, cfg.n_test, cfg.test_seed);
  const std::vector<double> zeros(u_test.size(), 0.0);
  const std::vector<double> y_test = simulate_nfir(sys, u_test, zeros);
  ev.test_states.resize(u_test.size());
  ev.test_targets.resize(u_test.size());
  for (std::size_t k = 0; k < u_test.size(); ++k) {
    ev.test_states[k].x = {u_test[k]};
    ev.test_states[k].y = {y_test[k]};
    ev.test_targets[k] = y_test[k];
  }
  return ev;
}

RunRecord execute_run(const ExperimentConfig& cfg, const SharedEval& ev,
                      const BaselineBasis& basis, Structure structure, std::size_t run_id,
                      std::uint64_t seed, InputDesign kind, std::size_t n,
                      bool keep_artifacts) {
  RunRecord rec;
  rec.run_id = run_id;
  rec.structure = structure;
  rec.dataset = kind;
  rec.n = n;
  rec.snr_db = cfg.snr_db;
  rec.seed = seed;
  try {
    AugmentedModel model0;
    model0.structure = structure;
    model0.theta_b = {cfg.theta_b_init[0], cfg.theta_b_init[1]};
    model0.mlp = xavier_init(cfg.mlp_spec(), seed);
    model0.basis = basis;
    model0.lag = ev.dataset.lag;

    const auto t0 = std::chrono::steady_clock::now();
    TrainResult tr = train(ev.ctx, model0, cfg.schedule);
    const auto t1 = std::chrono::steady_clock::now();
    rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    const AugmentedModel& model = tr.model;
    rec.final_loss = tr.final_loss;
    rec.theta_b = model.theta_b;

    TrueSystem sys;
    const Vector theta_true = sys.baseline_theta();
    double err2 = 0.0;
    for (std::size_t i = 0; i < theta_true.size(); ++i) {
      const double d = model.theta_b[i] - theta_true[i];
      err2 += d * d;
    }
    rec.theta_b_err = std::sqrt(err2);

    double sq = 0.0;
    for (std::size_t k = 0; k < ev.test_states.size(); ++k) {
      const double r = ev.test_targets[k] - predict_test(model, ev.test_states[k].x)[0];
      sq += r * r;
    }
    rec.test_rmse = std::sqrt(sq / static_cast<double>(ev.test_states.size()));

    rec.error_report.theta_b_error = rec.theta_b_err;
    rec.error_report.orthogonality_defect = orthogonality_defect(ev.ctx.fact.phi, ev.delta);
    rec.error_report.theoretical_orth_error = theoretical_orth_error(ev.ctx.fact, ev.delta);
    if (structure == Structure::standard) {
      rec.error_report.theoretical_std_error =
          theoretical_std_error(ev.ctx.fact, forward_batch(model.mlp, ev.ctx.states), ev.delta);
    }

    rec.learning_curve.reserve(kCurvePoints);
    for (std::size_t i = 0; i < kCurvePoints; ++i) {
      const double u = -1.0 + 2.0 * static_cast<double>(i) / (kCurvePoints - 1);
      const Vector x{u};
      double f = forward(model.mlp, x)[0];
      if (structure == Structure::orthogonal) {
        const Matrix phi_x = model.basis.eval(x);
        f -= matvec(phi_x, *model.theta_aux)[0];
      }
      rec.learning_curve.push_back({u, f, sys.unmodeled(u)});
    }

    if (keep_artifacts) {
      try {
        rec.covariance = estimate_covariance(model, ev.dataset);
      } catch (const std::exception& ex) {
        rec.error = std::string("covariance: ") + ex.what();
      }
      rec.model = model;
    }
    rec.ok = true;
  } catch (const std::exception& ex) {
    rec.ok = false;
    rec.error = ex.what();
  }
  return rec;
}

// Runs the closures over [0, total) on `jobs` threads; each result lands in
// its own slot, so aggregation order does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t total, std::size_t jobs, Fn&& fn) {
  if (jobs <= 1 || total <= 1) {
    for (std::size_t i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n_threads = std::min(jobs, total);
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
}

}  // namespace

StudyResult run_monte_carlo(const ExperimentConfig& cfg, std::size_t jobs) {
  const GeneratedData data = make_dataset(cfg, cfg.dataset_kind, cfg.n_samples, cfg.data_seed);
  const BaselineBasis basis = BaselineBasis::parse({"u", "u^3"}, data.dataset.lag);
  const SharedEval ev = prepare_eval(cfg, data.dataset, basis);
  const std::vector<std::uint64_t> seeds = cfg.resolved_model_seeds();

  StudyResult out;
  out.sigma_e = data.sigma_e;
  out.runs.resize(seeds.size() * cfg.structures.size());
  parallel_for(out.runs.size(), jobs, [&](std::size_t idx) {
    const std::size_t seed_idx = idx / cfg.structures.size();
    const Structure structure = cfg.structures[idx % cfg.structures.size()];
    out.runs[idx] = execute_run(cfg, ev, basis, structure, idx, seeds[seed_idx],
                                cfg.dataset_kind, cfg.n_samples, /*keep_artifacts=*/true);
  });
  return out;
}

SweepResult run_consistency_sweep(const ExperimentConfig& cfg,
                                  const std::vector<std::size_t>& n_values, std::size_t jobs) {
  struct Task {
    std::size_t n;
    std::size_t run_idx;
    Structure structure;
  };
  std::vector<Task> tasks;
  for (std::size_t n : n_values) {
    for (std::size_t i = 0; i < cfg.n_monte_carlo; ++i) {
      for (Structure s : cfg.structures) tasks.push_back({n, i, s});
    }
  }

  SweepResult out;
  out.runs.resize(tasks.size());
  parallel_for(tasks.size(), jobs, [&](std::size_t idx) {
    const Task& task = tasks[idx];
    // Fresh data and fresh initialization per run.
    const std::uint64_t run_seed =
        Rng::derive(cfg.data_seed, Rng::derive(task.n, task.run_idx));
    ExperimentConfig local = cfg;
    local.n_samples = task.n;
    const GeneratedData data = make_dataset(local, cfg.dataset_kind, task.n, run_seed);
    const BaselineBasis basis = BaselineBasis::parse({"u", "u^3"}, data.dataset.lag);
    const SharedEval ev = prepare_eval(local, data.dataset, basis);
    const std::uint64_t model_seed = Rng::derive(cfg.base_model_seed, run_seed);
    out.runs[idx] = execute_run(local, ev, basis, task.structure, idx, model_seed,
                                cfg.dataset_kind, task.n, /*keep_artifacts=*/false);
  });

  for (std::size_t n : n_values) {
    for (Structure s : cfg.structures) {
      SweepPoint pt;
      pt.n = n;
      pt.structure = s;
      double sum = 0.0;
      std::vector<double> errs;
      for (std::size_t idx = 0; idx < tasks.size(); ++idx) {
        if (tasks[idx].n == n && tasks[idx].structure == s && out.runs[idx].ok) {
          errs.push_back(out.runs[idx].theta_b_err);
          sum += out.runs[idx].theta_b_err;
        }
      }
      pt.n_ok = errs.size();
      if (!errs.empty()) {
        pt.mean_error = sum / static_cast<double>(errs.size());
        double var = 0.0;
        for (double e : errs) var += (e - pt.mean_error) * (e - pt.mean_error);
        pt.std_error = std::sqrt(var / static_cast<double>(errs.size()));
      }
      out.points.push_back(pt);
    }
  }
  return out;
}

void write_results_csv(const std::filesystem::path& path, const std::vector<RunRecord>& runs) {
  std::size_t n_theta_b = 0;
  for (const RunRecord& r : runs) n_theta_b = std::max(n_theta_b, r.theta_b.size());
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  out << "run_id,structure,dataset,N,snr_db,seed,test_rmse,theta_b_err";
  for (std::size_t i = 0; i < n_theta_b; ++i) out << ",theta_b_" << i;
  out << ",final_loss,wall_ms,status\n";
  for (const RunRecord& r : runs) {
    out << r.run_id << "," << to_string(r.structure) << "," << to_string(r.dataset) << ","
        << r.n << "," << (r.snr_db ? format_g17(*r.snr_db) : "inf") << "," << r.seed << ","
        << format_g17(r.test_rmse) << "," << format_g17(r.theta_b_err);
    for (std::size_t i = 0; i < n_theta_b; ++i) {
      out << "," << (i < r.theta_b.size() ? format_g17(r.theta_b[i]) : "nan");
    }
    out << "," << format_g17(r.final_loss) << "," << format_g17(r.wall_ms) << ","
        << (r.ok ? "ok" : "failed:" + r.error) << "\n";
  }
  if (!out) throw std::ios_base::failure("failed writing " + path.string());
}

void write_learning_curve_csv(const std::filesystem::path& path, const RunRecord& run) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  out << "u,f_ann_projected,delta_true\n";
  for (const auto& row : run.learning_curve) {
    out << format_g17(row[0]) << "," << format_g17(row[1]) << "," << format_g17(row[2]) << "\n";
  }
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& points) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  out << "N,structure,mean_theta_b_err,std_theta_b_err,n_ok\n";
  for (const SweepPoint& p : points) {
    out << p.n << "," << to_string(p.structure) << "," << format_g17(p.mean_error) << ","
        << format_g17(p.std_error) << "," << p.n_ok << "\n";
  }
}

}  // namespace orthoaugm
