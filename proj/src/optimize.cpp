#include "orthoaugm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>

#include "orthoaugm/errors.hpp"
#include "orthoaugm/regressor.hpp"

namespace orthoaugm {

void TrainSchedule::validate() const {
  if (!(wolfe_c1 > 0.0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
    throw DimensionMismatch("TrainSchedule: need 0 < c1 < c2 < 1");
  }
  if (lbfgs_memory < 1) throw DimensionMismatch("TrainSchedule: memory must be >= 1");
}

Vector adam_run(const Objective& obj, Vector theta, const TrainSchedule& schedule,
                std::vector<double>* history) {
  schedule.validate();
  if (!all_finite(theta)) throw NonFiniteObjective("adam_run: non-finite start point");
  const std::size_t dim = theta.size();
  Vector grad(dim, 0.0);
  Vector m(dim, 0.0), v(dim, 0.0);
  double beta1_t = 1.0, beta2_t = 1.0;
  for (std::size_t t = 0; t < schedule.adam_epochs; ++t) {
    const double value = obj.eval(theta, grad);
    if (!std::isfinite(value) || !all_finite(grad)) {
      throw NonFiniteObjective("adam_run: objective became non-finite at iteration " +
                               std::to_string(t));
    }
    if (history) history->push_back(value);
    beta1_t *= schedule.adam_beta1;
    beta2_t *= schedule.adam_beta2;
    for (std::size_t i = 0; i < dim; ++i) {
      const double g = grad[i];
      m[i] = schedule.adam_beta1 * m[i] + (1.0 - schedule.adam_beta1) * g;
      v[i] = schedule.adam_beta2 * v[i] + (1.0 - schedule.adam_beta2) * g * g;
      const double m_hat = m[i] / (1.0 - beta1_t);
      const double v_hat = v[i] / (1.0 - beta2_t);
      theta[i] -= schedule.adam_lr * m_hat / (std::sqrt(v_hat) + schedule.adam_eps);
    }
  }
  return theta;
}

namespace {

// Minimizer of the cubic interpolant through (a, fa, da) and (b, fb, db),
// safeguarded to the interior of the interval; falls back to bisection.
double cubic_step(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  double alpha;
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    alpha = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
  } else {
    alpha = 0.5 * (a + b);
  }
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(alpha) || alpha < lo + margin || alpha > hi - margin) {
    alpha = 0.5 * (a + b);
  }
  return alpha;
}

}  // namespace

LineSearchResult wolfe_line_search(const Objective& obj, const Vector& x0, double f0,
                                   const Vector& g0, const Vector& direction, double c1,
                                   double c2, std::size_t max_evals) {
  LineSearchResult best;
  best.value = f0;
  const double dphi0 = dot(g0, direction);
  if (dphi0 >= 0.0) return best;  // not a descent direction

  const std::size_t dim = x0.size();
  Vector x(dim), g(dim);
  double best_phi = f0;
  double best_alpha = 0.0;
  Vector best_grad;

  auto phi_eval = [&](double alpha, double& dphi) {
    for (std::size_t i = 0; i < dim; ++i) x[i] = x0[i] + alpha * direction[i];
    const double value = obj.eval(x, g);
    ++best.evals;
    dphi = std::isfinite(value) && all_finite(g) ? dot(g, direction)
                                                 : std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(value) && value < best_phi) {
      best_phi = value;
      best_alpha = alpha;
      best_grad = g;
    }
    return value;
  };

  auto accept = [&](double alpha, double value, double dphi) {
    best.step = alpha;
    best.value = value;
    best.grad = g;
    best.success = true;
    best.sufficient_decrease = value <= f0 + c1 * alpha * dphi0;
    best.curvature = std::abs(dphi) <= -c2 * dphi0;
    return best;
  };

  auto give_up = [&]() {
    best.step = best_alpha;
    best.value = best_phi;
    best.grad = best_grad.empty() ? g0 : best_grad;
    best.success = false;
    return best;
  };

  // Bracketing phase (step doubling), then zoom with cubic interpolation.
  double alpha_prev = 0.0, phi_prev = f0, dphi_prev = dphi0;
  double alpha = 1.0;
  double lo = 0.0, hi = 0.0, phi_lo = 0.0, phi_hi = 0.0, dphi_lo = 0.0, dphi_hi = 0.0;
  bool bracketed = false;
  while (best.evals < max_evals) {
    double dphi;
    const double value = phi_eval(alpha, dphi);
    const bool bad = !std::isfinite(value);
    if (bad || value > f0 + c1 * alpha * dphi0 || (alpha_prev > 0.0 && value >= phi_prev)) {
      lo = alpha_prev;
      phi_lo = phi_prev;
      dphi_lo = dphi_prev;
      hi = alpha;
      phi_hi = bad ? std::numeric_limits<double>::max() : value;
      dphi_hi = bad ? 0.0 : dphi;
      bracketed = true;
      break;
    }
    if (std::abs(dphi) <= -c2 * dphi0) return accept(alpha, value, dphi);
    if (dphi >= 0.0) {
      lo = alpha;
      phi_lo = value;
      dphi_lo = dphi;
      hi = alpha_prev;
      phi_hi = phi_prev;
      dphi_hi = dphi_prev;
      bracketed = true;
      break;
    }
    alpha_prev = alpha;
    phi_prev = value;
    dphi_prev = dphi;
    alpha *= 2.0;
    if (alpha > 1e12) return give_up();
  }
  if (!bracketed) return give_up();

  while (best.evals < max_evals) {
    if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) return give_up();
    const double trial = cubic_step(lo, phi_lo, dphi_lo, hi, phi_hi, dphi_hi);
    double dphi;
    const double value = phi_eval(trial, dphi);
    const bool bad = !std::isfinite(value);
    if (bad || value > f0 + c1 * trial * dphi0 || value >= phi_lo) {
      hi = trial;
      phi_hi = bad ? std::numeric_limits<double>::max() : value;
      dphi_hi = bad ? 0.0 : dphi;
    } else {
      if (std::abs(dphi) <= -c2 * dphi0) return accept(trial, value, dphi);
      if (dphi * (hi - lo) >= 0.0) {
        hi = lo;
        phi_hi = phi_lo;
        dphi_hi = dphi_lo;
      }
      lo = trial;
      phi_lo = value;
      dphi_lo = dphi;
    }
  }
  return give_up();
}

LbfgsResult lbfgs_run(const Objective& obj, Vector theta0, const TrainSchedule& schedule,
                      std::vector<double>* history) {
  schedule.validate();
  if (!all_finite(theta0)) throw NonFiniteObjective("lbfgs_run: non-finite start point");
  const std::size_t dim = theta0.size();

  LbfgsResult res;
  res.theta = std::move(theta0);
  res.grad.assign(dim, 0.0);
  res.value = obj.eval(res.theta, res.grad);
  if (!std::isfinite(res.value) || !all_finite(res.grad)) {
    throw NonFiniteObjective("lbfgs_run: objective non-finite at start point");
  }
  if (norm_inf(res.grad) < schedule.grad_tol) {
    res.converged = true;
    return res;
  }

  struct Pair {
    Vector s, y;
    double rho;
  };
  std::deque<Pair> pairs;
  Vector direction(dim), q(dim);
  std::vector<double> alpha_buf;

  for (std::size_t iter = 0; iter < schedule.lbfgs_iters; ++iter) {
    // Two-loop recursion for H g.
    q = res.grad;
    alpha_buf.assign(pairs.size(), 0.0);
    for (std::size_t i = pairs.size(); i-- > 0;) {
      const Pair& p = pairs[i];
      const double a = p.rho * dot(p.s, q);
      alpha_buf[i] = a;
      for (std::size_t k = 0; k < dim; ++k) q[k] -= a * p.y[k];
    }
    if (!pairs.empty()) {
      const Pair& newest = pairs.back();
      const double gamma = dot(newest.s, newest.y) / dot(newest.y, newest.y);
      for (double& v : q) v *= gamma;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const Pair& p = pairs[i];
      const double beta = p.rho * dot(p.y, q);
      for (std::size_t k = 0; k < dim; ++k) q[k] += p.s[k] * (alpha_buf[i] - beta);
    }
    for (std::size_t k = 0; k < dim; ++k) direction[k] = -q[k];
    if (dot(direction, res.grad) >= 0.0) {
      // stale curvature; restart from steepest descent
      pairs.clear();
      for (std::size_t k = 0; k < dim; ++k) direction[k] = -res.grad[k];
    }

    const LineSearchResult ls = wolfe_line_search(obj, res.theta, res.value, res.grad,
                                                  direction, schedule.wolfe_c1,
                                                  schedule.wolfe_c2, 50);
    if (!ls.success) {
      if (ls.step > 0.0 && ls.value < res.value) {
        for (std::size_t k = 0; k < dim; ++k) res.theta[k] += ls.step * direction[k];
        res.value = ls.value;
        res.grad = ls.grad;
        res.iterations = iter + 1;
        if (history) history->push_back(res.value);
      }
      res.line_search_failed = true;
      break;
    }

    Pair p;
    p.s.resize(dim);
    p.y.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      p.s[k] = ls.step * direction[k];
      p.y[k] = ls.grad[k] - res.grad[k];
      res.theta[k] += p.s[k];
    }
    res.value = ls.value;
    res.grad = ls.grad;
    res.iterations = iter + 1;
    if (history) history->push_back(res.value);

    const double sy = dot(p.s, p.y);
    if (sy > 1e-10 * norm2(p.s) * norm2(p.y)) {
      p.rho = 1.0 / sy;
      pairs.push_back(std::move(p));
      if (pairs.size() > schedule.lbfgs_memory) pairs.pop_front();
    }

    if (norm_inf(res.grad) < schedule.grad_tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

TrainResult train(const TrainingContext& ctx, const AugmentedModel& model0,
                  const TrainSchedule& schedule) {
  schedule.validate();
  const std::size_t nb = model0.theta_b.size();
  const std::size_t na = model0.mlp.theta.size();
  const Structure structure = model0.structure;

  Objective obj;
  obj.dim = nb + na;
  obj.eval = [&ctx, structure, nb, na, work_mlp = model0.mlp,
              work_tb = Vector(nb)](const Vector& th, Vector& grad) mutable {
    std::copy(th.begin(), th.begin() + static_cast<std::ptrdiff_t>(nb), work_tb.begin());
    std::copy(th.begin() + static_cast<std::ptrdiff_t>(nb), th.end(), work_mlp.theta.begin());
    const LossGrad lg = loss_and_grad(ctx, work_tb, work_mlp, structure);
    grad.resize(nb + na);
    std::copy(lg.grad_theta_b.begin(), lg.grad_theta_b.end(), grad.begin());
    std::copy(lg.grad_theta_a.begin(), lg.grad_theta_a.end(),
              grad.begin() + static_cast<std::ptrdiff_t>(nb));
    return lg.value;
  };

  Vector theta(obj.dim);
  std::copy(model0.theta_b.begin(), model0.theta_b.end(), theta.begin());
  std::copy(model0.mlp.theta.begin(), model0.mlp.theta.end(),
            theta.begin() + static_cast<std::ptrdiff_t>(nb));

  TrainResult out;
  std::vector<double> losses;
  if (schedule.adam_epochs > 0) {
    theta = adam_run(obj, std::move(theta), schedule, &losses);
    for (std::size_t i = 0; i < losses.size(); ++i) {
      out.history.push_back({i, "adam", losses[i]});
    }
  }
  if (schedule.lbfgs_iters > 0) {
    losses.clear();
    LbfgsResult lb = lbfgs_run(obj, std::move(theta), schedule, &losses);
    theta = std::move(lb.theta);
    out.line_search_failed = lb.line_search_failed;
    for (std::size_t i = 0; i < losses.size(); ++i) {
      out.history.push_back({i, "lbfgs", losses[i]});
    }
  }

  AugmentedModel model = model0;
  std::copy(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(nb),
            model.theta_b.begin());
  std::copy(theta.begin() + static_cast<std::ptrdiff_t>(nb), theta.end(),
            model.mlp.theta.begin());
  Vector g;
  out.final_loss = obj.eval(theta, g);
  out.model = freeze(ctx, std::move(model));
  return out;
}

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<HistoryEntry>& history) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  out << "iter,phase,loss\n";
  for (const HistoryEntry& h : history) {
    out << h.iter << "," << h.phase << "," << format_g17(h.loss) << "\n";
  }
  if (!out) throw std::ios_base::failure("failed writing " + path.string());
}

}  // namespace orthoaugm
