#include "orthoaugm/mlp.hpp"

#include <cmath>
#include <string>

#include "orthoaugm/errors.hpp"
#include "orthoaugm/rng.hpp"

namespace orthoaugm {

std::size_t MlpSpec::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    n += (layer_sizes[l] + 1) * layer_sizes[l + 1];
  }
  return n;
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) {
    throw DimensionMismatch("MlpSpec: need at least input and output sizes");
  }
  for (std::size_t s : layer_sizes) {
    if (s < 1) throw DimensionMismatch("MlpSpec: all layer sizes must be >= 1");
  }
}

std::size_t MlpParams::layer_offset(std::size_t l) const {
  std::size_t off = 0;
  for (std::size_t i = 0; i < l; ++i) {
    off += (spec.layer_sizes[i] + 1) * spec.layer_sizes[i + 1];
  }
  return off;
}

MlpParams xavier_init(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  MlpParams p;
  p.spec = spec;
  p.theta.assign(spec.param_count(), 0.0);
  Rng rng(seed);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const std::size_t fan_in = spec.layer_sizes[l];
    const std::size_t fan_out = spec.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < fan_out * fan_in; ++i) {
      p.theta[off + i] = rng.uniform(-limit, limit);
    }
    off += fan_out * fan_in + fan_out;  // biases stay zero
  }
  return p;
}

namespace {

// One affine layer + optional tanh: out = act(W in + b) with parameters at
// theta[off..]. Weight rows are contiguous per output unit.
void layer_forward(const double* theta, std::size_t fan_in, std::size_t fan_out,
                   const double* in, double* out, bool hidden) {
  const double* bias = theta + fan_out * fan_in;
  for (std::size_t o = 0; o < fan_out; ++o) {
    const double* w = theta + o * fan_in;
    double s = bias[o];
    for (std::size_t i = 0; i < fan_in; ++i) s += w[i] * in[i];
    out[o] = hidden ? std::tanh(s) : s;
  }
}

}  // namespace

Vector forward(const MlpParams& p, const Vector& x) {
  if (x.size() != p.spec.input_dim()) {
    throw DimensionMismatch("forward: input dimension mismatch");
  }
  Vector cur = x;
  Vector next;
  std::size_t off = 0;
  const std::size_t layers = p.spec.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t fan_in = p.spec.layer_sizes[l];
    const std::size_t fan_out = p.spec.layer_sizes[l + 1];
    next.assign(fan_out, 0.0);
    layer_forward(p.theta.data() + off, fan_in, fan_out, cur.data(), next.data(),
                  l + 1 < layers);
    cur.swap(next);
    off += (fan_in + 1) * fan_out;
  }
  return cur;
}

Vector forward_batch(const MlpParams& p, const std::vector<Sample>& states) {
  MlpBatchCache cache;
  return forward_batch_cached(p, states, cache);
}

Vector forward_batch_cached(const MlpParams& p, const std::vector<Sample>& states,
                            MlpBatchCache& cache) {
  const std::size_t n = states.size();
  const std::size_t n_y = p.spec.output_dim();
  const std::size_t layers = p.spec.layer_count();
  cache.activations.assign(layers + 1, Vector());
  for (std::size_t l = 0; l <= layers; ++l) {
    cache.activations[l].assign(n * p.spec.layer_sizes[l], 0.0);
  }
  Vector out(n * n_y, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const Vector& x = states[k].x;
    if (x.size() != p.spec.input_dim()) {
      throw DimensionMismatch("forward_batch: state dimension mismatch at sample " +
                              std::to_string(k));
    }
    double* a0 = cache.activations[0].data() + k * x.size();
    for (std::size_t i = 0; i < x.size(); ++i) a0[i] = x[i];
    std::size_t off = 0;
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t fan_in = p.spec.layer_sizes[l];
      const std::size_t fan_out = p.spec.layer_sizes[l + 1];
      const double* in = cache.activations[l].data() + k * fan_in;
      double* o = cache.activations[l + 1].data() + k * fan_out;
      layer_forward(p.theta.data() + off, fan_in, fan_out, in, o, l + 1 < layers);
      off += (fan_in + 1) * fan_out;
    }
    const double* top = cache.activations[layers].data() + k * n_y;
    for (std::size_t i = 0; i < n_y; ++i) out[k * n_y + i] = top[i];
  }
  return out;
}

Vector backprop_cached(const MlpParams& p, const std::vector<Sample>& states,
                       const Vector& upstream, const MlpBatchCache& cache) {
  const std::size_t n = states.size();
  const std::size_t n_y = p.spec.output_dim();
  if (upstream.size() != n * n_y) {
    throw DimensionMismatch("backprop: upstream length mismatch");
  }
  const std::size_t layers = p.spec.layer_count();
  Vector grad(p.theta.size(), 0.0);
  Vector delta, delta_prev;
  for (std::size_t k = 0; k < n; ++k) {
    delta.assign(upstream.begin() + static_cast<std::ptrdiff_t>(k * n_y),
                 upstream.begin() + static_cast<std::ptrdiff_t>((k + 1) * n_y));
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t fan_in = p.spec.layer_sizes[l];
      const std::size_t fan_out = p.spec.layer_sizes[l + 1];
      const std::size_t off = p.layer_offset(l);
      const double* in = cache.activations[l].data() + k * fan_in;
      double* gw = grad.data() + off;
      double* gb = grad.data() + off + fan_out * fan_in;
      for (std::size_t o = 0; o < fan_out; ++o) {
        const double d = delta[o];
        double* row = gw + o * fan_in;
        for (std::size_t i = 0; i < fan_in; ++i) row[i] += d * in[i];
        gb[o] += d;
      }
      if (l > 0) {
        // delta_prev = W^T delta, then through tanh of layer l's input.
        delta_prev.assign(fan_in, 0.0);
        const double* w = p.theta.data() + off;
        for (std::size_t o = 0; o < fan_out; ++o) {
          const double d = delta[o];
          const double* row = w + o * fan_in;
          for (std::size_t i = 0; i < fan_in; ++i) delta_prev[i] += row[i] * d;
        }
        for (std::size_t i = 0; i < fan_in; ++i) {
          const double a = in[i];
          delta_prev[i] *= 1.0 - a * a;  // tanh'(z) = 1 - tanh(z)^2
        }
        delta.swap(delta_prev);
      }
    }
  }
  return grad;
}

Vector backprop(const MlpParams& p, const std::vector<Sample>& states, const Vector& upstream) {
  MlpBatchCache cache;
  forward_batch_cached(p, states, cache);
  return backprop_cached(p, states, upstream, cache);
}

Matrix jacobian_params(const MlpParams& p, const Vector& x) {
  const std::size_t n_y = p.spec.output_dim();
  std::vector<Sample> one(1);
  one[0].x = x;
  one[0].y = Vector(n_y, 0.0);
  MlpBatchCache cache;
  forward_batch_cached(p, one, cache);
  Matrix jac(n_y, p.theta.size());
  Vector seed(n_y, 0.0);
  for (std::size_t c = 0; c < n_y; ++c) {
    seed.assign(n_y, 0.0);
    seed[c] = 1.0;
    const Vector row = backprop_cached(p, one, seed, cache);
    for (std::size_t j = 0; j < row.size(); ++j) jac(c, j) = row[j];
  }
  return jac;
}

}  // namespace orthoaugm
