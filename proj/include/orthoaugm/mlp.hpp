#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "orthoaugm/linalg.hpp"
#include "orthoaugm/regressor.hpp"

namespace orthoaugm {

/// Fully connected feedforward network: tanh on hidden layers, identity on
/// the output layer. layer_sizes = [input_dim, hidden..., output_dim];
/// hidden layers may be absent, in which case the network is affine.
struct MlpSpec {
  std::vector<std::size_t> layer_sizes;

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return layer_sizes.size() - 1; }

  /// Total parameter count: sum over layers of (fan_in + 1) * fan_out.
  std::size_t param_count() const;

  void validate() const;
};

/// Flat parameter vector plus its shape. Layout per layer: weight matrix
/// (fan_out x fan_in, row-major) followed by the bias vector. Flatten and
/// unflatten are index arithmetic only, so round-trips are lossless.
struct MlpParams {
  MlpSpec spec;
  Vector theta;

  /// Offset of layer l's weight block in theta.
  std::size_t layer_offset(std::size_t l) const;
};

/// Glorot-uniform initialization: weights uniform on +-sqrt(6/(fan_in +
/// fan_out)), biases zero. Deterministic for a given seed.
MlpParams xavier_init(const MlpSpec& spec, std::uint64_t seed);

Vector forward(const MlpParams& p, const Vector& x);

/// Concatenation of forward() over the samples, in sample order.
Vector forward_batch(const MlpParams& p, const std::vector<Sample>& states);

/// Vector-Jacobian product: sum_k J_f(x_k)^T upstream_k where upstream is
/// the stacked (N * n_y) seed vector.
Vector backprop(const MlpParams& p, const std::vector<Sample>& states, const Vector& upstream);

/// Jacobian of the network output w.r.t. the flat parameters at one input:
/// n_y rows, param_count columns.
Matrix jacobian_params(const MlpParams& p, const Vector& x);

/// Per-sample hidden activations cached by forward_batch_cached so a
/// following backward pass does not re-evaluate tanh.
struct MlpBatchCache {
  std::vector<Vector> activations;  // per layer boundary, concatenated over samples
};

Vector forward_batch_cached(const MlpParams& p, const std::vector<Sample>& states,
                            MlpBatchCache& cache);

Vector backprop_cached(const MlpParams& p, const std::vector<Sample>& states,
                       const Vector& upstream, const MlpBatchCache& cache);

}  // namespace orthoaugm
