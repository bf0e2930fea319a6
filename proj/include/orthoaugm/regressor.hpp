#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "orthoaugm/linalg.hpp"

namespace orthoaugm {

/// Lag structure of the input-output model. The state for sample k stacks
/// the n_a most recent outputs (newest first) followed by the current input
/// and its n_b most recent predecessors (newest first):
///   x_k = [y_{k-1}, ..., y_{k-n_a}, u_k, u_{k-1}, ..., u_{k-n_b}]
struct LagSpec {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::size_t n_u = 1;
  std::size_t n_y = 1;

  std::size_t state_dim() const { return n_a * n_y + (n_b + 1) * n_u; }
  std::size_t max_lag() const { return n_a > n_b ? n_a : n_b; }
  void validate() const;
};

/// Raw input/output sequences plus the lag specification that turns them
/// into regression samples.
struct Dataset {
  std::vector<Vector> inputs;   // each of length lag.n_u
  std::vector<Vector> outputs;  // each of length lag.n_y
  LagSpec lag;

  std::size_t raw_count() const { return inputs.size(); }
  /// Samples with a full lag window: N = N_raw - max(n_a, n_b).
  std::size_t usable_count() const;
};

struct Sample {
  Vector x;
  Vector y;
};

/// Assembles the lagged state vectors. Rows without a full history window
/// are dropped, not zero-padded. Throws InsufficientData when no sample has
/// a complete window.
std::vector<Sample> build_states(const Dataset& ds);

/// One scalar feature of the state vector. Either the constant 1 or a
/// monomial coord^power.
struct Feature {
  std::string name;
  bool constant = false;
  std::size_t coord = 0;
  int power = 1;

  double eval(const Vector& x) const;
};

/// Ordered list of named scalar features defining the linear-in-the-
/// parameters baseline y = phi(x) theta_b. output_map[j] is the output
/// channel fed by feature j (all zero, the identity map, when n_y == 1).
struct BaselineBasis {
  std::vector<Feature> features;
  std::vector<std::size_t> output_map;
  std::size_t n_outputs = 1;

  std::size_t n_theta_b() const { return features.size(); }
  std::vector<std::string> names() const;

  /// phi(x): n_outputs x n_theta_b feature matrix at a single state.
  Matrix eval(const Vector& x) const;

  /// Parses feature names against a fixed catalog:
  ///   "1"          constant
  ///   "x<i>"       raw state coordinate i
  ///   "x<i>^<p>"   monomial in one state coordinate
  ///   "u" / "u^p"  newest input, first channel (alias for the x form)
  ///   "y<j>"       output lag j, first channel (alias for the x form)
  static BaselineBasis parse(const std::vector<std::string>& names, const LagSpec& lag);
};

/// Stacks phi(x_k) over all samples: (N * n_y) rows, n_theta_b columns.
/// Throws NonFinite if a feature evaluates to NaN/Inf.
Matrix assemble_phi(const BaselineBasis& basis, const std::vector<Sample>& states);

/// Dataset CSV: header `k,u_0..u_{nu-1},y_0..y_{ny-1}`, one row per raw
/// sample, 17 significant digits (doubles round-trip exactly).
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds);

/// Reads a dataset CSV written by write_dataset_csv. Column counts must
/// match lag.n_u and lag.n_y; the lag orders themselves are not stored in
/// the CSV and are supplied by the caller.
Dataset read_dataset_csv(const std::filesystem::path& path, const LagSpec& lag);

/// Formats a double with 17 significant digits ("%.17g").
std::string format_g17(double v);

}  // namespace orthoaugm
