#pragma once

#include <stdexcept>
#include <string>

namespace orthoaugm {

/// Shape of an argument does not match the operand it is combined with.
class DimensionMismatch : public std::invalid_argument {
 public:
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// A value that must be finite is NaN or infinite.
class NonFinite : public std::runtime_error {
 public:
  explicit NonFinite(const std::string& what) : std::runtime_error(what) {}
};

/// Regressor matrix is (numerically) rank deficient, so the baseline
/// parameters are not identifiable from the given data.
class RankDeficient : public std::runtime_error {
 public:
  explicit RankDeficient(const std::string& what) : std::runtime_error(what) {}
};

/// Not enough raw samples to form a single lagged state.
class InsufficientData : public std::runtime_error {
 public:
  explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

/// Orthogonal-structure model used for test prediction before freeze().
class MissingThetaAux : public std::logic_error {
 public:
  explicit MissingThetaAux(const std::string& what) : std::logic_error(what) {}
};

/// Objective value or gradient became NaN/Inf during optimization.
class NonFiniteObjective : public std::runtime_error {
 public:
  explicit NonFiniteObjective(const std::string& what) : std::runtime_error(what) {}
};

/// A diagonal block of the stacked prediction-Jacobian Gram matrix is
/// rank deficient; the covariance estimate is undefined.
class SingularGram : public std::runtime_error {
 public:
  explicit SingularGram(const std::string& what) : std::runtime_error(what) {}
};

/// Noise calibration requested on a constant (zero-variance) signal.
class DegenerateSignal : public std::runtime_error {
 public:
  explicit DegenerateSignal(const std::string& what) : std::runtime_error(what) {}
};

/// D1 excitation mirrors the first half of the input, so it needs an even
/// sample count.
class OddLengthD1 : public std::invalid_argument {
 public:
  OddLengthD1() : std::invalid_argument("D1 requires even N") {}
};

}  // namespace orthoaugm
