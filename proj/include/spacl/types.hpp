#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace spacl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Shared numeric conventions.
inline constexpr double kRowSumTol = 1e-12;       // membership row sums
inline constexpr double kSymmetryTol = 1e-12;     // dense symmetry check
inline constexpr double kRankRelTol = 1e-10;      // singular values below rel tol count as zero
inline constexpr double kZeroThreshold = 1e-12;   // membership entry zeroing
inline constexpr double kConditionLimit = 1e12;   // corner matrix condition cap

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ValueError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace spacl
