#pragma once

#include <cstdint>

namespace cgap {

// Tolerance used whenever two annotation values are compared for equality
// (vertex-choice satisfaction, model comparison, duplicate detection).
inline constexpr double kEpsEq = 1e-9;

// Fixpoint iteration stops once the largest per-atom change falls below this.
inline constexpr double kEpsFix = 1e-9;

// Offset used to express strict inequalities inside MILP rows.
inline constexpr double kEpsMilp = 1e-4;

// A MILP assignment is accepted when every row holds within this tolerance.
inline constexpr double kMilpFeasTol = 1e-7;

// Hard cap on enumerated choice vectors / solver branches.
inline constexpr std::int64_t kEnumCap = std::int64_t{1} << 20;

// Hard cap on ground rule instances produced by one non-ground rule.
inline constexpr std::int64_t kGroundCap = 10'000'000;

inline constexpr double kDefaultGameEps = 0.1;
inline constexpr double kDefaultTippingTau = 0.5;

// Fixpoint iteration cap: 10 * |atoms| + 100 sweeps.
inline std::int64_t fixpoint_iteration_cap(std::int64_t atom_count) {
  return 10 * atom_count + 100;
}

// Horizon search cap for the layered-constraint encoding: 10 * |atoms|.
inline std::int64_t horizon_cap(std::int64_t atom_count) {
  return 10 * atom_count;
}

inline bool value_eq(double a, double b) {
  double d = a - b;
  return d <= kEpsEq && d >= -kEpsEq;
}

}  // namespace cgap
