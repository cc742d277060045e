#pragma once

// Exhaustive enumeration of coherent models and strong equilibria over the
// m^n choice vectors, evaluated deterministically in lexicographic order
// (instance 0 is the most significant digit).

#include "cgap/game.hpp"

namespace cgap {

struct EnumOptions {
  std::int64_t cap = kEnumCap;  // refuse when m^n exceeds this
  int jobs = 1;                 // worker threads; output order is unaffected
  std::int64_t limit = -1;      // >= 0: truncate the returned list
};

struct Solution {
  State state;
  Interpretation model;
};

struct EnumerationResult {
  std::vector<Solution> items;
  std::int64_t explored = 0;  // choice vectors evaluated
};

// All choice vectors whose induced minimal model satisfies every
// vertex-choice instance. One entry per such vector; distinct vectors can
// carry identical models (see distinct_by_value).
EnumerationResult enumerate_coherent(const GroundProgram& gp, const EnumOptions& opts = {});

// The coherent entries that also meet the equilibrium condition: per
// instance, the summed decision value reaches the maximum utility.
EnumerationResult enumerate_strong_equilibria(const GroundProgram& gp, const EnumOptions& opts = {});

// First occurrence (in input order) per distinct model value vector,
// quantized at kEpsEq.
std::vector<Solution> distinct_by_value(const std::vector<Solution>& sols);

}  // namespace cgap
