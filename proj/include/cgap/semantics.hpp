#pragma once

// Fixpoint semantics: the one-step consequence operator, minimal models via
// iteration from bottom, the coherence transform, and the checks built on
// them (model / coherent model / strong equilibrium).

#include <vector>

#include "cgap/model.hpp"

namespace cgap {

// One application of the consequence operator: each atom is assigned the
// maximum, over rules whose conditions hold under `i`, of the rule function
// applied to the propagating body values under `i`. Atoms without an
// applicable rule map to 0. Vertex-choice instances play no part.
Interpretation tp_step(const GroundProgram& gp, const Interpretation& i);

// As tp_step, but writes into `out` (resetting it first). `out` must share
// the program's atom table and must not alias `i`.
void tp_step_into(const GroundProgram& gp, const Interpretation& i, Interpretation& out);

struct FixpointReport {
  Interpretation fixpoint;
  std::int64_t iterations = 0;  // operator applications performed
  double residual = 0.0;        // max per-atom change of the last application
  bool converged = false;
};

// Iterates the operator from bottom until the residual falls to kEpsFix or
// the iteration cap (fixpoint_iteration_cap) is reached.
FixpointReport minimal_model(const GroundProgram& gp);

// As minimal_model, but raises NonConvergenceError instead of returning an
// unconverged report.
Interpretation minimal_model_strict(const GroundProgram& gp);

// The coherence transform of `gp` under `i`: all plain rules are kept, the
// vertex-choice instances are dropped, and for every instance and option k
// with i(A_k) > 0 and i(A_k) = i(B_k) a bridge rule B_k <- A_k is added.
GroundProgram coherence_transform(const GroundProgram& gp, const Interpretation& i);

// Whether `i` is a coherent model: a model of `gp` that equals the minimal
// model of its own coherence transform. Raises NotAModelError when `i` is
// not a model of `gp` at all.
bool is_coherent_model(const GroundProgram& gp, const Interpretation& i);

// Whether `i` is a strong equilibrium: a coherent model where, for every
// vertex-choice instance, the summed decision value reaches the maximum
// utility value on offer.
bool is_strong_equilibrium(const GroundProgram& gp, const Interpretation& i);

// All three checks at once, plus the option each instance selects.
struct CheckReport {
  bool is_model = false;
  bool is_coherent = false;
  bool is_strong = false;
  std::vector<int> selection;  // per VC instance; -1 when unsatisfied
};
CheckReport check_interpretation(const GroundProgram& gp, const Interpretation& i);

}  // namespace cgap
