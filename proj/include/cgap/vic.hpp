#pragma once

// Predicate dependency analysis: programs whose two (or m) choice options
// never influence each other admit a polynomial strong-equilibrium search
// (one-directional improvement flips) and extremal bound models.

#include <string>
#include <utility>

#include "cgap/equilibria.hpp"

namespace cgap {

// Predicate-level dependency graph: an edge p2 -> p1 records that p2 occurs
// in the body of a rule whose head uses p1, or that p2 is the utility
// predicate paired with decision predicate p1 in the choice rule.
// Neighborhood templates contribute their body/edge predicates like rules.
struct DependencyGraph {
  std::vector<std::vector<PredId>> succ;
  std::vector<std::vector<PredId>> pred;
};

DependencyGraph dependency_graph(const Program& p);

struct VicClassification {
  bool vic = false;
  int m = 0;         // choice-rule arity
  int violated = 0;  // 0 none; 1 decision predicate in a rule head; 2 cross path
  std::string witness;
  std::vector<PredId> path;  // condition-2 witness path, head-side first
  // Pred^i: predicates that reach decision predicate i (reverse reachability,
  // including the decision predicate itself). Filled for every program.
  std::vector<std::vector<PredId>> pred_sets;
};

// Checks the two independence conditions: (1) no decision predicate heads a
// plain rule or template; (2) no dependency path from a decision predicate
// of option j to a utility predicate of option i != j.
VicClassification classify(const Program& p);

// Splits the induced program of state `s` into m parts: part i keeps the
// rules all of whose atoms use predicates in Pred^i. Requires a VIC program.
std::vector<GroundProgram> split_program(const GroundProgram& gp, const State& s);

// Improvement-flip search (two options). Starts every player on
// `default_action` (0 or 1); each round computes one shared induced fixpoint
// and flips every still-default player whose other-option utility strictly
// exceeds its current one; ties never flip. Flips are one-directional, so
// the loop ends after at most |V| rounds. Requires a VIC_2 program.
std::pair<State, Interpretation> find_se_vic2(const GroundProgram& gp, int default_action);

struct ExtremalModels {
  State s12, s21;          // all-default-0 / all-default-1 flip results
  Interpretation m12, m21; // their induced minimal models
  // Bound models for queries mixing the two sides: both sides at their
  // minimum resp. maximum (union of the matching split parts).
  Interpretation mixed_low, mixed_high;
  std::vector<std::vector<PredId>> pred_sets;
};

// `with_mixed=false` skips the two union-model computations.
ExtremalModels extremal_models(const GroundProgram& gp, bool with_mixed = true);

// Entailment of the annotated ground atom `atom:mu`: every strong
// equilibrium assigns the atom at least mu.
enum class EntailMethod { enumerate, vic2 };

struct EntailReport {
  bool entailed = false;
  bool vacuous = false;  // no strong equilibrium exists (enumerate only)
};

EntailReport entails(const GroundProgram& gp, AtomId atom, double mu, EntailMethod method,
                     const EnumOptions& opts = {});

}  // namespace cgap
