// Mixed-integer linear encoding of coherent-model search over a ground cGAP.
//
// The encoding unrolls the consequence operator for a fixed horizon t_hat.
// Real variables x[t][A] track the value of atom A after sweep t; z[t][i]
// tracks rule i's contribution during sweep t.  Binaries u (rule selection),
// v (condition gates), and y (choice-rule options) linearize the max, the
// condition thresholds, and the vertex choice.  With the final-sweep payoff
// rows included, feasible assignments correspond to choice vectors whose
// induced fixpoint satisfies the equilibrium condition, and the x[t_hat]
// slice is that fixpoint.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cgap/equilibria.hpp"
#include "cgap/game.hpp"
#include "cgap/model.hpp"

namespace cgap {

enum class VarKind : std::uint8_t { x, z, u, v, y, aux };

struct VarInfo {
  std::string name;
  VarKind kind = VarKind::aux;
  bool binary = false;
  double lo = 0.0;
  double hi = 1.0;
  std::int32_t t = -1;    // sweep index; -1 when not time-indexed
  std::int32_t ref = -1;  // atom id (x), rule index (z/u/v), instance index (y)
  std::int32_t sub = -1;  // condition position (v), option index (y)
};

struct LinTerm {
  std::int32_t var = -1;
  double coeff = 0.0;
};

enum class RowSense : std::uint8_t { ge, le, eq };

struct Row {
  std::vector<LinTerm> terms;
  RowSense sense = RowSense::ge;
  double rhs = 0.0;
};

// Auxiliary min/max aggregates introduced by query encodings.  `value_var`
// equals the min (resp. max) of `over`; `selectors` are indicator binaries,
// one per entry of `over`, summing to one.
enum class AuxKind : std::uint8_t { min_agg, max_agg };

struct AuxDef {
  AuxKind kind = AuxKind::min_agg;
  std::int32_t value_var = -1;
  std::vector<std::int32_t> selectors;
  std::vector<std::int32_t> over;
};

enum class SolveSense : std::uint8_t { feasibility, minimize, maximize };

struct ConstraintSystem {
  int t_hat = 0;
  bool payoff_rows = true;
  std::int32_t atom_count = 0;
  std::int32_t rule_count = 0;
  std::int32_t vc_count = 0;
  int vc_m = 0;

  std::vector<VarInfo> vars;
  std::vector<Row> rows;
  std::vector<LinTerm> objective;
  double objective_constant = 0.0;

  // Structural indexes (-1 where a variable is absent).
  std::vector<std::int32_t> x_vars;       // (t_hat+1) * atom_count
  std::vector<std::int32_t> z_vars;       // t_hat * rule_count, sweeps 1..t_hat
  std::vector<std::int32_t> u_vars;       // t_hat * rule_count
  std::vector<std::int32_t> v_gate_vars;  // t_hat * rule_count
  std::vector<std::int32_t> v_cond_vars;  // t_hat * |cond pool|
  std::vector<std::int32_t> m_vars;       // t_hat * rule_count (max linearization)
  std::vector<std::int32_t> w_vars;       // t_hat * |prop pool| (argmax binaries)
  std::vector<std::int32_t> g_vars;       // t_hat * rule_count (tipping gates)
  std::vector<std::int32_t> y_vars;       // vc_count * vc_m

  std::vector<AuxDef> aux;

  // Side rows the internal solver enforces after propagating a leaf (they are
  // also regular `rows` entries, so exports carry them).  Used for caller
  // constraints that do not take part in value derivation.
  std::vector<Row> checks;

  // Excluded option vectors (one entry per choice instance); maintained in
  // lockstep with the explicit no-good rows so the internal solver and an
  // exported LP agree.
  std::vector<std::vector<std::int8_t>> cuts;

  std::int32_t x_of(int t, AtomId a) const { return x_vars[static_cast<std::size_t>(t) * atom_count + a]; }
  std::int32_t z_of(int t, std::int32_t rule) const {
    return z_vars[static_cast<std::size_t>(t - 1) * rule_count + rule];
  }
  std::int32_t y_of(std::int32_t vc, int option) const {
    return y_vars[static_cast<std::size_t>(vc) * vc_m + option];
  }

  std::int32_t add_var(VarInfo vi);
  void add_row(std::vector<LinTerm> terms, RowSense sense, double rhs);
};

struct IlcOptions {
  bool payoff_rows = true;  // include the final-sweep equilibrium rows
};

// Builds the unrolled system for `t_hat` >= 1 sweeps.  Throws ValidationError
// when an annotation function has no linear encoding (indicator_sum) or when
// t_hat < 1.
ConstraintSystem build_ilc(const GroundProgram& gp, int t_hat, const IlcOptions& opts = {});

// Smallest horizon at which no choice vector changes any atom during the last
// sweep: steps the candidate by `delta`, then binary-searches the bracketing
// window.  Throws NonConvergenceError past horizon_cap(atom count).
int compute_t_hat(const GroundProgram& gp, int delta = 10);

struct MilpSolution {
  enum class Status : std::uint8_t { optimal, infeasible, cap_exceeded };
  Status status = Status::infeasible;
  std::vector<double> assignment;  // per ConstraintSystem var
  double objective = 0.0;
  State choice;  // selected option per choice instance
};

// Exact search over the y binaries: each option vector is propagated sweep by
// sweep, u/v/m/w/g are derived, and coupling conflicts prune the leaf.  For
// minimize/maximize every feasible leaf is scored; feasibility stops at the
// first (lexicographically smallest) one.
MilpSolution solve(const GroundProgram& gp, const ConstraintSystem& cs, SolveSense sense,
                   std::int64_t branch_cap = kEnumCap);

// Forbids one option vector: sum of its off-options plus complements of its
// on-options >= 1.
void add_no_good_cut(ConstraintSystem& cs, const State& s);

struct MilpEnumOptions {
  int delta = 10;
  std::optional<int> t_hat;  // skip the horizon search when pinned
  std::int64_t branch_cap = kEnumCap;
};

struct MilpEnumeration {
  std::vector<Solution> items;
  int t_hat = 0;
};

// Feasibility / cut loop: solve, record, exclude, repeat until infeasible.
MilpEnumeration enumerate_se_milp(const GroundProgram& gp, const MilpEnumOptions& opts = {});

// CPLEX LP text (Maximize/Minimize, Subject To, Bounds, Binary, End).
std::string export_lp(const ConstraintSystem& cs, SolveSense sense = SolveSense::maximize);

// Largest absolute violation over all rows (0 when feasible within fp noise);
// names the worst row via `first` when given.
double max_violation(const ConstraintSystem& cs, const std::vector<double>& asg,
                     std::string* first = nullptr);

// x[t_hat] slice of a feasible assignment as an interpretation over gp's atoms.
Interpretation solution_interpretation(const GroundProgram& gp, const ConstraintSystem& cs,
                                       const MilpSolution& sol);

}  // namespace cgap
