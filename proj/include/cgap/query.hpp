// Estimation queries under range semantics: an aggregate over ground atom
// values, answered by the interval its value spans across all strong
// equilibria.  Three evaluation paths: enumerate everything (naive), read the
// two extremal equilibria of a two-sided independent-choice program
// (monotone), or optimize the aggregate over the unrolled constraint system
// (milp).
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cgap/equilibria.hpp"
#include "cgap/milp.hpp"
#include "cgap/model.hpp"

namespace cgap {

enum class Aggregate : std::uint8_t { sum, count, min, max, linear };

// A target is either a program atom or a choice atom c_<decision>(<vertex>)
// whose value is 1 exactly when that vertex selected the given option.
struct QueryTarget {
  AtomId atom = -1;
  std::int32_t vc = -1;
  int option = -1;
  bool is_choice() const { return atom < 0; }
};

struct QueryAuxVar {
  std::string name;
  bool binary = false;
  double lo = 0.0, hi = 1.0;
};

// One linear term of a side constraint; refers to the i-th target (aux=false)
// or the i-th auxiliary variable (aux=true).
struct QueryTerm {
  bool aux = false;
  std::int32_t index = -1;
  double coeff = 0.0;
};

struct QueryRow {
  std::vector<QueryTerm> terms;
  RowSense sense = RowSense::ge;
  double rhs = 0.0;
};

// f = k + c1^T targets + c2^T aux, with side constraints `cf`.
struct LinearQuerySpec {
  double k = 0.0;
  std::vector<double> c1;
  std::vector<QueryAuxVar> aux;
  std::vector<double> c2;
  std::vector<QueryRow> cf;
};

struct EstimationQuery {
  Aggregate agg = Aggregate::sum;
  std::vector<QueryTarget> targets;
  LinearQuerySpec linear;  // only read when agg == linear
};

// Name index for the engine-generated choice atoms, instance-major.
struct ChoiceAtoms {
  std::vector<std::string> names;  // size vcs * m
  std::map<std::string, std::pair<std::int32_t, int>> index;
};
ChoiceAtoms augment_choice_atoms(const GroundProgram& gp);

// sum/count/min/max are monotone; a linear spec is monotone when every
// coefficient is nonnegative.
bool monotone_query(const EstimationQuery& q);

// Value of one target under (model, state).  Pass state=nullptr to read the
// choice back from the model's satisfied pair; throws ValidationError when no
// pair is selected.
double target_value(const GroundProgram& gp, const QueryTarget& t, const Interpretation& i,
                    const State* state);

double eval_query(const GroundProgram& gp, const EstimationQuery& q, const Interpretation& i,
                  const State* state = nullptr);

enum class RangeStatus : std::uint8_t { exact, bounds_only, undefined };

struct RangeAnswer {
  RangeStatus status = RangeStatus::undefined;
  double glb = 0.0, lub = 0.0;
  std::optional<Solution> glb_witness, lub_witness;
  std::string method;
};

// Evaluates the query over every enumerated strong equilibrium.
RangeAnswer range_naive(const GroundProgram& gp, const EstimationQuery& q,
                        const EnumOptions& opts = {});

// Two-sided fast path: exact when all target predicates live on one side of
// the dependency split, outer bounds (bounds_only) when they mix.
RangeAnswer range_monotone_vic2(const GroundProgram& gp, const EstimationQuery& q);

struct MilpQueryOptions {
  int delta = 10;
  std::optional<int> t_hat;
  std::int64_t branch_cap = kEnumCap;
};

// Unrolled constraint system with the query lowered into its objective:
// sum/count add target variables, min/max expand to auxiliary selector
// encodings, linear adds its coefficients and side constraints.
ConstraintSystem build_query_system(const GroundProgram& gp, const EstimationQuery& q,
                                    const MilpQueryOptions& opts = {});

// Minimizes / maximizes the aggregate over the unrolled constraint system.
// min/max aggregates expand to auxiliary selector encodings; count targets
// must be choice atoms (their indicator binaries are summed directly).
RangeAnswer range_linear_milp(const GroundProgram& gp, const EstimationQuery& q,
                              const MilpQueryOptions& opts = {});

// Expands exact names and '*' glob patterns over program-atom and choice-atom
// names.  Each pattern expands in atom id order, then choice atoms; results
// concatenate per pattern with first occurrence kept.  A pattern matching
// nothing is an error.
std::vector<QueryTarget> resolve_targets(const GroundProgram& gp,
                                         const std::vector<std::string>& patterns);

// {"aggregate": "...", "targets": [...], "linear_spec": {k, c1, c2, aux,
// constraints}}; constraint terms are {"x": i, "coeff": c} over targets or
// {"y": j, "coeff": c} over auxiliaries.
EstimationQuery parse_query_json(const std::string& text, const GroundProgram& gp);

}  // namespace cgap
