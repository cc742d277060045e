#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cgap/constants.hpp"
#include "cgap/errors.hpp"

namespace cgap {

using PredId = std::int32_t;
using VertexId = std::int32_t;
using AtomId = std::int32_t;
using FnId = std::int32_t;
using VarId = std::int32_t;

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

enum class PredKind : std::uint8_t { vertex, edge };

// Role a vertex predicate plays relative to the program's vertex-choice rule.
enum class PredRole : std::uint8_t { plain, utility, decision };

struct Predicate {
  std::string name;
  PredKind kind = PredKind::vertex;
  PredRole role = PredRole::plain;
};

// ---------------------------------------------------------------------------
// Rule atoms (possibly containing variables)
// ---------------------------------------------------------------------------

struct Term {
  bool is_var = false;
  std::int32_t id = -1;  // VertexId when constant, VarId when variable

  static Term var(VarId v) { return Term{true, v}; }
  static Term vertex(VertexId v) { return Term{false, v}; }
  bool operator==(const Term& o) const = default;
};

struct Atom {
  PredId pred = -1;
  int arity = 0;
  Term args[2] = {};

  static Atom unary(PredId p, Term t) { return Atom{p, 1, {t, Term{}}}; }
  static Atom binary(PredId p, Term a, Term b) { return Atom{p, 2, {a, b}}; }
  bool ground() const {
    for (int i = 0; i < arity; ++i)
      if (args[i].is_var) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Annotation functions
// ---------------------------------------------------------------------------

// Every head annotation is normalized to one of these shapes over the rule's
// propagating body values. All shapes map [0,1]^n into [0,1].
enum class FnShape : std::uint8_t {
  linear,         // intercept + sum(coeffs[i] * x[i])
  maximum,        // max(x)
  average,        // sum(x) / n
  gated_max,      // max(x) if sum(x) >= threshold else 0
  indicator_sum,  // intercept + sum(coeffs[i] * [x[i] > 0]); may be non-monotone
};

struct AnnotationFn {
  std::string name;
  int arity = -1;  // -1: any arity
  FnShape shape = FnShape::linear;
  std::vector<double> coeffs;  // linear / indicator_sum
  double intercept = 0.0;      // linear / indicator_sum
  double threshold = 0.0;      // gated_max
  bool monotone = true;

  double eval(const double* x, int n) const;
  // Checks the declared arity, the [0,1] range promise, and that the
  // monotone flag is truthful for the shape.
  void validate() const;

  static AnnotationFn constant(double c);
  static AnnotationFn identity();
  static AnnotationFn linear_fn(std::vector<double> coeffs, double intercept = 0.0);
  static AnnotationFn max_fn(int arity = -1);
  static AnnotationFn avg_fn(int arity = -1);
  static AnnotationFn gated_max_fn(double tau, int arity = -1);
  static AnnotationFn indicator_sum_fn(std::vector<double> coeffs, double intercept);
};

class FunctionRegistry {
 public:
  FnId add(AnnotationFn fn);  // validates; name must be fresh if non-empty
  // Returns an existing structurally identical function or adds a new one.
  FnId intern(AnnotationFn fn);
  const AnnotationFn& at(FnId id) const { return fns_.at(static_cast<size_t>(id)); }
  std::optional<FnId> find(const std::string& name) const;
  std::int32_t size() const { return static_cast<std::int32_t>(fns_.size()); }

 private:
  std::vector<AnnotationFn> fns_;
  std::map<std::string, FnId> by_name_;
};

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

// Head annotation expression: a constant, a single annotation variable, or a
// registered function applied to annotation variables.
struct AnnotationExpr {
  enum class Kind : std::uint8_t { constant, variable, apply } kind = Kind::constant;
  double value = 0.0;        // constant
  VarId var = -1;            // variable
  FnId fn = -1;              // apply
  std::vector<VarId> args;   // apply

  static AnnotationExpr constant(double c) {
    AnnotationExpr e;
    e.kind = Kind::constant;
    e.value = c;
    return e;
  }
  static AnnotationExpr variable(VarId v) {
    AnnotationExpr e;
    e.kind = Kind::variable;
    e.var = v;
    return e;
  }
  static AnnotationExpr apply(FnId f, std::vector<VarId> a) {
    AnnotationExpr e;
    e.kind = Kind::apply;
    e.fn = f;
    e.args = std::move(a);
    return e;
  }
};

// Propagating body atom: its interpretation value is bound to an annotation
// variable consumed by the head expression.
struct BodyAtom {
  Atom atom;
  VarId ann = -1;
};

// Condition body atom: annotated with a constant; gates rule applicability.
struct CondAtom {
  Atom atom;
  double bound = 0.0;
};

struct GapRule {
  Atom head;
  AnnotationExpr ann;
  std::vector<BodyAtom> prop;
  std::vector<CondAtom> conds;
  std::vector<std::string> var_names;  // rule-scoped, indexed by VarId
  int line = 0;

  bool is_fact() const { return prop.empty() && conds.empty() && ann.kind == AnnotationExpr::Kind::constant; }
  bool ground() const;
};

// Neighborhood aggregation template, expanded per vertex by the grounder:
//   head(V) : agg{ Mu | edge(U,V):1, body(U):Mu } [if sum >= tau] .
struct NeighborTemplate {
  PredId head_pred = -1;
  PredId edge_pred = -1;
  PredId body_pred = -1;
  enum class Agg : std::uint8_t { avg, max } agg = Agg::avg;
  std::optional<double> tip;  // tipping threshold on the neighbor value sum
  int line = 0;
};

// Vertex-choice rule: b_1(X),...,b_m(X) <~ a_1(X),...,a_m(X).
struct VCRule {
  std::vector<PredId> heads;   // decision predicates b_i
  std::vector<PredId> bodies;  // utility predicates a_i
  int line = 0;
  int m() const { return static_cast<int>(heads.size()); }
};

// ---------------------------------------------------------------------------
// Program (symbolic form, as parsed or compiled)
// ---------------------------------------------------------------------------

class Program {
 public:
  PredId pred(const std::string& name, PredKind kind);  // interns; checks kind
  std::optional<PredId> find_pred(const std::string& name) const;
  const Predicate& predicate(PredId p) const { return preds_.at(static_cast<size_t>(p)); }
  std::int32_t pred_count() const { return static_cast<std::int32_t>(preds_.size()); }

  VertexId vertex(const std::string& name);  // interns
  std::optional<VertexId> find_vertex(const std::string& name) const;
  const std::string& vertex_name(VertexId v) const { return vertex_names_.at(static_cast<size_t>(v)); }
  std::int32_t vertex_count() const { return static_cast<std::int32_t>(vertex_names_.size()); }

  FunctionRegistry& functions() { return fns_; }
  const FunctionRegistry& functions() const { return fns_; }

  void add_rule(GapRule r);
  void add_template(NeighborTemplate t);
  void set_vc(VCRule vc);  // errors if one is already present

  const std::vector<GapRule>& rules() const { return rules_; }
  const std::vector<NeighborTemplate>& templates() const { return templates_; }
  const std::optional<VCRule>& vc() const { return vc_; }

  // Full structural validation: exactly one VC rule, role consistency,
  // annotation ranges, variable binding discipline, edge predicates only in
  // facts and bodies.
  void validate() const;

 private:
  void check_atom(const Atom& a) const;

  std::vector<Predicate> preds_;
  std::map<std::string, PredId> pred_by_name_;
  std::vector<std::string> vertex_names_;
  std::map<std::string, VertexId> vertex_by_name_;
  FunctionRegistry fns_;
  std::vector<GapRule> rules_;
  std::vector<NeighborTemplate> templates_;
  std::optional<VCRule> vc_;
};

// ---------------------------------------------------------------------------
// Social network
// ---------------------------------------------------------------------------

struct SnVertexLabel {
  std::string vertex;
  std::string pred;
  double value = 1.0;
};

struct SnEdge {
  std::string src;
  std::string dst;
  std::string pred;
  double weight = 1.0;
};

struct SocialNetwork {
  std::vector<std::string> vertices;  // in first-seen order; unique
  std::vector<SnVertexLabel> labels;
  std::vector<SnEdge> edges;

  void add_vertex(const std::string& name);
  bool has_vertex(const std::string& name) const;

 private:
  std::map<std::string, bool> seen_;
};

// Appends the network's fact base to `prog` (interning predicates and
// vertices) and returns the facts: one q(v):value fact per vertex label and
// one ep(u,v):w fact per edge.
std::vector<GapRule> sn_to_facts(const SocialNetwork& sn, Program& prog);

// ---------------------------------------------------------------------------
// Ground form
// ---------------------------------------------------------------------------

struct GroundAtom {
  PredId pred = -1;
  VertexId u = -1;  // first argument
  VertexId v = -1;  // second argument (edge atoms only)
  bool operator==(const GroundAtom& o) const = default;
};

class AtomTable {
 public:
  AtomId intern(GroundAtom a);
  std::optional<AtomId> find(GroundAtom a) const;
  const GroundAtom& at(AtomId id) const { return atoms_.at(static_cast<size_t>(id)); }
  std::int32_t size() const { return static_cast<std::int32_t>(atoms_.size()); }
  std::string name(AtomId id, const Program& prog) const;

 private:
  static std::uint64_t key(const GroundAtom& a);
  std::vector<GroundAtom> atoms_;
  std::unordered_map<std::uint64_t, AtomId> index_;
};

struct GroundCond {
  AtomId atom = -1;
  double bound = 0.0;
};

// Provenance tag for ground rules.
enum class RuleOrigin : std::uint8_t { source, tmpl, bridge, synthetic };

struct GroundRule {
  AtomId head = -1;
  FnId fn = -1;
  std::uint32_t prop_begin = 0, prop_end = 0;  // into GroundProgram::prop_pool
  std::uint32_t cond_begin = 0, cond_end = 0;  // into GroundProgram::cond_pool
  RuleOrigin origin = RuleOrigin::source;
  std::int32_t src = -1;  // index of the originating symbolic rule/template
};

struct VcInstance {
  VertexId v = -1;
  std::vector<AtomId> heads;   // b_i(v)
  std::vector<AtomId> bodies;  // a_i(v)
  int m() const { return static_cast<int>(heads.size()); }
};

class Interpretation;

struct GroundProgram {
  std::shared_ptr<const Program> source;  // naming, predicates
  std::shared_ptr<AtomTable> atoms;
  FunctionRegistry fns;
  std::vector<GroundRule> rules;
  std::vector<AtomId> prop_pool;
  std::vector<GroundCond> cond_pool;
  std::vector<VcInstance> vcs;

  // Derived indexes (rebuild_index).
  std::vector<std::uint32_t> rules_of_off;  // CSR offsets, size atoms+1
  std::vector<std::uint32_t> rules_of_idx;
  // Per atom: packed (vc_index << 8 | option) or -1.
  std::vector<std::int32_t> vc_head_of;
  std::vector<std::int32_t> vc_body_of;

  void rebuild_index();
  bool has_vc() const { return !vcs.empty(); }
  std::int32_t atom_count() const { return atoms->size(); }
  std::string atom_name(AtomId id) const { return atoms->name(id, *source); }
  std::optional<AtomId> find_atom_by_name(const std::string& name) const;

  // Rule body accessors.
  const AtomId* prop(const GroundRule& r) const { return prop_pool.data() + r.prop_begin; }
  int prop_size(const GroundRule& r) const { return static_cast<int>(r.prop_end - r.prop_begin); }
  const GroundCond* cond(const GroundRule& r) const { return cond_pool.data() + r.cond_begin; }
  int cond_size(const GroundRule& r) const { return static_cast<int>(r.cond_end - r.cond_begin); }

  // Appends a ground rule with the given body; returns its index.
  std::int32_t push_rule(AtomId head, FnId fn, const std::vector<AtomId>& prop,
                         const std::vector<GroundCond>& conds,
                         RuleOrigin origin = RuleOrigin::source, std::int32_t src = -1);
};

// ---------------------------------------------------------------------------
// Interpretations and the [0,1]-lattice
// ---------------------------------------------------------------------------

class Interpretation {
 public:
  Interpretation() = default;
  explicit Interpretation(std::shared_ptr<const AtomTable> atoms)
      : atoms_(std::move(atoms)), v_(atoms_ ? static_cast<size_t>(atoms_->size()) : 0, 0.0) {}

  static Interpretation bottom(const GroundProgram& gp) { return Interpretation(gp.atoms); }

  double operator[](AtomId a) const { return v_[static_cast<size_t>(a)]; }
  double& operator[](AtomId a) { return v_[static_cast<size_t>(a)]; }
  std::size_t size() const { return v_.size(); }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }
  const std::shared_ptr<const AtomTable>& atom_table() const { return atoms_; }

  bool compatible(const Interpretation& o) const { return atoms_ == o.atoms_ && v_.size() == o.v_.size(); }

 private:
  std::shared_ptr<const AtomTable> atoms_;
  std::vector<double> v_;
};

// Pointwise lattice operations; arguments must share an atom table.
Interpretation meet(const Interpretation& a, const Interpretation& b);
Interpretation join(const Interpretation& a, const Interpretation& b);
bool leq(const Interpretation& a, const Interpretation& b);           // a <= b pointwise
bool approx_equal(const Interpretation& a, const Interpretation& b);  // within kEpsEq

// ---------------------------------------------------------------------------
// Satisfaction
// ---------------------------------------------------------------------------

// Annotated atom A:mu.
bool satisfies(const Interpretation& i, AtomId atom, double mu);

// Ground GAP rule: either a condition fails, or the head is at least the
// head function applied to the propagating body values.
bool satisfies(const Interpretation& i, const GroundProgram& gp, const GroundRule& r);

// Ground vertex-choice instance: some option i has I(B_i) = I(A_i) (within
// tolerance) while every other option's decision atom is 0. The chosen pair
// may be zero-valued; utilities of non-chosen options are unconstrained.
bool satisfies(const Interpretation& i, const VcInstance& vc);

// Whole ground program (all rules and all VC instances).
bool satisfies(const Interpretation& i, const GroundProgram& gp);

// The option index the VC instance selects under `i`, if `i` satisfies the
// instance: the unique option with a positive matched pair, or, when every
// decision atom is 0, the smallest option whose pair matches.
std::optional<int> selected_option(const Interpretation& i, const VcInstance& vc);

}  // namespace cgap
