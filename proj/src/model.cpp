#include "cgap/model.hpp"

#include <algorithm>
#include <cmath>

namespace cgap {

// ---------------------------------------------------------------------------
// AnnotationFn
// ---------------------------------------------------------------------------

double AnnotationFn::eval(const double* x, int n) const {
  switch (shape) {
    case FnShape::linear: {
      double s = intercept;
      for (int i = 0; i < n; ++i) s += coeffs[static_cast<size_t>(i)] * x[i];
      return s;
    }
    case FnShape::maximum: {
      double m = 0.0;
      for (int i = 0; i < n; ++i) m = std::max(m, x[i]);
      return m;
    }
    case FnShape::average: {
      if (n == 0) return 0.0;
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += x[i];
      return s / n;
    }
    case FnShape::gated_max: {
      double s = 0.0, m = 0.0;
      for (int i = 0; i < n; ++i) {
        s += x[i];
        m = std::max(m, x[i]);
      }
      return s >= threshold - kEpsEq ? m : 0.0;
    }
    case FnShape::indicator_sum: {
      double s = intercept;
      for (int i = 0; i < n; ++i)
        if (x[i] > kEpsEq) s += coeffs[static_cast<size_t>(i)];
      return std::min(1.0, std::max(0.0, s));
    }
  }
  return 0.0;
}

void AnnotationFn::validate() const {
  auto fail = [&](const std::string& why) {
    throw ValidationError("annotation function '" + name + "': " + why);
  };
  switch (shape) {
    case FnShape::linear: {
      if (arity >= 0 && static_cast<int>(coeffs.size()) != arity)
        fail("coefficient count does not match arity");
      double hi = intercept, lo = intercept;
      for (double c : coeffs) {
        if (c < 0.0) fail("linear coefficients must be nonnegative");
        hi += c;
      }
      if (lo < -1e-12 || hi > 1.0 + 1e-12) fail("range leaves [0,1]");
      if (!monotone) fail("linear functions are monotone; flag must be set");
      break;
    }
    case FnShape::maximum:
    case FnShape::average:
      if (!monotone) fail("aggregate is monotone; flag must be set");
      break;
    case FnShape::gated_max:
      if (threshold < 0.0) fail("tipping threshold must be nonnegative");
      if (!monotone) fail("gated max is monotone; flag must be set");
      break;
    case FnShape::indicator_sum: {
      if (arity >= 0 && static_cast<int>(coeffs.size()) != arity)
        fail("coefficient count does not match arity");
      // Range is clamped in eval; nothing further to check here.
      break;
    }
  }
}

AnnotationFn AnnotationFn::constant(double c) {
  AnnotationFn f;
  f.shape = FnShape::linear;
  f.arity = 0;
  f.intercept = c;
  return f;
}

AnnotationFn AnnotationFn::identity() {
  AnnotationFn f;
  f.shape = FnShape::linear;
  f.arity = 1;
  f.coeffs = {1.0};
  return f;
}

AnnotationFn AnnotationFn::linear_fn(std::vector<double> coeffs, double intercept) {
  AnnotationFn f;
  f.shape = FnShape::linear;
  f.arity = static_cast<int>(coeffs.size());
  f.coeffs = std::move(coeffs);
  f.intercept = intercept;
  return f;
}

AnnotationFn AnnotationFn::max_fn(int arity) {
  AnnotationFn f;
  f.shape = FnShape::maximum;
  f.arity = arity;
  return f;
}

AnnotationFn AnnotationFn::avg_fn(int arity) {
  AnnotationFn f;
  f.shape = FnShape::average;
  f.arity = arity;
  return f;
}

AnnotationFn AnnotationFn::gated_max_fn(double tau, int arity) {
  AnnotationFn f;
  f.shape = FnShape::gated_max;
  f.arity = arity;
  f.threshold = tau;
  return f;
}

AnnotationFn AnnotationFn::indicator_sum_fn(std::vector<double> coeffs, double intercept) {
  AnnotationFn f;
  f.shape = FnShape::indicator_sum;
  f.arity = static_cast<int>(coeffs.size());
  f.coeffs = std::move(coeffs);
  f.intercept = intercept;
  f.monotone = std::all_of(f.coeffs.begin(), f.coeffs.end(), [](double c) { return c >= 0.0; });
  return f;
}

// ---------------------------------------------------------------------------
// FunctionRegistry
// ---------------------------------------------------------------------------

FnId FunctionRegistry::add(AnnotationFn fn) {
  fn.validate();
  if (!fn.name.empty()) {
    if (by_name_.count(fn.name))
      throw ValidationError("annotation function '" + fn.name + "' declared twice");
    by_name_[fn.name] = static_cast<FnId>(fns_.size());
  }
  fns_.push_back(std::move(fn));
  return static_cast<FnId>(fns_.size() - 1);
}

static bool fn_equal(const AnnotationFn& a, const AnnotationFn& b) {
  return a.shape == b.shape && a.arity == b.arity && a.coeffs == b.coeffs &&
         a.intercept == b.intercept && a.threshold == b.threshold && a.monotone == b.monotone;
}

FnId FunctionRegistry::intern(AnnotationFn fn) {
  for (size_t i = 0; i < fns_.size(); ++i)
    if (fns_[i].name.empty() && fn.name.empty() && fn_equal(fns_[i], fn))
      return static_cast<FnId>(i);
  return add(std::move(fn));
}

std::optional<FnId> FunctionRegistry::find(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// GapRule
// ---------------------------------------------------------------------------

bool GapRule::ground() const {
  if (!head.ground()) return false;
  for (const auto& b : prop)
    if (!b.atom.ground()) return false;
  for (const auto& c : conds)
    if (!c.atom.ground()) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Program
// ---------------------------------------------------------------------------

PredId Program::pred(const std::string& name, PredKind kind) {
  auto it = pred_by_name_.find(name);
  if (it != pred_by_name_.end()) {
    if (preds_[static_cast<size_t>(it->second)].kind != kind)
      throw ValidationError("predicate '" + name + "' used with inconsistent arity");
    return it->second;
  }
  PredId id = static_cast<PredId>(preds_.size());
  preds_.push_back(Predicate{name, kind, PredRole::plain});
  pred_by_name_[name] = id;
  return id;
}

std::optional<PredId> Program::find_pred(const std::string& name) const {
  auto it = pred_by_name_.find(name);
  if (it == pred_by_name_.end()) return std::nullopt;
  return it->second;
}

VertexId Program::vertex(const std::string& name) {
  auto it = vertex_by_name_.find(name);
  if (it != vertex_by_name_.end()) return it->second;
  VertexId id = static_cast<VertexId>(vertex_names_.size());
  vertex_names_.push_back(name);
  vertex_by_name_[name] = id;
  return id;
}

std::optional<VertexId> Program::find_vertex(const std::string& name) const {
  auto it = vertex_by_name_.find(name);
  if (it == vertex_by_name_.end()) return std::nullopt;
  return it->second;
}

void Program::check_atom(const Atom& a) const {
  const Predicate& p = predicate(a.pred);
  int want = p.kind == PredKind::edge ? 2 : 1;
  if (a.arity != want)
    throw ValidationError("atom over '" + p.name + "' has arity " + std::to_string(a.arity) +
                          ", predicate expects " + std::to_string(want));
}

void Program::add_rule(GapRule r) {
  check_atom(r.head);
  for (const auto& b : r.prop) check_atom(b.atom);
  for (const auto& c : r.conds) check_atom(c.atom);
  rules_.push_back(std::move(r));
}

void Program::add_template(NeighborTemplate t) {
  if (predicate(t.head_pred).kind != PredKind::vertex ||
      predicate(t.body_pred).kind != PredKind::vertex)
    throw ValidationError("neighbor template head/body must be vertex predicates");
  if (predicate(t.edge_pred).kind != PredKind::edge)
    throw ValidationError("neighbor template edge predicate must be binary");
  templates_.push_back(t);
}

void Program::set_vc(VCRule vc) {
  if (vc_) throw ValidationError("program declares more than one vertex-choice rule");
  if (vc.heads.empty() || vc.heads.size() != vc.bodies.size())
    throw ValidationError("vertex-choice rule must pair one decision per utility predicate");
  for (size_t i = 0; i < vc.heads.size(); ++i) {
    for (size_t j = i + 1; j < vc.heads.size(); ++j) {
      if (vc.heads[i] == vc.heads[j])
        throw ValidationError("duplicate decision predicate in vertex-choice rule");
      if (vc.bodies[i] == vc.bodies[j])
        throw ValidationError("duplicate utility predicate in vertex-choice rule");
    }
  }
  for (PredId h : vc.heads)
    for (PredId b : vc.bodies)
      if (h == b)
        throw ValidationError("predicate appears on both sides of the vertex-choice rule");
  for (PredId p : vc.heads) {
    if (predicate(p).kind != PredKind::vertex)
      throw ValidationError("vertex-choice predicates must be unary");
    preds_[static_cast<size_t>(p)].role = PredRole::decision;
  }
  for (PredId p : vc.bodies) {
    if (predicate(p).kind != PredKind::vertex)
      throw ValidationError("vertex-choice predicates must be unary");
    preds_[static_cast<size_t>(p)].role = PredRole::utility;
  }
  vc_ = std::move(vc);
}

static void check_annotation_range(double v, int line) {
  if (!(v >= 0.0 && v <= 1.0))
    throw ValidationError("annotation " + std::to_string(v) + " outside [0,1] (line " +
                          std::to_string(line) + ")");
}

void Program::validate() const {
  if (!vc_) throw ValidationError("program has no vertex-choice rule");
  for (const auto& r : rules_) {
    check_annotation_range(r.ann.kind == AnnotationExpr::Kind::constant ? r.ann.value : 0.0, r.line);
    for (const auto& c : r.conds) check_annotation_range(c.bound, r.line);
    // Edge predicates may be derived only by facts.
    if (predicate(r.head.pred).kind == PredKind::edge && !(r.prop.empty() && r.conds.empty()))
      throw ValidationError("edge predicate '" + predicate(r.head.pred).name +
                            "' derived by a rule with a body (line " + std::to_string(r.line) + ")");
    // Annotation-variable discipline: each propagating atom binds a distinct
    // variable, and the head expression consumes exactly those variables.
    std::vector<VarId> bound;
    for (const auto& b : r.prop) {
      if (std::find(bound.begin(), bound.end(), b.ann) != bound.end())
        throw ValidationError("annotation variable bound twice in one rule body (line " +
                              std::to_string(r.line) + ")");
      bound.push_back(b.ann);
    }
    std::vector<VarId> used;
    switch (r.ann.kind) {
      case AnnotationExpr::Kind::constant:
        break;
      case AnnotationExpr::Kind::variable:
        used.push_back(r.ann.var);
        break;
      case AnnotationExpr::Kind::apply: {
        const AnnotationFn& f = fns_.at(r.ann.fn);
        if (f.arity >= 0 && f.arity != static_cast<int>(r.ann.args.size()))
          throw ValidationError("function '" + f.name + "' applied with wrong arity (line " +
                                std::to_string(r.line) + ")");
        used = r.ann.args;
        break;
      }
    }
    for (VarId v : used)
      if (std::find(bound.begin(), bound.end(), v) == bound.end())
        throw ValidationError("head annotation uses an unbound variable (line " +
                              std::to_string(r.line) + ")");
    for (VarId v : bound)
      if (std::find(used.begin(), used.end(), v) == used.end())
        throw ValidationError("propagating body value never used by the head (line " +
                              std::to_string(r.line) + ")");
    // Vertex variables of the head must occur in the body (range restriction)
    // unless the head is ground.
    auto body_has_var = [&](VarId v) {
      auto in_atom = [&](const Atom& a) {
        for (int i = 0; i < a.arity; ++i)
          if (a.args[i].is_var && a.args[i].id == v) return true;
        return false;
      };
      for (const auto& b : r.prop)
        if (in_atom(b.atom)) return true;
      for (const auto& c : r.conds)
        if (in_atom(c.atom)) return true;
      return false;
    };
    for (int i = 0; i < r.head.arity; ++i)
      if (r.head.args[i].is_var && !body_has_var(r.head.args[i].id))
        throw ValidationError("head variable not bound by any body atom (line " +
                              std::to_string(r.line) + ")");
  }
  for (const auto& f : rules_)
    if (f.is_fact()) check_annotation_range(f.ann.value, f.line);
  for (const auto& t : templates_) {
    if (t.tip && *t.tip < 0.0)
      throw ValidationError("tipping threshold must be nonnegative (line " + std::to_string(t.line) + ")");
  }
}

// ---------------------------------------------------------------------------
// SocialNetwork
// ---------------------------------------------------------------------------

void SocialNetwork::add_vertex(const std::string& name) {
  if (!seen_.count(name)) {
    seen_[name] = true;
    vertices.push_back(name);
  }
}

bool SocialNetwork::has_vertex(const std::string& name) const { return seen_.count(name) > 0; }

std::vector<GapRule> sn_to_facts(const SocialNetwork& sn, Program& prog) {
  std::vector<GapRule> facts;
  facts.reserve(sn.labels.size() + sn.edges.size());
  for (const auto& name : sn.vertices) prog.vertex(name);
  for (const auto& l : sn.labels) {
    if (!sn.has_vertex(l.vertex))
      throw ValidationError("label on unknown vertex '" + l.vertex + "'");
    GapRule r;
    r.head = Atom::unary(prog.pred(l.pred, PredKind::vertex), Term::vertex(prog.vertex(l.vertex)));
    r.ann = AnnotationExpr::constant(l.value);
    facts.push_back(std::move(r));
  }
  for (const auto& e : sn.edges) {
    if (!sn.has_vertex(e.src) || !sn.has_vertex(e.dst))
      throw ValidationError("edge over unknown vertex '" + e.src + "'/'" + e.dst + "'");
    GapRule r;
    r.head = Atom::binary(prog.pred(e.pred, PredKind::edge), Term::vertex(prog.vertex(e.src)),
                          Term::vertex(prog.vertex(e.dst)));
    r.ann = AnnotationExpr::constant(e.weight);
    facts.push_back(std::move(r));
  }
  for (auto& f : facts) {
    if (!(f.ann.value >= 0.0 && f.ann.value <= 1.0))
      throw ValidationError("network annotation outside [0,1]");
    prog.add_rule(f);
  }
  return facts;
}

// ---------------------------------------------------------------------------
// AtomTable
// ---------------------------------------------------------------------------

std::uint64_t AtomTable::key(const GroundAtom& a) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a.pred)) << 42) ^
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a.u + 1)) << 21) ^
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(a.v + 1));
}

AtomId AtomTable::intern(GroundAtom a) {
  auto [it, inserted] = index_.try_emplace(key(a), static_cast<AtomId>(atoms_.size()));
  if (inserted) atoms_.push_back(a);
  return it->second;
}

std::optional<AtomId> AtomTable::find(GroundAtom a) const {
  auto it = index_.find(key(a));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string AtomTable::name(AtomId id, const Program& prog) const {
  const GroundAtom& a = at(id);
  const Predicate& p = prog.predicate(a.pred);
  std::string s = p.name;
  s += '(';
  s += prog.vertex_name(a.u);
  if (p.kind == PredKind::edge) {
    s += ',';
    s += prog.vertex_name(a.v);
  }
  s += ')';
  return s;
}

// ---------------------------------------------------------------------------
// GroundProgram
// ---------------------------------------------------------------------------

void GroundProgram::rebuild_index() {
  const std::int32_t n = atom_count();
  rules_of_off.assign(static_cast<size_t>(n) + 1, 0);
  for (const auto& r : rules) rules_of_off[static_cast<size_t>(r.head) + 1]++;
  for (std::int32_t i = 0; i < n; ++i) rules_of_off[static_cast<size_t>(i) + 1] += rules_of_off[static_cast<size_t>(i)];
  rules_of_idx.assign(rules.size(), 0);
  std::vector<std::uint32_t> cursor(rules_of_off.begin(), rules_of_off.end() - 1);
  for (std::uint32_t ri = 0; ri < rules.size(); ++ri)
    rules_of_idx[cursor[static_cast<size_t>(rules[ri].head)]++] = ri;

  vc_head_of.assign(static_cast<size_t>(n), -1);
  vc_body_of.assign(static_cast<size_t>(n), -1);
  for (std::uint32_t vi = 0; vi < vcs.size(); ++vi) {
    const VcInstance& inst = vcs[vi];
    for (int k = 0; k < inst.m(); ++k) {
      vc_head_of[static_cast<size_t>(inst.heads[static_cast<size_t>(k)])] =
          static_cast<std::int32_t>(vi << 8 | static_cast<std::uint32_t>(k));
      vc_body_of[static_cast<size_t>(inst.bodies[static_cast<size_t>(k)])] =
          static_cast<std::int32_t>(vi << 8 | static_cast<std::uint32_t>(k));
    }
  }
}

std::optional<AtomId> GroundProgram::find_atom_by_name(const std::string& name) const {
  auto open = name.find('(');
  if (open == std::string::npos || name.back() != ')') return std::nullopt;
  std::string pred = name.substr(0, open);
  std::string args = name.substr(open + 1, name.size() - open - 2);
  auto pid = source->find_pred(pred);
  if (!pid) return std::nullopt;
  GroundAtom ga;
  ga.pred = *pid;
  auto comma = args.find(',');
  if (comma == std::string::npos) {
    auto v = source->find_vertex(args);
    if (!v) return std::nullopt;
    ga.u = *v;
  } else {
    auto u = source->find_vertex(args.substr(0, comma));
    auto v = source->find_vertex(args.substr(comma + 1));
    if (!u || !v) return std::nullopt;
    ga.u = *u;
    ga.v = *v;
  }
  return atoms->find(ga);
}

std::int32_t GroundProgram::push_rule(AtomId head, FnId fn, const std::vector<AtomId>& prop,
                                      const std::vector<GroundCond>& conds, RuleOrigin origin,
                                      std::int32_t src) {
  GroundRule r;
  r.head = head;
  r.fn = fn;
  r.prop_begin = static_cast<std::uint32_t>(prop_pool.size());
  prop_pool.insert(prop_pool.end(), prop.begin(), prop.end());
  r.prop_end = static_cast<std::uint32_t>(prop_pool.size());
  r.cond_begin = static_cast<std::uint32_t>(cond_pool.size());
  cond_pool.insert(cond_pool.end(), conds.begin(), conds.end());
  r.cond_end = static_cast<std::uint32_t>(cond_pool.size());
  r.origin = origin;
  r.src = src;
  rules.push_back(r);
  return static_cast<std::int32_t>(rules.size() - 1);
}

// ---------------------------------------------------------------------------
// Lattice operations
// ---------------------------------------------------------------------------

static void require_compatible(const Interpretation& a, const Interpretation& b) {
  if (!a.compatible(b))
    throw ValidationError("interpretations over different atom tables");
}

Interpretation meet(const Interpretation& a, const Interpretation& b) {
  require_compatible(a, b);
  Interpretation r = a;
  for (size_t i = 0; i < r.size(); ++i)
    r.values()[i] = std::min(a.values()[i], b.values()[i]);
  return r;
}

Interpretation join(const Interpretation& a, const Interpretation& b) {
  require_compatible(a, b);
  Interpretation r = a;
  for (size_t i = 0; i < r.size(); ++i)
    r.values()[i] = std::max(a.values()[i], b.values()[i]);
  return r;
}

bool leq(const Interpretation& a, const Interpretation& b) {
  require_compatible(a, b);
  for (size_t i = 0; i < a.size(); ++i)
    if (a.values()[i] > b.values()[i] + kEpsEq) return false;
  return true;
}

bool approx_equal(const Interpretation& a, const Interpretation& b) {
  require_compatible(a, b);
  for (size_t i = 0; i < a.size(); ++i)
    if (!value_eq(a.values()[i], b.values()[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Satisfaction
// ---------------------------------------------------------------------------

bool satisfies(const Interpretation& i, AtomId atom, double mu) {
  return i[atom] >= mu - kEpsEq;
}

bool satisfies(const Interpretation& i, const GroundProgram& gp, const GroundRule& r) {
  for (int c = 0; c < gp.cond_size(r); ++c) {
    const GroundCond& cond = gp.cond(r)[c];
    if (i[cond.atom] < cond.bound - kEpsEq) return true;  // body falsified
  }
  int n = gp.prop_size(r);
  double stack[16];
  std::vector<double> heap;
  double* x = stack;
  if (n > 16) {
    heap.resize(static_cast<size_t>(n));
    x = heap.data();
  }
  for (int k = 0; k < n; ++k) x[k] = i[gp.prop(r)[k]];
  double head_value = gp.fns.at(r.fn).eval(x, n);
  return i[r.head] >= head_value - kEpsEq;
}

bool satisfies(const Interpretation& i, const VcInstance& vc) {
  return selected_option(i, vc).has_value();
}

std::optional<int> selected_option(const Interpretation& i, const VcInstance& vc) {
  int m = vc.m();
  int positive = -1;
  int positive_count = 0;
  for (int k = 0; k < m; ++k) {
    if (i[vc.heads[static_cast<size_t>(k)]] > kEpsEq) {
      positive = k;
      positive_count++;
    }
  }
  if (positive_count > 1) return std::nullopt;
  if (positive_count == 1) {
    // The single positive decision must match its utility.
    if (value_eq(i[vc.heads[static_cast<size_t>(positive)]], i[vc.bodies[static_cast<size_t>(positive)]]))
      return positive;
    return std::nullopt;
  }
  // All decisions are zero: satisfied via any option whose utility is also 0.
  for (int k = 0; k < m; ++k)
    if (i[vc.bodies[static_cast<size_t>(k)]] <= kEpsEq) return k;
  return std::nullopt;
}

bool satisfies(const Interpretation& i, const GroundProgram& gp) {
  for (const auto& r : gp.rules)
    if (!satisfies(i, gp, r)) return false;
  for (const auto& vc : gp.vcs)
    if (!satisfies(i, vc)) return false;
  return true;
}

}  // namespace cgap
