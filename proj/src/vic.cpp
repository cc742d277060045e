#include "cgap/vic.hpp"

#include <algorithm>
#include <deque>

namespace cgap {

namespace {

void add_edge(DependencyGraph& g, PredId from, PredId to) {
  auto& s = g.succ[static_cast<size_t>(from)];
  if (std::find(s.begin(), s.end(), to) != s.end()) return;
  s.push_back(to);
  g.pred[static_cast<size_t>(to)].push_back(from);
}

// BFS over `adj` from `start`; returns per-node predecessor (-1 unreached,
// start maps to itself).
std::vector<PredId> bfs(const std::vector<std::vector<PredId>>& adj, PredId start) {
  std::vector<PredId> parent(adj.size(), -1);
  parent[static_cast<size_t>(start)] = start;
  std::deque<PredId> q{start};
  while (!q.empty()) {
    PredId u = q.front();
    q.pop_front();
    for (PredId v : adj[static_cast<size_t>(u)]) {
      if (parent[static_cast<size_t>(v)] != -1) continue;
      parent[static_cast<size_t>(v)] = u;
      q.push_back(v);
    }
  }
  return parent;
}

}  // namespace

DependencyGraph dependency_graph(const Program& p) {
  DependencyGraph g;
  g.succ.resize(static_cast<size_t>(p.pred_count()));
  g.pred.resize(static_cast<size_t>(p.pred_count()));
  for (const auto& r : p.rules()) {
    for (const auto& b : r.prop) add_edge(g, b.atom.pred, r.head.pred);
    for (const auto& c : r.conds) add_edge(g, c.atom.pred, r.head.pred);
  }
  for (const auto& t : p.templates()) {
    add_edge(g, t.body_pred, t.head_pred);
    add_edge(g, t.edge_pred, t.head_pred);
  }
  if (p.vc())
    for (int i = 0; i < p.vc()->m(); ++i)
      add_edge(g, p.vc()->bodies[static_cast<size_t>(i)], p.vc()->heads[static_cast<size_t>(i)]);
  return g;
}

VicClassification classify(const Program& p) {
  if (!p.vc()) throw ValidationError("program has no vertex-choice rule");
  const VCRule& vc = *p.vc();
  DependencyGraph g = dependency_graph(p);

  VicClassification cls;
  cls.m = vc.m();

  cls.pred_sets.resize(static_cast<size_t>(vc.m()));
  for (int i = 0; i < vc.m(); ++i) {
    auto parent = bfs(g.pred, vc.heads[static_cast<size_t>(i)]);
    for (PredId q = 0; q < p.pred_count(); ++q)
      if (parent[static_cast<size_t>(q)] != -1)
        cls.pred_sets[static_cast<size_t>(i)].push_back(q);
  }

  for (const auto& r : p.rules())
    if (p.predicate(r.head.pred).role == PredRole::decision) {
      cls.violated = 1;
      cls.witness = "decision predicate '" + p.predicate(r.head.pred).name +
                    "' appears in a rule head";
      return cls;
    }
  for (const auto& t : p.templates())
    if (p.predicate(t.head_pred).role == PredRole::decision) {
      cls.violated = 1;
      cls.witness = "decision predicate '" + p.predicate(t.head_pred).name +
                    "' appears in a template head";
      return cls;
    }

  for (int j = 0; j < vc.m(); ++j) {
    PredId bj = vc.heads[static_cast<size_t>(j)];
    auto parent = bfs(g.succ, bj);
    for (int i = 0; i < vc.m(); ++i) {
      if (i == j) continue;
      PredId ai = vc.bodies[static_cast<size_t>(i)];
      if (parent[static_cast<size_t>(ai)] == -1) continue;
      cls.violated = 2;
      for (PredId q = ai; q != bj; q = parent[static_cast<size_t>(q)]) cls.path.push_back(q);
      cls.path.push_back(bj);
      std::reverse(cls.path.begin(), cls.path.end());
      cls.witness = "decision predicate '" + p.predicate(bj).name +
                    "' reaches competing utility predicate '" + p.predicate(ai).name + "'";
      return cls;
    }
  }

  cls.vic = true;
  return cls;
}

namespace {

// Rules of the induced program of `s` restricted to predicate set `keep`.
GroundProgram restrict_induced(const GroundProgram& gp, const State& s,
                               const std::vector<char>& keep) {
  GroundProgram out;
  out.source = gp.source;
  out.atoms = gp.atoms;
  out.fns = gp.fns;
  FnId identity = out.fns.intern(AnnotationFn::identity());
  auto kept = [&](AtomId a) { return keep[static_cast<size_t>(gp.atoms->at(a).pred)] != 0; };
  for (const auto& r : gp.rules) {
    if (!kept(r.head)) continue;
    bool all = true;
    for (int k = 0, n = gp.prop_size(r); k < n && all; ++k) all = kept(gp.prop(r)[k]);
    for (int k = 0, n = gp.cond_size(r); k < n && all; ++k) all = kept(gp.cond(r)[k].atom);
    if (!all) continue;
    std::vector<AtomId> props(gp.prop(r), gp.prop(r) + gp.prop_size(r));
    std::vector<GroundCond> conds(gp.cond(r), gp.cond(r) + gp.cond_size(r));
    out.push_rule(r.head, r.fn, props, conds, r.origin, r.src);
  }
  for (size_t vi = 0; vi < gp.vcs.size(); ++vi) {
    const VcInstance& vc = gp.vcs[vi];
    int k = s[vi];
    AtomId b = vc.heads[static_cast<size_t>(k)];
    AtomId a = vc.bodies[static_cast<size_t>(k)];
    if (kept(b) && kept(a))
      out.push_rule(b, identity, {a}, {}, RuleOrigin::bridge, static_cast<std::int32_t>(vi));
  }
  out.rebuild_index();
  return out;
}

std::vector<char> keep_mask(const Program& p, const std::vector<PredId>& set) {
  std::vector<char> keep(static_cast<size_t>(p.pred_count()), 0);
  for (PredId q : set) keep[static_cast<size_t>(q)] = 1;
  return keep;
}

}  // namespace

std::vector<GroundProgram> split_program(const GroundProgram& gp, const State& s) {
  if (s.size() != gp.vcs.size())
    throw ValidationError("state must assign one action per vertex-choice instance");
  VicClassification cls = classify(*gp.source);
  if (!cls.vic)
    throw ValidationError("split requires an independent-choice program: " + cls.witness);
  std::vector<GroundProgram> parts;
  parts.reserve(static_cast<size_t>(cls.m));
  for (int i = 0; i < cls.m; ++i)
    parts.push_back(restrict_induced(gp, s, keep_mask(*gp.source, cls.pred_sets[static_cast<size_t>(i)])));
  return parts;
}

std::pair<State, Interpretation> find_se_vic2(const GroundProgram& gp, int default_action) {
  if (default_action != 0 && default_action != 1)
    throw ValidationError("default action must be 0 or 1");
  VicClassification cls = classify(*gp.source);
  if (!cls.vic || cls.m != 2)
    throw ValidationError("improvement-flip search requires a two-option independent-choice program" +
                          (cls.witness.empty() ? std::string() : ": " + cls.witness));
  int other = 1 - default_action;
  State s(gp.vcs.size(), default_action);
  Interpretation mm;
  std::int64_t rounds_cap = static_cast<std::int64_t>(gp.vcs.size()) + 2;
  for (std::int64_t round = 0;; ++round) {
    if (round > rounds_cap)
      throw NonConvergenceError("improvement flips did not stabilize");
    mm = induced_fixpoint_strict(gp, s);
    bool flipped = false;
    for (size_t k = 0; k < gp.vcs.size(); ++k) {
      if (s[k] != default_action) continue;
      const VcInstance& vc = gp.vcs[k];
      if (mm[vc.bodies[static_cast<size_t>(other)]] >
          mm[vc.bodies[static_cast<size_t>(default_action)]] + kEpsEq) {
        s[k] = other;
        flipped = true;
      }
    }
    if (!flipped) break;
  }
  return {std::move(s), std::move(mm)};
}

ExtremalModels extremal_models(const GroundProgram& gp, bool with_mixed) {
  ExtremalModels ex;
  auto [s12, m12] = find_se_vic2(gp, 0);
  auto [s21, m21] = find_se_vic2(gp, 1);
  ex.s12 = std::move(s12);
  ex.m12 = std::move(m12);
  ex.s21 = std::move(s21);
  ex.m21 = std::move(m21);
  ex.pred_sets = classify(*gp.source).pred_sets;
  if (!with_mixed) return ex;

  auto low12 = split_program(gp, ex.s21);   // side 0 minimal under all-default-1
  auto high12 = split_program(gp, ex.s12);  // side 0 maximal under all-default-0
  auto unite = [&](GroundProgram a, const GroundProgram& b) {
    for (const auto& r : b.rules) {
      std::vector<AtomId> props(b.prop(r), b.prop(r) + b.prop_size(r));
      std::vector<GroundCond> conds(b.cond(r), b.cond(r) + b.cond_size(r));
      a.push_rule(r.head, r.fn, props, conds, r.origin, r.src);
    }
    a.rebuild_index();
    return a;
  };
  ex.mixed_low = minimal_model_strict(unite(low12[0], high12[1]));
  ex.mixed_high = minimal_model_strict(unite(high12[0], low12[1]));
  return ex;
}

EntailReport entails(const GroundProgram& gp, AtomId atom, double mu, EntailMethod method,
                     const EnumOptions& opts) {
  if (atom < 0 || atom >= gp.atom_count()) throw ValidationError("unknown atom");
  EntailReport rep;
  if (method == EntailMethod::enumerate) {
    EnumerationResult ses = enumerate_strong_equilibria(gp, opts);
    if (ses.items.empty()) {
      rep.entailed = true;
      rep.vacuous = true;
      return rep;
    }
    rep.entailed = std::all_of(ses.items.begin(), ses.items.end(), [&](const Solution& s) {
      return s.model[atom] >= mu - kEpsEq;
    });
    return rep;
  }
  ExtremalModels ex = extremal_models(gp, false);
  PredId q = gp.atoms->at(atom).pred;
  bool side0 = std::find(ex.pred_sets[0].begin(), ex.pred_sets[0].end(), q) != ex.pred_sets[0].end();
  bool side1 = std::find(ex.pred_sets[1].begin(), ex.pred_sets[1].end(), q) != ex.pred_sets[1].end();
  // Side-0 atoms are minimal under the all-default-1 state and vice versa;
  // predicates on both or neither side take the same value in every
  // equilibrium, so either model serves.
  double lo;
  if (side0 && !side1)
    lo = ex.m21[atom];
  else if (side1 && !side0)
    lo = ex.m12[atom];
  else
    lo = ex.m12[atom];
  rep.entailed = lo >= mu - kEpsEq;
  return rep;
}

}  // namespace cgap
