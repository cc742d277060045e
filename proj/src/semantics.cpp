#include "cgap/semantics.hpp"

#include <algorithm>
#include <cmath>

namespace cgap {

namespace {

void apply_rules(const GroundProgram& gp, const Interpretation& i, Interpretation& out) {
  std::vector<double> buf;
  for (const auto& r : gp.rules) {
    bool applicable = true;
    const GroundCond* cs = gp.cond(r);
    for (int k = 0, n = gp.cond_size(r); k < n; ++k) {
      if (i[cs[k].atom] < cs[k].bound - kEpsEq) {
        applicable = false;
        break;
      }
    }
    if (!applicable) continue;
    int n = gp.prop_size(r);
    buf.resize(static_cast<size_t>(n));
    const AtomId* ps = gp.prop(r);
    for (int k = 0; k < n; ++k) buf[static_cast<size_t>(k)] = i[ps[k]];
    double v = gp.fns.at(r.fn).eval(buf.data(), n);
    double& slot = out[r.head];
    if (v > slot) slot = v;
  }
}

}  // namespace

Interpretation tp_step(const GroundProgram& gp, const Interpretation& i) {
  Interpretation out(gp.atoms);
  apply_rules(gp, i, out);
  return out;
}

void tp_step_into(const GroundProgram& gp, const Interpretation& i, Interpretation& out) {
  std::fill(out.values().begin(), out.values().end(), 0.0);
  apply_rules(gp, i, out);
}

FixpointReport minimal_model(const GroundProgram& gp) {
  FixpointReport rep;
  rep.fixpoint = Interpretation::bottom(gp);
  std::int64_t cap = fixpoint_iteration_cap(gp.atom_count());
  while (rep.iterations < cap) {
    Interpretation next = tp_step(gp, rep.fixpoint);
    ++rep.iterations;
    double res = 0.0;
    const auto& a = rep.fixpoint.values();
    const auto& b = next.values();
    for (size_t k = 0; k < a.size(); ++k) res = std::max(res, std::fabs(a[k] - b[k]));
    rep.residual = res;
    rep.fixpoint = std::move(next);
    if (res <= kEpsFix) {
      rep.converged = true;
      return rep;
    }
  }
  return rep;
}

Interpretation minimal_model_strict(const GroundProgram& gp) {
  FixpointReport rep = minimal_model(gp);
  if (!rep.converged)
    throw NonConvergenceError("fixpoint iteration did not stabilize within " +
                              std::to_string(rep.iterations) + " steps (residual " +
                              std::to_string(rep.residual) + ")");
  return std::move(rep.fixpoint);
}

GroundProgram coherence_transform(const GroundProgram& gp, const Interpretation& i) {
  GroundProgram out;
  out.source = gp.source;
  out.atoms = gp.atoms;
  out.fns = gp.fns;
  out.rules = gp.rules;
  out.prop_pool = gp.prop_pool;
  out.cond_pool = gp.cond_pool;

  FnId id = out.fns.intern(AnnotationFn::identity());
  for (std::int32_t vi = 0; vi < static_cast<std::int32_t>(gp.vcs.size()); ++vi) {
    const VcInstance& vc = gp.vcs[static_cast<size_t>(vi)];
    for (int k = 0; k < vc.m(); ++k) {
      double a = i[vc.bodies[static_cast<size_t>(k)]];
      double b = i[vc.heads[static_cast<size_t>(k)]];
      if (a > kEpsEq && value_eq(a, b))
        out.push_rule(vc.heads[static_cast<size_t>(k)], id,
                      {vc.bodies[static_cast<size_t>(k)]}, {}, RuleOrigin::bridge, vi);
    }
  }
  out.rebuild_index();
  return out;
}

bool is_coherent_model(const GroundProgram& gp, const Interpretation& i) {
  if (!satisfies(i, gp))
    throw NotAModelError("interpretation is not a model of the program");
  GroundProgram coh = coherence_transform(gp, i);
  Interpretation mm = minimal_model_strict(coh);
  return approx_equal(mm, i);
}

bool is_strong_equilibrium(const GroundProgram& gp, const Interpretation& i) {
  if (!is_coherent_model(gp, i)) return false;
  for (const auto& vc : gp.vcs) {
    double got = 0.0;
    for (AtomId b : vc.heads) got += i[b];
    double best = 0.0;
    for (AtomId a : vc.bodies) best = std::max(best, i[a]);
    if (got < best - kEpsEq) return false;
  }
  return true;
}

CheckReport check_interpretation(const GroundProgram& gp, const Interpretation& i) {
  CheckReport rep;
  rep.is_model = satisfies(i, gp);
  rep.selection.assign(gp.vcs.size(), -1);
  for (size_t k = 0; k < gp.vcs.size(); ++k) {
    auto sel = selected_option(i, gp.vcs[k]);
    if (sel) rep.selection[k] = *sel;
  }
  if (!rep.is_model) return rep;
  GroundProgram coh = coherence_transform(gp, i);
  Interpretation mm = minimal_model_strict(coh);
  rep.is_coherent = approx_equal(mm, i);
  if (!rep.is_coherent) return rep;
  for (const auto& vc : gp.vcs) {
    double got = 0.0;
    for (AtomId b : vc.heads) got += i[b];
    double best = 0.0;
    for (AtomId a : vc.bodies) best = std::max(best, i[a]);
    if (got < best - kEpsEq) return rep;
  }
  rep.is_strong = true;
  return rep;
}

}  // namespace cgap
