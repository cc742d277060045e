#include "cgap/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cgap/errors.hpp"

namespace cgap {

std::int32_t ConstraintSystem::add_var(VarInfo vi) {
  vars.push_back(std::move(vi));
  return static_cast<std::int32_t>(vars.size()) - 1;
}

void ConstraintSystem::add_row(std::vector<LinTerm> terms, RowSense sense, double rhs) {
  rows.push_back(Row{std::move(terms), sense, rhs});
}

namespace {

// LP identifiers: [A-Za-z0-9_] only.  All generated names start with a fixed
// letter prefix, so mangled atom/vertex text cannot produce an invalid head.
std::string lp_mangle(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_';
    out.push_back(ok ? c : '_');
  }
  return out;
}

class NamePool {
 public:
  std::string claim(std::string base) {
    auto [it, fresh] = used_.emplace(base, 0);
    if (fresh) return base;
    std::string cand;
    do {
      cand = base + "_" + std::to_string(++it->second);
    } while (!used_.emplace(cand, 0).second);
    return cand;
  }

 private:
  std::map<std::string, int> used_;
};

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

bool has_rules(const GroundProgram& gp, AtomId a) {
  return gp.rules_of_off[static_cast<std::size_t>(a) + 1] > gp.rules_of_off[static_cast<std::size_t>(a)];
}

}  // namespace

ConstraintSystem build_ilc(const GroundProgram& gp, int t_hat, const IlcOptions& opts) {
  if (t_hat < 1) throw ValidationError("ilc horizon must be at least 1");
  for (const GroundRule& r : gp.rules) {
    const AnnotationFn& f = gp.fns.at(r.fn);
    if (f.shape == FnShape::indicator_sum) {
      throw ValidationError("annotation function '" +
                            (f.name.empty() ? std::string("indicator_sum") : f.name) +
                            "' has no linear encoding");
    }
  }

  const std::int32_t na = gp.atom_count();
  const std::int32_t nr = static_cast<std::int32_t>(gp.rules.size());
  const std::size_t ncond = gp.cond_pool.size();
  const std::size_t nprop = gp.prop_pool.size();

  ConstraintSystem cs;
  cs.t_hat = t_hat;
  cs.payoff_rows = opts.payoff_rows;
  cs.atom_count = na;
  cs.rule_count = nr;
  cs.vc_count = static_cast<std::int32_t>(gp.vcs.size());
  cs.vc_m = gp.vcs.empty() ? 0 : gp.vcs.front().m();

  NamePool atom_names;
  std::vector<std::string> alp(static_cast<std::size_t>(na));
  for (AtomId a = 0; a < na; ++a) alp[static_cast<std::size_t>(a)] = atom_names.claim(lp_mangle(gp.atom_name(a)));

  auto mk = [&cs](std::string name, VarKind k, bool binary, int t, std::int32_t ref, std::int32_t sub) {
    VarInfo vi;
    vi.name = std::move(name);
    vi.kind = k;
    vi.binary = binary;
    vi.t = t;
    vi.ref = ref;
    vi.sub = sub;
    return cs.add_var(std::move(vi));
  };

  cs.x_vars.assign(static_cast<std::size_t>(t_hat + 1) * na, -1);
  for (int t = 0; t <= t_hat; ++t) {
    for (AtomId a = 0; a < na; ++a) {
      cs.x_vars[static_cast<std::size_t>(t) * na + a] =
          mk("x_" + std::to_string(t) + "_" + alp[static_cast<std::size_t>(a)], VarKind::x, false, t, a, -1);
    }
  }

  cs.z_vars.assign(static_cast<std::size_t>(t_hat) * nr, -1);
  cs.u_vars.assign(static_cast<std::size_t>(t_hat) * nr, -1);
  cs.v_gate_vars.assign(static_cast<std::size_t>(t_hat) * nr, -1);
  cs.v_cond_vars.assign(static_cast<std::size_t>(t_hat) * ncond, -1);
  cs.m_vars.assign(static_cast<std::size_t>(t_hat) * nr, -1);
  cs.w_vars.assign(static_cast<std::size_t>(t_hat) * nprop, -1);
  cs.g_vars.assign(static_cast<std::size_t>(t_hat) * nr, -1);
  for (int t = 1; t <= t_hat; ++t) {
    const std::string ts = std::to_string(t);
    const std::size_t base = static_cast<std::size_t>(t - 1);
    for (std::int32_t ri = 0; ri < nr; ++ri) {
      const GroundRule& r = gp.rules[static_cast<std::size_t>(ri)];
      const AnnotationFn& fn = gp.fns.at(r.fn);
      const std::string rs = "r" + std::to_string(ri + 1);
      cs.z_vars[base * nr + ri] = mk("z_" + ts + "_" + rs, VarKind::z, false, t, ri, -1);
      cs.u_vars[base * nr + ri] = mk("u_" + ts + "_" + rs, VarKind::u, true, t, ri, -1);
      const int l = gp.cond_size(r);
      for (int j = 0; j < l; ++j) {
        cs.v_cond_vars[base * ncond + r.cond_begin + static_cast<std::uint32_t>(j)] =
            mk("v_" + ts + "_" + rs + "_" + std::to_string(j + 1), VarKind::v, true, t, ri, j);
      }
      cs.v_gate_vars[base * nr + ri] = mk("v_" + ts + "_" + rs + "_all", VarKind::v, true, t, ri, -1);
      const int n = gp.prop_size(r);
      if ((fn.shape == FnShape::maximum || fn.shape == FnShape::gated_max) && n > 0) {
        cs.m_vars[base * nr + ri] = mk("m_" + ts + "_" + rs, VarKind::aux, false, t, ri, -1);
        for (int k = 0; k < n; ++k) {
          cs.w_vars[base * nprop + r.prop_begin + static_cast<std::uint32_t>(k)] =
              mk("w_" + ts + "_" + rs + "_" + std::to_string(k + 1), VarKind::aux, true, t, ri, k);
        }
        if (fn.shape == FnShape::gated_max)
          cs.g_vars[base * nr + ri] = mk("g_" + ts + "_" + rs, VarKind::aux, true, t, ri, -1);
      }
    }
  }

  cs.y_vars.assign(static_cast<std::size_t>(cs.vc_count) * std::max(cs.vc_m, 1), -1);
  if (cs.vc_count > 0) {
    NamePool ynames;
    for (std::int32_t ii = 0; ii < cs.vc_count; ++ii) {
      const std::string vtx =
          ynames.claim(lp_mangle(gp.source ? gp.source->vertex_name(gp.vcs[static_cast<std::size_t>(ii)].v)
                                           : std::to_string(gp.vcs[static_cast<std::size_t>(ii)].v)));
      for (int i = 0; i < cs.vc_m; ++i) {
        cs.y_vars[static_cast<std::size_t>(ii) * cs.vc_m + i] =
            mk("y_" + vtx + "_" + std::to_string(i + 1), VarKind::y, true, -1, ii, i);
      }
    }
  }

  // --- Sweep 0: everything starts at the bottom interpretation.
  for (AtomId a = 0; a < na; ++a) cs.add_row({{cs.x_of(0, a), 1.0}}, RowSense::eq, 0.0);

  // --- Rule selection rows: each atom takes the value of one maximal rule.
  for (int t = 1; t <= t_hat; ++t) {
    for (AtomId a = 0; a < na; ++a) {
      const bool vc_head = !gp.vc_head_of.empty() && gp.vc_head_of[static_cast<std::size_t>(a)] >= 0;
      if (!has_rules(gp, a)) {
        if (!vc_head) cs.add_row({{cs.x_of(t, a), 1.0}}, RowSense::eq, 0.0);
        continue;
      }
      std::vector<LinTerm> pick;
      for (std::uint32_t u = gp.rules_of_off[static_cast<std::size_t>(a)];
           u < gp.rules_of_off[static_cast<std::size_t>(a) + 1]; ++u) {
        const std::int32_t ri = static_cast<std::int32_t>(gp.rules_of_idx[u]);
        const std::int32_t uv = cs.u_vars[static_cast<std::size_t>(t - 1) * nr + ri];
        cs.add_row({{cs.z_of(t, ri), 1.0}, {cs.x_of(t, a), -1.0}, {uv, -1.0}}, RowSense::ge, -1.0);
        cs.add_row({{cs.x_of(t, a), 1.0}, {cs.z_of(t, ri), -1.0}}, RowSense::ge, 0.0);
        pick.push_back({uv, 1.0});
      }
      cs.add_row(std::move(pick), RowSense::eq, 1.0);
    }
  }

  // --- Rule firing rows: conditions gate the annotation function's value.
  for (int t = 1; t <= t_hat; ++t) {
    const std::size_t base = static_cast<std::size_t>(t - 1);
    for (std::int32_t ri = 0; ri < nr; ++ri) {
      const GroundRule& r = gp.rules[static_cast<std::size_t>(ri)];
      const AnnotationFn& fn = gp.fns.at(r.fn);
      const std::int32_t zv = cs.z_of(t, ri);
      const std::int32_t gate = cs.v_gate_vars[base * nr + ri];
      const int l = gp.cond_size(r);
      std::vector<LinTerm> all;
      for (int j = 0; j < l; ++j) {
        const GroundCond& c = gp.cond(r)[j];
        const std::int32_t vj = cs.v_cond_vars[base * ncond + r.cond_begin + static_cast<std::uint32_t>(j)];
        const std::int32_t xc = cs.x_of(t - 1, c.atom);
        cs.add_row({{vj, 1.0}, {xc, -1.0}}, RowSense::ge, kEpsMilp - c.bound);
        cs.add_row({{xc, 1.0}, {vj, -1.0}}, RowSense::ge, c.bound - 1.0);
        cs.add_row({{vj, 1.0}, {gate, -1.0}}, RowSense::ge, 0.0);
        all.push_back({vj, -1.0});
      }
      all.insert(all.begin(), {gate, 1.0});
      cs.add_row(std::move(all), RowSense::ge, 1.0 - l);
      cs.add_row({{zv, -1.0}, {gate, 1.0}}, RowSense::ge, 0.0);

      const int n = gp.prop_size(r);
      const AtomId* props = gp.prop(r);
      switch (fn.shape) {
        case FnShape::linear:
        case FnShape::average: {
          std::vector<LinTerm> f;
          for (int k = 0; k < n; ++k) {
            const double c = fn.shape == FnShape::average ? 1.0 / n
                                                          : fn.coeffs[static_cast<std::size_t>(k)];
            f.push_back({cs.x_of(t - 1, props[k]), c});
          }
          const double b = fn.shape == FnShape::average ? 0.0 : fn.intercept;
          std::vector<LinTerm> lo{{zv, 1.0}};
          for (const LinTerm& ft : f) lo.push_back({ft.var, -ft.coeff});
          lo.push_back({gate, -1.0});
          cs.add_row(std::move(lo), RowSense::ge, b - 1.0);
          std::vector<LinTerm> hi = f;
          hi.push_back({zv, -1.0});
          hi.push_back({gate, -1.0});
          cs.add_row(std::move(hi), RowSense::ge, -b - 1.0);
          break;
        }
        case FnShape::maximum:
        case FnShape::gated_max: {
          if (n == 0) {
            cs.add_row({{zv, 1.0}}, RowSense::eq, 0.0);
            break;
          }
          const std::int32_t mv = cs.m_vars[base * nr + ri];
          std::vector<LinTerm> wsum;
          for (int k = 0; k < n; ++k) {
            const std::int32_t xk = cs.x_of(t - 1, props[k]);
            const std::int32_t wk = cs.w_vars[base * nprop + r.prop_begin + static_cast<std::uint32_t>(k)];
            cs.add_row({{mv, 1.0}, {xk, -1.0}}, RowSense::ge, 0.0);
            cs.add_row({{xk, 1.0}, {mv, -1.0}, {wk, -1.0}}, RowSense::ge, -1.0);
            wsum.push_back({wk, 1.0});
          }
          cs.add_row(std::move(wsum), RowSense::eq, 1.0);
          if (fn.shape == FnShape::maximum) {
            cs.add_row({{zv, 1.0}, {mv, -1.0}, {gate, -1.0}}, RowSense::ge, -1.0);
            cs.add_row({{mv, 1.0}, {zv, -1.0}, {gate, -1.0}}, RowSense::ge, -1.0);
          } else {
            const std::int32_t gv = cs.g_vars[base * nr + ri];
            std::vector<LinTerm> on{{gv, static_cast<double>(n + 1)}};
            std::vector<LinTerm> off;
            for (int k = 0; k < n; ++k) {
              on.push_back({cs.x_of(t - 1, props[k]), -1.0});
              off.push_back({cs.x_of(t - 1, props[k]), 1.0});
            }
            cs.add_row(std::move(on), RowSense::ge, kEpsMilp - fn.threshold);
            off.push_back({gv, -fn.threshold});
            cs.add_row(std::move(off), RowSense::ge, 0.0);
            cs.add_row({{gv, 1.0}, {zv, -1.0}}, RowSense::ge, 0.0);
            cs.add_row({{mv, 1.0}, {zv, -1.0}}, RowSense::ge, 0.0);
            cs.add_row({{zv, 1.0}, {mv, -1.0}, {gate, -1.0}, {gv, -1.0}}, RowSense::ge, -2.0);
          }
          break;
        }
        case FnShape::indicator_sum:
          break;  // rejected above
      }
    }
  }

  // --- Choice rows: the selected option copies its companion, others vanish.
  for (std::int32_t ii = 0; ii < cs.vc_count; ++ii) {
    const VcInstance& inst = gp.vcs[static_cast<std::size_t>(ii)];
    std::vector<LinTerm> one;
    for (int i = 0; i < cs.vc_m; ++i) one.push_back({cs.y_of(ii, i), 1.0});
    cs.add_row(std::move(one), RowSense::eq, 1.0);
    for (int t = 1; t <= t_hat; ++t) {
      for (int i = 0; i < cs.vc_m; ++i) {
        const std::int32_t yb = cs.x_of(t, inst.heads[static_cast<std::size_t>(i)]);
        const std::int32_t ya = cs.x_of(t, inst.bodies[static_cast<std::size_t>(i)]);
        const std::int32_t yv = cs.y_of(ii, i);
        cs.add_row({{yb, 1.0}, {ya, -1.0}, {yv, -1.0}}, RowSense::ge, -1.0);
        cs.add_row({{ya, 1.0}, {yb, -1.0}, {yv, -1.0}}, RowSense::ge, -1.0);
        cs.add_row({{yb, 1.0}, {yv, 1.0}}, RowSense::ge, 0.0);
        cs.add_row({{yb, -1.0}, {yv, 1.0}}, RowSense::ge, 0.0);
      }
    }
  }

  // --- Final-sweep payoff rows: decision mass covers the best utility.
  if (opts.payoff_rows) {
    for (const VcInstance& inst : gp.vcs) {
      for (int j = 0; j < inst.m(); ++j) {
        std::vector<LinTerm> row;
        for (int i = 0; i < inst.m(); ++i)
          row.push_back({cs.x_of(t_hat, inst.heads[static_cast<std::size_t>(i)]), 1.0});
        row.push_back({cs.x_of(t_hat, inst.bodies[static_cast<std::size_t>(j)]), -1.0});
        cs.add_row(std::move(row), RowSense::ge, 0.0);
      }
    }
  }

  return cs;
}

namespace {

bool cut_blocked(const ConstraintSystem& cs, const State& s) {
  for (const auto& cut : cs.cuts) {
    bool match = true;
    for (std::size_t i = 0; i < cut.size(); ++i) {
      if (cut[i] != static_cast<std::int8_t>(s[i])) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

bool advance(State& s, int m) {
  for (int i = static_cast<int>(s.size()) - 1; i >= 0; --i) {
    if (++s[static_cast<std::size_t>(i)] < m) return true;
    s[static_cast<std::size_t>(i)] = 0;
  }
  return false;
}

// Runs the t_hat unrolled sweeps for one option vector, filling every variable
// of the system.  Returns false when the leaf is infeasible: a choice head
// with rules disagrees with its coupling value, or a payoff row fails.
bool propagate_choice(const GroundProgram& gp, const ConstraintSystem& cs, const State& choice,
                      std::vector<double>& asg, std::vector<double>& body) {
  const std::int32_t na = cs.atom_count;
  const std::int32_t nr = cs.rule_count;
  const std::size_t ncond = gp.cond_pool.size();
  const std::size_t nprop = gp.prop_pool.size();

  for (AtomId a = 0; a < na; ++a) asg[static_cast<std::size_t>(cs.x_of(0, a))] = 0.0;
  for (std::int32_t ii = 0; ii < cs.vc_count; ++ii)
    for (int i = 0; i < cs.vc_m; ++i)
      asg[static_cast<std::size_t>(cs.y_of(ii, i))] = choice[static_cast<std::size_t>(ii)] == i ? 1.0 : 0.0;

  for (int t = 1; t <= cs.t_hat; ++t) {
    const std::size_t base = static_cast<std::size_t>(t - 1);
    for (std::int32_t ri = 0; ri < nr; ++ri) {
      const GroundRule& r = gp.rules[static_cast<std::size_t>(ri)];
      const AnnotationFn& fn = gp.fns.at(r.fn);
      bool gate = true;
      const int l = gp.cond_size(r);
      for (int j = 0; j < l; ++j) {
        const GroundCond& c = gp.cond(r)[j];
        const bool vj = asg[static_cast<std::size_t>(cs.x_of(t - 1, c.atom))] >= c.bound - kEpsEq;
        asg[cs.v_cond_vars[base * ncond + r.cond_begin + static_cast<std::uint32_t>(j)]] = vj ? 1.0 : 0.0;
        gate = gate && vj;
      }
      asg[cs.v_gate_vars[base * nr + ri]] = gate ? 1.0 : 0.0;
      const int n = gp.prop_size(r);
      const AtomId* props = gp.prop(r);
      body.resize(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k)
        body[static_cast<std::size_t>(k)] = asg[static_cast<std::size_t>(cs.x_of(t - 1, props[k]))];
      if ((fn.shape == FnShape::maximum || fn.shape == FnShape::gated_max) && n > 0) {
        double mx = 0.0;
        int arg = 0;
        for (int k = 0; k < n; ++k) {
          if (body[static_cast<std::size_t>(k)] > mx) {
            mx = body[static_cast<std::size_t>(k)];
            arg = k;
          }
        }
        asg[cs.m_vars[base * nr + ri]] = mx;
        for (int k = 0; k < n; ++k)
          asg[cs.w_vars[base * nprop + r.prop_begin + static_cast<std::uint32_t>(k)]] = k == arg ? 1.0 : 0.0;
        if (fn.shape == FnShape::gated_max) {
          double s = 0.0;
          for (int k = 0; k < n; ++k) s += body[static_cast<std::size_t>(k)];
          asg[cs.g_vars[base * nr + ri]] = s >= fn.threshold - kEpsEq ? 1.0 : 0.0;
        }
      }
      asg[static_cast<std::size_t>(cs.z_of(t, ri))] = gate ? fn.eval(body.data(), n) : 0.0;
    }
    for (AtomId a = 0; a < na; ++a) {
      const std::uint32_t b = gp.rules_of_off[static_cast<std::size_t>(a)];
      const std::uint32_t e = gp.rules_of_off[static_cast<std::size_t>(a) + 1];
      if (e == b) {
        asg[static_cast<std::size_t>(cs.x_of(t, a))] = 0.0;
        continue;
      }
      double mx = -1.0;
      std::uint32_t arg = b;
      for (std::uint32_t u = b; u < e; ++u) {
        const double z = asg[static_cast<std::size_t>(cs.z_of(t, static_cast<std::int32_t>(gp.rules_of_idx[u])))];
        if (z > mx) {
          mx = z;
          arg = u;
        }
      }
      asg[static_cast<std::size_t>(cs.x_of(t, a))] = mx;
      for (std::uint32_t u = b; u < e; ++u)
        asg[cs.u_vars[base * nr + gp.rules_of_idx[u]]] = u == arg ? 1.0 : 0.0;
    }
    for (std::int32_t ii = 0; ii < cs.vc_count; ++ii) {
      const VcInstance& inst = gp.vcs[static_cast<std::size_t>(ii)];
      for (int i = 0; i < cs.vc_m; ++i) {
        const AtomId head = inst.heads[static_cast<std::size_t>(i)];
        const double want =
            choice[static_cast<std::size_t>(ii)] == i
                ? asg[static_cast<std::size_t>(cs.x_of(t, inst.bodies[static_cast<std::size_t>(i)]))]
                : 0.0;
        if (has_rules(gp, head)) {
          if (std::abs(asg[static_cast<std::size_t>(cs.x_of(t, head))] - want) > kMilpFeasTol) return false;
        } else {
          asg[static_cast<std::size_t>(cs.x_of(t, head))] = want;
        }
      }
    }
  }

  if (cs.payoff_rows) {
    for (const VcInstance& inst : gp.vcs) {
      double sum_b = 0.0, max_a = 0.0;
      for (int i = 0; i < inst.m(); ++i) {
        sum_b += asg[static_cast<std::size_t>(cs.x_of(cs.t_hat, inst.heads[static_cast<std::size_t>(i)]))];
        max_a = std::max(
            max_a, asg[static_cast<std::size_t>(cs.x_of(cs.t_hat, inst.bodies[static_cast<std::size_t>(i)]))]);
      }
      if (sum_b + kEpsEq < max_a) return false;
    }
  }

  for (const AuxDef& d : cs.aux) {
    double best = d.kind == AuxKind::min_agg ? 2.0 : -1.0;
    int arg = 0;
    for (std::size_t k = 0; k < d.over.size(); ++k) {
      const double v = asg[static_cast<std::size_t>(d.over[k])];
      const bool take = d.kind == AuxKind::min_agg ? v < best : v > best;
      if (take) {
        best = v;
        arg = static_cast<int>(k);
      }
    }
    if (d.value_var >= 0) asg[static_cast<std::size_t>(d.value_var)] = d.over.empty() ? 0.0 : best;
    for (std::size_t k = 0; k < d.selectors.size(); ++k)
      asg[static_cast<std::size_t>(d.selectors[k])] = static_cast<int>(k) == arg ? 1.0 : 0.0;
  }
  return true;
}

}  // namespace

MilpSolution solve(const GroundProgram& gp, const ConstraintSystem& cs, SolveSense sense,
                   std::int64_t branch_cap) {
  if (cs.atom_count != gp.atom_count() || cs.rule_count != static_cast<std::int32_t>(gp.rules.size()) ||
      cs.vc_count != static_cast<std::int32_t>(gp.vcs.size()))
    throw ValidationError("constraint system does not match the ground program");

  double est = 1.0;
  for (std::int32_t ii = 0; ii < cs.vc_count; ++ii) est *= cs.vc_m;
  MilpSolution out;
  if (est > static_cast<double>(branch_cap)) {
    out.status = MilpSolution::Status::cap_exceeded;
    return out;
  }
  const std::int64_t total = static_cast<std::int64_t>(est);

  State s(static_cast<std::size_t>(cs.vc_count), 0);
  std::vector<double> asg(cs.vars.size(), 0.0), body;
  std::vector<double> best_asg;
  State best_choice;
  double best_obj = 0.0;
  bool found = false;
  auto checks_ok = [&cs](const std::vector<double>& a) {
    for (const Row& row : cs.checks) {
      double lhs = 0.0;
      for (const LinTerm& t : row.terms) lhs += t.coeff * a[static_cast<std::size_t>(t.var)];
      const bool ok = row.sense == RowSense::ge   ? lhs >= row.rhs - kMilpFeasTol
                      : row.sense == RowSense::le ? lhs <= row.rhs + kMilpFeasTol
                                                  : std::abs(lhs - row.rhs) <= kMilpFeasTol;
      if (!ok) return false;
    }
    return true;
  };
  for (std::int64_t it = 0; it < total; ++it) {
    if (!cut_blocked(cs, s) && propagate_choice(gp, cs, s, asg, body) && checks_ok(asg)) {
      double obj = cs.objective_constant;
      for (const LinTerm& term : cs.objective) obj += term.coeff * asg[static_cast<std::size_t>(term.var)];
      if (sense == SolveSense::feasibility) {
        out.status = MilpSolution::Status::optimal;
        out.assignment = asg;
        out.objective = obj;
        out.choice = s;
        return out;
      }
      const bool better = !found || (sense == SolveSense::maximize ? obj > best_obj : obj < best_obj);
      if (better) {
        found = true;
        best_obj = obj;
        best_asg = asg;
        best_choice = s;
      }
    }
    if (!advance(s, cs.vc_m)) break;
  }
  if (!found) {
    out.status = MilpSolution::Status::infeasible;
    return out;
  }
  out.status = MilpSolution::Status::optimal;
  out.assignment = std::move(best_asg);
  out.objective = best_obj;
  out.choice = std::move(best_choice);
  return out;
}

void add_no_good_cut(ConstraintSystem& cs, const State& s) {
  if (static_cast<std::int32_t>(s.size()) != cs.vc_count)
    throw ValidationError("cut does not match the choice instances");
  Row row;
  row.sense = RowSense::ge;
  double rhs = 1.0;
  for (std::int32_t ii = 0; ii < cs.vc_count; ++ii) {
    for (int i = 0; i < cs.vc_m; ++i) {
      if (i == s[static_cast<std::size_t>(ii)]) {
        row.terms.push_back({cs.y_of(ii, i), -1.0});
        rhs -= 1.0;
      } else {
        row.terms.push_back({cs.y_of(ii, i), 1.0});
      }
    }
  }
  row.rhs = rhs;
  cs.rows.push_back(std::move(row));
  cs.cuts.emplace_back(s.begin(), s.end());
}

int compute_t_hat(const GroundProgram& gp, int delta) {
  if (delta < 1) throw ValidationError("horizon step must be positive");
  const int cap = horizon_cap(gp.atom_count());

  auto stable_at = [&gp](int tbar) {
    ConstraintSystem cs = build_ilc(gp, tbar, IlcOptions{/*payoff_rows=*/false});
    for (AtomId a = 0; a < cs.atom_count; ++a) {
      cs.objective.push_back({cs.x_of(tbar, a), 1.0});
      cs.objective.push_back({cs.x_of(tbar - 1, a), -1.0});
    }
    const MilpSolution sol = solve(gp, cs, SolveSense::maximize);
    if (sol.status == MilpSolution::Status::cap_exceeded)
      throw CapExceededError("choice branch cap exceeded while bounding the horizon");
    return sol.status == MilpSolution::Status::optimal && sol.objective <= kMilpFeasTol;
  };

  int tbar = delta;
  while (!stable_at(tbar)) {
    tbar += delta;
    if (tbar > cap)
      throw NonConvergenceError("no stable horizon within " + std::to_string(cap) + " sweeps");
  }
  int lo = tbar - delta, hi = tbar;
  while (lo < hi - 1) {
    const int mid = lo + (hi - lo) / 2;
    if (stable_at(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

MilpEnumeration enumerate_se_milp(const GroundProgram& gp, const MilpEnumOptions& opts) {
  if (!gp.has_vc()) throw ValidationError("program has no choice rule");
  MilpEnumeration out;
  out.t_hat = opts.t_hat ? *opts.t_hat : compute_t_hat(gp, opts.delta);
  ConstraintSystem cs = build_ilc(gp, out.t_hat);
  for (;;) {
    const MilpSolution sol = solve(gp, cs, SolveSense::feasibility, opts.branch_cap);
    if (sol.status == MilpSolution::Status::cap_exceeded)
      throw CapExceededError("choice branch cap exceeded: more than " +
                             std::to_string(opts.branch_cap) + " option vectors");
    if (sol.status != MilpSolution::Status::optimal) break;
    out.items.push_back(Solution{sol.choice, solution_interpretation(gp, cs, sol)});
    add_no_good_cut(cs, sol.choice);
  }
  return out;
}

namespace {

void emit_terms(std::ostringstream& os, const std::vector<LinTerm>& terms,
                const std::vector<VarInfo>& vars, double constant) {
  bool first = true;
  for (const LinTerm& t : terms) {
    if (t.coeff == 0.0) continue;
    const double mag = std::abs(t.coeff);
    if (first) {
      os << (t.coeff < 0 ? " - " : " ");
      first = false;
    } else {
      os << (t.coeff < 0 ? " - " : " + ");
    }
    if (mag != 1.0) os << fmt_num(mag) << " ";
    os << vars[static_cast<std::size_t>(t.var)].name;
  }
  if (constant != 0.0) {
    if (first) {
      os << (constant < 0 ? " - " : " ") << fmt_num(std::abs(constant));
      first = false;
    } else {
      os << (constant < 0 ? " - " : " + ") << fmt_num(std::abs(constant));
    }
  }
  if (first) os << " 0";
}

}  // namespace

std::string export_lp(const ConstraintSystem& cs, SolveSense sense) {
  std::ostringstream os;
  os << (sense == SolveSense::minimize ? "Minimize" : "Maximize") << "\n obj:";
  emit_terms(os, cs.objective, cs.vars, cs.objective_constant);
  os << "\nSubject To\n";
  int ci = 0;
  for (const Row& row : cs.rows) {
    os << " c" << ++ci << ":";
    emit_terms(os, row.terms, cs.vars, 0.0);
    os << (row.sense == RowSense::ge ? " >= " : row.sense == RowSense::le ? " <= " : " = ")
       << fmt_num(row.rhs) << "\n";
  }
  os << "Bounds\n";
  for (const VarInfo& vi : cs.vars) {
    if (vi.binary) continue;
    os << " " << fmt_num(vi.lo) << " <= " << vi.name << " <= " << fmt_num(vi.hi) << "\n";
  }
  os << "Binary\n";
  for (const VarInfo& vi : cs.vars) {
    if (vi.binary) os << " " << vi.name << "\n";
  }
  os << "End\n";
  return os.str();
}

double max_violation(const ConstraintSystem& cs, const std::vector<double>& asg, std::string* first) {
  if (asg.size() != cs.vars.size()) throw ValidationError("assignment size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < cs.rows.size(); ++i) {
    const Row& row = cs.rows[i];
    double lhs = 0.0;
    for (const LinTerm& t : row.terms) lhs += t.coeff * asg[static_cast<std::size_t>(t.var)];
    double v = 0.0;
    switch (row.sense) {
      case RowSense::ge: v = std::max(0.0, row.rhs - lhs); break;
      case RowSense::le: v = std::max(0.0, lhs - row.rhs); break;
      case RowSense::eq: v = std::abs(lhs - row.rhs); break;
    }
    if (v > worst) {
      worst = v;
      if (first) *first = "c" + std::to_string(i + 1);
    }
  }
  return worst;
}

Interpretation solution_interpretation(const GroundProgram& gp, const ConstraintSystem& cs,
                                       const MilpSolution& sol) {
  if (sol.status != MilpSolution::Status::optimal)
    throw ValidationError("no assignment to extract");
  Interpretation out = Interpretation::bottom(gp);
  for (AtomId a = 0; a < cs.atom_count; ++a)
    out[a] = sol.assignment[static_cast<std::size_t>(cs.x_of(cs.t_hat, a))];
  return out;
}

}  // namespace cgap
