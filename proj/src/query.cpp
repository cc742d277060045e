#include "cgap/query.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cgap/errors.hpp"
#include "cgap/text.hpp"
#include "cgap/vic.hpp"

namespace cgap {
namespace {

double apply_aggregate(const EstimationQuery& q, const std::vector<double>& vals) {
  switch (q.agg) {
    case Aggregate::sum: {
      double s = 0.0;
      for (double v : vals) s += v;
      return s;
    }
    case Aggregate::count: {
      double c = 0.0;
      for (double v : vals)
        if (v > kEpsEq) c += 1.0;
      return c;
    }
    case Aggregate::min:
    case Aggregate::max: {
      if (vals.empty()) throw ValidationError("empty target set");
      return q.agg == Aggregate::min ? *std::min_element(vals.begin(), vals.end())
                                     : *std::max_element(vals.begin(), vals.end());
    }
    case Aggregate::linear: {
      if (!q.linear.aux.empty())
        throw ValidationError("linear query with auxiliary variables requires the milp method");
      if (q.linear.c1.size() != vals.size())
        throw ValidationError("linear coefficient count does not match the targets");
      double s = q.linear.k;
      for (std::size_t i = 0; i < vals.size(); ++i) s += q.linear.c1[i] * vals[i];
      return s;
    }
  }
  throw ValidationError("unknown aggregate");
}

}  // namespace

ChoiceAtoms augment_choice_atoms(const GroundProgram& gp) {
  ChoiceAtoms out;
  const int m = gp.vcs.empty() ? 0 : gp.vcs.front().m();
  out.names.reserve(gp.vcs.size() * static_cast<std::size_t>(m));
  for (std::int32_t ii = 0; ii < static_cast<std::int32_t>(gp.vcs.size()); ++ii) {
    const VcInstance& inst = gp.vcs[static_cast<std::size_t>(ii)];
    for (int i = 0; i < inst.m(); ++i) {
      std::string name = "c_" + gp.atom_name(inst.heads[static_cast<std::size_t>(i)]);
      out.index.emplace(name, std::make_pair(ii, i));
      out.names.push_back(std::move(name));
    }
  }
  return out;
}

bool monotone_query(const EstimationQuery& q) {
  switch (q.agg) {
    case Aggregate::sum:
    case Aggregate::count:
    case Aggregate::min:
    case Aggregate::max:
      return true;
    case Aggregate::linear: {
      for (double c : q.linear.c1)
        if (c < 0.0) return false;
      for (double c : q.linear.c2)
        if (c < 0.0) return false;
      return true;
    }
  }
  return false;
}

double target_value(const GroundProgram& gp, const QueryTarget& t, const Interpretation& i,
                    const State* state) {
  if (!t.is_choice()) {
    if (t.atom < 0 || t.atom >= gp.atom_count()) throw ValidationError("target atom out of range");
    return i[t.atom];
  }
  if (t.vc < 0 || t.vc >= static_cast<std::int32_t>(gp.vcs.size()))
    throw ValidationError("choice target out of range");
  if (state && !state->empty()) return (*state)[static_cast<std::size_t>(t.vc)] == t.option ? 1.0 : 0.0;
  const auto sel = selected_option(i, gp.vcs[static_cast<std::size_t>(t.vc)]);
  if (!sel) throw ValidationError("choice atom undefined: the interpretation selects no pair");
  return *sel == t.option ? 1.0 : 0.0;
}

double eval_query(const GroundProgram& gp, const EstimationQuery& q, const Interpretation& i,
                  const State* state) {
  std::vector<double> vals;
  vals.reserve(q.targets.size());
  for (const QueryTarget& t : q.targets) vals.push_back(target_value(gp, t, i, state));
  return apply_aggregate(q, vals);
}

RangeAnswer range_naive(const GroundProgram& gp, const EstimationQuery& q, const EnumOptions& opts) {
  RangeAnswer out;
  out.method = "naive";
  const EnumerationResult res = enumerate_strong_equilibria(gp, opts);
  bool first = true;
  for (const Solution& s : res.items) {
    const double v = eval_query(gp, q, s.model, &s.state);
    if (first || v < out.glb) {
      out.glb = v;
      out.glb_witness = s;
    }
    if (first || v > out.lub) {
      out.lub = v;
      out.lub_witness = s;
    }
    first = false;
  }
  if (!first) out.status = RangeStatus::exact;
  return out;
}

RangeAnswer range_monotone_vic2(const GroundProgram& gp, const EstimationQuery& q) {
  if (!monotone_query(q))
    throw ValidationError("aggregate is not monotone; use the naive or milp method");
  if (q.agg == Aggregate::linear && !q.linear.aux.empty())
    throw ValidationError("linear query with auxiliary variables requires the milp method");
  if (!gp.source) throw ValidationError("ground program lacks its source program");
  const VicClassification cls = classify(*gp.source);
  if (!cls.vic)
    throw ValidationError("program is not choice-independent: " + cls.witness);
  if (cls.m != 2) throw ValidationError("two-sided method requires a choice rule of arity 2");

  auto in_side = [&cls](PredId p, int side) {
    const auto& set = cls.pred_sets[static_cast<std::size_t>(side)];
    return std::find(set.begin(), set.end(), p) != set.end();
  };
  auto target_pred = [&gp](const QueryTarget& t) {
    if (t.is_choice())
      return gp.atoms
          ->at(gp.vcs[static_cast<std::size_t>(t.vc)].heads[static_cast<std::size_t>(t.option)])
          .pred;
    return gp.atoms->at(t.atom).pred;
  };
  bool all1 = true, all2 = true;
  for (const QueryTarget& t : q.targets) {
    const PredId p = target_pred(t);
    all1 = all1 && in_side(p, 0);
    all2 = all2 && in_side(p, 1);
  }
  const bool mixed = !all1 && !all2;

  const ExtremalModels ex = extremal_models(gp, /*with_mixed=*/mixed);
  RangeAnswer out;
  out.method = "monotone";
  if (!mixed) {
    // One-sided targets: side 1 is minimal under s21 and maximal under s12;
    // side 2 the other way around.
    const State& lo_s = all1 ? ex.s21 : ex.s12;
    const State& hi_s = all1 ? ex.s12 : ex.s21;
    const Interpretation& lo_m = all1 ? ex.m21 : ex.m12;
    const Interpretation& hi_m = all1 ? ex.m12 : ex.m21;
    out.status = RangeStatus::exact;
    out.glb = eval_query(gp, q, lo_m, &lo_s);
    out.lub = eval_query(gp, q, hi_m, &hi_s);
    out.glb_witness = Solution{lo_s, lo_m};
    out.lub_witness = Solution{hi_s, hi_m};
    return out;
  }
  // Mixed sides: evaluate on the both-sides-minimal and both-sides-maximal
  // bound models.  Choice targets read the state that produced their side's
  // part; the result brackets the true range but need not be attained.
  std::vector<double> lo_vals, hi_vals;
  for (const QueryTarget& t : q.targets) {
    if (t.is_choice()) {
      const State& lo_s = t.option == 0 ? ex.s21 : ex.s12;
      const State& hi_s = t.option == 0 ? ex.s12 : ex.s21;
      lo_vals.push_back(lo_s[static_cast<std::size_t>(t.vc)] == t.option ? 1.0 : 0.0);
      hi_vals.push_back(hi_s[static_cast<std::size_t>(t.vc)] == t.option ? 1.0 : 0.0);
    } else {
      lo_vals.push_back(ex.mixed_low[t.atom]);
      hi_vals.push_back(ex.mixed_high[t.atom]);
    }
  }
  out.status = RangeStatus::bounds_only;
  out.glb = apply_aggregate(q, lo_vals);
  out.lub = apply_aggregate(q, hi_vals);
  return out;
}

namespace {

// Adds value + selector variables tying `value` to the minimum (or maximum)
// of `over`, mirroring the two-target single-binary layout for n == 2.
std::int32_t encode_extremum(ConstraintSystem& cs, const std::vector<std::int32_t>& over,
                             bool is_min) {
  if (over.empty()) throw ValidationError("empty target set");
  AuxDef d;
  d.kind = is_min ? AuxKind::min_agg : AuxKind::max_agg;
  VarInfo value;
  value.name = (is_min ? "q_min_" : "q_max_") + std::to_string(cs.vars.size());
  value.kind = VarKind::aux;
  d.value_var = cs.add_var(std::move(value));
  d.over = over;
  const int n = static_cast<int>(over.size());
  auto sel_var = [&cs](int k) {
    VarInfo s;
    s.name = "q_sel_" + std::to_string(cs.vars.size()) + "_" + std::to_string(k + 1);
    s.kind = VarKind::aux;
    s.binary = true;
    return cs.add_var(std::move(s));
  };
  if (n == 1) {
    cs.add_row({{d.value_var, 1.0}, {over[0], -1.0}}, RowSense::eq, 0.0);
  } else if (n == 2) {
    const std::int32_t y1 = sel_var(0);
    d.selectors = {y1};
    if (is_min) {
      cs.add_row({{over[0], 1.0}, {d.value_var, -1.0}}, RowSense::ge, 0.0);
      cs.add_row({{over[1], 1.0}, {d.value_var, -1.0}}, RowSense::ge, 0.0);
      cs.add_row({{d.value_var, 1.0}, {over[0], -1.0}, {y1, -1.0}}, RowSense::ge, -1.0);
      cs.add_row({{d.value_var, 1.0}, {over[1], -1.0}, {y1, 1.0}}, RowSense::ge, 0.0);
    } else {
      cs.add_row({{d.value_var, 1.0}, {over[0], -1.0}}, RowSense::ge, 0.0);
      cs.add_row({{d.value_var, 1.0}, {over[1], -1.0}}, RowSense::ge, 0.0);
      cs.add_row({{over[0], 1.0}, {d.value_var, -1.0}, {y1, -1.0}}, RowSense::ge, -1.0);
      cs.add_row({{over[1], 1.0}, {d.value_var, -1.0}, {y1, 1.0}}, RowSense::ge, 0.0);
    }
  } else {
    std::vector<LinTerm> one;
    for (int k = 0; k < n; ++k) {
      const std::int32_t sk = sel_var(k);
      d.selectors.push_back(sk);
      one.push_back({sk, 1.0});
      if (is_min) {
        cs.add_row({{over[static_cast<std::size_t>(k)], 1.0}, {d.value_var, -1.0}}, RowSense::ge, 0.0);
        cs.add_row({{d.value_var, 1.0}, {over[static_cast<std::size_t>(k)], -1.0}, {sk, -1.0}},
                   RowSense::ge, -1.0);
      } else {
        cs.add_row({{d.value_var, 1.0}, {over[static_cast<std::size_t>(k)], -1.0}}, RowSense::ge, 0.0);
        cs.add_row({{over[static_cast<std::size_t>(k)], 1.0}, {d.value_var, -1.0}, {sk, -1.0}},
                   RowSense::ge, -1.0);
      }
    }
    cs.add_row(std::move(one), RowSense::eq, 1.0);
  }
  const std::int32_t value_var = d.value_var;
  cs.aux.push_back(std::move(d));
  return value_var;
}

}  // namespace

ConstraintSystem build_query_system(const GroundProgram& gp, const EstimationQuery& q,
                                    const MilpQueryOptions& opts) {
  const int t_hat = opts.t_hat ? *opts.t_hat : compute_t_hat(gp, opts.delta);
  ConstraintSystem cs = build_ilc(gp, t_hat);

  std::vector<std::int32_t> tv;
  tv.reserve(q.targets.size());
  for (const QueryTarget& t : q.targets) {
    if (t.is_choice()) {
      if (t.vc < 0 || t.vc >= cs.vc_count || t.option < 0 || t.option >= cs.vc_m)
        throw ValidationError("choice target out of range");
      tv.push_back(cs.y_of(t.vc, t.option));
    } else {
      if (t.atom < 0 || t.atom >= cs.atom_count) throw ValidationError("target atom out of range");
      tv.push_back(cs.x_of(t_hat, t.atom));
    }
  }

  switch (q.agg) {
    case Aggregate::sum:
      for (std::int32_t v : tv) cs.objective.push_back({v, 1.0});
      break;
    case Aggregate::count: {
      for (const QueryTarget& t : q.targets)
        if (!t.is_choice())
          throw ValidationError("count over program atoms requires the naive method");
      for (std::int32_t v : tv) cs.objective.push_back({v, 1.0});
      break;
    }
    case Aggregate::min:
    case Aggregate::max:
      cs.objective.push_back({encode_extremum(cs, tv, q.agg == Aggregate::min), 1.0});
      break;
    case Aggregate::linear: {
      if (!q.linear.aux.empty())
        throw ValidationError(
            "user auxiliary variables are not supported by the internal solver; use the builtin "
            "min/max aggregates");
      if (q.linear.c1.size() != tv.size())
        throw ValidationError("linear coefficient count does not match the targets");
      cs.objective_constant = q.linear.k;
      for (std::size_t i = 0; i < tv.size(); ++i) cs.objective.push_back({tv[i], q.linear.c1[i]});
      for (const QueryRow& qr : q.linear.cf) {
        Row row;
        row.sense = qr.sense;
        row.rhs = qr.rhs;
        for (const QueryTerm& term : qr.terms) {
          if (term.aux || term.index < 0 || term.index >= static_cast<std::int32_t>(tv.size()))
            throw ValidationError("side constraint references an unknown variable");
          row.terms.push_back({tv[static_cast<std::size_t>(term.index)], term.coeff});
        }
        cs.checks.push_back(row);
        cs.rows.push_back(std::move(row));
      }
      break;
    }
  }
  return cs;
}

RangeAnswer range_linear_milp(const GroundProgram& gp, const EstimationQuery& q,
                              const MilpQueryOptions& opts) {
  ConstraintSystem cs = build_query_system(gp, q, opts);
  RangeAnswer out;
  out.method = "milp";
  const MilpSolution lo = solve(gp, cs, SolveSense::minimize, opts.branch_cap);
  if (lo.status == MilpSolution::Status::cap_exceeded)
    throw CapExceededError("choice branch cap exceeded: more than " +
                           std::to_string(opts.branch_cap) + " option vectors");
  if (lo.status != MilpSolution::Status::optimal) return out;
  const MilpSolution hi = solve(gp, cs, SolveSense::maximize, opts.branch_cap);
  out.status = RangeStatus::exact;
  out.glb = lo.objective;
  out.lub = hi.objective;
  out.glb_witness = Solution{lo.choice, solution_interpretation(gp, cs, lo)};
  out.lub_witness = Solution{hi.choice, solution_interpretation(gp, cs, hi)};
  return out;
}

std::vector<QueryTarget> resolve_targets(const GroundProgram& gp,
                                         const std::vector<std::string>& patterns) {
  const ChoiceAtoms ca = augment_choice_atoms(gp);
  const std::int32_t na = gp.atom_count();
  std::vector<std::string> atom_names(static_cast<std::size_t>(na));
  for (AtomId a = 0; a < na; ++a) atom_names[static_cast<std::size_t>(a)] = gp.atom_name(a);
  const int m = gp.vcs.empty() ? 0 : gp.vcs.front().m();

  std::vector<QueryTarget> out;
  std::set<std::pair<std::int32_t, std::int32_t>> seen;
  for (const std::string& pat : patterns) {
    bool any = false;
    auto push_atom = [&](AtomId a) {
      if (seen.emplace(a, -1).second) out.push_back(QueryTarget{a, -1, -1});
      any = true;
    };
    auto push_choice = [&](std::int32_t vc, int option) {
      if (seen.emplace(-1, vc * m + option).second) out.push_back(QueryTarget{-1, vc, option});
      any = true;
    };
    if (pat.find('*') == std::string::npos) {
      if (auto a = gp.find_atom_by_name(pat)) {
        push_atom(*a);
      } else if (auto it = ca.index.find(pat); it != ca.index.end()) {
        push_choice(it->second.first, it->second.second);
      }
    } else {
      for (AtomId a = 0; a < na; ++a)
        if (glob_match(pat, atom_names[static_cast<std::size_t>(a)])) push_atom(a);
      for (std::size_t k = 0; k < ca.names.size(); ++k)
        if (glob_match(pat, ca.names[k]))
          push_choice(static_cast<std::int32_t>(k) / m, static_cast<int>(k) % m);
    }
    if (!any) throw ValidationError("target pattern matched nothing: " + pat);
  }
  return out;
}

EstimationQuery parse_query_json(const std::string& text, const GroundProgram& gp) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("query json: ") + e.what(), 1, 1);
  }
  if (!j.is_object()) throw ParseError("query json: object expected", 1, 1);

  EstimationQuery q;
  const std::string agg = j.value("aggregate", std::string("sum"));
  if (agg == "sum")
    q.agg = Aggregate::sum;
  else if (agg == "count")
    q.agg = Aggregate::count;
  else if (agg == "min")
    q.agg = Aggregate::min;
  else if (agg == "max")
    q.agg = Aggregate::max;
  else if (agg == "linear")
    q.agg = Aggregate::linear;
  else
    throw ParseError("query json: unknown aggregate '" + agg + "'", 1, 1);

  if (!j.contains("targets") || !j["targets"].is_array())
    throw ParseError("query json: targets array required", 1, 1);
  std::vector<std::string> patterns;
  for (const auto& e : j["targets"]) {
    if (!e.is_string()) throw ParseError("query json: targets must be strings", 1, 1);
    patterns.push_back(e.get<std::string>());
  }
  q.targets = resolve_targets(gp, patterns);

  if (q.agg == Aggregate::linear) {
    if (!j.contains("linear_spec") || !j["linear_spec"].is_object())
      throw ParseError("query json: linear aggregate requires linear_spec", 1, 1);
    const auto& ls = j["linear_spec"];
    q.linear.k = ls.value("k", 0.0);
    if (ls.contains("c1")) {
      for (const auto& e : ls["c1"]) q.linear.c1.push_back(e.get<double>());
    } else {
      q.linear.c1.assign(q.targets.size(), 1.0);
    }
    if (q.linear.c1.size() != q.targets.size())
      throw ParseError("query json: c1 length must match the expanded targets", 1, 1);
    if (ls.contains("aux")) {
      for (const auto& e : ls["aux"]) {
        QueryAuxVar av;
        av.name = e.value("name", "y" + std::to_string(q.linear.aux.size() + 1));
        av.binary = e.value("binary", false);
        av.lo = e.value("lo", 0.0);
        av.hi = e.value("hi", 1.0);
        q.linear.aux.push_back(std::move(av));
      }
    }
    if (ls.contains("c2")) {
      for (const auto& e : ls["c2"]) q.linear.c2.push_back(e.get<double>());
    } else {
      q.linear.c2.assign(q.linear.aux.size(), 0.0);
    }
    if (q.linear.c2.size() != q.linear.aux.size())
      throw ParseError("query json: c2 length must match aux", 1, 1);
    if (ls.contains("constraints")) {
      for (const auto& e : ls["constraints"]) {
        QueryRow row;
        const std::string sense = e.value("sense", std::string(">="));
        row.sense = sense == ">=" ? RowSense::ge : sense == "<=" ? RowSense::le : RowSense::eq;
        if (sense != ">=" && sense != "<=" && sense != "=")
          throw ParseError("query json: constraint sense must be >=, <= or =", 1, 1);
        row.rhs = e.value("rhs", 0.0);
        if (!e.contains("terms") || !e["terms"].is_array())
          throw ParseError("query json: constraint terms required", 1, 1);
        for (const auto& te : e["terms"]) {
          QueryTerm term;
          term.coeff = te.value("coeff", 1.0);
          if (te.contains("x")) {
            term.aux = false;
            term.index = te["x"].get<std::int32_t>();
            if (term.index < 0 || term.index >= static_cast<std::int32_t>(q.targets.size()))
              throw ParseError("query json: term index x out of range", 1, 1);
          } else if (te.contains("y")) {
            term.aux = true;
            term.index = te["y"].get<std::int32_t>();
            if (term.index < 0 || term.index >= static_cast<std::int32_t>(q.linear.aux.size()))
              throw ParseError("query json: term index y out of range", 1, 1);
          } else {
            throw ParseError("query json: constraint terms need x or y", 1, 1);
          }
          row.terms.push_back(term);
        }
        q.linear.cf.push_back(std::move(row));
      }
    }
    // Every declared auxiliary must be consumed somewhere.
    for (std::size_t k = 0; k < q.linear.aux.size(); ++k) {
      bool used = q.linear.c2[k] != 0.0;
      for (const QueryRow& row : q.linear.cf)
        for (const QueryTerm& term : row.terms) used = used || (term.aux && term.index == static_cast<std::int32_t>(k));
      if (!used)
        throw ParseError("query json: auxiliary variable '" + q.linear.aux[k].name + "' is unused", 1, 1);
    }
  }
  return q;
}

}  // namespace cgap
