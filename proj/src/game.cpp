#include "cgap/game.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "json.hpp"

namespace cgap {

namespace {

void check_state(const GroundProgram& gp, const State& s) {
  if (s.size() != gp.vcs.size())
    throw ValidationError("state must assign one action per vertex-choice instance");
  for (size_t k = 0; k < s.size(); ++k)
    if (s[k] < 0 || s[k] >= gp.vcs[k].m())
      throw ValidationError("state action out of range at instance " + std::to_string(k));
}

}  // namespace

GroundProgram induced_program(const GroundProgram& gp, const State& s) {
  check_state(gp, s);
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
    int k = s[static_cast<size_t>(vi)];
    out.push_rule(vc.heads[static_cast<size_t>(k)], id, {vc.bodies[static_cast<size_t>(k)]},
                  {}, RuleOrigin::bridge, vi);
  }
  out.rebuild_index();
  return out;
}

FixpointReport induced_fixpoint(const GroundProgram& gp, const State& s) {
  check_state(gp, s);
  FixpointReport rep;
  rep.fixpoint = Interpretation::bottom(gp);
  Interpretation next(gp.atoms);
  std::int64_t cap = fixpoint_iteration_cap(gp.atom_count());
  while (rep.iterations < cap) {
    tp_step_into(gp, rep.fixpoint, next);
    for (size_t k = 0; k < gp.vcs.size(); ++k) {
      const VcInstance& vc = gp.vcs[k];
      AtomId b = vc.heads[static_cast<size_t>(s[k])];
      AtomId a = vc.bodies[static_cast<size_t>(s[k])];
      next[b] = std::max(next[b], rep.fixpoint[a]);
    }
    ++rep.iterations;
    double res = 0.0;
    const auto& u = rep.fixpoint.values();
    const auto& v = next.values();
    for (size_t k = 0; k < u.size(); ++k) res = std::max(res, std::fabs(u[k] - v[k]));
    rep.residual = res;
    std::swap(rep.fixpoint, next);
    if (res <= kEpsFix) {
      rep.converged = true;
      return rep;
    }
  }
  return rep;
}

Interpretation induced_fixpoint_strict(const GroundProgram& gp, const State& s) {
  FixpointReport rep = induced_fixpoint(gp, s);
  if (!rep.converged)
    throw NonConvergenceError("induced fixpoint did not stabilize within " +
                              std::to_string(rep.iterations) + " steps (residual " +
                              std::to_string(rep.residual) + ")");
  return std::move(rep.fixpoint);
}

double utility(const GroundProgram& gp, const State& s, int player, int action) {
  check_state(gp, s);
  const VcInstance& vc = gp.vcs.at(static_cast<size_t>(player));
  if (action < 0 || action >= vc.m()) throw ValidationError("action out of range");
  Interpretation mm = induced_fixpoint_strict(gp, s);
  return mm[vc.bodies[static_cast<size_t>(action)]];
}

bool is_nash_state(const GroundProgram& gp, const State& s) {
  check_state(gp, s);
  Interpretation base = induced_fixpoint_strict(gp, s);
  State dev = s;
  for (size_t p = 0; p < gp.vcs.size(); ++p) {
    const VcInstance& vc = gp.vcs[p];
    double have = base[vc.bodies[static_cast<size_t>(s[p])]];
    for (int a = 0; a < vc.m(); ++a) {
      if (a == s[p]) continue;
      dev[p] = a;
      Interpretation alt = induced_fixpoint_strict(gp, dev);
      if (alt[vc.bodies[static_cast<size_t>(a)]] > have + kEpsEq) return false;
    }
    dev[p] = s[p];
  }
  return true;
}

// ---------------------------------------------------------------------------
// Generic games
// ---------------------------------------------------------------------------

std::int64_t GenericGame::profile_count() const {
  std::int64_t c = 1;
  for (int i = 0; i < n(); ++i) c *= m();
  return c;
}

double GenericGame::at(int player, const std::vector<int>& profile) const {
  std::int64_t idx = 0;
  for (int i = 0; i < n(); ++i) idx = idx * m() + profile[static_cast<size_t>(i)];
  return util[static_cast<size_t>(player * profile_count() + idx)];
}

void GenericGame::validate() const {
  if (players.empty()) throw ValidationError("game has no players");
  if (actions.size() < 2) throw ValidationError("game needs at least two actions");
  if (static_cast<std::int64_t>(util.size()) != profile_count() * n())
    throw ValidationError("utility tensor size does not match players/actions");
  std::map<std::string, int> seen;
  for (const auto& p : players)
    if (++seen[p] > 1) throw ValidationError("duplicate player '" + p + "'");
  seen.clear();
  for (const auto& a : actions)
    if (++seen[a] > 1) throw ValidationError("duplicate action '" + a + "'");
}

Program compile_generic_game(const GenericGame& g, double eps) {
  g.validate();
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("eps must lie in (0,1)");

  double lo = g.util[0], hi = g.util[0];
  for (double u : g.util) {
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  auto scaled = [&](double u) {
    double x = hi > lo ? (u - lo) / (hi - lo) * (1.0 - eps) : 0.0;
    // Quantize upward to the 2-decimal grid; the slack keeps exact
    // hundredths from spilling into the next cell under fp noise.
    return std::ceil(x * 100.0 - 1e-9) / 100.0;
  };

  Program prog;
  int n = g.n(), m = g.m();
  std::vector<VertexId> pv(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) pv[static_cast<size_t>(p)] = prog.vertex(g.players[static_cast<size_t>(p)]);
  std::vector<PredId> up(static_cast<size_t>(m)), dp(static_cast<size_t>(m));
  for (int a = 0; a < m; ++a) {
    up[static_cast<size_t>(a)] = prog.pred(g.actions[static_cast<size_t>(a)] + "^U", PredKind::vertex);
    dp[static_cast<size_t>(a)] = prog.pred(g.actions[static_cast<size_t>(a)] + "^D", PredKind::vertex);
  }

  for (int p = 0; p < n; ++p)
    for (int a = 0; a < m; ++a) {
      GapRule base;
      base.head = Atom::unary(up[static_cast<size_t>(a)], Term::vertex(pv[static_cast<size_t>(p)]));
      base.ann = AnnotationExpr::constant(eps);
      prog.add_rule(std::move(base));
    }

  // One rule per player, own action, and joint opponent profile; the rule is
  // gated on every opponent's decision atom at threshold eps.
  std::vector<int> profile(static_cast<size_t>(n), 0);
  for (int p = 0; p < n; ++p)
    for (int a = 0; a < m; ++a) {
      std::fill(profile.begin(), profile.end(), 0);
      profile[static_cast<size_t>(p)] = a;
      while (true) {
        GapRule r;
        r.head = Atom::unary(up[static_cast<size_t>(a)], Term::vertex(pv[static_cast<size_t>(p)]));
        r.ann = AnnotationExpr::constant(scaled(g.at(p, profile)) + eps);
        for (int o = 0; o < n; ++o) {
          if (o == p) continue;
          r.conds.push_back({Atom::unary(dp[static_cast<size_t>(profile[static_cast<size_t>(o)])],
                                         Term::vertex(pv[static_cast<size_t>(o)])),
                             eps});
        }
        prog.add_rule(std::move(r));
        // next opponent profile (player p's digit stays fixed)
        int d = n - 1;
        while (d >= 0) {
          if (d == p) {
            --d;
            continue;
          }
          if (++profile[static_cast<size_t>(d)] < m) break;
          profile[static_cast<size_t>(d)] = 0;
          --d;
        }
        if (d < 0) break;
      }
    }

  VCRule vc;
  vc.heads = dp;
  vc.bodies = up;
  prog.set_vc(std::move(vc));
  prog.validate();
  return prog;
}

GenericGame parse_game_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 1, 1);
  }
  GenericGame g;
  try {
    for (const auto& p : j.at("players")) g.players.push_back(p.get<std::string>());
    for (const auto& a : j.at("actions")) g.actions.push_back(a.get<std::string>());
    const auto& u = j.at("utilities");
    if (!u.is_array() || u.size() != g.players.size())
      throw ValidationError("utilities must hold one tensor per player");
    std::function<void(const nlohmann::json&)> flatten = [&](const nlohmann::json& x) {
      if (x.is_array())
        for (const auto& e : x) flatten(e);
      else
        g.util.push_back(x.get<double>());
    };
    for (const auto& t : u) flatten(t);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed game file: ") + e.what());
  }
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Product-adoption games
// ---------------------------------------------------------------------------

void AptSimonGame::validate() const {
  if (vertices.empty()) throw ValidationError("adoption game has no vertices");
  if (products.size() < 2) throw ValidationError("adoption game needs at least two products");
  if (!(c0 > 0.0 && c0 <= 1.0)) throw ValidationError("c0 must lie in (0,1]");
  int n = static_cast<int>(vertices.size());
  int np = static_cast<int>(products.size());
  for (const auto& e : edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n || e.src == e.dst)
      throw ValidationError("edge endpoints out of range");
    if (!(e.w > 0.0 && e.w <= 1.0)) throw ValidationError("edge weight must lie in (0,1]");
  }
  if (availability.size() != vertices.size() || theta.size() != vertices.size())
    throw ValidationError("availability/theta must cover every vertex");
  for (int v = 0; v < n; ++v) {
    if (availability[static_cast<size_t>(v)].empty())
      throw ValidationError("vertex '" + vertices[static_cast<size_t>(v)] + "' has no available product");
    for (int q : availability[static_cast<size_t>(v)])
      if (q < 0 || q >= np) throw ValidationError("availability references unknown product");
    if (static_cast<int>(theta[static_cast<size_t>(v)].size()) != np)
      throw ValidationError("theta must list every product per vertex");
    for (double t : theta[static_cast<size_t>(v)])
      if (!(t > 0.0 && t <= 1.0)) throw ValidationError("theta must lie in (0,1]");
  }
}

Program compile_apt_simon(const AptSimonGame& g) {
  g.validate();
  Program prog;
  int n = static_cast<int>(g.vertices.size());
  int np = static_cast<int>(g.products.size());
  std::vector<VertexId> vv(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) vv[static_cast<size_t>(v)] = prog.vertex(g.vertices[static_cast<size_t>(v)]);
  std::vector<PredId> up(static_cast<size_t>(np)), dp(static_cast<size_t>(np));
  for (int q = 0; q < np; ++q) {
    up[static_cast<size_t>(q)] = prog.pred(g.products[static_cast<size_t>(q)] + "^U", PredKind::vertex);
    dp[static_cast<size_t>(q)] = prog.pred(g.products[static_cast<size_t>(q)] + "^D", PredKind::vertex);
  }

  // In-neighbors with weights, sorted by source for determinism.
  std::vector<std::vector<std::pair<int, double>>> in(static_cast<size_t>(n));
  for (const auto& e : g.edges) in[static_cast<size_t>(e.dst)].emplace_back(e.src, e.w);
  for (auto& lst : in) std::sort(lst.begin(), lst.end());

  for (int v = 0; v < n; ++v) {
    for (int q : g.availability[static_cast<size_t>(v)]) {
      const auto& nbr = in[static_cast<size_t>(v)];
      GapRule r;
      r.head = Atom::unary(up[static_cast<size_t>(q)], Term::vertex(vv[static_cast<size_t>(v)]));
      if (nbr.empty()) {
        r.ann = AnnotationExpr::constant(g.c0);
      } else {
        int k = static_cast<int>(nbr.size());
        std::vector<double> coeffs(static_cast<size_t>(k));
        std::vector<VarId> args(static_cast<size_t>(k));
        for (int j = 0; j < k; ++j) {
          coeffs[static_cast<size_t>(j)] =
              (nbr[static_cast<size_t>(j)].second - g.theta[static_cast<size_t>(v)][static_cast<size_t>(q)]) /
              (2.0 * k);
          args[static_cast<size_t>(j)] = j;
          r.prop.push_back({Atom::unary(dp[static_cast<size_t>(q)],
                                        Term::vertex(vv[static_cast<size_t>(nbr[static_cast<size_t>(j)].first)])),
                            j});
        }
        FnId f = prog.functions().add(AnnotationFn::indicator_sum_fn(std::move(coeffs), 0.5));
        r.ann = AnnotationExpr::apply(f, std::move(args));
      }
      prog.add_rule(std::move(r));
    }
  }

  VCRule vc;
  vc.heads = dp;
  vc.bodies = up;
  prog.set_vc(std::move(vc));
  prog.validate();
  return prog;
}

AptSimonGame parse_asg_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 1, 1);
  }
  AptSimonGame g;
  try {
    std::map<std::string, int> vid, pid;
    for (const auto& v : j.at("vertices")) {
      std::string name = v.get<std::string>();
      vid.emplace(name, static_cast<int>(g.vertices.size()));
      g.vertices.push_back(name);
    }
    for (const auto& p : j.at("products")) {
      std::string name = p.get<std::string>();
      pid.emplace(name, static_cast<int>(g.products.size()));
      g.products.push_back(name);
    }
    auto vertex_of = [&](const std::string& s) {
      auto it = vid.find(s);
      if (it == vid.end()) throw ValidationError("unknown vertex '" + s + "'");
      return it->second;
    };
    auto product_of = [&](const std::string& s) {
      auto it = pid.find(s);
      if (it == pid.end()) throw ValidationError("unknown product '" + s + "'");
      return it->second;
    };
    for (const auto& e : j.at("edges")) {
      AptSimonGame::Edge edge;
      edge.src = vertex_of(e.at(0).get<std::string>());
      edge.dst = vertex_of(e.at(1).get<std::string>());
      edge.w = e.size() > 2 ? e.at(2).get<double>() : 1.0;
      g.edges.push_back(edge);
    }
    g.c0 = j.at("c0").get<double>();

    size_t n = g.vertices.size(), np = g.products.size();
    g.availability.assign(n, {});
    if (j.contains("availability")) {
      for (const auto& [name, arr] : j.at("availability").items()) {
        auto& lst = g.availability[static_cast<size_t>(vertex_of(name))];
        for (const auto& p : arr) lst.push_back(product_of(p.get<std::string>()));
        std::sort(lst.begin(), lst.end());
      }
    } else {
      for (auto& lst : g.availability) {
        lst.resize(np);
        for (size_t q = 0; q < np; ++q) lst[q] = static_cast<int>(q);
      }
    }

    g.theta.assign(n, std::vector<double>(np, 0.0));
    const auto& th = j.at("theta");
    if (th.is_number()) {
      for (auto& row : g.theta) std::fill(row.begin(), row.end(), th.get<double>());
    } else {
      for (const auto& [name, spec] : th.items()) {
        auto& row = g.theta[static_cast<size_t>(vertex_of(name))];
        if (spec.is_number())
          std::fill(row.begin(), row.end(), spec.get<double>());
        else
          for (const auto& [pname, val] : spec.items())
            row[static_cast<size_t>(product_of(pname))] = val.get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed adoption-game file: ") + e.what());
  }
  g.validate();
  return g;
}

}  // namespace cgap
