#pragma once

// Test-side utilities: parsing shortcuts, interpretation builders, map
// comparison with a default of zero, lexicographic state iteration, and the
// seeded random-program generator behind the cross-validation and property
// suites. Throws std::runtime_error on misuse; no doctest macros here so the
// acceptance binary can reuse everything.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cgap/equilibria.hpp"
#include "cgap/game.hpp"
#include "cgap/ground.hpp"
#include "cgap/milp.hpp"
#include "cgap/query.hpp"
#include "cgap/semantics.hpp"
#include "cgap/text.hpp"
#include "cgap/vic.hpp"

namespace testutil {

using namespace cgap;

inline Program parse_valid(const std::string& text) {
  Program p = parse_program(text);
  p.validate();
  return p;
}

inline GroundProgram parse_and_ground(const std::string& text) {
  return ground(parse_valid(text));
}

inline GroundProgram parse_and_ground(const std::string& text, const std::string& sn_tsv) {
  SocialNetwork sn = parse_network(sn_tsv);
  return ground(parse_valid(text), sn);
}

inline AtomId atom_id(const GroundProgram& gp, const std::string& name) {
  auto id = gp.find_atom_by_name(name);
  if (!id) throw std::runtime_error("no such atom: " + name);
  return *id;
}

inline double value(const GroundProgram& gp, const Interpretation& i, const std::string& name) {
  return i[atom_id(gp, name)];
}

inline Interpretation make_interp(const GroundProgram& gp,
                                  const std::map<std::string, double>& vals) {
  Interpretation i = Interpretation::bottom(gp);
  for (const auto& [name, v] : vals) i[atom_id(gp, name)] = v;
  return i;
}

inline std::map<std::string, double> model_map(const GroundProgram& gp,
                                               const Interpretation& i) {
  std::map<std::string, double> out;
  for (AtomId a = 0; a < gp.atom_count(); ++a) out[gp.atom_name(a)] = i[a];
  return out;
}

// Keys missing from either side count as zero.
inline bool maps_close(const std::map<std::string, double>& a,
                       const std::map<std::string, double>& b, double tol,
                       std::string* why = nullptr) {
  std::set<std::string> keys;
  for (const auto& [k, _] : a) keys.insert(k);
  for (const auto& [k, _] : b) keys.insert(k);
  for (const std::string& k : keys) {
    auto ia = a.find(k), ib = b.find(k);
    double va = ia == a.end() ? 0.0 : ia->second;
    double vb = ib == b.end() ? 0.0 : ib->second;
    if (std::fabs(va - vb) > tol) {
      if (why) *why = k + ": " + std::to_string(va) + " vs " + std::to_string(vb);
      return false;
    }
  }
  return true;
}

inline bool interp_close(const Interpretation& a, const Interpretation& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::fabs(a.values()[i] - b.values()[i]) > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// State iteration (lexicographic, instance 0 most significant)
// ---------------------------------------------------------------------------

inline std::int64_t state_count(const GroundProgram& gp) {
  std::int64_t total = 1;
  for (const auto& vc : gp.vcs) total *= vc.m();
  return total;
}

inline State nth_state(const GroundProgram& gp, std::int64_t index) {
  State s(gp.vcs.size(), 0);
  for (std::size_t k = gp.vcs.size(); k-- > 0;) {
    int m = gp.vcs[k].m();
    s[k] = static_cast<int>(index % m);
    index /= m;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Seeded RNG plumbing
// ---------------------------------------------------------------------------

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline int rand_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool coin(std::mt19937_64& rng, double p = 0.5) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

// Annotation constants live on a 0.05 grid so derived values stay clear of
// condition bounds at MILP resolution.
inline double grid05(std::mt19937_64& rng, int lo = 1, int hi = 19) {
  return 0.05 * rand_int(rng, lo, hi);
}

inline std::string num2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Random program generator
// ---------------------------------------------------------------------------

struct GenSpec {
  int min_vertices = 2;
  int max_vertices = 6;
  int m = 2;
  bool force_vic = false;   // keep the option sides independent
  bool finite_only = false; // only shapes with exactly-reached fixpoints
  bool with_ground_text = false;
};

struct GenProgram {
  std::string text;         // variable-level program
  std::string ground_text;  // naive hand expansion over the full vertex grid
  bool vic_safe = true;     // no cross-side or decision-head statements emitted
  int n = 0;
  int m = 2;
};

inline GenProgram random_program(std::mt19937_64& rng, const GenSpec& spec) {
  GenProgram out;
  out.n = rand_int(rng, spec.min_vertices, spec.max_vertices);
  out.m = spec.m;
  const int n = out.n, m = spec.m;

  auto vname = [](int i) { return "v" + std::to_string(i + 1); };
  std::vector<std::string> directives, facts, rules, ground_rules;

  // Every vertex carries a plain fact so both variants agree on the domain.
  for (int i = 0; i < n; ++i) facts.push_back("s(" + vname(i) + "):" + num2(grid05(rng)) + ".");

  std::vector<std::pair<int, int>> edges;
  const double p_edge = std::min(0.9, 1.8 / n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && coin(rng, p_edge)) edges.emplace_back(a, b);
  for (auto [a, b] : edges)
    facts.push_back("e(" + vname(a) + "," + vname(b) + "):1.");

  bool any_u_fact = false;
  for (int k = 1; k <= m; ++k)
    for (int i = 0; i < n; ++i)
      if (coin(rng, 0.4)) {
        facts.push_back("u" + std::to_string(k) + "(" + vname(i) + "):" + num2(grid05(rng)) +
                        ".");
        any_u_fact = true;
      }
  if (!any_u_fact)
    facts.push_back("u1(" + vname(0) + "):" + num2(grid05(rng)) + ".");

  int named = 0;
  // Emits one randomly shaped rule for utility side `k` reading decision side
  // `src` (src == k keeps the sides independent).
  auto emit_rule = [&](int k, int src) {
    const std::string uk = "u" + std::to_string(k);
    const std::string dsrc = "d" + std::to_string(src);
    int max_shape = spec.finite_only ? 4 : 6;
    int shape = rand_int(rng, 0, max_shape);
    switch (shape) {
      case 0: {  // plain propagation
        rules.push_back(uk + "(Y):M <- e(X,Y):1, " + dsrc + "(X):M.");
        if (spec.with_ground_text)
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              ground_rules.push_back(uk + "(" + vname(b) + "):M <- e(" + vname(a) + "," +
                                     vname(b) + "):1, " + dsrc + "(" + vname(a) + "):M.");
        break;
      }
      case 1: {  // conditional fact gated on a decision atom
        std::string line = uk + "(" + vname(rand_int(rng, 0, n - 1)) + "):" +
                           num2(grid05(rng)) + " <- " + dsrc + "(" +
                           vname(rand_int(rng, 0, n - 1)) + "):" + num2(grid05(rng)) + ".";
        rules.push_back(line);
        if (spec.with_ground_text) ground_rules.push_back(line);
        break;
      }
      case 2: {  // max merge of a neighbor decision and own-side utility
        rules.push_back(uk + "(Y):max(M,N) <- e(X,Y):1, " + dsrc + "(X):M, " + uk + "(X):N.");
        if (spec.with_ground_text)
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              ground_rules.push_back(uk + "(" + vname(b) + "):max(M,N) <- e(" + vname(a) + "," +
                                     vname(b) + "):1, " + dsrc + "(" + vname(a) + "):M, " + uk +
                                     "(" + vname(a) + "):N.");
        break;
      }
      case 3: {  // conditional fact gated on a utility atom
        std::string line = uk + "(" + vname(rand_int(rng, 0, n - 1)) + "):" +
                           num2(grid05(rng)) + " <- " + uk + "(" +
                           vname(rand_int(rng, 0, n - 1)) + "):" + num2(grid05(rng)) + ".";
        rules.push_back(line);
        if (spec.with_ground_text) ground_rules.push_back(line);
        break;
      }
      case 4: {  // gated max over two decision atoms
        double tau = grid05(rng, 4, 16);
        std::string fn = "gt" + std::to_string(++named);
        directives.push_back("#function " + fn + " 2 gated-max(" + num2(tau) + ")");
        rules.push_back(uk + "(Y):" + fn + "(M,N) <- e(X,Y):1, " + dsrc + "(X):M, " + dsrc +
                        "(Y):N.");
        if (spec.with_ground_text)
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              ground_rules.push_back(uk + "(" + vname(b) + "):" + fn + "(M,N) <- e(" +
                                     vname(a) + "," + vname(b) + "):1, " + dsrc + "(" +
                                     vname(a) + "):M, " + dsrc + "(" + vname(b) + "):N.");
        break;
      }
      case 5: {  // averaging merge (converges only in the limit)
        rules.push_back(uk + "(Y):avg(M,N) <- e(X,Y):1, " + dsrc + "(X):M, " + uk + "(X):N.");
        if (spec.with_ground_text)
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              ground_rules.push_back(uk + "(" + vname(b) + "):avg(M,N) <- e(" + vname(a) + "," +
                                     vname(b) + "):1, " + dsrc + "(" + vname(a) + "):M, " + uk +
                                     "(" + vname(a) + "):N.");
        break;
      }
      default: {  // named weighted sum
        static const double kCoef[3] = {0.25, 0.4, 0.5};
        double c1 = kCoef[rand_int(rng, 0, 2)], c2 = kCoef[rand_int(rng, 0, 2)];
        std::string fn = "fw" + std::to_string(++named);
        directives.push_back("#function " + fn + " 2 linear(" + num2(c1) + "," + num2(c2) +
                             ")");
        rules.push_back(uk + "(Y):" + fn + "(M,N) <- e(X,Y):1, " + dsrc + "(X):M, " + uk +
                        "(X):N.");
        if (spec.with_ground_text)
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              ground_rules.push_back(uk + "(" + vname(b) + "):" + fn + "(M,N) <- e(" +
                                     vname(a) + "," + vname(b) + "):1, " + dsrc + "(" +
                                     vname(a) + "):M, " + uk + "(" + vname(a) + "):N.");
        break;
      }
    }
  };

  for (int k = 1; k <= m; ++k) {
    int count = rand_int(rng, 1, 3);
    for (int r = 0; r < count; ++r) emit_rule(k, k);
  }

  if (!spec.force_vic && coin(rng)) {
    out.vic_safe = false;
    int kind = rand_int(rng, 0, 3);
    int k = rand_int(rng, 1, m);
    int j = 1 + (k % m);  // a different side
    std::string dk = "d" + std::to_string(k);
    switch (kind) {
      case 0: {  // decision-headed fact
        std::string line = dk + "(" + vname(rand_int(rng, 0, n - 1)) + "):" +
                           num2(grid05(rng)) + ".";
        rules.push_back(line);
        if (spec.with_ground_text) ground_rules.push_back(line);
        break;
      }
      case 1: {  // decision-headed rule
        std::string line = dk + "(" + vname(rand_int(rng, 0, n - 1)) + "):" +
                           num2(grid05(rng)) + " <- u" + std::to_string(k) + "(" +
                           vname(rand_int(rng, 0, n - 1)) + "):" + num2(grid05(rng)) + ".";
        rules.push_back(line);
        if (spec.with_ground_text) ground_rules.push_back(line);
        break;
      }
      case 2:  // utility fed by the other side's decision
        emit_rule(k, j);
        break;
      default: {
        std::string line = "u" + std::to_string(k) + "(" + vname(rand_int(rng, 0, n - 1)) +
                           "):" + num2(grid05(rng)) + " <- d" + std::to_string(j) + "(" +
                           vname(rand_int(rng, 0, n - 1)) + "):" + num2(grid05(rng)) + ".";
        rules.push_back(line);
        if (spec.with_ground_text) ground_rules.push_back(line);
        break;
      }
    }
  }

  std::string vc_heads, vc_bodies;
  for (int k = 1; k <= m; ++k) {
    if (k > 1) {
      vc_heads += ", ";
      vc_bodies += ", ";
    }
    vc_heads += "d" + std::to_string(k) + "(X)";
    vc_bodies += "u" + std::to_string(k) + "(X)";
  }
  std::string vc_line = vc_heads + " <~ " + vc_bodies + ".";

  auto assemble = [&](const std::vector<std::string>& rule_lines) {
    std::string t;
    for (const auto& d : directives) t += d + "\n";
    for (const auto& f : facts) t += f + "\n";
    for (const auto& r : rule_lines) t += r + "\n";
    t += vc_line + "\n";
    return t;
  };
  out.text = assemble(rules);
  if (spec.with_ground_text) out.ground_text = assemble(ground_rules);
  return out;
}

// ---------------------------------------------------------------------------
// Constraint-system helpers
// ---------------------------------------------------------------------------

// Pins every choice binary to `s`; goes through rows *and* checks so both the
// internal solver and an exported LP see it.
inline void pin_state(ConstraintSystem& cs, const State& s) {
  for (std::int32_t vc = 0; vc < cs.vc_count; ++vc)
    for (int o = 0; o < cs.vc_m; ++o) {
      Row r;
      r.terms.push_back({cs.y_of(vc, o), 1.0});
      r.sense = RowSense::eq;
      r.rhs = s[static_cast<std::size_t>(vc)] == o ? 1.0 : 0.0;
      cs.rows.push_back(r);
      cs.checks.push_back(r);
    }
}

}  // namespace testutil
