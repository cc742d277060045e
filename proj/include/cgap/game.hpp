#pragma once

// Game-theoretic view of a ground program: states (one action per vertex),
// induced programs and their fixpoints, utilities, Nash checks, and the two
// compilers turning conventional games into choice programs.

#include <string>
#include <vector>

#include "cgap/semantics.hpp"

namespace cgap {

// One action per vertex-choice instance, indexed like GroundProgram::vcs;
// each entry lies in [0, m).
using State = std::vector<int>;

// Replaces every vertex-choice instance by the bridge rule of the chosen
// action: B_{s(v)}(v):X <- A_{s(v)}(v):X. All plain rules are kept, the
// instances are dropped.
GroundProgram induced_program(const GroundProgram& gp, const State& s);

// Minimal model of the induced program, computed without materializing it.
FixpointReport induced_fixpoint(const GroundProgram& gp, const State& s);

// As induced_fixpoint, but raises NonConvergenceError when unconverged.
Interpretation induced_fixpoint_strict(const GroundProgram& gp, const State& s);

// Utility of `action` for the player behind vcs[player] under state `s`:
// the induced minimal-model value of that action's utility atom.
double utility(const GroundProgram& gp, const State& s, int player, int action);

// True iff no player can strictly improve its utility by changing only its
// own action. Recomputes one fixpoint per deviation.
bool is_nash_state(const GroundProgram& gp, const State& s);

// ---------------------------------------------------------------------------
// Generic n-player games
// ---------------------------------------------------------------------------

struct GenericGame {
  std::vector<std::string> players;  // vertex names
  std::vector<std::string> actions;  // shared action set, size m
  // util[p * m^n + profile] with profile = sum_i action_i * m^(n-1-i):
  // player 0's action is the most significant digit.
  std::vector<double> util;

  int n() const { return static_cast<int>(players.size()); }
  int m() const { return static_cast<int>(actions.size()); }
  std::int64_t profile_count() const;
  double at(int player, const std::vector<int>& profile) const;
  void validate() const;
};

// Compiles the game so that its Nash equilibria coincide with the strong
// equilibria of the program. Utilities are affinely rescaled into [0,1-eps]
// (quantized up to two decimals), shifted by eps, and attached to
// per-profile rules gated on the opponents' decision atoms at threshold
// eps. Every action also gets a base utility fact at eps.
Program compile_generic_game(const GenericGame& g, double eps = kDefaultGameEps);

GenericGame parse_game_json(const std::string& text);

// ---------------------------------------------------------------------------
// Product-adoption games on weighted graphs
// ---------------------------------------------------------------------------

struct AptSimonGame {
  std::vector<std::string> vertices;
  struct Edge {
    int src = -1, dst = -1;
    double w = 1.0;  // in (0,1]
  };
  std::vector<Edge> edges;                      // directed, weighted
  std::vector<std::string> products;            // size >= 1
  std::vector<std::vector<int>> availability;   // per vertex: product ids
  std::vector<std::vector<double>> theta;       // theta[v][product] in (0,1]
  double c0 = 0.5;                              // isolated-vertex utility

  void validate() const;
};

// Compiles the adoption game: a vertex's utility for product q is c0 when it
// has no in-neighbors, and otherwise
//   1/2 + (1/(2|N(v)|)) * sum over in-neighbors i that chose q of (w(i,v) - theta(v,q)).
// Unavailable products keep utility 0. The emitted head functions read
// neighbor decision atoms as chosen/not-chosen indicators and may be
// non-monotone (when some w < theta); such programs cannot be serialized to
// text and are rejected by the layered-constraint builder.
Program compile_apt_simon(const AptSimonGame& g);

AptSimonGame parse_asg_json(const std::string& text);

}  // namespace cgap
