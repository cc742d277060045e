#pragma once

// Shared fixture programs and their hand-computed expected values. Everything
// here is plain data; helpers.hpp holds the code that runs it.

#include <map>
#include <string>
#include <vector>

namespace corpus {

// Two vertices, one friend edge, two competing products. The canonical small
// diffusion program used across the semantics and equilibrium tests.
inline const char* kFriends = R"(% two vertices, one friend edge
friend(1,2):1.
buyAsus^U(1):0.6.
buyAsus^U(Y):M <- friend(X,Y):1, buyAsus^D(X):M.
buyMac^U(1):0.3.
buyMac^U(Y):M <- friend(X,Y):1, buyMac^D(X):M.
buyMac^D(X), buyAsus^D(X) <~ buyMac^U(X), buyAsus^U(X).
)";

// The coherent model / strong equilibrium of kFriends (both vertices adopt
// Asus; the Mac decision chain stays at zero).
inline std::map<std::string, double> friends_i1() {
  return {
      {"friend(1,2)", 1.0},      {"buyAsus^U(1)", 0.6}, {"buyAsus^D(1)", 0.6},
      {"buyAsus^U(2)", 0.6},     {"buyAsus^D(2)", 0.6}, {"buyMac^U(1)", 0.3},
      {"buyMac^D(1)", 0.0},      {"buyMac^U(2)", 0.0},  {"buyMac^D(2)", 0.0},
  };
}

// A model of kFriends that is not coherent: vertex 2 commits to Mac at 0.7,
// a value no rule chain can reproduce from the chosen pairs.
inline std::map<std::string, double> friends_i2() {
  return {
      {"friend(1,2)", 1.0},      {"buyAsus^U(1)", 0.6}, {"buyAsus^D(1)", 0.6},
      {"buyAsus^U(2)", 0.6},     {"buyAsus^D(2)", 0.0}, {"buyMac^U(1)", 0.3},
      {"buyMac^D(1)", 0.0},      {"buyMac^U(2)", 0.7},  {"buyMac^D(2)", 0.7},
  };
}

// One vertex, two options, a self-reinforcing Asus rule. Exactly two strong
// equilibria: the Mac pick stays at (0.3, 0.3); the Asus pick bootstraps to
// (0.6, 0.6).
inline const char* kTwoEq = R"(buyMac^U(1):0.3.
buyAsus^U(1):0.3.
buyAsus^U(1):0.6 <- buyAsus^D(1):0.3.
buyMac^D(X), buyAsus^D(X) <~ buyMac^U(X), buyAsus^U(X).
)";

// Forced positive decisions on both options: not even a model exists.
inline const char* kConstPi1 = R"(buyMac^D(tom):1.
buyAsus^D(tom):1.
buyMac^D(X), buyAsus^D(X) <~ buyMac^U(X), buyAsus^U(X).
)";

// A forced decision whose utility stays at zero: models exist, coherent ones
// do not.
inline const char* kConstPi2 = R"(buyMac^D(tom):1.
buyAsus^U(tom):1.
buyMac^D(X), buyAsus^D(X) <~ buyMac^U(X), buyAsus^U(X).
)";

// Cross-coupled options (each utility rewards the *other* decision):
// classifies as dependent (condition 2) and admits no strong equilibrium.
inline const char* kCross = R"(friend(tom,bob):1.
buyAsus^U(bob):0.5.
buyMac^U(X):1 <- friend(X,Y):1, buyMac^D(Y):0.5.
buyAsus^U(X):1 <- friend(X,Y):1, buyAsus^D(Y):0.5.
buyMac^U(Y):M <- friend(X,Y):1, buyAsus^D(X):M.
buyAsus^U(Y):M <- friend(X,Y):1, buyMac^D(X):M.
buyMac^D(X), buyAsus^D(X) <~ buyMac^U(X), buyAsus^U(X).
)";

// Three vertices, three options wired into a rock-paper-scissors cycle: no
// strong equilibrium at all; removing any single seed fact leaves exactly 3.
inline const char* kViceFacts[3] = {
    "g^U(1):0.4.\n",
    "r^U(2):0.4.\n",
    "b^U(3):0.4.\n",
};

inline std::string vice_text(int drop_fact = -1) {
  std::string out;
  for (int i = 0; i < 3; ++i)
    if (i != drop_fact) out += kViceFacts[i];
  out +=
      "b^U(1):1.0 <- b^D(3):0.2.\n"
      "g^U(2):1.0 <- g^D(1):0.2.\n"
      "r^U(3):1.0 <- r^D(2):0.2.\n"
      "g^D(X), r^D(X), b^D(X) <~ g^U(X), r^U(X), b^U(X).\n";
  return out;
}

// One vertex, a one-step bootstrap: the smallest program whose constraint
// unrolling is worth pinning structurally.
inline const char* kBoot = R"(a1(1):0.3.
a1(1):0.6 <- b1(1):0.3.
b1(X), b2(X) <~ a1(X), a2(X).
)";

// Two-voter election: Tom follows his mentor John into Labour despite his
// own Tory lean. Unique strong equilibrium, four coherent models.
inline const char* kElectionRules = R"(voteLabour^U(A):X <- suptBrown(A):X.
voteLabour^U(B):X <- voteLabour^D(A):X, knows(B,A):1.
voteLabour^U(B):X <- voteLabour^D(A):X, mentor(B,A):1, student(B):1.
voteLabour^U(B):X <- voteLabour^D(A):X, olderRel(B,A):1.
voteTory^U(A):X <- likeCam(A):X.
voteTory^U(B):X <- voteTory^D(A):X, mentor(B,A):1, employee(B):1.
voteTory^U(B):X <- voteTory^D(A):X, idol(B,A):1, young(B):1.
voteTory^D(X), voteLabour^D(X) <~ voteTory^U(X), voteLabour^U(X).
)";

inline std::string election_text() {
  return std::string(
             "student(tom):1.\n"
             "likeCam(tom):0.6.\n"
             "mentor(tom,john):1.\n"
             "suptBrown(john):0.8.\n") +
         kElectionRules;
}

inline const char* kElectionSn =
    "V\ttom\tstudent\t1\n"
    "V\ttom\tlikeCam\t0.6\n"
    "V\tjohn\tsuptBrown\t0.8\n"
    "E\ttom\tjohn\tmentor\t1\n";

inline std::map<std::string, double> election_se() {
  return {
      {"student(tom)", 1.0},         {"likeCam(tom)", 0.6},
      {"mentor(tom,john)", 1.0},     {"suptBrown(john)", 0.8},
      {"voteLabour^U(john)", 0.8},   {"voteLabour^D(john)", 0.8},
      {"voteTory^U(john)", 0.0},     {"voteTory^D(john)", 0.0},
      {"voteLabour^U(tom)", 0.8},    {"voteLabour^D(tom)", 0.8},
      {"voteTory^U(tom)", 0.6},      {"voteTory^D(tom)", 0.0},
  };
}

// Horizon-search fixtures: facts stabilize after one sweep, a two-rule chain
// after three; the first zero-change comparison lands one sweep later.
inline const char* kFactsOnly = R"(u1(1):0.4.
u2(1):0.7.
d1(X), d2(X) <~ u1(X), u2(X).
)";

inline const char* kChain2 = R"(p(1):0.5.
q(1):M <- p(1):M.
u1(1):M <- q(1):M.
d1(X), d2(X) <~ u1(X), u2(X).
)";

// Star graph (three leaves feeding one center) with neighborhood templates:
// averaging on side 1, plain max on side 2.
inline const char* kStarAvgMax = R"(side1^U(l1):0.6.
side1^U(l2):0.4.
side2^U(l2):0.9.
side1^U(l3):0.8.
side1^U(V): avg{ M | friend(U,V):1, side1^D(U):M }.
side2^U(V): max{ M | friend(U,V):1, side2^D(U):M }.
side1^D(X), side2^D(X) <~ side1^U(X), side2^U(X).
friend(l1,c):1.
friend(l2,c):1.
friend(l3,c):1.
)";

// Same star with a tipping side 2: the center only adopts once the summed
// neighbor commitment reaches 1.0.
inline const char* kStarTip = R"(side1^U(l1):0.6.
side2^U(l2):0.9.
side2^U(l3):0.7.
side1^U(V): avg{ M | friend(U,V):1, side1^D(U):M }.
side2^U(V): max{ M | friend(U,V):1, side2^D(U):M } if sum >= 1.0.
side1^D(X), side2^D(X) <~ side1^U(X), side2^U(X).
friend(l1,c):1.
friend(l2,c):1.
friend(l3,c):1.
)";

// Declared head functions: a weighted sum and a gated max.
inline const char* kNamedFns = R"(#function wsum 2 linear(0.4,0.5)
#function tip2 2 gated-max(0.6)
a(v1):0.5.
b(v1):0.7.
u1(v1):wsum(M,N) <- a(v1):M, b(v1):N.
u2(v1):tip2(M,N) <- a(v1):M, b(v1):N.
d1(X), d2(X) <~ u1(X), u2(X).
)";

// Payoff matrix whose unique equilibrium is mutual cooperation; the exact
// compiled annotations (0.23 / 1.00 / 0.10 / 0.88) are pinned in test_game.
inline const char* kPrisonerJson =
    R"({"players": ["a", "b"], "actions": ["c", "d"],)"
    R"( "utilities": [[[-6, 0], [-7, -1]], [[-6, -7], [0, -1]]]})";

// Three vertices, one weighted edge v2 -> v1, uniform theta.
inline const char* kAsgJson =
    R"({"vertices": ["v1", "v2", "v3"], "products": ["p1", "p2"],)"
    R"( "edges": [["v2", "v1", 0.8]], "c0": 0.5, "theta": 0.3})";

inline const char* kQuerySumJson = R"({"aggregate": "sum", "targets": ["buyAsus^U(1)"]})";

inline const char* kQueryOneMinusJson =
    R"({"aggregate": "linear", "targets": ["buyAsus^U(1)"],)"
    R"( "linear_spec": {"k": 1, "c1": [-1]}})";

inline const char* kLikesTsv =
    "u1\tpg1\tp1\n"
    "u1\tpg2\tp1\n"
    "u1\tpg3\tp2\n"
    "u2\tpg4\tp2\n"
    "u2\tpg5\tp3\n"
    "u3\tpg9\tmusic\n";

// Programs exercised by the parse/serialize round-trip test.
inline std::vector<std::string> round_trip_corpus() {
  std::vector<std::string> out = {
      kFriends,      kTwoEq,    kConstPi1, kConstPi2, kCross,
      vice_text(),   vice_text(0), vice_text(1), vice_text(2),
      kBoot,         election_text(), kFactsOnly, kChain2,
      kStarAvgMax,   kStarTip,  kNamedFns,
  };
  out.push_back(
      "u1(x):0.25.\n"
      "u2(y):0.75.\n"
      "u1(Y):max(M,N) <- e(X,Y):1, d1(X):M, u1(X):N.\n"
      "u2(Y):avg(M,N) <- e(X,Y):1, d2(X):M, u2(X):N.\n"
      "e(x,y):1.\n"
      "d1(X), d2(X) <~ u1(X), u2(X).\n");
  out.push_back(
      "#function f1 3 linear(0.2,0.3,0.25)\n"
      "p(a):0.15.\n"
      "q(a):0.55.\n"
      "s(a):0.95.\n"
      "u1(a):f1(M,N,K) <- p(a):M, q(a):N, s(a):K.\n"
      "u2(a):0.4 <- q(a):0.5.\n"
      "d1(X), d2(X) <~ u1(X), u2(X).\n");
  out.push_back(
      "u1(v1):1.\n"
      "u2(v2):0.\n"
      "d1(X), d2(X) <~ u1(X), u2(X).\n");
  out.push_back(
      "% comment lines and arrowless facts survive the trip\n"
      "u1(n1):0.125.\n"
      "u2(n1):0.875.\n"
      "u1(N):M <- follows(N,K):1, d1(K):M.\n"
      "follows(n1,n2):1.\n"
      "follows(n2,n1):1.\n"
      "d1(X), d2(X) <~ u1(X), u2(X).\n");
  return out;
}

}  // namespace corpus
