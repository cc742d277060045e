#pragma once

// Accuracy-study pipeline: page-like counts -> per-party preference
// coefficients -> two-sided competition utilities, diffusion-model program
// assembly, seeded train/validation splits, bound-midpoint classification
// scored by ROC/AUROC, network perturbation, and a planted-partition
// synthetic network generator.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cgap/model.hpp"
#include "cgap/text.hpp"

namespace cgap {

// ---------------------------------------------------------------------------
// Preference coefficients
// ---------------------------------------------------------------------------

struct UserPreference {
  std::string user;
  std::vector<std::int64_t> likes;  // per party, aligned with parties
  std::vector<double> rho;          // likes / total, sums to 1
  int supporter = -1;               // argmax rho; ties break to lowest index
};

struct PreferenceTable {
  std::vector<std::string> parties;
  std::vector<UserPreference> users;  // first-seen order; >= 1 counted like each

  std::optional<int> find_user(const std::string& name) const;
};

// Tallies like rows whose category names one of `parties`; rows with other
// categories are ignored, and users with no counted likes are left out.
PreferenceTable compute_rho(const std::vector<LikeRow>& likes,
                            const std::vector<std::string>& parties);

// ---------------------------------------------------------------------------
// Competitions
// ---------------------------------------------------------------------------

// Two disjoint, nonempty party camps. A user's utility for a side is the
// side's preference mass over the mass of the union:
//   u1 = sum_{i in side1} rho_i / sum_{i in side1+side2} rho_i.
struct Competition {
  std::string label;
  std::vector<int> side1;  // party indexes
  std::vector<int> side2;
};

// The four stock three-party match-ups, 1-based id:
//   1: p2 vs p3    2: {p2,p3} vs p1    3: p2 vs p1    4: p3 vs p1
Competition standard_competition(int id);

// (u1, u2) per table user; users with zero mass on both sides get (0, 0).
std::vector<std::pair<double, double>> competition_utilities(const PreferenceTable& prefs,
                                                             const Competition& comp);

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

enum class PerturbKind : std::uint8_t { none, node, edge };

struct ScenarioConfig {
  int mod1 = 1;  // side-1 diffusion model: 1 average, 2 max, 3 tipping
  int mod2 = 1;  // side-2 diffusion model
  double delta = 50.0;  // training percentage of the user set, [0, 100]
  int competition = 1;  // standard_competition id
  double tau = kDefaultTippingTau;  // tipping threshold for model 3
  std::uint64_t seed = 0;
  PerturbKind perturb = PerturbKind::none;
  double perturb_p = 0.0;  // [0, 1]
};

struct Split {
  std::vector<int> train;       // indexes into PreferenceTable::users
  std::vector<int> validation;  // complement, both ascending
};

// Seeded uniform split with |train| = round(delta * n / 100).
Split split_users(std::size_t n, double delta, std::uint64_t seed);

// Assembles the scenario's two-option choice program: per-side neighborhood
// spread templates chosen by mod1/mod2 over the `friend` edge predicate, the
// vertex-choice rule pairing sideK^U with sideK^D, and one utility-fact pair
// per training user (validation users get no utility facts). Node
// perturbation swaps a training user's utility pair with probability p.
Program build_scenario(const ScenarioConfig& cfg, const SocialNetwork& sn,
                       const PreferenceTable& prefs);

// ---------------------------------------------------------------------------
// ROC scoring
// ---------------------------------------------------------------------------

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  std::vector<RocPoint> points;  // threshold sweep, (0,0) .. (1,1)
  double auroc = 0.5;            // trapezoidal area under `points`
  std::vector<int> scored;       // validation users with a side-1/2 supporter
  std::vector<double> scores;    // f(i) = mid(U1 bounds) - mid(U2 bounds)
  std::vector<char> labels;      // 1 = side-1 supporter
  std::int64_t time_ms = 0;
};

// Exact ROC of `scores` against `labels` (positive = 1), thresholds swept
// over the distinct score values; ties advance both axes at once. A sweep
// with only one class present degenerates to the diagonal (area 0.5).
RocResult roc_curve(std::vector<int> scored, std::vector<double> scores,
                    std::vector<char> labels);

// Builds the scenario, grounds it over `sn` (edge-perturbed first when asked),
// computes the two extremal equilibrium models, scores every validation user
// whose supporter plays in the competition, and sweeps the ROC.
RocResult run_scenario(const ScenarioConfig& cfg, const SocialNetwork& sn,
                       const PreferenceTable& prefs);

// One appendix-style result row per config, run on `jobs` worker threads.
struct ScenarioRow {
  ScenarioConfig cfg;
  double auroc = 0.5;
  std::int64_t time_ms = 0;
};

std::vector<ScenarioRow> run_scenario_matrix(const std::vector<ScenarioConfig>& cfgs,
                                             const SocialNetwork& sn,
                                             const PreferenceTable& prefs, int jobs = 1);

// {"mod1":..,"mod2":..,"training":..,"comp":..,"auroc":..,"time_ms":..}
std::string scenario_row_json(const ScenarioRow& row);

// ---------------------------------------------------------------------------
// Perturbation
// ---------------------------------------------------------------------------

// Swaps (u1, u2) of each training user independently with probability p.
void perturb_nodes(std::vector<std::pair<double, double>>& utilities,
                   const std::vector<int>& train, double p, std::uint64_t seed);

// Flips membership of round(p * |E|) distinct undirected vertex pairs drawn
// uniformly (self-loops excluded): present pairs are removed, absent ones
// inserted with weight 1. Vertex labels are untouched.
SocialNetwork perturb_edges(const SocialNetwork& sn, double p, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic networks
// ---------------------------------------------------------------------------

struct SynthResult {
  SocialNetwork sn;            // undirected pairs materialized both ways
  std::vector<LikeRow> likes;  // community-aligned page likes
  PreferenceTable prefs;       // compute_rho over `likes`
};

// Planted-partition graph: n vertices in near-equal communities, e undirected
// edges, each intra-community with probability `homophily`. Every user likes
// 2-4 pages of the community's party (p1/p2/p3, round robin) and, with
// probability 1 - homophily per other party, one stray page.
SynthResult synth_network(std::int64_t n, std::int64_t e, int communities,
                          double homophily, std::uint64_t seed);

}  // namespace cgap
