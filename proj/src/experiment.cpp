#include "cgap/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>
#include <unordered_set>
#include <utility>

#include "cgap/errors.hpp"
#include "cgap/ground.hpp"
#include "cgap/vic.hpp"

namespace cgap {
namespace {

// Decorrelated per-purpose RNG streams derived from the scenario seed.
enum SeedStream : std::uint64_t {
  kSeedSplit = 1,
  kSeedNode = 2,
  kSeedEdge = 3,
  kSeedGraph = 4,
  kSeedLikes = 5,
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Unbiased draw from [0, n); the engine sequence is pinned by the standard,
// so results are reproducible across platforms (unlike std::shuffle).
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

double next_double(std::mt19937_64& rng) {  // [0, 1), 53-bit
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool contains(const std::vector<int>& xs, int x) {
  return std::find(xs.begin(), xs.end(), x) != xs.end();
}

void validate_config(const ScenarioConfig& cfg) {
  auto model_ok = [](int m) { return m >= 1 && m <= 3; };
  if (!model_ok(cfg.mod1) || !model_ok(cfg.mod2))
    throw ValidationError("diffusion model id must be 1, 2 or 3");
  if (!(cfg.delta >= 0.0 && cfg.delta <= 100.0))
    throw ValidationError("training percentage must be in [0, 100]");
  if (!(cfg.perturb_p >= 0.0 && cfg.perturb_p <= 1.0))
    throw ValidationError("perturbation probability must be in [0, 1]");
  if (!(cfg.tau >= 0.0)) throw ValidationError("tipping threshold must be nonnegative");
}

struct ScenarioParts {
  Competition comp;
  Split sp;
  std::vector<std::pair<double, double>> util;
};

ScenarioParts scenario_parts(const ScenarioConfig& cfg, const PreferenceTable& prefs) {
  validate_config(cfg);
  ScenarioParts p;
  p.comp = standard_competition(cfg.competition);
  p.util = competition_utilities(prefs, p.comp);
  p.sp = split_users(prefs.users.size(), cfg.delta, mix_seed(cfg.seed, kSeedSplit));
  if (cfg.perturb == PerturbKind::node)
    perturb_nodes(p.util, p.sp.train, cfg.perturb_p, mix_seed(cfg.seed, kSeedNode));
  return p;
}

Program assemble_program(const ScenarioConfig& cfg, const SocialNetwork& sn,
                         const PreferenceTable& prefs, const ScenarioParts& parts) {
  Program prog;
  PredId friend_p = prog.pred("friend", PredKind::edge);
  PredId u1 = prog.pred("side1^U", PredKind::vertex);
  PredId d1 = prog.pred("side1^D", PredKind::vertex);
  PredId u2 = prog.pred("side2^U", PredKind::vertex);
  PredId d2 = prog.pred("side2^D", PredKind::vertex);

  auto add_model = [&](int model, PredId head, PredId body) {
    NeighborTemplate t;
    t.head_pred = head;
    t.edge_pred = friend_p;
    t.body_pred = body;
    t.agg = model == 1 ? NeighborTemplate::Agg::avg : NeighborTemplate::Agg::max;
    if (model == 3) t.tip = cfg.tau;
    prog.add_template(t);
  };
  add_model(cfg.mod1, u1, d1);
  add_model(cfg.mod2, u2, d2);
  prog.set_vc(VCRule{{d1, d2}, {u1, u2}, 0});

  for (int ui : parts.sp.train) {
    VertexId v = prog.vertex(prefs.users[static_cast<std::size_t>(ui)].user);
    const auto& [util1, util2] = parts.util[static_cast<std::size_t>(ui)];
    prog.add_rule(GapRule{Atom::unary(u1, Term::vertex(v)), AnnotationExpr::constant(util1),
                          {}, {}, {}, 0});
    prog.add_rule(GapRule{Atom::unary(u2, Term::vertex(v)), AnnotationExpr::constant(util2),
                          {}, {}, {}, 0});
  }
  for (const auto& name : sn.vertices) prog.vertex(name);
  return prog;
}

std::uint64_t pair_key(std::uint64_t lo, std::uint64_t hi, std::uint64_t n) {
  return lo * n + hi;
}

}  // namespace

// ---------------------------------------------------------------------------
// Preference coefficients
// ---------------------------------------------------------------------------

std::optional<int> PreferenceTable::find_user(const std::string& name) const {
  for (std::size_t i = 0; i < users.size(); ++i)
    if (users[i].user == name) return static_cast<int>(i);
  return std::nullopt;
}

PreferenceTable compute_rho(const std::vector<LikeRow>& likes,
                            const std::vector<std::string>& parties) {
  if (parties.empty()) throw ValidationError("compute_rho: no parties given");
  PreferenceTable t;
  t.parties = parties;
  std::map<std::string, int> party_ix;
  for (std::size_t i = 0; i < parties.size(); ++i)
    party_ix[parties[i]] = static_cast<int>(i);

  std::map<std::string, int> user_ix;
  for (const auto& row : likes) {
    auto p = party_ix.find(row.category);
    if (p == party_ix.end()) continue;  // unclassified page
    auto [it, fresh] = user_ix.try_emplace(row.user, static_cast<int>(t.users.size()));
    if (fresh) {
      UserPreference u;
      u.user = row.user;
      u.likes.assign(parties.size(), 0);
      t.users.push_back(std::move(u));
    }
    ++t.users[static_cast<std::size_t>(it->second)].likes[static_cast<std::size_t>(p->second)];
  }

  for (auto& u : t.users) {
    double total = 0.0;
    for (std::int64_t c : u.likes) total += static_cast<double>(c);
    u.rho.resize(u.likes.size());
    u.supporter = 0;
    for (std::size_t i = 0; i < u.likes.size(); ++i) {
      u.rho[i] = static_cast<double>(u.likes[i]) / total;
      if (u.likes[i] > u.likes[static_cast<std::size_t>(u.supporter)])
        u.supporter = static_cast<int>(i);
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Competitions
// ---------------------------------------------------------------------------

Competition standard_competition(int id) {
  switch (id) {
    case 1: return Competition{"p2 vs p3", {1}, {2}};
    case 2: return Competition{"p2+p3 vs p1", {1, 2}, {0}};
    case 3: return Competition{"p2 vs p1", {1}, {0}};
    case 4: return Competition{"p3 vs p1", {2}, {0}};
    default: throw ValidationError("competition id must be 1..4");
  }
}

std::vector<std::pair<double, double>> competition_utilities(const PreferenceTable& prefs,
                                                             const Competition& comp) {
  if (comp.side1.empty() || comp.side2.empty())
    throw ValidationError("competition sides must be nonempty");
  for (int p : comp.side1)
    if (contains(comp.side2, p)) throw ValidationError("competition sides must be disjoint");
  auto in_range = [&](int p) { return p >= 0 && p < static_cast<int>(prefs.parties.size()); };
  for (int p : comp.side1)
    if (!in_range(p)) throw ValidationError("competition names an unknown party");
  for (int p : comp.side2)
    if (!in_range(p)) throw ValidationError("competition names an unknown party");

  std::vector<std::pair<double, double>> util(prefs.users.size(), {0.0, 0.0});
  for (std::size_t i = 0; i < prefs.users.size(); ++i) {
    const auto& rho = prefs.users[i].rho;
    double s1 = 0.0, s2 = 0.0;
    for (int p : comp.side1) s1 += rho[static_cast<std::size_t>(p)];
    for (int p : comp.side2) s2 += rho[static_cast<std::size_t>(p)];
    double total = s1 + s2;
    if (total > 0.0) util[i] = {s1 / total, s2 / total};
  }
  return util;
}

// ---------------------------------------------------------------------------
// Splits and scenario assembly
// ---------------------------------------------------------------------------

Split split_users(std::size_t n, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0 && delta <= 100.0))
    throw ValidationError("training percentage must be in [0, 100]");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i)
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(bounded(rng, i))]);

  auto k = static_cast<std::size_t>(
      std::llround(delta * static_cast<double>(n) / 100.0));
  k = std::min(k, n);
  Split sp;
  sp.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  sp.validation.assign(idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
  std::sort(sp.train.begin(), sp.train.end());
  std::sort(sp.validation.begin(), sp.validation.end());
  return sp;
}

Program build_scenario(const ScenarioConfig& cfg, const SocialNetwork& sn,
                       const PreferenceTable& prefs) {
  return assemble_program(cfg, sn, prefs, scenario_parts(cfg, prefs));
}

// ---------------------------------------------------------------------------
// Perturbation
// ---------------------------------------------------------------------------

void perturb_nodes(std::vector<std::pair<double, double>>& utilities,
                   const std::vector<int>& train, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ValidationError("perturbation probability must be in [0, 1]");
  std::mt19937_64 rng(seed);
  for (int ui : train) {
    auto& pair = utilities.at(static_cast<std::size_t>(ui));
    if (next_double(rng) < p) std::swap(pair.first, pair.second);
  }
}

SocialNetwork perturb_edges(const SocialNetwork& sn, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ValidationError("perturbation probability must be in [0, 1]");
  std::map<std::string, std::uint64_t> vertex_ix;
  for (std::size_t i = 0; i < sn.vertices.size(); ++i)
    vertex_ix[sn.vertices[i]] = i;
  auto ix_of = [&](const std::string& name) {
    auto [it, fresh] = vertex_ix.try_emplace(name, vertex_ix.size());
    (void)fresh;
    return it->second;
  };

  const std::uint64_t n = sn.vertices.size();
  for (const auto& e : sn.edges) {  // endpoints may name unlisted vertices
    ix_of(e.src);
    ix_of(e.dst);
  }
  const std::uint64_t stride = vertex_ix.size() + 1;
  std::unordered_set<std::uint64_t> present;
  for (const auto& e : sn.edges) {
    std::uint64_t a = vertex_ix[e.src], b = vertex_ix[e.dst];
    if (a == b) continue;
    present.insert(pair_key(std::min(a, b), std::max(a, b), stride));
  }

  auto flips = static_cast<std::uint64_t>(
      std::llround(p * static_cast<double>(present.size())));
  const std::uint64_t all_pairs = n < 2 ? 0 : n * (n - 1) / 2;
  flips = std::min(flips, all_pairs);

  std::mt19937_64 rng(seed);
  std::unordered_set<std::uint64_t> chosen;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> order;
  while (order.size() < flips) {
    std::uint64_t a = bounded(rng, n), b = bounded(rng, n);
    if (a == b) continue;
    std::uint64_t lo = std::min(a, b), hi = std::max(a, b);
    if (chosen.insert(pair_key(lo, hi, stride)).second) order.emplace_back(lo, hi);
  }

  SocialNetwork out = sn;
  out.edges.clear();
  for (const auto& e : sn.edges) {
    std::uint64_t a = vertex_ix[e.src], b = vertex_ix[e.dst];
    if (a != b && chosen.count(pair_key(std::min(a, b), std::max(a, b), stride))) continue;
    out.edges.push_back(e);
  }
  const std::string edge_pred = sn.edges.empty() ? "friend" : sn.edges.front().pred;
  for (const auto& [lo, hi] : order) {
    if (present.count(pair_key(lo, hi, stride))) continue;  // was removed above
    if (lo >= n || hi >= n) continue;
    const std::string& a = sn.vertices[static_cast<std::size_t>(lo)];
    const std::string& b = sn.vertices[static_cast<std::size_t>(hi)];
    out.edges.push_back(SnEdge{a, b, edge_pred, 1.0});
    out.edges.push_back(SnEdge{b, a, edge_pred, 1.0});
  }
  return out;
}

// ---------------------------------------------------------------------------
// ROC scoring
// ---------------------------------------------------------------------------

RocResult roc_curve(std::vector<int> scored, std::vector<double> scores,
                    std::vector<char> labels) {
  if (scores.size() != labels.size() || scored.size() != scores.size())
    throw ValidationError("roc_curve: scores, labels and ids must align");
  RocResult r;
  r.scored = std::move(scored);
  r.scores = std::move(scores);
  r.labels = std::move(labels);

  std::size_t pos = 0;
  for (char l : r.labels) pos += l ? 1 : 0;
  std::size_t neg = r.labels.size() - pos;
  if (pos == 0 || neg == 0) {
    r.points = {{0.0, 0.0}, {1.0, 1.0}};
    r.auroc = 0.5;
    return r;
  }

  std::vector<std::size_t> ord(r.scores.size());
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
    if (r.scores[a] != r.scores[b]) return r.scores[a] > r.scores[b];
    return a < b;
  });

  r.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0, i = 0;
  double area = 0.0;
  while (i < ord.size()) {
    std::size_t j = i;  // advance over the whole tie group at once
    while (j < ord.size() && r.scores[ord[j]] == r.scores[ord[i]]) {
      if (r.labels[ord[j]]) ++tp; else ++fp;
      ++j;
    }
    RocPoint prev = r.points.back();
    RocPoint cur{static_cast<double>(fp) / static_cast<double>(neg),
                 static_cast<double>(tp) / static_cast<double>(pos)};
    area += (cur.fpr - prev.fpr) * (cur.tpr + prev.tpr) / 2.0;
    r.points.push_back(cur);
    i = j;
  }
  r.auroc = area;
  return r;
}

RocResult run_scenario(const ScenarioConfig& cfg, const SocialNetwork& sn,
                       const PreferenceTable& prefs) {
  auto t0 = std::chrono::steady_clock::now();
  ScenarioParts parts = scenario_parts(cfg, prefs);
  Program prog = assemble_program(cfg, sn, prefs, parts);

  const SocialNetwork* net = &sn;
  SocialNetwork perturbed;
  if (cfg.perturb == PerturbKind::edge) {
    perturbed = perturb_edges(sn, cfg.perturb_p, mix_seed(cfg.seed, kSeedEdge));
    net = &perturbed;
  }

  GroundProgram gp = ground(std::move(prog), *net);
  ExtremalModels em = extremal_models(gp, /*with_mixed=*/false);

  const Program& src = *gp.source;
  PredId u1 = *src.find_pred("side1^U");
  PredId u2 = *src.find_pred("side2^U");
  auto value_bounds = [&](PredId pred, VertexId v) -> std::pair<double, double> {
    auto atom = gp.atoms->find(GroundAtom{pred, v, -1});
    if (!atom) return {0.0, 0.0};
    double x = em.m12[*atom], y = em.m21[*atom];
    return {std::min(x, y), std::max(x, y)};
  };

  std::vector<int> scored;
  std::vector<double> scores;
  std::vector<char> labels;
  for (int ui : parts.sp.validation) {
    const auto& u = prefs.users[static_cast<std::size_t>(ui)];
    bool in1 = contains(parts.comp.side1, u.supporter);
    bool in2 = contains(parts.comp.side2, u.supporter);
    if (!in1 && !in2) continue;  // supporter plays for neither camp
    double f = 0.0;
    if (auto v = src.find_vertex(u.user)) {
      auto [lo1, hi1] = value_bounds(u1, *v);
      auto [lo2, hi2] = value_bounds(u2, *v);
      f = (lo1 + hi1) / 2.0 - (lo2 + hi2) / 2.0;
    }
    scored.push_back(ui);
    scores.push_back(f);
    labels.push_back(in1 ? 1 : 0);
  }

  RocResult r = roc_curve(std::move(scored), std::move(scores), std::move(labels));
  r.time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  return r;
}

std::vector<ScenarioRow> run_scenario_matrix(const std::vector<ScenarioConfig>& cfgs,
                                             const SocialNetwork& sn,
                                             const PreferenceTable& prefs, int jobs) {
  std::vector<ScenarioRow> rows(cfgs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cfgs.size();) {
      try {
        RocResult res = run_scenario(cfgs[i], sn, prefs);
        rows[i] = ScenarioRow{cfgs[i], res.auroc, res.time_ms};
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (jobs <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return rows;
}

std::string scenario_row_json(const ScenarioRow& row) {
  std::string out = "{";
  out += "\"auroc\": " + format_value(row.auroc);
  out += ", \"comp\": " + std::to_string(row.cfg.competition);
  out += ", \"mod1\": " + std::to_string(row.cfg.mod1);
  out += ", \"mod2\": " + std::to_string(row.cfg.mod2);
  out += ", \"time_ms\": " + std::to_string(row.time_ms);
  out += ", \"training\": " + format_value(row.cfg.delta);
  out += "}";
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic networks
// ---------------------------------------------------------------------------

SynthResult synth_network(std::int64_t n, std::int64_t e, int communities,
                          double homophily, std::uint64_t seed) {
  if (n < 1) throw ValidationError("synth_network: need at least one vertex");
  if (communities < 1 || communities > n)
    throw ValidationError("synth_network: communities must be in [1, n]");
  if (!(homophily >= 0.0 && homophily <= 1.0))
    throw ValidationError("synth_network: homophily must be in [0, 1]");
  const std::int64_t all_pairs = n * (n - 1) / 2;
  if (e < 0 || e > all_pairs)
    throw ValidationError("synth_network: edge count exceeds the vertex-pair budget");

  SynthResult res;
  std::vector<int> comm(static_cast<std::size_t>(n));
  std::vector<std::vector<std::int64_t>> members(static_cast<std::size_t>(communities));
  for (std::int64_t i = 0; i < n; ++i) {
    int c = static_cast<int>(i * communities / n);
    comm[static_cast<std::size_t>(i)] = c;
    members[static_cast<std::size_t>(c)].push_back(i);
    res.sn.add_vertex("v" + std::to_string(i + 1));
  }

  std::mt19937_64 rng(mix_seed(seed, kSeedGraph));
  std::unordered_set<std::uint64_t> used;
  const std::uint64_t stride = static_cast<std::uint64_t>(n) + 1;
  std::int64_t placed = 0, attempts = 0;
  const std::int64_t attempt_cap = 50 * std::max<std::int64_t>(e, 1) + 1000;
  while (placed < e) {
    if (++attempts > attempt_cap)
      throw ValidationError("synth_network: edge budget infeasible for the requested mixing");
    std::int64_t u = static_cast<std::int64_t>(bounded(rng, static_cast<std::uint64_t>(n)));
    bool intra = communities == 1 || next_double(rng) < homophily;
    std::int64_t v;
    if (intra) {
      const auto& room = members[static_cast<std::size_t>(comm[static_cast<std::size_t>(u)])];
      if (room.size() < 2) continue;
      v = room[static_cast<std::size_t>(bounded(rng, room.size()))];
    } else {
      v = static_cast<std::int64_t>(bounded(rng, static_cast<std::uint64_t>(n)));
      if (comm[static_cast<std::size_t>(v)] == comm[static_cast<std::size_t>(u)]) continue;
    }
    if (u == v) continue;
    std::uint64_t lo = static_cast<std::uint64_t>(std::min(u, v));
    std::uint64_t hi = static_cast<std::uint64_t>(std::max(u, v));
    if (!used.insert(pair_key(lo, hi, stride)).second) continue;
    const std::string& a = res.sn.vertices[static_cast<std::size_t>(lo)];
    const std::string& b = res.sn.vertices[static_cast<std::size_t>(hi)];
    res.sn.edges.push_back(SnEdge{a, b, "friend", 1.0});
    res.sn.edges.push_back(SnEdge{b, a, "friend", 1.0});
    ++placed;
  }

  const std::vector<std::string> parties = {"p1", "p2", "p3"};
  std::mt19937_64 likes_rng(mix_seed(seed, kSeedLikes));
  for (std::int64_t i = 0; i < n; ++i) {
    const std::string& user = res.sn.vertices[static_cast<std::size_t>(i)];
    int own = comm[static_cast<std::size_t>(i)] % static_cast<int>(parties.size());
    auto own_count = 2 + static_cast<int>(bounded(likes_rng, 3));
    for (int j = 0; j < own_count; ++j)
      res.likes.push_back(LikeRow{user, parties[static_cast<std::size_t>(own)] + "_page" +
                                            std::to_string(j + 1),
                                  parties[static_cast<std::size_t>(own)]});
    for (std::size_t q = 0; q < parties.size(); ++q) {
      if (static_cast<int>(q) == own) continue;
      if (next_double(likes_rng) < 1.0 - homophily)
        res.likes.push_back(LikeRow{user, parties[q] + "_page1", parties[q]});
    }
  }
  res.prefs = compute_rho(res.likes, parties);
  return res;
}

}  // namespace cgap
