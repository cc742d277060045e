// cgap: command-line front end. Subcommands cover validation, grounding,
// equilibrium search and enumeration, model checking, range queries, game
// compilation, LP export, accuracy experiments and synthetic data generation.
// Exit codes: 0 ok, 1 no equilibrium / undefined answer, 2 usage or input
// error, 3 resource cap, 4 non-convergence.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cgap/equilibria.hpp"
#include "cgap/errors.hpp"
#include "cgap/experiment.hpp"
#include "cgap/game.hpp"
#include "cgap/ground.hpp"
#include "cgap/milp.hpp"
#include "cgap/query.hpp"
#include "cgap/semantics.hpp"
#include "cgap/text.hpp"
#include "cgap/vic.hpp"

namespace {

using namespace cgap;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << text;
}

GroundProgram load_ground(const std::string& program_path, const std::string& network_path,
                          std::int64_t cap) {
  Program prog = parse_program(read_file(program_path));
  GroundOptions opts;
  if (cap > 0) opts.cap = cap;
  if (network_path.empty()) return ground(std::move(prog), opts);
  SocialNetwork sn = parse_network(read_file(network_path));
  return ground(std::move(prog), sn, opts);
}

std::string state_json(const GroundProgram& gp, const State& s) {
  std::map<std::string, int> by_name;
  for (std::size_t i = 0; i < gp.vcs.size(); ++i)
    by_name[gp.source->vertex_name(gp.vcs[i].v)] = s[i] + 1;  // actions are 1-based outside
  std::string out = "{";
  bool first = true;
  for (const auto& [name, action] : by_name) {
    if (!first) out += ", ";
    first = false;
    out += "\"" + json_escape(name) + "\": " + std::to_string(action);
  }
  return out + "}";
}

std::string solution_json(const GroundProgram& gp, const State& s, const Interpretation& i) {
  return "{\"model\": " + serialize_interpretation(gp, i) + ", \"state\": " + state_json(gp, s) +
         "}";
}

// Values for options absent from the command line are taken from --config.
struct ConfigDefaults {
  nlohmann::json obj = nlohmann::json::object();

  void load(const std::string& path) {
    if (path.empty()) return;
    try {
      obj = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("config: ") + e.what(), 1, 1);
    }
    if (!obj.is_object()) throw ValidationError("config: top level must be an object");
  }

  template <typename T>
  void apply(const CLI::Option* opt, const std::string& key, T& var) const {
    if (opt != nullptr && opt->count() > 0) return;
    if (!obj.contains(key)) return;
    try {
      var = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError("config: bad value for '" + key + "'");
    }
  }
};

int cmd_validate(const std::string& program_path, const std::string& network_path) {
  Program prog = parse_program(read_file(program_path));
  prog.validate();
  if (!network_path.empty()) {
    SocialNetwork sn = parse_network(read_file(network_path));
    sn_to_facts(sn, prog);  // interns and checks predicate usage
    prog.validate();
  }
  VicClassification cls = classify(prog);
  std::string out = "{\"m\": " + std::to_string(cls.m);
  out += ", \"valid\": true, \"vic\": " + std::string(cls.vic ? "true" : "false");
  if (!cls.vic) {
    out += ", \"violated_condition\": " + std::to_string(cls.violated);
    out += ", \"witness\": \"" + json_escape(cls.witness) + "\"";
  }
  out += "}";
  std::cout << out << "\n";
  return 0;
}

int cmd_ground(const std::string& program_path, const std::string& network_path,
               std::int64_t cap) {
  std::cout << serialize_ground(load_ground(program_path, network_path, cap));
  return 0;
}

int cmd_solve(const std::string& program_path, const std::string& network_path,
              const std::string& method, int default_action, std::int64_t cap,
              std::optional<int> t_hat, int delta) {
  GroundProgram gp = load_ground(program_path, network_path, 0);
  if (method == "vic2") {
    auto [s, m] = find_se_vic2(gp, default_action - 1);
    std::cout << solution_json(gp, s, m) << "\n";
    return 0;
  }
  if (method == "enumerate") {
    EnumOptions opts;
    if (cap > 0) opts.cap = cap;
    opts.limit = 1;
    EnumerationResult res = enumerate_strong_equilibria(gp, opts);
    if (res.items.empty()) {
      std::cout << "{\"found\": false}\n";
      return 1;
    }
    std::cout << solution_json(gp, res.items.front().state, res.items.front().model) << "\n";
    return 0;
  }
  if (method == "milp") {
    const int horizon = t_hat ? *t_hat : compute_t_hat(gp, delta);
    ConstraintSystem cs = build_ilc(gp, horizon);
    MilpSolution sol = solve(gp, cs, SolveSense::feasibility, cap > 0 ? cap : kEnumCap);
    if (sol.status == MilpSolution::Status::cap_exceeded)
      throw CapExceededError("choice branch cap exceeded");
    if (sol.status != MilpSolution::Status::optimal) {
      std::cout << "{\"found\": false}\n";
      return 1;
    }
    std::cout << solution_json(gp, sol.choice, solution_interpretation(gp, cs, sol)) << "\n";
    return 0;
  }
  throw ValidationError("unknown solve method: " + method);
}

int cmd_enumerate(const std::string& program_path, const std::string& network_path,
                  const std::string& kind, const std::string& method, std::int64_t limit,
                  std::int64_t cap, std::optional<int> t_hat, int delta, int jobs) {
  GroundProgram gp = load_ground(program_path, network_path, 0);
  std::vector<Solution> items;
  std::int64_t explored = -1;
  if (method == "milp") {
    if (kind != "se") throw ValidationError("milp enumeration lists strong equilibria only");
    MilpEnumOptions opts;
    opts.delta = delta;
    opts.t_hat = t_hat;
    if (cap > 0) opts.branch_cap = cap;
    MilpEnumeration res = enumerate_se_milp(gp, opts);
    items = std::move(res.items);
  } else if (method == "brute") {
    EnumOptions opts;
    if (cap > 0) opts.cap = cap;
    opts.limit = limit;
    opts.jobs = jobs;
    EnumerationResult res = kind == "coherent" ? enumerate_coherent(gp, opts)
                                               : enumerate_strong_equilibria(gp, opts);
    items = std::move(res.items);
    explored = res.explored;
  } else {
    throw ValidationError("unknown enumeration method: " + method);
  }

  bool truncated = limit >= 0 && static_cast<std::int64_t>(items.size()) > limit;
  if (truncated) items.resize(static_cast<std::size_t>(limit));
  std::string out = "{\"count\": " + std::to_string(items.size());
  if (explored >= 0) out += ", \"explored\": " + std::to_string(explored);
  out += ", \"items\": [";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += solution_json(gp, items[i].state, items[i].model);
  }
  out += "]";
  out += ", \"truncated\": " + std::string(truncated ? "true" : "false") + "}";
  std::cout << out << "\n";
  return items.empty() ? 1 : 0;
}

int cmd_check(const std::string& program_path, const std::string& network_path,
              const std::string& interpretation_path) {
  GroundProgram gp = load_ground(program_path, network_path, 0);
  Interpretation i = parse_interpretation(gp, read_file(interpretation_path));
  CheckReport rep = check_interpretation(gp, i);
  auto b = [](bool v) { return v ? "true" : "false"; };
  std::string out = "{\"coherent\": ";
  out += b(rep.is_coherent);
  out += ", \"model\": ";
  out += b(rep.is_model);
  out += ", \"selection\": [";
  for (std::size_t k = 0; k < rep.selection.size(); ++k) {
    if (k) out += ", ";
    out += std::to_string(rep.selection[k] < 0 ? -1 : rep.selection[k] + 1);
  }
  out += "], \"strong_equilibrium\": ";
  out += b(rep.is_strong);
  out += "}";
  std::cout << out << "\n";
  return 0;
}

int cmd_query(const std::string& program_path, const std::string& network_path,
              const std::string& query_path, const std::string& method, std::int64_t cap,
              std::optional<int> t_hat, int delta) {
  GroundProgram gp = load_ground(program_path, network_path, 0);
  EstimationQuery q = parse_query_json(read_file(query_path), gp);
  RangeAnswer ans;
  if (method == "naive") {
    EnumOptions opts;
    if (cap > 0) opts.cap = cap;
    ans = range_naive(gp, q, opts);
  } else if (method == "monotone") {
    ans = range_monotone_vic2(gp, q);
  } else if (method == "milp") {
    MilpQueryOptions opts;
    opts.delta = delta;
    opts.t_hat = t_hat;
    if (cap > 0) opts.branch_cap = cap;
    ans = range_linear_milp(gp, q, opts);
  } else {
    throw ValidationError("unknown query method: " + method);
  }

  const char* status = ans.status == RangeStatus::exact        ? "exact"
                       : ans.status == RangeStatus::bounds_only ? "bounds_only"
                                                                : "undefined";
  std::string out = "{";
  if (ans.status != RangeStatus::undefined) {
    out += "\"glb\": " + format_value(ans.glb);
    if (ans.glb_witness) out += ", \"glb_state\": " + state_json(gp, ans.glb_witness->state);
    out += ", \"lub\": " + format_value(ans.lub);
    if (ans.lub_witness) out += ", \"lub_state\": " + state_json(gp, ans.lub_witness->state);
    out += ", ";
  }
  out += "\"method\": \"" + json_escape(ans.method) + "\"";
  out += ", \"status\": \"";
  out += status;
  out += "\"}";
  std::cout << out << "\n";
  return ans.status == RangeStatus::undefined ? 1 : 0;
}

int cmd_compile_game(const std::string& game_path, double eps) {
  GenericGame g = parse_game_json(read_file(game_path));
  std::cout << serialize_program(compile_generic_game(g, eps));
  return 0;
}

int cmd_compile_apt_simon(const std::string& asg_path, int default_action) {
  AptSimonGame g = parse_asg_json(read_file(asg_path));
  Program prog = compile_apt_simon(g);
  GroundProgram gp = ground(std::move(prog));
  std::string out = "{\"products\": " + std::to_string(g.products.size());
  out += ", \"rules\": " + std::to_string(gp.rules.size());
  out += ", \"vertices\": " + std::to_string(g.vertices.size());
  if (g.products.size() == 2) {
    auto [s, m] = find_se_vic2(gp, default_action - 1);
    out += ", \"equilibrium\": " + solution_json(gp, s, m);
  }
  out += "}";
  std::cout << out << "\n";
  return 0;
}

int cmd_export_lp(const std::string& program_path, const std::string& network_path,
                  std::optional<int> t_hat, int delta, const std::string& objective_path,
                  const std::string& sense_name, bool no_payoff) {
  GroundProgram gp = load_ground(program_path, network_path, 0);
  SolveSense sense = sense_name == "min" ? SolveSense::minimize : SolveSense::maximize;
  if (!objective_path.empty()) {
    EstimationQuery q = parse_query_json(read_file(objective_path), gp);
    MilpQueryOptions opts;
    opts.delta = delta;
    opts.t_hat = t_hat;
    std::cout << export_lp(build_query_system(gp, q, opts), sense);
    return 0;
  }
  const int horizon = t_hat ? *t_hat : compute_t_hat(gp, delta);
  IlcOptions opts;
  opts.payoff_rows = !no_payoff;
  std::cout << export_lp(build_ilc(gp, horizon, opts), sense);
  return 0;
}

PerturbKind parse_perturb(const std::string& spec, double& p) {
  if (spec.empty() || spec == "none") return PerturbKind::none;
  auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw ValidationError("perturbation must be none, node:<p> or edge:<p>");
  const std::string kind = spec.substr(0, colon);
  try {
    p = std::stod(spec.substr(colon + 1));
  } catch (const std::exception&) {
    throw ValidationError("perturbation probability is not a number: " + spec);
  }
  if (kind == "node") return PerturbKind::node;
  if (kind == "edge") return PerturbKind::edge;
  throw ValidationError("perturbation must be none, node:<p> or edge:<p>");
}

int cmd_experiment(const std::string& network_path, const std::string& likes_path,
                   const std::string& models, double delta, int competition, double tau,
                   std::uint64_t seed, const std::string& perturb,
                   const std::string& parties_csv, bool all_models, int jobs) {
  SocialNetwork sn = parse_network(read_file(network_path));
  std::vector<std::string> parties;
  {
    std::istringstream ss(parties_csv);
    std::string item;
    while (std::getline(ss, item, ',')) parties.push_back(item);
  }
  PreferenceTable prefs = compute_rho(parse_likes(read_file(likes_path)), parties);

  ScenarioConfig cfg;
  {
    std::istringstream ss(models);
    char comma = 0;
    if (!(ss >> cfg.mod1 >> comma >> cfg.mod2) || comma != ',')
      throw ValidationError("--models expects two ids like 1,3");
  }
  cfg.delta = delta;
  cfg.competition = competition;
  cfg.tau = tau;
  cfg.seed = seed;
  cfg.perturb = parse_perturb(perturb, cfg.perturb_p);

  if (!all_models) {
    RocResult res = run_scenario(cfg, sn, prefs);
    std::cout << scenario_row_json(ScenarioRow{cfg, res.auroc, res.time_ms}) << "\n";
    return 0;
  }
  std::vector<ScenarioConfig> cfgs;
  for (int m1 = 1; m1 <= 3; ++m1)
    for (int m2 = 1; m2 <= 3; ++m2) {
      cfg.mod1 = m1;
      cfg.mod2 = m2;
      cfgs.push_back(cfg);
    }
  std::vector<ScenarioRow> rows = run_scenario_matrix(cfgs, sn, prefs, jobs);
  std::string out = "[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out += ", ";
    out += scenario_row_json(rows[i]);
  }
  std::cout << out << "]\n";
  return 0;
}

int cmd_synth(std::int64_t n, std::int64_t e, int communities, double homophily,
              std::uint64_t seed, const std::string& out_prefix) {
  SynthResult res = synth_network(n, e, communities, homophily, seed);
  const std::string sn_path = out_prefix + ".sn.tsv";
  const std::string likes_path = out_prefix + ".likes.tsv";
  write_file(sn_path, serialize_network(res.sn));
  write_file(likes_path, serialize_likes(res.likes));
  std::string out = "{\"edges\": " + std::to_string(res.sn.edges.size() / 2);
  out += ", \"likes\": \"" + json_escape(likes_path) + "\"";
  out += ", \"network\": \"" + json_escape(sn_path) + "\"";
  out += ", \"users\": " + std::to_string(res.prefs.users.size());
  out += ", \"vertices\": " + std::to_string(res.sn.vertices.size()) + "}";
  std::cout << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"choice-program engine for competitive diffusion in social networks"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int jobs = 1;
  std::string config_path;
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed for seeded operations");
  auto* jobs_opt = app.add_option("--jobs", jobs, "worker threads for parallel runners");
  app.add_option("--config", config_path, "JSON file with default option values");

  std::string program_path, network_path, interpretation_path, query_path, game_path;
  std::string method_solve = "enumerate", method_enum = "brute", method_query = "naive";
  std::string kind = "se", objective_path, sense_name = "max";
  std::string models = "1,1", perturb = "none", parties_csv = "p1,p2,p3", out_prefix;
  std::string likes_path;
  std::int64_t cap = 0, limit = -1, synth_n = 0, synth_e = 0;
  int default_action = 1, t_hat_raw = 0, delta_step = 10, competition = 1, communities = 2;
  double eps = kDefaultGameEps, exp_delta = 50.0, tau = kDefaultTippingTau, homophily = 0.9;
  bool all_models = false, no_payoff = false;

  auto add_program = [&](CLI::App* sub) {
    sub->add_option("program", program_path, "program file (.cgap)")->required();
    sub->add_option("--network", network_path, "social network file (.sn.tsv)");
  };

  auto* sc_validate = app.add_subcommand("validate", "parse and structurally check a program");
  add_program(sc_validate);

  auto* sc_ground = app.add_subcommand("ground", "dump the ground program");
  add_program(sc_ground);
  sc_ground->add_option("--cap", cap, "ground instance cap");

  auto* sc_solve = app.add_subcommand("solve", "find one strong equilibrium");
  add_program(sc_solve);
  auto* solve_method =
      sc_solve->add_option("--method", method_solve, "enumerate | vic2 | milp");
  auto* solve_action = sc_solve->add_option("--default-action", default_action,
                                            "starting action for vic2 (1 or 2)");
  sc_solve->add_option("--cap", cap, "enumeration / branch cap");
  auto* solve_t_hat = sc_solve->add_option("--t-hat", t_hat_raw, "pin the unroll horizon");
  sc_solve->add_option("--delta", delta_step, "horizon search step");

  auto* sc_enum = app.add_subcommand("enumerate", "list coherent models or strong equilibria");
  add_program(sc_enum);
  auto* enum_kind = sc_enum->add_option("--kind", kind, "coherent | se");
  auto* enum_method = sc_enum->add_option("--method", method_enum, "brute | milp");
  auto* enum_limit = sc_enum->add_option("--limit", limit, "truncate the listing");
  sc_enum->add_option("--cap", cap, "enumeration / branch cap");
  auto* enum_t_hat = sc_enum->add_option("--t-hat", t_hat_raw, "pin the unroll horizon");
  sc_enum->add_option("--delta", delta_step, "horizon search step");

  auto* sc_check = app.add_subcommand("check", "classify an interpretation");
  add_program(sc_check);
  sc_check->add_option("--interpretation", interpretation_path, "interpretation JSON")
      ->required();

  auto* sc_query = app.add_subcommand("query", "answer a range estimation query");
  add_program(sc_query);
  sc_query->add_option("--query", query_path, "query file (.query.json)")->required();
  auto* query_method = sc_query->add_option("--method", method_query, "naive | monotone | milp");
  sc_query->add_option("--cap", cap, "enumeration / branch cap");
  auto* query_t_hat = sc_query->add_option("--t-hat", t_hat_raw, "pin the unroll horizon");
  sc_query->add_option("--delta", delta_step, "horizon search step");

  auto* sc_game = app.add_subcommand("compile-game", "compile a game matrix to a program");
  sc_game->add_option("game", game_path, "game file (.game.json)")->required();
  auto* game_eps = sc_game->add_option("--eps", eps, "utility shift in (0,1)");

  auto* sc_asg = app.add_subcommand("compile-apt-simon", "compile a product-adoption game");
  sc_asg->add_option("game", game_path, "game file (.asg.json)")->required();
  sc_asg->add_option("--default-action", default_action, "starting action (1 or 2)");

  auto* sc_lp = app.add_subcommand("export-lp", "write the constraint system in LP format");
  add_program(sc_lp);
  auto* lp_t_hat = sc_lp->add_option("--t-hat", t_hat_raw, "unroll horizon (computed if absent)");
  sc_lp->add_option("--delta", delta_step, "horizon search step");
  sc_lp->add_option("--objective", objective_path, "query file lowered into the objective");
  sc_lp->add_option("--sense", sense_name, "max | min");
  sc_lp->add_flag("--no-payoff", no_payoff, "drop the equilibrium payoff rows");

  auto* sc_exp = app.add_subcommand("experiment", "run one accuracy scenario");
  sc_exp->add_option("--network", network_path, "social network file (.sn.tsv)")->required();
  sc_exp->add_option("--likes", likes_path, "likes file (.likes.tsv)")->required();
  auto* exp_models = sc_exp->add_option("--models", models, "side diffusion models, e.g. 1,3");
  auto* exp_delta_opt = sc_exp->add_option("--delta", exp_delta, "training percentage");
  auto* exp_comp = sc_exp->add_option("--competition", competition, "competition id 1..4");
  auto* exp_tau = sc_exp->add_option("--tau", tau, "tipping threshold");
  auto* exp_perturb = sc_exp->add_option("--perturb", perturb, "none | node:<p> | edge:<p>");
  sc_exp->add_option("--parties", parties_csv, "party category names");
  sc_exp->add_flag("--all-models", all_models, "run the full 3x3 model matrix");

  auto* sc_synth = app.add_subcommand("synth", "generate a planted-partition network");
  sc_synth->add_option("--n", synth_n, "vertex count")->required();
  sc_synth->add_option("--e", synth_e, "undirected edge count")->required();
  auto* synth_comm = sc_synth->add_option("--communities", communities, "community count");
  auto* synth_hom = sc_synth->add_option("--homophily", homophily, "intra-community edge share");
  sc_synth->add_option("--out", out_prefix, "output path prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ConfigDefaults cfg;
    cfg.load(config_path);
    cfg.apply(seed_opt, "seed", seed);
    cfg.apply(jobs_opt, "jobs", jobs);

    std::optional<int> t_hat;
    if (*sc_solve) {
      cfg.apply(solve_method, "method", method_solve);
      cfg.apply(solve_action, "default_action", default_action);
      if (solve_t_hat->count() > 0) t_hat = t_hat_raw;
      return cmd_solve(program_path, network_path, method_solve, default_action, cap, t_hat,
                       delta_step);
    }
    if (*sc_validate) return cmd_validate(program_path, network_path);
    if (*sc_ground) return cmd_ground(program_path, network_path, cap);
    if (*sc_enum) {
      cfg.apply(enum_kind, "kind", kind);
      cfg.apply(enum_method, "method", method_enum);
      cfg.apply(enum_limit, "limit", limit);
      if (enum_t_hat->count() > 0) t_hat = t_hat_raw;
      return cmd_enumerate(program_path, network_path, kind, method_enum, limit, cap, t_hat,
                           delta_step, jobs);
    }
    if (*sc_check) return cmd_check(program_path, network_path, interpretation_path);
    if (*sc_query) {
      cfg.apply(query_method, "method", method_query);
      if (query_t_hat->count() > 0) t_hat = t_hat_raw;
      return cmd_query(program_path, network_path, query_path, method_query, cap, t_hat,
                       delta_step);
    }
    if (*sc_game) {
      cfg.apply(game_eps, "eps", eps);
      return cmd_compile_game(game_path, eps);
    }
    if (*sc_asg) return cmd_compile_apt_simon(game_path, default_action);
    if (*sc_lp) {
      if (lp_t_hat->count() > 0) t_hat = t_hat_raw;
      return cmd_export_lp(program_path, network_path, t_hat, delta_step, objective_path,
                           sense_name, no_payoff);
    }
    if (*sc_exp) {
      cfg.apply(exp_models, "models", models);
      cfg.apply(exp_delta_opt, "delta", exp_delta);
      cfg.apply(exp_comp, "competition", competition);
      cfg.apply(exp_tau, "tau", tau);
      cfg.apply(exp_perturb, "perturb", perturb);
      return cmd_experiment(network_path, likes_path, models, exp_delta, competition, tau, seed,
                            perturb, parties_csv, all_models, jobs);
    }
    if (*sc_synth) {
      cfg.apply(synth_comm, "communities", communities);
      cfg.apply(synth_hom, "homophily", homophily);
      return cmd_synth(synth_n, synth_e, communities, homophily, seed, out_prefix);
    }
    throw ValidationError("no subcommand given");
  } catch (const CapExceededError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
