#include <cmath>

#include "doctest.h"

#include "cgap/model.hpp"
#include "cgap/ground.hpp"
#include "cgap/semantics.hpp"
#include "cgap/text.hpp"

#include "corpus.hpp"
#include "helpers.hpp"

using namespace cgap;
using namespace testutil;

TEST_CASE("annotation function shapes evaluate correctly") {
  const double x3[3] = {0.2, 0.8, 0.5};

  AnnotationFn lin = AnnotationFn::linear_fn({0.4, 0.5}, 0.05);
  CHECK(lin.eval(x3, 2) == doctest::Approx(0.05 + 0.08 + 0.4));

  AnnotationFn c = AnnotationFn::constant(0.7);
  CHECK(c.eval(nullptr, 0) == doctest::Approx(0.7));

  AnnotationFn id = AnnotationFn::identity();
  CHECK(id.eval(x3, 1) == doctest::Approx(0.2));

  AnnotationFn mx = AnnotationFn::max_fn();
  CHECK(mx.eval(x3, 3) == doctest::Approx(0.8));

  AnnotationFn av = AnnotationFn::avg_fn();
  CHECK(av.eval(x3, 3) == doctest::Approx(0.5));

  AnnotationFn gate = AnnotationFn::gated_max_fn(1.5);
  CHECK(gate.eval(x3, 3) == doctest::Approx(0.8));  // sum 1.5 reaches the gate
  const double low[2] = {0.2, 0.8};
  CHECK(gate.eval(low, 2) == doctest::Approx(0.0));  // sum 1.0 stays below

  AnnotationFn ind = AnnotationFn::indicator_sum_fn({0.3, -0.2}, 0.5);
  const double picks[2] = {0.9, 0.0};
  CHECK(ind.eval(picks, 2) == doctest::Approx(0.8));
  const double both[2] = {0.9, 0.1};
  CHECK(ind.eval(both, 2) == doctest::Approx(0.6));
  CHECK_FALSE(AnnotationFn::indicator_sum_fn({0.3, -0.2}, 0.5).monotone);
}

TEST_CASE("annotation function validation rejects bad ranges") {
  CHECK_THROWS_AS(AnnotationFn::linear_fn({0.6, 0.6}).validate(), ValidationError);
  CHECK_THROWS_AS(AnnotationFn::linear_fn({-0.1}).validate(), ValidationError);
  CHECK_THROWS_AS(AnnotationFn::linear_fn({0.5}, 0.6).validate(), ValidationError);
  CHECK_THROWS_AS(AnnotationFn::gated_max_fn(-0.5).validate(), ValidationError);
  CHECK_NOTHROW(AnnotationFn::linear_fn({0.4, 0.5}, 0.1).validate());
}

TEST_CASE("function registry interning and duplicate names") {
  FunctionRegistry reg;
  AnnotationFn f = AnnotationFn::linear_fn({0.5}, 0.0);
  f.name = "half";
  FnId a = reg.add(f);
  CHECK(reg.find("half").has_value());
  CHECK(*reg.find("half") == a);
  CHECK_THROWS_AS(reg.add(f), ValidationError);

  FnId b = reg.intern(AnnotationFn::max_fn());
  FnId cid = reg.intern(AnnotationFn::max_fn());
  CHECK(b == cid);
  CHECK(reg.intern(AnnotationFn::avg_fn()) != b);
}

TEST_CASE("program structural validation") {
  CHECK_THROWS_AS(parse_valid("u1(a):0.5.\n"), ValidationError);  // no choice rule

  CHECK_THROWS_AS(parse_valid("u1(a):0.5.\n"
                              "d1(X), d2(X) <~ u1(X), u2(X).\n"
                              "d1(X), d2(X) <~ u1(X), u2(X).\n"),
                  Error);  // second choice rule

  // A predicate cannot serve as both utility and decision.
  CHECK_THROWS_AS(parse_valid("u1(a):0.5.\n"
                              "u1(X), d2(X) <~ u1(X), u2(X).\n"),
                  ValidationError);

  // Arity must be consistent across uses.
  CHECK_THROWS_AS(parse_program("p(a):1.\n"
                                "p(a,b):1.\n"
                                "d1(X), d2(X) <~ u1(X), u2(X).\n"),
                  Error);

  // Edge predicates may not head non-fact rules.
  CHECK_THROWS_AS(parse_valid("e(a,b):1.\n"
                              "e(X,Y):M <- u1(X):M.\n"
                              "d1(X), d2(X) <~ u1(X), u2(X).\n"),
                  ValidationError);

  // Propagating values must feed the head annotation.
  CHECK_THROWS_AS(parse_valid("u1(a):0.5 <- u2(a):M.\n"
                              "d1(X), d2(X) <~ u1(X), u2(X).\n"),
                  ValidationError);

  CHECK_NOTHROW(parse_valid(corpus::kFriends));
  CHECK_NOTHROW(parse_valid(corpus::kNamedFns));
}

TEST_CASE("predicate and vertex interning") {
  Program p;
  PredId q = p.pred("q", PredKind::vertex);
  CHECK(p.pred("q", PredKind::vertex) == q);
  CHECK_THROWS_AS(p.pred("q", PredKind::edge), ValidationError);
  CHECK(p.find_pred("q").has_value());
  CHECK_FALSE(p.find_pred("nope").has_value());

  VertexId v = p.vertex("tom");
  CHECK(p.vertex("tom") == v);
  CHECK(p.vertex_name(v) == "tom");
  CHECK(p.vertex_count() == 1);
}

TEST_CASE("social network fact conversion") {
  SocialNetwork sn;
  sn.add_vertex("a");
  sn.add_vertex("b");
  CHECK(sn.has_vertex("a"));
  CHECK_FALSE(sn.has_vertex("c"));
  sn.labels.push_back({"a", "score", 0.4});
  sn.edges.push_back({"a", "b", "knows", 1.0});

  Program prog = parse_program(
      "u1(X):M <- knows(Y,X):1, d1(Y):M.\n"
      "d1(X), d2(X) <~ u1(X), u2(X).\n");
  std::vector<GapRule> facts = sn_to_facts(sn, prog);
  CHECK(facts.size() == 2);
  CHECK(prog.find_vertex("a").has_value());
  CHECK(prog.find_vertex("b").has_value());
  CHECK(prog.find_pred("score").has_value());

  SocialNetwork bad;
  bad.labels.push_back({"ghost", "score", 0.4});
  Program prog2;
  CHECK_THROWS_AS(sn_to_facts(bad, prog2), ValidationError);
}

TEST_CASE("atom table interning and naming") {
  GroundProgram gp = parse_and_ground(corpus::kFriends);
  AtomId a = atom_id(gp, "buyAsus^U(1)");
  CHECK(gp.atom_name(a) == "buyAsus^U(1)");
  AtomId e = atom_id(gp, "friend(1,2)");
  CHECK(gp.atom_name(e) == "friend(1,2)");
  CHECK(gp.atoms->find(gp.atoms->at(a)).has_value());
  CHECK_FALSE(gp.find_atom_by_name("buyAsus^U(99)").has_value());
}

TEST_CASE("interpretation lattice operations") {
  GroundProgram gp = parse_and_ground(corpus::kTwoEq);
  Interpretation a = make_interp(gp, {{"buyMac^U(1)", 0.3}, {"buyAsus^U(1)", 0.1}});
  Interpretation b = make_interp(gp, {{"buyMac^U(1)", 0.2}, {"buyAsus^U(1)", 0.4}});

  Interpretation lo = meet(a, b), hi = join(a, b);
  CHECK(value(gp, lo, "buyMac^U(1)") == doctest::Approx(0.2));
  CHECK(value(gp, lo, "buyAsus^U(1)") == doctest::Approx(0.1));
  CHECK(value(gp, hi, "buyMac^U(1)") == doctest::Approx(0.3));
  CHECK(value(gp, hi, "buyAsus^U(1)") == doctest::Approx(0.4));
  CHECK(leq(lo, a));
  CHECK(leq(a, hi));
  CHECK_FALSE(leq(a, b));
  CHECK(leq(Interpretation::bottom(gp), a));
  CHECK(approx_equal(a, a));
  CHECK_FALSE(approx_equal(a, b));
}

TEST_CASE("rule satisfaction is threshold-based") {
  GroundProgram gp = parse_and_ground(corpus::kTwoEq);
  Interpretation i = make_interp(gp, {{"buyAsus^U(1)", 0.5}});
  AtomId asus = atom_id(gp, "buyAsus^U(1)");
  CHECK(satisfies(i, asus, 0.5));
  CHECK(satisfies(i, asus, 0.3));
  CHECK_FALSE(satisfies(i, asus, 0.6));

  // Facts force their annotation; the conditional rule is vacuous while the
  // decision stays below its bound.
  Interpretation low = make_interp(
      gp, {{"buyMac^U(1)", 0.3}, {"buyAsus^U(1)", 0.3}, {"buyAsus^D(1)", 0.0}});
  for (const GroundRule& r : gp.rules) CHECK(satisfies(low, gp, r));

  Interpretation broken = make_interp(
      gp, {{"buyMac^U(1)", 0.3}, {"buyAsus^U(1)", 0.3}, {"buyAsus^D(1)", 0.4}});
  int violated = 0;
  for (const GroundRule& r : gp.rules) violated += satisfies(broken, gp, r) ? 0 : 1;
  CHECK(violated == 1);  // the bootstrap rule now demands 0.6
}

TEST_CASE("vertex-choice satisfaction and selection") {
  GroundProgram gp = parse_and_ground(corpus::kTwoEq);
  REQUIRE(gp.vcs.size() == 1);
  const VcInstance& vc = gp.vcs[0];  // option 0 = buyMac, option 1 = buyAsus

  auto interp = [&](double mu, double md, double au, double ad) {
    return make_interp(gp, {{"buyMac^U(1)", mu},
                            {"buyMac^D(1)", md},
                            {"buyAsus^U(1)", au},
                            {"buyAsus^D(1)", ad}});
  };

  Interpretation pick_mac = interp(0.3, 0.3, 0.3, 0.0);
  CHECK(satisfies(pick_mac, vc));
  CHECK(selected_option(pick_mac, vc) == 0);

  Interpretation pick_asus = interp(0.3, 0.0, 0.6, 0.6);
  CHECK(satisfies(pick_asus, vc));
  CHECK(selected_option(pick_asus, vc) == 1);

  // Unchosen utilities are unconstrained; a zero-valued chosen pair counts.
  Interpretation zero_pair = interp(0.0, 0.0, 0.5, 0.0);
  CHECK(satisfies(zero_pair, vc));
  CHECK(selected_option(zero_pair, vc) == 0);

  // Two positive decisions can never satisfy the rule.
  Interpretation both = interp(0.3, 0.3, 0.3, 0.3);
  CHECK_FALSE(satisfies(both, vc));
  CHECK_FALSE(selected_option(both, vc).has_value());

  // A lone positive decision must match its utility exactly (within 1e-9).
  Interpretation off = interp(0.3, 0.2, 0.5, 0.0);
  CHECK_FALSE(satisfies(off, vc));
  Interpretation near_eq = interp(0.3, 0.3 + 4e-10, 0.5, 0.0);
  CHECK(satisfies(near_eq, vc));

  // Positive utilities with all-zero decisions fail unless some pair is
  // matched at zero.
  Interpretation dangling = interp(0.5, 0.0, 0.7, 0.0);
  CHECK_FALSE(satisfies(dangling, vc));
}

TEST_CASE("ground program derived indexes") {
  GroundProgram gp = parse_and_ground(corpus::kFriends);
  REQUIRE(gp.vcs.size() == 2);

  // Instances follow vertex interning order: "1" before "2".
  CHECK(gp.source->vertex_name(gp.vcs[0].v) == "1");
  CHECK(gp.source->vertex_name(gp.vcs[1].v) == "2");

  AtomId mac_d1 = atom_id(gp, "buyMac^D(1)");
  AtomId asus_d1 = atom_id(gp, "buyAsus^D(1)");
  AtomId mac_u2 = atom_id(gp, "buyMac^U(2)");
  AtomId fr = atom_id(gp, "friend(1,2)");
  CHECK(gp.vc_head_of[mac_d1] == 0);             // instance 0, option 0
  CHECK(gp.vc_head_of[asus_d1] == 1);            // instance 0, option 1
  CHECK(gp.vc_body_of[mac_u2] == (1 << 8 | 0));  // instance 1, option 0
  CHECK(gp.vc_head_of[fr] == -1);
  CHECK(gp.vc_body_of[fr] == -1);

  // The propagation rule for buyAsus^U(2) is reachable through the CSR index.
  AtomId asus_u2 = atom_id(gp, "buyAsus^U(2)");
  bool found = false;
  for (std::uint32_t k = gp.rules_of_off[asus_u2]; k < gp.rules_of_off[asus_u2 + 1]; ++k) {
    const GroundRule& r = gp.rules[gp.rules_of_idx[k]];
    CHECK(r.head == asus_u2);
    if (gp.prop_size(r) == 1 && gp.prop(r)[0] == asus_d1) found = true;
  }
  CHECK(found);
}
