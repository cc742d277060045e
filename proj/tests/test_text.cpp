#include <string>

#include "doctest.h"

#include "cgap/ground.hpp"
#include "cgap/model.hpp"
#include "cgap/text.hpp"

#include "corpus.hpp"
#include "helpers.hpp"

using namespace cgap;
using namespace testutil;

namespace {

int error_line(const std::string& text) {
  try {
    parse_program(text);
  } catch (const ParseError& e) {
    return e.line;
  }
  return -1;
}

}  // namespace

TEST_CASE("parsing builds the expected structure") {
  Program p = parse_valid(corpus::kFriends);
  CHECK(p.rules().size() == 5);
  CHECK(p.templates().empty());
  REQUIRE(p.vc().has_value());
  CHECK(p.vc()->m() == 2);
  CHECK(p.predicate(p.vc()->heads[0]).name == "buyMac^D");
  CHECK(p.predicate(p.vc()->heads[1]).name == "buyAsus^D");
  CHECK(p.predicate(p.vc()->bodies[0]).name == "buyMac^U");
  CHECK(p.predicate(p.vc()->heads[0]).role == PredRole::decision);
  CHECK(p.predicate(p.vc()->bodies[0]).role == PredRole::utility);

  const GapRule& prop = p.rules()[2];  // buyAsus^U(Y):M <- friend(X,Y):1, ...
  CHECK(p.predicate(prop.head.pred).name == "buyAsus^U");
  CHECK(prop.ann.kind == AnnotationExpr::Kind::variable);
  REQUIRE(prop.conds.size() == 1);
  CHECK(p.predicate(prop.conds[0].atom.pred).name == "friend");
  CHECK(p.predicate(prop.conds[0].atom.pred).kind == PredKind::edge);
  CHECK(prop.conds[0].bound == doctest::Approx(1.0));
  REQUIRE(prop.prop.size() == 1);
  CHECK(p.predicate(prop.prop[0].atom.pred).name == "buyAsus^D");

  Program named = parse_valid(corpus::kNamedFns);
  auto wsum = named.functions().find("wsum");
  REQUIRE(wsum.has_value());
  CHECK(named.functions().at(*wsum).shape == FnShape::linear);
  CHECK(named.functions().at(*wsum).coeffs == std::vector<double>{0.4, 0.5});
  auto tip2 = named.functions().find("tip2");
  REQUIRE(tip2.has_value());
  CHECK(named.functions().at(*tip2).shape == FnShape::gated_max);
  CHECK(named.functions().at(*tip2).threshold == doctest::Approx(0.6));

  Program star = parse_valid(corpus::kStarTip);
  REQUIRE(star.templates().size() == 2);
  CHECK(star.templates()[0].agg == NeighborTemplate::Agg::avg);
  CHECK_FALSE(star.templates()[0].tip.has_value());
  CHECK(star.templates()[1].agg == NeighborTemplate::Agg::max);
  CHECK(star.templates()[1].tip == doctest::Approx(1.0));
}

TEST_CASE("parse errors carry their source position") {
  CHECK(error_line("u1(a):1.5.\n") == 1);                    // annotation out of range
  CHECK(error_line("u1(a):0.4.\nFoo(a):0.5.\n") == 2);       // uppercase predicate
  CHECK(error_line("u1(a):0.4.\np(a,b,c):1.\n") == 2);       // ternary atom
  CHECK(error_line("u1(Y):M <- u2(X):M, u3(X):M.\n") == 1);  // M bound twice
  CHECK(error_line("u1(a):N <- u2(a):M.\n") == 1);           // N unbound
  CHECK(error_line("u1(a):f9(M) <- u2(a):M.\n") == 1);       // unknown function
  CHECK(error_line("d1(X), d2(Y) <~ u1(X), u2(Y).\n") == 1);
  CHECK(error_line("d1(X) <~ u1(X), u2(X).\n") == 1);        // unpaired options
  CHECK(error_line("u1(a):0.5") == 1);                       // missing period
  CHECK(error_line("u1(V): avg{ M | e(U,V):1, d1(V):M }.\n") == 1);

  try {
    parse_program("u1(a):0.5.\nu2(a)::0.3.\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.column > 0);
    CHECK(std::string(e.what()).find("parse error at 2:") != std::string::npos);
  }
}

TEST_CASE("serialization reaches a fixpoint after one trip") {
  for (const std::string& text : corpus::round_trip_corpus()) {
    CAPTURE(text);
    Program p1 = parse_program(text);
    std::string s1 = serialize_program(p1);
    Program p2 = parse_program(s1);
    CHECK(serialize_program(p2) == s1);
  }
}

TEST_CASE("serialized program text is canonical") {
  std::string s = serialize_program(parse_valid(corpus::kTwoEq));
  CHECK(s ==
        "buyMac^U(1):0.3.\n"
        "buyAsus^U(1):0.3.\n"
        "buyAsus^U(1):0.6 <- buyAsus^D(1):0.3.\n"
        "buyMac^D(X), buyAsus^D(X) <~ buyMac^U(X), buyAsus^U(X).\n");

  // Annotation variables are renamed by prop position; conditions print
  // before propagating atoms.
  std::string f = serialize_program(parse_valid(corpus::kFriends));
  CHECK(f.find("buyAsus^U(Y):M1 <- friend(X,Y):1, buyAsus^D(X):M1.") != std::string::npos);

  std::string star = serialize_program(parse_valid(corpus::kStarTip));
  CHECK(star.find("side1^U(V): avg{ M | friend(U,V):1, side1^D(U):M }.") != std::string::npos);
  CHECK(star.find("side2^U(V): max{ M | friend(U,V):1, side2^D(U):M } if sum >= 1.") !=
        std::string::npos);
}

TEST_CASE("ground listing prints one statement per instance") {
  std::string sg = serialize_ground(parse_and_ground(corpus::kFriends));
  CHECK(sg ==
        "friend(1,2):1.\n"
        "buyAsus^U(1):0.6.\n"
        "buyAsus^U(2):M1 <- friend(1,2):1, buyAsus^D(1):M1.\n"
        "buyMac^U(1):0.3.\n"
        "buyMac^U(2):M1 <- friend(1,2):1, buyMac^D(1):M1.\n"
        "buyMac^D(1), buyAsus^D(1) <~ buyMac^U(1), buyAsus^U(1).\n"
        "buyMac^D(2), buyAsus^D(2) <~ buyMac^U(2), buyAsus^U(2).\n");

  // Engine-registered gated functions get generated directives; declared
  // names survive.
  std::string tip = serialize_ground(parse_and_ground(corpus::kStarTip));
  CHECK(tip.find("#function gf") != std::string::npos);
  CHECK(tip.find("gated-max(1)") != std::string::npos);
  std::string named = serialize_ground(parse_and_ground(corpus::kNamedFns));
  CHECK(named.find("#function wsum 2 linear(0.4,0.5)") != std::string::npos);
  CHECK(named.find("u1(v1):wsum(M1,M2) <- a(v1):M1, b(v1):M2.") != std::string::npos);
}

TEST_CASE("network TSV parses and serializes") {
  SocialNetwork sn = parse_network(corpus::kElectionSn);
  CHECK(sn.vertices == std::vector<std::string>{"tom", "john"});
  REQUIRE(sn.labels.size() == 3);
  CHECK(sn.labels[1].pred == "likeCam");
  CHECK(sn.labels[1].value == doctest::Approx(0.6));
  REQUIRE(sn.edges.size() == 1);
  CHECK(sn.edges[0].src == "tom");
  CHECK(sn.edges[0].pred == "mentor");
  CHECK(serialize_network(sn) == corpus::kElectionSn);

  CHECK_THROWS_AS(parse_network("V\ttom\tstudent\n"), ParseError);
  CHECK_THROWS_AS(parse_network("E\ta\tb\tknows\t1.2\n"), ParseError);
  CHECK_THROWS_AS(parse_network("X\ta\tb\n"), ParseError);
  CHECK(parse_network("# comment\n\nV\ta\tp\t0.5\n").labels.size() == 1);
}

TEST_CASE("likes TSV parses and serializes") {
  std::vector<LikeRow> rows = parse_likes(corpus::kLikesTsv);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].user == "u1");
  CHECK(rows[0].page == "pg1");
  CHECK(rows[0].category == "p1");
  CHECK(rows[5].category == "music");
  CHECK(serialize_likes(rows) == corpus::kLikesTsv);
  CHECK_THROWS_AS(parse_likes("u1\tpg1\n"), ParseError);
}

TEST_CASE("json escaping and float formatting") {
  CHECK(json_escape("plain") == "plain");
  CHECK(json_escape("a\"b\\c\nd\te") == "a\\\"b\\\\c\\nd\\te");
  CHECK(json_escape(std::string(1, '\x01')) == "\\u0001");
  CHECK(format_value(0.1) == "0.1");
  CHECK(format_value(1.0) == "1");
  CHECK(format_value(1.0 / 3.0) == "0.333333333");
  CHECK(format_value(0.0) == "0");
}

TEST_CASE("glob matching") {
  CHECK(glob_match("*", "anything"));
  CHECK(glob_match("buy*", "buyAsus^U(1)"));
  CHECK(glob_match("*^D(*", "buyMac^D(1)"));
  CHECK(glob_match("buyMac^U(1)", "buyMac^U(1)"));
  CHECK(glob_match("*(2)", "buyMac^U(2)"));
  CHECK_FALSE(glob_match("*(2)", "buyMac^U(1)"));
  CHECK_FALSE(glob_match("buyAsus*", "buyMac^U(1)"));
  CHECK(glob_match("a*b*c", "a-xx-b-yy-c"));
  CHECK_FALSE(glob_match("a*b*c", "a-xx-c"));
  CHECK(glob_match("**", "x"));
  CHECK(glob_match("*", ""));
}

TEST_CASE("interpretation JSON round-trips") {
  GroundProgram gp = parse_and_ground(corpus::kTwoEq);
  Interpretation i = make_interp(gp, {{"buyMac^U(1)", 0.3}, {"buyAsus^U(1)", 0.6},
                                      {"buyAsus^D(1)", 0.6}});
  std::string s = serialize_interpretation(gp, i);
  CHECK(s.find("\"atoms\":{") != std::string::npos);
  // Keys print in sorted order.
  CHECK(s.find("buyAsus^D(1)") < s.find("buyAsus^U(1)"));
  CHECK(s.find("buyAsus^U(1)") < s.find("buyMac^D(1)"));
  Interpretation back = parse_interpretation(gp, s);
  CHECK(interp_close(back, i, 1e-12));

  std::string asus_only = serialize_interpretation(gp, i, "buyAsus*");
  CHECK(asus_only.find("buyAsus^U(1)") != std::string::npos);
  CHECK(asus_only.find("buyMac") == std::string::npos);

  // Atoms absent from the document default to zero.
  Interpretation zero = parse_interpretation(gp, R"({"atoms":{}})");
  CHECK(interp_close(zero, Interpretation::bottom(gp), 1e-12));

  CHECK_THROWS_AS(parse_interpretation(gp, R"({"atoms":{"nope(1)":0.5}})"), ValidationError);
  CHECK_THROWS_AS(parse_interpretation(gp, R"({"atoms":{"buyMac^U(1)":1.5}})"), ValidationError);
  CHECK_THROWS_AS(parse_interpretation(gp, R"({"atoms":{"buyMac^U(1)":"x"}})"), ValidationError);
  CHECK_THROWS_AS(parse_interpretation(gp, R"([1,2])"), ValidationError);
  CHECK_THROWS_AS(parse_interpretation(gp, "not json"), ParseError);
}
