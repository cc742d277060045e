#pragma once

#include <string>
#include <vector>

#include "cgap/model.hpp"

namespace cgap {

// ---------------------------------------------------------------------------
// Program text format (.cgap)
//
//   % comment
//   #function wsum 2 linear(0.4,0.6)
//   #function tip3 3 gated-max(0.5)
//   buyAsus^U(1):0.6.
//   buyAsus^U(Y):M <- friend(X,Y):1, buyAsus^D(X):M.
//   buyMac^D(X), buyAsus^D(X) <~ buyMac^U(X), buyAsus^U(X).
//   side1^U(V): avg{ M | friend(U,V):1, side1^D(U):M } if sum >= 0.5.
//
// Identifiers match [A-Za-z_][A-Za-z0-9_^-]*; uppercase-initial identifiers
// are variables. `<-` introduces a rule body, `<~` the vertex-choice rule,
// `.` terminates a statement.
// ---------------------------------------------------------------------------

Program parse_program(const std::string& text);
std::string serialize_program(const Program& prog);

// Ground-rule listing in the same statement syntax (one line per ground rule
// and per vertex-choice instance). Unnamed non-aggregate functions get
// generated gf<id> directives.
std::string serialize_ground(const GroundProgram& gp);

// ---------------------------------------------------------------------------
// Social network TSV format (.sn.tsv)
//
//   V<TAB>vertex<TAB>pred<TAB>value
//   E<TAB>src<TAB>dst<TAB>pred<TAB>weight
// ---------------------------------------------------------------------------

SocialNetwork parse_network(const std::string& text);
std::string serialize_network(const SocialNetwork& sn);

// ---------------------------------------------------------------------------
// Likes TSV format (.likes.tsv): user<TAB>page_id<TAB>category
// ---------------------------------------------------------------------------

struct LikeRow {
  std::string user;
  std::string page;
  std::string category;
};

std::vector<LikeRow> parse_likes(const std::string& text);
std::string serialize_likes(const std::vector<LikeRow>& rows);

// ---------------------------------------------------------------------------
// JSON reports
//
// All JSON emitted by the library sorts object keys and prints floats with 9
// significant digits.
// ---------------------------------------------------------------------------

std::string json_escape(const std::string& s);
std::string format_value(double v);  // 9 significant digits

// Simple '*'-wildcard match used for atom filters.
bool glob_match(const std::string& pattern, const std::string& name);

// {"atoms": {name: value, ...}} for atoms matching the pattern, keys sorted.
std::string serialize_interpretation(const GroundProgram& gp, const Interpretation& i,
                                     const std::string& pattern = "*");

// Reads {"atoms": {...}}; atoms absent from the document default to 0.
Interpretation parse_interpretation(const GroundProgram& gp, const std::string& json_text);

}  // namespace cgap
