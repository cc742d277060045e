#include "cgap/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include "json.hpp"

namespace cgap {

namespace {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class Tok {
  ident,
  number,
  lparen,
  rparen,
  lbrace,
  rbrace,
  comma,
  colon,
  dot,
  pipe,
  arrow,    // <-
  squiggle, // <~
  geq,      // >=
  hash,     // #
  eof,
};

struct Token {
  Tok kind = Tok::eof;
  std::string text;
  double num = 0.0;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= src_.size()) {
      t.kind = Tok::eof;
      return t;
    }
    char c = src_[pos_];
    if (is_ident_start(c)) {
      size_t start = pos_;
      advance();
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
      t.kind = Tok::ident;
      t.text = src_.substr(start, pos_ - start);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
          std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
        advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      }
      t.kind = Tok::number;
      t.text = src_.substr(start, pos_ - start);
      t.num = std::strtod(t.text.c_str(), nullptr);
      return t;
    }
    switch (c) {
      case '(': advance(); t.kind = Tok::lparen; return t;
      case ')': advance(); t.kind = Tok::rparen; return t;
      case '{': advance(); t.kind = Tok::lbrace; return t;
      case '}': advance(); t.kind = Tok::rbrace; return t;
      case ',': advance(); t.kind = Tok::comma; return t;
      case ':': advance(); t.kind = Tok::colon; return t;
      case '.': advance(); t.kind = Tok::dot; return t;
      case '|': advance(); t.kind = Tok::pipe; return t;
      case '#': advance(); t.kind = Tok::hash; return t;
      case '<':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
          advance();
          advance();
          t.kind = Tok::arrow;
          return t;
        }
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '~') {
          advance();
          advance();
          t.kind = Tok::squiggle;
          return t;
        }
        break;
      case '>':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
          advance();
          advance();
          t.kind = Tok::geq;
          return t;
        }
        break;
      default: break;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
  }

 private:
  static bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  static bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '^' || c == '-';
  }
  void advance() {
    if (src_[pos_] == '\n') {
      line_++;
      col_ = 1;
    } else {
      col_++;
    }
    pos_++;
  }
  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

bool is_variable_name(const std::string& s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct ParsedAtom {
  std::string pred;
  std::vector<std::string> args;  // raw lexemes
  int line = 0;
  int col = 0;
};

class ProgramParser {
 public:
  explicit ProgramParser(const std::string& src) : lex_(src) { shift(); }

  Program parse() {
    while (cur_.kind != Tok::eof) {
      if (cur_.kind == Tok::hash) {
        shift();
        parse_directive();
      } else {
        parse_clause();
      }
    }
    if (!prog_.vc()) throw ValidationError("program has no vertex-choice rule");
    prog_.validate();
    return std::move(prog_);
  }

 private:
  void shift() { cur_ = lex_.next(); }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, cur_.line, cur_.col); }

  void expect(Tok k, const char* what) {
    if (cur_.kind != k) fail(std::string("expected ") + what);
    shift();
  }

  std::string expect_ident(const char* what) {
    if (cur_.kind != Tok::ident) fail(std::string("expected ") + what);
    std::string s = cur_.text;
    shift();
    return s;
  }

  double expect_number(const char* what) {
    if (cur_.kind != Tok::number) fail(std::string("expected ") + what);
    double v = cur_.num;
    shift();
    return v;
  }

  double expect_annotation_constant() {
    int line = cur_.line, col = cur_.col;
    std::string lex = cur_.text;
    double v = expect_number("annotation constant");
    if (!(v >= 0.0 && v <= 1.0))
      throw ParseError("annotation constant " + lex + " outside [0,1]", line, col);
    return v;
  }

  void parse_directive() {
    std::string kw = expect_ident("directive name");
    if (kw != "function") fail("unknown directive '#" + kw + "'");
    AnnotationFn fn;
    fn.name = expect_ident("function name");
    if (is_variable_name(fn.name)) fail("function names must start lowercase");
    fn.arity = static_cast<int>(expect_number("function arity"));
    std::string kind = expect_ident("function kind");
    if (kind == "linear") {
      fn.shape = FnShape::linear;
      expect(Tok::lparen, "'('");
      if (cur_.kind != Tok::rparen) {
        fn.coeffs.push_back(expect_number("coefficient"));
        while (cur_.kind == Tok::comma) {
          shift();
          fn.coeffs.push_back(expect_number("coefficient"));
        }
      }
      expect(Tok::rparen, "')'");
      if (fn.arity < 0) fn.arity = static_cast<int>(fn.coeffs.size());
    } else if (kind == "max") {
      fn.shape = FnShape::maximum;
    } else if (kind == "avg") {
      fn.shape = FnShape::average;
    } else if (kind == "gated-max") {
      fn.shape = FnShape::gated_max;
      expect(Tok::lparen, "'('");
      fn.threshold = expect_number("threshold");
      expect(Tok::rparen, "')'");
    } else {
      fail("unknown function kind '" + kind + "'");
    }
    try {
      prog_.functions().add(std::move(fn));
    } catch (const ValidationError& e) {
      fail(e.what());
    }
  }

  ParsedAtom parse_atom() {
    ParsedAtom a;
    a.line = cur_.line;
    a.col = cur_.col;
    a.pred = expect_ident("predicate name");
    if (is_variable_name(a.pred)) throw ParseError("predicate names must start lowercase", a.line, a.col);
    expect(Tok::lparen, "'('");
    auto term = [&]() -> std::string {
      if (cur_.kind == Tok::ident || cur_.kind == Tok::number) {
        std::string s = cur_.text;
        shift();
        return s;
      }
      fail("expected term");
    };
    a.args.push_back(term());
    while (cur_.kind == Tok::comma) {
      shift();
      a.args.push_back(term());
    }
    expect(Tok::rparen, "')'");
    if (a.args.size() > 2) throw ParseError("predicates have at most two arguments", a.line, a.col);
    return a;
  }

  // Resolves a parsed atom against the program, interning predicates,
  // vertices, and rule-scoped variables.
  Atom resolve(const ParsedAtom& pa, std::vector<std::string>& vars) {
    PredKind kind = pa.args.size() == 2 ? PredKind::edge : PredKind::vertex;
    PredId pid;
    try {
      pid = prog_.pred(pa.pred, kind);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), pa.line, pa.col);
    }
    Atom a;
    a.pred = pid;
    a.arity = static_cast<int>(pa.args.size());
    for (size_t i = 0; i < pa.args.size(); ++i) {
      const std::string& lex = pa.args[i];
      if (is_variable_name(lex)) {
        a.args[i] = Term::var(intern_var(vars, lex));
      } else {
        a.args[i] = Term::vertex(prog_.vertex(lex));
      }
    }
    return a;
  }

  static VarId intern_var(std::vector<std::string>& vars, const std::string& name) {
    for (size_t i = 0; i < vars.size(); ++i)
      if (vars[i] == name) return static_cast<VarId>(i);
    vars.push_back(name);
    return static_cast<VarId>(vars.size() - 1);
  }

  void parse_clause() {
    ParsedAtom first = parse_atom();
    if (cur_.kind == Tok::comma || cur_.kind == Tok::squiggle) {
      parse_vc_rule(first);
      return;
    }
    expect(Tok::colon, "':' after head atom");
    // Template heads are followed by an aggregate name and '{'.
    if (cur_.kind == Tok::ident && (cur_.text == "avg" || cur_.text == "max")) {
      std::string agg = cur_.text;
      shift();
      if (cur_.kind == Tok::lbrace) {
        parse_template(first, agg);
        return;
      }
      // `max(...)`: fall through as a function application.
      parse_gap_rule(first, agg);
      return;
    }
    parse_gap_rule(first, std::nullopt);
  }

  // `pending_fn`: an aggregate identifier already consumed by parse_clause.
  void parse_gap_rule(const ParsedAtom& head_atom, std::optional<std::string> pending_fn) {
    GapRule r;
    r.line = head_atom.line;
    std::vector<std::string> vars;
    r.head = resolve(head_atom, vars);

    // Head annotation expression.
    std::optional<std::string> ann_var_name;
    std::vector<std::string> ann_fn_args;
    std::string ann_fn_name;
    if (pending_fn) {
      ann_fn_name = *pending_fn;
      parse_fn_args(ann_fn_args);
    } else if (cur_.kind == Tok::number) {
      r.ann = AnnotationExpr::constant(expect_annotation_constant());
    } else if (cur_.kind == Tok::ident) {
      std::string name = cur_.text;
      shift();
      if (cur_.kind == Tok::lparen) {
        ann_fn_name = name;
        parse_fn_args(ann_fn_args);
      } else {
        if (!is_variable_name(name)) fail("expected annotation constant, variable, or function");
        ann_var_name = name;
      }
    } else {
      fail("expected annotation");
    }

    // Body.
    std::vector<std::pair<ParsedAtom, std::string>> body;  // atom, annotation lexeme
    if (cur_.kind == Tok::arrow) {
      shift();
      while (cur_.kind != Tok::dot) {
        ParsedAtom ba = parse_atom();
        expect(Tok::colon, "':' after body atom");
        if (cur_.kind == Tok::number) {
          int line = cur_.line, col = cur_.col;
          double v = cur_.num;
          std::string lex = cur_.text;
          shift();
          if (!(v >= 0.0 && v <= 1.0))
            throw ParseError("annotation constant " + lex + " outside [0,1]", line, col);
          body.emplace_back(ba, lex);
        } else if (cur_.kind == Tok::ident && is_variable_name(cur_.text)) {
          body.emplace_back(ba, cur_.text);
          shift();
        } else {
          fail("expected body annotation");
        }
        if (cur_.kind == Tok::comma) shift();
        else break;
      }
    }
    expect(Tok::dot, "'.'");

    // Split the body into propagating atoms (variable annotations) and
    // constant conditions, then resolve the head expression.
    std::map<std::string, VarId> ann_vars;
    for (auto& [ba, ann] : body) {
      if (is_variable_name(ann)) {
        if (ann_vars.count(ann))
          throw ParseError("annotation variable '" + ann + "' bound twice", ba.line, ba.col);
        BodyAtom pb;
        pb.atom = resolve(ba, vars);
        pb.ann = static_cast<VarId>(r.prop.size());
        ann_vars[ann] = pb.ann;
        r.prop.push_back(pb);
      } else {
        CondAtom cb;
        cb.atom = resolve(ba, vars);
        cb.bound = std::strtod(ann.c_str(), nullptr);
        r.conds.push_back(cb);
      }
    }
    auto lookup_ann_var = [&](const std::string& name) -> VarId {
      auto it = ann_vars.find(name);
      if (it == ann_vars.end())
        throw ParseError("annotation variable '" + name + "' not bound by the body",
                         head_atom.line, head_atom.col);
      return it->second;
    };
    if (ann_var_name) {
      r.ann = AnnotationExpr::variable(lookup_ann_var(*ann_var_name));
    } else if (!ann_fn_name.empty()) {
      FnId fid;
      if (ann_fn_name == "max") {
        fid = prog_.functions().intern(AnnotationFn::max_fn());
      } else if (ann_fn_name == "avg") {
        fid = prog_.functions().intern(AnnotationFn::avg_fn());
      } else {
        auto found = prog_.functions().find(ann_fn_name);
        if (!found)
          throw ParseError("unknown annotation function '" + ann_fn_name + "'", head_atom.line,
                           head_atom.col);
        fid = *found;
      }
      std::vector<VarId> args;
      for (const auto& a : ann_fn_args) args.push_back(lookup_ann_var(a));
      r.ann = AnnotationExpr::apply(fid, std::move(args));
    }
    r.var_names = std::move(vars);
    try {
      prog_.add_rule(std::move(r));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), head_atom.line, head_atom.col);
    }
  }

  void parse_fn_args(std::vector<std::string>& out) {
    expect(Tok::lparen, "'('");
    if (cur_.kind != Tok::rparen) {
      out.push_back(expect_ident("annotation variable"));
      while (cur_.kind == Tok::comma) {
        shift();
        out.push_back(expect_ident("annotation variable"));
      }
    }
    expect(Tok::rparen, "')'");
    for (const auto& a : out)
      if (!is_variable_name(a)) fail("function arguments must be annotation variables");
  }

  void parse_vc_rule(const ParsedAtom& first) {
    std::vector<ParsedAtom> heads{first};
    while (cur_.kind == Tok::comma) {
      shift();
      heads.push_back(parse_atom());
    }
    if (cur_.kind != Tok::squiggle) fail("expected '<~' in vertex-choice rule");
    shift();
    std::vector<ParsedAtom> bodies;
    bodies.push_back(parse_atom());
    while (cur_.kind == Tok::comma) {
      shift();
      bodies.push_back(parse_atom());
    }
    expect(Tok::dot, "'.'");

    VCRule vc;
    vc.line = first.line;
    std::string var;
    auto resolve_vc_atom = [&](const ParsedAtom& pa) -> PredId {
      if (pa.args.size() != 1 || !is_variable_name(pa.args[0]))
        throw ParseError("vertex-choice atoms must be pred(Var)", pa.line, pa.col);
      if (var.empty()) var = pa.args[0];
      else if (var != pa.args[0])
        throw ParseError("vertex-choice rule must use a single vertex variable", pa.line, pa.col);
      try {
        return prog_.pred(pa.pred, PredKind::vertex);
      } catch (const ValidationError& e) {
        throw ParseError(e.what(), pa.line, pa.col);
      }
    };
    for (const auto& h : heads) vc.heads.push_back(resolve_vc_atom(h));
    for (const auto& b : bodies) vc.bodies.push_back(resolve_vc_atom(b));
    if (vc.heads.size() != vc.bodies.size())
      throw ParseError("vertex-choice rule must pair heads and bodies", first.line, first.col);
    try {
      prog_.set_vc(std::move(vc));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), first.line, first.col);
    }
  }

  void parse_template(const ParsedAtom& head_atom, const std::string& agg) {
    NeighborTemplate t;
    t.line = head_atom.line;
    t.agg = agg == "avg" ? NeighborTemplate::Agg::avg : NeighborTemplate::Agg::max;
    if (head_atom.args.size() != 1 || !is_variable_name(head_atom.args[0]))
      throw ParseError("template head must be pred(Var)", head_atom.line, head_atom.col);
    std::string head_var = head_atom.args[0];
    try {
      t.head_pred = prog_.pred(head_atom.pred, PredKind::vertex);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), head_atom.line, head_atom.col);
    }
    expect(Tok::lbrace, "'{'");
    std::string mu = expect_ident("aggregated variable");
    if (!is_variable_name(mu)) fail("aggregated term must be a variable");
    expect(Tok::pipe, "'|'");
    ParsedAtom edge = parse_atom();
    expect(Tok::colon, "':'");
    double w = expect_number("edge annotation");
    if (!value_eq(w, 1.0)) fail("template edge atoms must be annotated with 1");
    expect(Tok::comma, "','");
    ParsedAtom body = parse_atom();
    expect(Tok::colon, "':'");
    std::string body_ann = expect_ident("body annotation variable");
    expect(Tok::rbrace, "'}'");
    if (cur_.kind == Tok::ident && cur_.text == "if") {
      shift();
      std::string s = expect_ident("'sum'");
      if (s != "sum") fail("expected 'sum' in template gate");
      if (cur_.kind != Tok::geq) fail("expected '>='");
      shift();
      if (t.agg != NeighborTemplate::Agg::max) fail("tipping gate requires the max aggregate");
      t.tip = expect_number("threshold");
    }
    expect(Tok::dot, "'.'");

    if (edge.args.size() != 2 || body.args.size() != 1)
      throw ParseError("template body must be edge(U,V):1, pred(U):Mu", edge.line, edge.col);
    const std::string& u = body.args[0];
    if (!is_variable_name(u) || edge.args[0] != u || edge.args[1] != head_var)
      throw ParseError("template variables must follow edge(U,V), body(U), head(V)", edge.line,
                       edge.col);
    if (body_ann != mu)
      throw ParseError("aggregated variable must annotate the body atom", body.line, body.col);
    try {
      t.edge_pred = prog_.pred(edge.pred, PredKind::edge);
      t.body_pred = prog_.pred(body.pred, PredKind::vertex);
      prog_.add_template(t);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), edge.line, edge.col);
    }
  }

  Lexer lex_;
  Token cur_;
  Program prog_;
};

// ---------------------------------------------------------------------------
// Serialization helpers
// ---------------------------------------------------------------------------

std::string shortest_double(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string term_text(const Program& p, const GapRule& r, const Term& t) {
  return t.is_var ? r.var_names.at(static_cast<size_t>(t.id)) : p.vertex_name(t.id);
}

std::string atom_text(const Program& p, const GapRule& r, const Atom& a) {
  std::string s = p.predicate(a.pred).name;
  s += '(';
  for (int i = 0; i < a.arity; ++i) {
    if (i) s += ',';
    s += term_text(p, r, a.args[i]);
  }
  s += ')';
  return s;
}

// Name of the annotation variable bound by prop position `idx`.
std::string prop_var_name(VarId idx) { return "M" + std::to_string(idx + 1); }

}  // namespace

Program parse_program(const std::string& text) { return ProgramParser(text).parse(); }

std::string serialize_program(const Program& prog) {
  std::string out;
  // Named function directives first.
  for (FnId f = 0; f < prog.functions().size(); ++f) {
    const AnnotationFn& fn = prog.functions().at(f);
    if (fn.name.empty()) continue;
    out += "#function " + fn.name + " " + std::to_string(fn.arity) + " ";
    switch (fn.shape) {
      case FnShape::linear: {
        out += "linear(";
        for (size_t i = 0; i < fn.coeffs.size(); ++i) {
          if (i) out += ",";
          out += shortest_double(fn.coeffs[i]);
        }
        out += ")";
        break;
      }
      case FnShape::maximum: out += "max"; break;
      case FnShape::average: out += "avg"; break;
      case FnShape::gated_max: out += "gated-max(" + shortest_double(fn.threshold) + ")"; break;
      case FnShape::indicator_sum:
        throw ValidationError("engine-registered function '" + fn.name +
                              "' has no text representation");
    }
    out += "\n";
  }
  for (const auto& r : prog.rules()) {
    out += atom_text(prog, r, r.head) + ":";
    switch (r.ann.kind) {
      case AnnotationExpr::Kind::constant: out += shortest_double(r.ann.value); break;
      case AnnotationExpr::Kind::variable: out += prop_var_name(r.ann.var); break;
      case AnnotationExpr::Kind::apply: {
        const AnnotationFn& fn = prog.functions().at(r.ann.fn);
        std::string name = fn.name;
        if (name.empty())
          name = fn.shape == FnShape::maximum ? "max" : fn.shape == FnShape::average ? "avg" : "";
        if (name.empty())
          throw ValidationError("rule head applies an unnamed non-aggregate function");
        out += name + "(";
        for (size_t i = 0; i < r.ann.args.size(); ++i) {
          if (i) out += ",";
          out += prop_var_name(r.ann.args[i]);
        }
        out += ")";
        break;
      }
    }
    if (!r.prop.empty() || !r.conds.empty()) {
      out += " <- ";
      bool first = true;
      for (const auto& c : r.conds) {
        if (!first) out += ", ";
        first = false;
        out += atom_text(prog, r, c.atom) + ":" + shortest_double(c.bound);
      }
      for (const auto& b : r.prop) {
        if (!first) out += ", ";
        first = false;
        out += atom_text(prog, r, b.atom) + ":" + prop_var_name(b.ann);
      }
    }
    out += ".\n";
  }
  for (const auto& t : prog.templates()) {
    out += prog.predicate(t.head_pred).name + "(V): ";
    out += t.agg == NeighborTemplate::Agg::avg ? "avg" : "max";
    out += "{ M | " + prog.predicate(t.edge_pred).name + "(U,V):1, " +
           prog.predicate(t.body_pred).name + "(U):M }";
    if (t.tip) out += " if sum >= " + shortest_double(*t.tip);
    out += ".\n";
  }
  if (prog.vc()) {
    const VCRule& vc = *prog.vc();
    for (size_t i = 0; i < vc.heads.size(); ++i) {
      if (i) out += ", ";
      out += prog.predicate(vc.heads[i]).name + "(X)";
    }
    out += " <~ ";
    for (size_t i = 0; i < vc.bodies.size(); ++i) {
      if (i) out += ", ";
      out += prog.predicate(vc.bodies[i]).name + "(X)";
    }
    out += ".\n";
  }
  return out;
}

std::string serialize_ground(const GroundProgram& gp) {
  std::string out;
  const auto is_constant = [](const AnnotationFn& fn) {
    return fn.shape == FnShape::linear && fn.coeffs.empty();
  };
  const auto is_identity = [](const AnnotationFn& fn) {
    return fn.shape == FnShape::linear && fn.coeffs.size() == 1 && fn.coeffs[0] == 1.0 &&
           fn.intercept == 0.0;
  };

  std::vector<std::string> names(static_cast<size_t>(gp.fns.size()));
  for (FnId f = 0; f < gp.fns.size(); ++f) {
    const AnnotationFn& fn = gp.fns.at(f);
    if (!fn.name.empty()) {
      names[static_cast<size_t>(f)] = fn.name;
      continue;
    }
    if (is_constant(fn) || is_identity(fn) || fn.shape == FnShape::maximum ||
        fn.shape == FnShape::average)
      continue;  // printable inline
    if (fn.shape == FnShape::indicator_sum)
      throw ValidationError("engine-registered indicator function has no text representation");
    names[static_cast<size_t>(f)] = "gf" + std::to_string(f);
  }
  for (FnId f = 0; f < gp.fns.size(); ++f) {
    const std::string& name = names[static_cast<size_t>(f)];
    if (name.empty()) continue;
    const AnnotationFn& fn = gp.fns.at(f);
    out += "#function " + name + " " + std::to_string(fn.arity) + " ";
    switch (fn.shape) {
      case FnShape::linear: {
        out += "linear(";
        for (size_t i = 0; i < fn.coeffs.size(); ++i) {
          if (i) out += ",";
          out += shortest_double(fn.coeffs[i]);
        }
        out += ")";
        break;
      }
      case FnShape::maximum: out += "max"; break;
      case FnShape::average: out += "avg"; break;
      case FnShape::gated_max: out += "gated-max(" + shortest_double(fn.threshold) + ")"; break;
      case FnShape::indicator_sum:
        throw ValidationError("engine-registered indicator function has no text representation");
    }
    out += "\n";
  }

  for (const GroundRule& r : gp.rules) {
    const AnnotationFn& fn = gp.fns.at(r.fn);
    const int n = gp.prop_size(r);
    out += gp.atom_name(r.head) + ":";
    const std::string& name = names[static_cast<size_t>(r.fn)];
    if (is_constant(fn) && name.empty()) {
      out += shortest_double(fn.intercept);
    } else if (is_identity(fn) && name.empty() && n == 1) {
      out += "M1";
    } else {
      std::string agg = name.empty()
                            ? (fn.shape == FnShape::maximum ? "max" : "avg")
                            : name;
      out += agg + "(";
      for (int i = 0; i < n; ++i) {
        if (i) out += ",";
        out += prop_var_name(i);
      }
      out += ")";
    }
    if (n > 0 || gp.cond_size(r) > 0) {
      out += " <- ";
      bool first = true;
      for (int i = 0; i < gp.cond_size(r); ++i) {
        const GroundCond& c = gp.cond(r)[i];
        if (!first) out += ", ";
        first = false;
        out += gp.atom_name(c.atom) + ":" + shortest_double(c.bound);
      }
      for (int i = 0; i < n; ++i) {
        if (!first) out += ", ";
        first = false;
        out += gp.atom_name(gp.prop(r)[i]) + ":" + prop_var_name(i);
      }
    }
    out += ".\n";
  }
  for (const VcInstance& vc : gp.vcs) {
    for (size_t i = 0; i < vc.heads.size(); ++i) {
      if (i) out += ", ";
      out += gp.atom_name(vc.heads[i]);
    }
    out += " <~ ";
    for (size_t i = 0; i < vc.bodies.size(); ++i) {
      if (i) out += ", ";
      out += gp.atom_name(vc.bodies[i]);
    }
    out += ".\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Social network TSV
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

double parse_unit_value(const std::string& s, int line, const char* what) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ParseError(std::string("bad ") + what + " '" + s + "'", line, 1);
  if (!(v >= 0.0 && v <= 1.0))
    throw ParseError(std::string(what) + " " + s + " outside [0,1]", line, 1);
  return v;
}

}  // namespace

SocialNetwork parse_network(const std::string& text) {
  SocialNetwork sn;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cols = split_tabs(line);
    if (cols[0] == "V") {
      if (cols.size() != 4) throw ParseError("V rows take vertex, pred, value", lineno, 1);
      sn.add_vertex(cols[1]);
      sn.labels.push_back(SnVertexLabel{cols[1], cols[2], parse_unit_value(cols[3], lineno, "label value")});
    } else if (cols[0] == "E") {
      if (cols.size() != 5) throw ParseError("E rows take src, dst, pred, weight", lineno, 1);
      sn.add_vertex(cols[1]);
      sn.add_vertex(cols[2]);
      sn.edges.push_back(SnEdge{cols[1], cols[2], cols[3], parse_unit_value(cols[4], lineno, "edge weight")});
    } else {
      throw ParseError("row must start with V or E", lineno, 1);
    }
  }
  return sn;
}

std::string serialize_network(const SocialNetwork& sn) {
  std::string out;
  for (const auto& l : sn.labels)
    out += "V\t" + l.vertex + "\t" + l.pred + "\t" + shortest_double(l.value) + "\n";
  for (const auto& e : sn.edges)
    out += "E\t" + e.src + "\t" + e.dst + "\t" + e.pred + "\t" + shortest_double(e.weight) + "\n";
  return out;
}

std::vector<LikeRow> parse_likes(const std::string& text) {
  std::vector<LikeRow> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cols = split_tabs(line);
    if (cols.size() != 3) throw ParseError("likes rows take user, page_id, category", lineno, 1);
    rows.push_back(LikeRow{cols[0], cols[1], cols[2]});
  }
  return rows;
}

std::string serialize_likes(const std::vector<LikeRow>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.user + "\t" + r.page + "\t" + r.category + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// JSON reports
// ---------------------------------------------------------------------------

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

bool glob_match(const std::string& pattern, const std::string& name) {
  size_t p = 0, n = 0, star = std::string::npos, mark = 0;
  while (n < name.size()) {
    if (p < pattern.size() && (pattern[p] == name[n])) {
      ++p;
      ++n;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = n;
    } else if (star != std::string::npos) {
      p = star + 1;
      n = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::string serialize_interpretation(const GroundProgram& gp, const Interpretation& i,
                                     const std::string& pattern) {
  std::map<std::string, double> entries;
  for (AtomId a = 0; a < gp.atom_count(); ++a) {
    std::string name = gp.atom_name(a);
    if (glob_match(pattern, name)) entries[name] = i[a];
  }
  std::string out = "{\"atoms\":{";
  bool first = true;
  for (const auto& [name, value] : entries) {
    if (!first) out += ",";
    first = false;
    out += "\"" + json_escape(name) + "\":" + format_value(value);
  }
  out += "}}";
  return out;
}

Interpretation parse_interpretation(const GroundProgram& gp, const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), 1, 1);
  }
  if (!doc.is_object() || !doc.contains("atoms") || !doc["atoms"].is_object())
    throw ValidationError("interpretation document must be {\"atoms\": {...}}");
  Interpretation i(gp.atoms);
  for (const auto& [name, value] : doc["atoms"].items()) {
    auto atom = gp.find_atom_by_name(name);
    if (!atom) throw ValidationError("unknown atom '" + name + "' in interpretation");
    if (!value.is_number()) throw ValidationError("atom '" + name + "' has a non-numeric value");
    double v = value.get<double>();
    if (!(v >= 0.0 && v <= 1.0))
      throw ValidationError("atom '" + name + "' value outside [0,1]");
    i[*atom] = v;
  }
  return i;
}

}  // namespace cgap
