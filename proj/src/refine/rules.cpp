#include "qbc/refine/rules.hpp"

#include <algorithm>

#include "qbc/lang/lexer.hpp"

namespace qbc {

const char* arg_kind_name(ArgKind k) {
  switch (k) {
    case ArgKind::Vars: return "vars";
    case ArgKind::Expr: return "predicate";
    case ArgKind::Operator: return "operator";
    case ArgKind::Scalar: return "scalar";
    case ArgKind::Symbol: return "symbol";
    case ArgKind::Family: return "family";
    case ArgKind::Weights: return "weights";
    case ArgKind::Meas: return "measurement";
    case ArgKind::LabelMap: return "label-map";
    case ArgKind::Sequence: return "sequence";
  }
  return "?";
}

const std::vector<RuleSpec>& rule_catalog() {
  static const std::vector<RuleSpec> cat = [] {
    const ArgSpec vars{"vars", ArgKind::Vars, true, "variables the statement acts on"};
    const ArgSpec guard{"B", ArgKind::Operator, false, "binary measurement operator on vars, default |1><1|"};
    std::vector<RuleSpec> r;
    r.push_back({"H.skip", {}, true, true, 0, "{P} skip {Q} if P => Q"});
    r.push_back({"H.init", {vars}, true, true, 0, "vars := |0>, if P => sum_x |x><0| Q |0><x|"});
    r.push_back({"H.unit",
                 {vars, {"U", ArgKind::Operator, true, "unitary on vars"}},
                 true, true, 0, "vars *= U, if P => U^dagger Q U"});
    r.push_back({"H.seq", {{"R", ArgKind::Expr, true, "intermediate predicate"}}, true, true, 2,
                 "hole(P => R); hole(R => Q)"});
    r.push_back({"HP.split",
                 {{"family", ArgKind::Family, true, "clauses P_g => Q_g"},
                  {"weights", ArgKind::Weights, true, "probabilities p_g summing to 1"}},
                 true, false, 1, "P => sum p_g P_g and sum p_g Q_g => Q"});
    r.push_back({"HT.split",
                 {{"family", ArgKind::Family, true, "clauses P_g => Q_g"},
                  {"weights", ArgKind::Weights, true, "nonnegative weights p_g"}},
                 true, true, 1, "P => sum p_g P_g and sum p_g Q_g => Q"});
    r.push_back({"H.repeat",
                 {{"N", ArgKind::Scalar, true, "repetition count"},
                  {"index", ArgKind::Symbol, true, "index symbol j of the family"},
                  {"R", ArgKind::Expr, true, "family R_j, j = 0..N"}},
                 true, true, 1, "repeat N { hole(R_j => R_{j+1}) }, if P => R_0 and R_N => Q"});
    r.push_back({"H.case",
                 {vars,
                  {"meas", ArgKind::Meas, false, "std or {label: M, ...}"},
                  {"P", ArgKind::LabelMap, true, "{label: P_w, ...}"}},
                 true, true, -1, "case M [vars] { w: hole(P_w => Q) }, if P => sum_w M_w(P_w)"});
    r.push_back({"HP.while", {vars, guard, {"R", ArgKind::Expr, true, "loop invariant"}}, true, false, 1,
                 "while B [vars] { hole(R => B0(Q) + B1(R)) }, if P => B0(Q) + B1(R)"});
    r.push_back({"HT.while",
                 {vars, guard,
                  {"seq", ArgKind::Sequence, true, "ranking family n => R_n with R_0 = 0"},
                  {"limit", ArgKind::Expr, true, "limit R of R_n"}},
                 false, true, 1,
                 "while B [vars] { hole(R_{n+1} => B0(Q) + B1(R_n)) }, if P => B0(Q) + B1(R)"});
    r.push_back({"H.sw",
                 {{"P", ArgKind::Expr, true, "new precondition P'"}, {"Q", ArgKind::Expr, true, "new postcondition Q'"}},
                 true, true, 1, "hole(P' => Q'), if P => P' and Q' => Q"});
    r.push_back({"H.ifElse",
                 {vars, guard, {"R1", ArgKind::Expr, true, "precondition of the then branch"},
                  {"R0", ArgKind::Expr, true, "precondition of the else branch"}},
                 true, true, 2, "if B [vars] { hole(R1 => Q) } else { hole(R0 => Q) }, if P => B0(R0) + B1(R1)"});
    r.push_back({"H.if", {vars, guard, {"R", ArgKind::Expr, true, "precondition of the branch"}}, true, true, 1,
                 "if B [vars] { hole(R => Q) }, if P => B0(Q) + B1(R)"});
    r.push_back({"H.boostRep",
                 {vars, {"Q", ArgKind::Operator, true, "projection on vars"},
                  {"eps", ArgKind::Scalar, true, "success probability of the base routine"},
                  {"p", ArgKind::Scalar, true, "boosted success probability"}},
                 false, true, 1, "repeat N { if I - Q [vars] { hole(eps Q', Q' => Q, I) } }"});
    r.push_back({"H.boostWhile",
                 {vars, {"Q", ArgKind::Operator, true, "projection on vars"},
                  {"eps", ArgKind::Scalar, true, "success probability of the base routine"}},
                 false, true, 1, "while I - Q [vars] { hole(eps Q', Q' => Q, I) }"});
    return r;
  }();
  return cat;
}

const RuleSpec* find_rule(const std::string& name) {
  for (const auto& r : rule_catalog())
    if (r.name == name) return &r;
  return nullptr;
}

const RuleArg* RuleApplication::arg(const std::string& key) const {
  for (const auto& a : args)
    if (a.key == key) return &a;
  return nullptr;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string print_application(const RuleApplication& a) {
  std::string s = "refine " + a.hole + " with " + a.rule;
  const RuleSpec* spec = find_rule(a.rule);
  std::vector<const RuleArg*> ordered;
  if (spec) {
    for (const auto& as : spec->args)
      if (const RuleArg* x = a.arg(as.key)) ordered.push_back(x);
  } else {
    for (const auto& x : a.args) ordered.push_back(&x);
  }
  if (!ordered.empty()) {
    s += "(";
    for (std::size_t i = 0; i < ordered.size(); ++i) s += (i ? "; " : "") + ordered[i]->key + ": " + ordered[i]->raw;
    s += ")";
  }
  if (!a.ids.empty()) {
    s += " -> ";
    for (std::size_t i = 0; i < a.ids.size(); ++i) s += (i ? ", " : "") + a.ids[i];
  }
  return s;
}

namespace {

Tok sep_tok(char c) {
  switch (c) {
    case '&': return Tok::Amp;
    case ';': return Tok::Semi;
    case ',': return Tok::Comma;
    default: throw Error("unsupported separator");
  }
}

bool opens(Tok t) { return t == Tok::LParen || t == Tok::LBracket || t == Tok::LBrace; }
bool closes(Tok t) { return t == Tok::RParen || t == Tok::RBracket || t == Tok::RBrace; }

}  // namespace

std::vector<std::string> split_top(std::string_view text, char sep) {
  const Tok st = sep_tok(sep);
  auto toks = tokenize(text);
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (const auto& t : toks) {
    if (t.kind == Tok::End) break;
    if (opens(t.kind)) ++depth;
    if (closes(t.kind)) --depth;
    if (depth == 0 && t.kind == st) {
      out.push_back(trim(text.substr(start, t.begin - start)));
      start = t.end;
    }
  }
  out.push_back(trim(text.substr(start)));
  return out;
}

RuleApplication parse_application(std::string_view text) {
  RuleApplication app;
  std::string_view head = text, tail;
  if (auto rp = text.rfind(')'); rp != std::string_view::npos) {
    head = text.substr(0, rp + 1);
    tail = text.substr(rp + 1);
  } else if (auto ar = text.find("->"); ar != std::string_view::npos) {
    head = text.substr(0, ar);
    tail = text.substr(ar);
  }
  auto toks = tokenize(head);
  std::size_t i = 0;
  auto fail = [&](const std::string& msg) -> void {
    const Token& t = toks[std::min(i, toks.size() - 1)];
    throw ParseError(msg, t.line, t.col);
  };
  auto expect = [&](Tok k, const char* what) -> const Token& {
    if (toks[i].kind != k) fail(std::string("expected ") + what);
    return toks[i++];
  };
  app.hole = expect(Tok::Ident, "a hole id").text;
  if (toks[i].kind != Tok::Ident || toks[i].text != "with") fail("expected 'with'");
  ++i;
  app.rule = expect(Tok::Ident, "a rule name").text;
  while (toks[i].kind == Tok::Dot) {
    ++i;
    app.rule += "." + expect(Tok::Ident, "a rule name").text;
  }
  if (toks[i].kind == Tok::LParen) {
    ++i;
    while (toks[i].kind != Tok::RParen) {
      RuleArg a;
      a.key = expect(Tok::Ident, "an argument name").text;
      expect(Tok::Colon, "':'");
      const std::size_t from = i;
      int depth = 0;
      while (true) {
        const Tok k = toks[i].kind;
        if (k == Tok::End) fail("unterminated argument list");
        if (depth == 0 && (k == Tok::Semi || k == Tok::RParen)) break;
        if (opens(k)) ++depth;
        if (closes(k)) --depth;
        ++i;
      }
      if (i == from) fail("empty value for '" + a.key + "'");
      a.raw = trim(head.substr(toks[from].begin, toks[i - 1].end - toks[from].begin));
      if (app.arg(a.key)) fail("argument '" + a.key + "' given twice");
      app.args.push_back(std::move(a));
      if (toks[i].kind == Tok::Semi) ++i;
    }
    ++i;
  }
  if (toks[i].kind != Tok::End) fail("unexpected text after the rule");
  std::string t = trim(tail);
  if (!t.empty()) {
    if (t.rfind("->", 0) != 0) throw ParseError("expected '->' before new hole ids", 1, 1);
    for (auto& id : split_top(std::string_view(t).substr(2), ',')) {
      if (id.empty() || !std::all_of(id.begin(), id.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
          }))
        throw ParseError("bad hole id '" + id + "'", 1, 1);
      app.ids.push_back(id);
    }
  }
  return app;
}

}  // namespace qbc
