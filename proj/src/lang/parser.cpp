#include "qbc/lang/parser.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace qbc {

void Env::define(LetDef d) {
  auto it = index_.find(d.name);
  if (it != index_.end()) throw Error("'" + d.name + "' is already defined");
  index_[d.name] = defs_.size();
  defs_.push_back(std::move(d));
}

const LetDef* Env::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &defs_[it->second];
}

std::string print_let(const LetDef& d) {
  std::string s = "let " + d.name;
  if (!d.params.empty()) {
    s += "(";
    for (std::size_t i = 0; i < d.params.size(); ++i) s += (i ? ", " : "") + d.params[i];
    s += ")";
  }
  return s + " = " + print_expr(d.body);
}

namespace {
const std::set<std::string> kTransformers{"wp", "wlp", "wpn", "wpow", "wlpow"};
}

Parser::Parser(std::string_view src) : src_(src), toks_(tokenize(src_)) {}

const Token& Parser::peek(std::size_t k) const {
  return toks_[std::min(i_ + k, toks_.size() - 1)];
}

bool Parser::at_keyword(std::string_view kw) const { return at(Tok::Ident) && peek().text == kw; }

Token Parser::next() {
  Token t = peek();
  if (i_ < toks_.size() - 1) ++i_;
  return t;
}

Token Parser::expect(Tok t) {
  if (!at(t)) fail(std::string("expected ") + tok_name(t) + ", found " + tok_name(peek().kind) +
                   (peek().text.empty() ? "" : " '" + peek().text + "'"));
  return next();
}

void Parser::expect_keyword(std::string_view kw) {
  if (!at_keyword(kw)) fail("expected '" + std::string(kw) + "'");
  next();
}

bool Parser::accept(Tok t) {
  if (!at(t)) return false;
  next();
  return true;
}

bool Parser::accept_keyword(std::string_view kw) {
  if (!at_keyword(kw)) return false;
  next();
  return true;
}

void Parser::fail(const std::string& msg) const { fail_at(peek(), msg); }

void Parser::fail_at(const Token& t, const std::string& msg) const {
  throw ParseError(msg, t.line, t.col);
}

std::string Parser::slice_from(std::size_t from) const {
  if (from >= i_) return "";
  const std::size_t b = toks_[from].begin;
  const std::size_t e = toks_[i_ - 1].end;
  return src_.substr(b, e - b);
}

// ------------------------------------------------------------ expressions

ExprPtr Parser::expr() { return sum(); }

ExprPtr Parser::sum() {
  ExprPtr l = term();
  for (;;) {
    if (accept(Tok::Plus))
      l = ex::binary(ExprKind::Add, l, term());
    else if (accept(Tok::Minus))
      l = ex::binary(ExprKind::Sub, l, term());
    else
      return l;
  }
}

ExprPtr Parser::term() {
  ExprPtr l = unary();
  for (;;) {
    if (accept(Tok::Star))
      l = ex::binary(ExprKind::Mul, l, unary());
    else if (accept(Tok::Slash))
      l = ex::binary(ExprKind::Div, l, unary());
    else
      return l;
  }
}

ExprPtr Parser::unary() {
  if (accept(Tok::Minus)) return ex::neg(unary());
  return power();
}

ExprPtr Parser::power() {
  ExprPtr b = postfix();
  if (accept(Tok::Caret)) return ex::binary(ExprKind::Pow, b, unary());
  return b;
}

ExprPtr Parser::postfix() {
  ExprPtr e = primary();
  while (accept(Tok::At)) {
    std::vector<std::string> vars;
    if (accept(Tok::LParen)) {
      vars = var_list();
      expect(Tok::RParen);
    } else {
      vars.push_back(expect(Tok::Ident).text);
    }
    e = ex::attach(e, vars);
  }
  return e;
}

std::vector<ExprPtr> Parser::call_args() {
  expect(Tok::LParen);
  std::vector<ExprPtr> args;
  if (accept(Tok::RParen)) return args;
  do {
    args.push_back(expr());
  } while (accept(Tok::Comma));
  expect(Tok::RParen);
  return args;
}

ExprPtr Parser::matrix_literal() {
  expect(Tok::LBracket);
  std::vector<std::vector<ExprPtr>> rows;
  do {
    expect(Tok::LBracket);
    std::vector<ExprPtr> row;
    do {
      row.push_back(expr());
    } while (accept(Tok::Comma));
    expect(Tok::RBracket);
    rows.push_back(std::move(row));
  } while (accept(Tok::Comma));
  expect(Tok::RBracket);
  const std::size_t c = rows[0].size();
  std::vector<ExprPtr> flat;
  for (auto& r : rows) {
    if (r.size() != c) fail("matrix literal rows have different lengths");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return ex::matrix(static_cast<int>(rows.size()), static_cast<int>(c), std::move(flat));
}

ExprPtr Parser::primary() {
  const Token& t = peek();
  switch (t.kind) {
    case Tok::Number: return ex::number_lexeme(next().text);
    case Tok::Imag: return ex::imag(next().text);
    case Tok::Ket: return ex::ket({next().text}, false);
    case Tok::Bra: return ex::ket({next().text}, true);
    case Tok::LParen: {
      next();
      ExprPtr e = expr();
      expect(Tok::RParen);
      return e;
    }
    case Tok::LBracket:
      if (peek(1).kind != Tok::LBracket) fail("expected a matrix literal [[...]]");
      return matrix_literal();
    case Tok::Ident: {
      std::string name = next().text;
      if ((name == "ket" || name == "bra") && at(Tok::LParen)) {
        next();
        std::vector<std::string> parts;
        do {
          const Token& p = peek();
          if (p.kind == Tok::Number || p.kind == Tok::Ident || p.kind == Tok::Plus || p.kind == Tok::Minus)
            parts.push_back(next().text);
          else
            fail("expected a basis label in " + name + "(...)");
        } while (accept(Tok::Comma));
        expect(Tok::RParen);
        return ex::ket(parts, name == "bra");
      }
      if (kTransformers.count(name) && at(Tok::LBrace)) {
        next();
        ProgPtr p = program();
        expect(Tok::RBrace);
        return ex::transform(name, p, call_args());
      }
      if (at(Tok::LParen)) return ex::call(name, call_args());
      return ex::ident(name);
    }
    default: fail(std::string("unexpected ") + tok_name(t.kind) + " in expression");
  }
}

// --------------------------------------------------------------- programs

std::vector<std::string> Parser::var_list() {
  std::vector<std::string> vs;
  do {
    vs.push_back(expect(Tok::Ident).text);
  } while (accept(Tok::Comma));
  return vs;
}

std::vector<VariableDecl> Parser::var_decls() {
  std::vector<VariableDecl> out;
  do {
    VariableDecl d;
    d.name = expect(Tok::Ident).text;
    if (accept(Tok::Colon)) {
      Token n = expect(Tok::Number);
      try {
        d.dim = std::stoi(n.text);
      } catch (...) {
        fail_at(n, "bad dimension");
      }
    }
    out.push_back(d);
  } while (accept(Tok::Comma));
  return out;
}

LetDef Parser::let_def() {
  LetDef d;
  d.name = expect(Tok::Ident).text;
  if (accept(Tok::LParen)) {
    d.params = var_list();
    expect(Tok::RParen);
  }
  expect(Tok::Equals);
  d.body = expr();
  return d;
}

std::string Parser::label() {
  if (at(Tok::Number) || at(Tok::Ident)) return next().text;
  fail("expected a label");
}

std::vector<std::string> Parser::bracket_vars() {
  expect(Tok::LBracket);
  auto vs = var_list();
  expect(Tok::RBracket);
  return vs;
}

bool Parser::at_branch_label() const {
  return (peek().kind == Tok::Number || peek().kind == Tok::Ident) && peek(1).kind == Tok::Colon;
}

ProgPtr Parser::program() {
  std::vector<ProgPtr> items;
  items.push_back(stmt());
  while (accept(Tok::Semi)) {
    if (at(Tok::RBrace) || at(Tok::End) || at_branch_label()) break;
    items.push_back(stmt());
  }
  if (items.size() == 1) return items[0];
  return pg::seq(std::move(items));
}

ProgPtr Parser::block() {
  expect(Tok::LBrace);
  ProgPtr p = program();
  expect(Tok::RBrace);
  return p;
}

ProgPtr Parser::stmt() {
  if (accept_keyword("skip")) return pg::skip();
  if (accept_keyword("repeat")) {
    Token n = expect(Tok::Number);
    int count = 0;
    try {
      std::size_t used = 0;
      count = std::stoi(n.text, &used);
      if (used != n.text.size()) throw 0;
    } catch (...) {
      fail_at(n, "repeat count must be a nonnegative integer");
    }
    return pg::repeat(count, block());
  }
  if (accept_keyword("case")) {
    std::vector<std::pair<std::string, ExprPtr>> meas;
    if (accept(Tok::LBrace)) {
      do {
        std::string l = label();
        expect(Tok::Colon);
        meas.emplace_back(l, expr());
      } while (accept(Tok::Comma));
      expect(Tok::RBrace);
    }
    auto vars = bracket_vars();
    expect(Tok::LBrace);
    std::vector<std::string> labels;
    std::vector<ProgPtr> branches;
    do {
      if (at(Tok::RBrace)) break;
      labels.push_back(label());
      expect(Tok::Colon);
      branches.push_back(program());
    } while (!at(Tok::RBrace));
    expect(Tok::RBrace);
    if (labels.empty()) fail("case needs at least one branch");
    if (!meas.empty()) {
      std::set<std::string> a, b(labels.begin(), labels.end());
      for (auto& m : meas) a.insert(m.first);
      if (a != b || a.size() != meas.size()) fail("case branch labels do not match measurement outcomes");
    }
    return pg::case_general(vars, meas, labels, branches);
  }
  if (at_keyword("if") || at_keyword("while")) {
    const bool is_if = next().text == "if";
    ExprPtr guard;
    if (!(at(Tok::LBracket) && peek(1).kind == Tok::Ident)) guard = expr();
    auto vars = bracket_vars();
    ProgPtr body = block();
    if (!is_if) return pg::while_(vars, guard, body);
    ProgPtr els;
    if (accept_keyword("else")) els = block();
    return pg::if_(vars, guard, body, els);
  }
  if (accept_keyword("hole")) {
    std::string id;
    if (at(Tok::Ident)) id = next().text;
    expect(Tok::LParen);
    std::vector<ExprPtr> pre, post;
    do {
      pre.push_back(expr());
    } while (accept(Tok::Comma));
    expect(Tok::Arrow);
    do {
      post.push_back(expr());
    } while (accept(Tok::Comma));
    expect(Tok::RParen);
    if (pre.size() != post.size()) {
      if (pre.size() == 1)
        pre.resize(post.size(), pre[0]);
      else if (post.size() == 1)
        post.resize(pre.size(), post[0]);
      else
        fail("hole has different numbers of pre- and postconditions");
    }
    std::vector<Clause> cl;
    for (std::size_t i = 0; i < pre.size(); ++i) cl.push_back({pre[i], post[i]});
    return pg::hole(id, cl);
  }
  if (!at(Tok::Ident)) fail(std::string("expected a statement, found ") + tok_name(peek().kind));
  auto vars = var_list();
  if (accept(Tok::Assign)) {
    Token k = expect(Tok::Ket);
    if (k.text.find_first_not_of('0') != std::string::npos) fail_at(k, "initialization must be to |0>");
    return pg::init(vars);
  }
  if (accept(Tok::MulAssign)) return pg::unitary(vars, expr());
  fail("expected ':=' or '*='");
}

// ----------------------------------------------------------- front ends

ExprPtr parse_expr(std::string_view text) {
  Parser p(text);
  ExprPtr e = p.expr();
  if (!p.at(Tok::End)) p.fail("unexpected trailing input");
  return e;
}

ProgPtr name_holes(const ProgPtr& root) {
  std::set<std::string> used;
  for (const auto& h : holes_of(root)) {
    if (h.id.empty()) continue;
    if (!used.insert(h.id).second) throw Error("duplicate hole id '" + h.id + "'");
  }
  int counter = 1;
  auto fresh = [&] {
    for (;; ++counter) {
      std::string id = "h" + std::to_string(counter);
      if (!used.count(id)) {
        used.insert(id);
        return id;
      }
    }
  };
  std::function<ProgPtr(const ProgPtr&)> rec = [&](const ProgPtr& p) -> ProgPtr {
    if (p->kind == ProgKind::Hole) {
      if (!p->hole_id.empty()) return p;
      return pg::hole(fresh(), p->clauses);
    }
    if (p->body.empty()) return p;
    auto copy = std::make_shared<Program>(*p);
    for (auto& c : copy->body) c = rec(c);
    return copy;
  };
  return rec(root);
}

ProgPtr parse_program_unchecked(std::string_view text) {
  Parser p(text);
  ProgPtr prog = p.program();
  if (!p.at(Tok::End)) p.fail("unexpected trailing input");
  return name_holes(prog);
}

namespace {
void vars_rec(const ProgPtr& p, std::vector<std::string>& out) {
  for (const auto& v : p->vars)
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  for (const auto& c : p->body) vars_rec(c, out);
}
}  // namespace

std::vector<std::string> program_variables(const ProgPtr& p) {
  std::vector<std::string> out;
  vars_rec(p, out);
  return out;
}

void check_program_vars(const ProgPtr& p, const VariableRegistry& reg) {
  if (!p->vars.empty()) reg.indices_of(p->vars);
  for (const auto& c : p->body) check_program_vars(c, reg);
}

ProgPtr parse_program(std::string_view text, const VariableRegistry& reg) {
  ProgPtr p = parse_program_unchecked(text);
  check_program_vars(p, reg);
  return p;
}

ProgramFile parse_program_file(std::string_view text, std::size_t dim_cap) {
  Parser p(text);
  std::vector<VariableDecl> decls;
  bool have_vars = false;
  auto env = std::make_shared<Env>();
  for (;;) {
    if (p.at_keyword("vars") && p.peek(1).kind == Tok::Ident && p.peek(2).kind != Tok::Assign &&
        p.peek(2).kind != Tok::MulAssign) {
      p.next();
      auto d = p.var_decls();
      decls.insert(decls.end(), d.begin(), d.end());
      have_vars = true;
      p.expect(Tok::Semi);
    } else if (p.at_keyword("let") && p.peek(1).kind == Tok::Ident &&
               (p.peek(2).kind == Tok::Equals || p.peek(2).kind == Tok::LParen)) {
      p.next();
      env->define(p.let_def());
      p.expect(Tok::Semi);
    } else {
      break;
    }
  }
  ProgPtr prog = p.program();
  if (!p.at(Tok::End)) p.fail("unexpected trailing input");
  prog = name_holes(prog);
  if (!have_vars)
    for (const auto& v : program_variables(prog)) decls.push_back({v, 2});
  ProgramFile f{VariableRegistry(decls, dim_cap), env, prog};
  check_program_vars(prog, f.reg);
  return f;
}

}  // namespace qbc
