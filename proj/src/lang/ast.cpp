#include "qbc/lang/ast.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "qbc/linalg/errors.hpp"

namespace qbc {

namespace ex {

namespace {
std::shared_ptr<Expr> mk(ExprKind k) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  return e;
}
}  // namespace

ExprPtr number(double v) {
  if (v < 0) return neg(number(-v));
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return number_lexeme(std::string(buf, r.ptr));
}

ExprPtr number_lexeme(std::string lexeme) {
  auto e = mk(ExprKind::Number);
  e->text = std::move(lexeme);
  return e;
}

ExprPtr imag(std::string lexeme) {
  auto e = mk(ExprKind::Imag);
  e->text = std::move(lexeme);
  return e;
}

ExprPtr ident(std::string name) {
  auto e = mk(ExprKind::Ident);
  e->text = std::move(name);
  return e;
}

ExprPtr call(std::string name, std::vector<ExprPtr> args) {
  auto e = mk(ExprKind::Call);
  e->text = std::move(name);
  e->args = std::move(args);
  return e;
}

ExprPtr neg(ExprPtr a) {
  auto e = mk(ExprKind::Neg);
  e->args = {std::move(a)};
  return e;
}

ExprPtr binary(ExprKind k, ExprPtr a, ExprPtr b) {
  auto e = mk(k);
  e->args = {std::move(a), std::move(b)};
  return e;
}

ExprPtr add(ExprPtr a, ExprPtr b) { return binary(ExprKind::Add, std::move(a), std::move(b)); }
ExprPtr sub(ExprPtr a, ExprPtr b) { return binary(ExprKind::Sub, std::move(a), std::move(b)); }
ExprPtr mul(ExprPtr a, ExprPtr b) { return binary(ExprKind::Mul, std::move(a), std::move(b)); }

ExprPtr attach(ExprPtr a, std::vector<std::string> vars) {
  auto e = mk(ExprKind::Attach);
  e->args = {std::move(a)};
  e->vars = std::move(vars);
  return e;
}

ExprPtr ket(std::vector<std::string> parts, bool bra) {
  auto e = mk(ExprKind::Ket);
  e->vars = std::move(parts);
  e->bra = bra;
  return e;
}

ExprPtr matrix(int rows, int cols, std::vector<ExprPtr> entries) {
  auto e = mk(ExprKind::MatrixLit);
  e->rows = rows;
  e->cols = cols;
  e->args = std::move(entries);
  return e;
}

ExprPtr transform(std::string name, ProgPtr prog, std::vector<ExprPtr> args) {
  auto e = mk(ExprKind::Transform);
  e->text = std::move(name);
  e->prog = std::move(prog);
  e->args = std::move(args);
  return e;
}

}  // namespace ex

namespace {

int prec(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    case ExprKind::Attach: return 5;
    default: return 6;
  }
}

std::string join(const std::vector<std::string>& xs, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += sep;
    s += xs[i];
  }
  return s;
}

void print_into(std::string& out, const Expr& e, int min_prec);

void print_sub(std::string& out, const ExprPtr& e, int min_prec) { print_into(out, *e, min_prec); }

void print_args(std::string& out, const std::vector<ExprPtr>& args) {
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    print_sub(out, args[i], 0);
  }
  out += ')';
}

void print_into(std::string& out, const Expr& e, int min_prec) {
  const bool wrap = prec(e) < min_prec;
  if (wrap) out += '(';
  switch (e.kind) {
    case ExprKind::Number: out += e.text; break;
    case ExprKind::Imag: out += e.text + "i"; break;
    case ExprKind::Ident: out += e.text; break;
    case ExprKind::Call:
      out += e.text;
      print_args(out, e.args);
      break;
    case ExprKind::Neg:
      out += '-';
      print_sub(out, e.args[0], 3);
      break;
    case ExprKind::Add:
    case ExprKind::Sub:
      print_sub(out, e.args[0], 1);
      out += e.kind == ExprKind::Add ? " + " : " - ";
      print_sub(out, e.args[1], 2);
      break;
    case ExprKind::Mul:
    case ExprKind::Div:
      print_sub(out, e.args[0], 2);
      out += e.kind == ExprKind::Mul ? " * " : " / ";
      print_sub(out, e.args[1], 3);
      break;
    case ExprKind::Pow:
      print_sub(out, e.args[0], 5);
      out += '^';
      print_sub(out, e.args[1], 3);
      break;
    case ExprKind::Attach:
      print_sub(out, e.args[0], 5);
      out += " @ ";
      if (e.vars.size() == 1)
        out += e.vars[0];
      else
        out += "(" + join(e.vars, ", ") + ")";
      break;
    case ExprKind::MatrixLit: {
      out += '[';
      for (int r = 0; r < e.rows; ++r) {
        if (r) out += ", ";
        out += '[';
        for (int c = 0; c < e.cols; ++c) {
          if (c) out += ", ";
          print_sub(out, e.args[r * e.cols + c], 0);
        }
        out += ']';
      }
      out += ']';
      break;
    }
    case ExprKind::Ket:
      if (e.vars.size() == 1)
        out += e.bra ? "<" + e.vars[0] + "|" : "|" + e.vars[0] + ">";
      else
        out += std::string(e.bra ? "bra(" : "ket(") + join(e.vars, ", ") + ")";
      break;
    case ExprKind::Transform:
      out += e.text + "{" + print_program(e.prog) + "}";
      print_args(out, e.args);
      break;
  }
  if (wrap) out += ')';
}

bool is_literal_part(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-';
  });
}

}  // namespace

std::string print_expr(const ExprPtr& e) {
  if (!e) return "";
  std::string s;
  print_into(s, *e, 0);
  return s;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) { return print_expr(a) == print_expr(b); }

ExprPtr substitute(const ExprPtr& e, const std::string& name, const ExprPtr& by) {
  if (!e) return e;
  if (e->kind == ExprKind::Ident) return e->text == name ? by : e;
  if (e->kind == ExprKind::Ket) {
    if (std::find(e->vars.begin(), e->vars.end(), name) == e->vars.end()) return e;
    if (by->kind != ExprKind::Ident)
      throw Error("cannot substitute an expression for ket label '" + name + "'");
    auto parts = e->vars;
    for (auto& p : parts)
      if (p == name) p = by->text;
    return ex::ket(parts, e->bra);
  }
  bool changed = false;
  std::vector<ExprPtr> args;
  args.reserve(e->args.size());
  for (const auto& a : e->args) {
    args.push_back(substitute(a, name, by));
    changed |= args.back() != a;
  }
  if (!changed) return e;
  auto copy = std::make_shared<Expr>(*e);
  copy->args = std::move(args);
  return copy;
}

namespace {
void collect(const ExprPtr& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->kind == ExprKind::Ident || e->kind == ExprKind::Call) out.insert(e->text);
  if (e->kind == ExprKind::Ket)
    for (const auto& p : e->vars)
      if (!is_literal_part(p)) out.insert(p);
  for (const auto& a : e->args) collect(a, out);
}
}  // namespace

std::set<std::string> identifiers(const ExprPtr& e) {
  std::set<std::string> out;
  collect(e, out);
  return out;
}

// ---------------------------------------------------------------- programs

namespace pg {

namespace {
std::shared_ptr<Program> mk(ProgKind k) {
  auto p = std::make_shared<Program>();
  p->kind = k;
  return p;
}
}  // namespace

ProgPtr skip() { return mk(ProgKind::Skip); }

ProgPtr init(std::vector<std::string> vars) {
  auto p = mk(ProgKind::Init);
  p->vars = std::move(vars);
  return p;
}

ProgPtr unitary(std::vector<std::string> vars, ExprPtr u) {
  auto p = mk(ProgKind::Unitary);
  p->vars = std::move(vars);
  p->op = std::move(u);
  return p;
}

ProgPtr seq(std::vector<ProgPtr> items) {
  auto p = mk(ProgKind::Seq);
  p->body = std::move(items);
  return p;
}

ProgPtr repeat(int n, ProgPtr body) {
  if (n < 0) throw Error("repeat count must be nonnegative");
  auto p = mk(ProgKind::Repeat);
  p->count = n;
  p->body = {std::move(body)};
  return p;
}

ProgPtr case_std(std::vector<std::string> vars, std::vector<std::string> labels,
                 std::vector<ProgPtr> branches) {
  return case_general(std::move(vars), {}, std::move(labels), std::move(branches));
}

ProgPtr case_general(std::vector<std::string> vars, std::vector<std::pair<std::string, ExprPtr>> meas,
                     std::vector<std::string> labels, std::vector<ProgPtr> branches) {
  if (labels.size() != branches.size()) throw Error("case labels and branches differ in number");
  auto sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error("duplicate case label");
  auto p = mk(ProgKind::Case);
  p->vars = std::move(vars);
  p->meas = std::move(meas);
  p->labels = std::move(labels);
  p->body = std::move(branches);
  return p;
}

ProgPtr if_(std::vector<std::string> vars, ExprPtr guard, ProgPtr then_branch, ProgPtr else_branch) {
  auto p = mk(ProgKind::If);
  p->vars = std::move(vars);
  p->op = std::move(guard);
  p->body = {std::move(then_branch)};
  if (else_branch) p->body.push_back(std::move(else_branch));
  return p;
}

ProgPtr while_(std::vector<std::string> vars, ExprPtr guard, ProgPtr body) {
  auto p = mk(ProgKind::While);
  p->vars = std::move(vars);
  p->op = std::move(guard);
  p->body = {std::move(body)};
  return p;
}

ProgPtr hole(std::string id, std::vector<Clause> clauses) {
  if (clauses.empty()) throw Error("hole needs at least one pre/post clause");
  auto p = mk(ProgKind::Hole);
  p->hole_id = std::move(id);
  p->clauses = std::move(clauses);
  return p;
}

}  // namespace pg

namespace {

std::string vars_str(const std::vector<std::string>& v) { return join(v, ", "); }

struct Printer {
  const PrintOptions& opt;
  std::string out;

  void nl(int depth) {
    if (opt.multiline) {
      out += '\n';
      out += std::string(static_cast<std::size_t>(depth * opt.indent), ' ');
    } else {
      out += ' ';
    }
  }

  void items(const Program& p, std::vector<const Program*>& acc) {
    if (p.kind == ProgKind::Seq)
      for (const auto& c : p.body) items(*c, acc);
    else
      acc.push_back(&p);
  }

  void seq(const Program& p, int depth) {
    std::vector<const Program*> xs;
    items(p, xs);
    if (xs.empty()) {
      out += "skip";
      return;
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) {
        out += ';';
        nl(depth);
      }
      stmt(*xs[i], depth);
    }
  }

  void block(const Program& p, int depth) {
    out += '{';
    nl(depth + 1);
    seq(p, depth + 1);
    nl(depth);
    out += '}';
  }

  void stmt(const Program& p, int depth) {
    switch (p.kind) {
      case ProgKind::Skip: out += "skip"; break;
      case ProgKind::Init: out += vars_str(p.vars) + " := |0>"; break;
      case ProgKind::Unitary: out += vars_str(p.vars) + " *= " + print_expr(p.op); break;
      case ProgKind::Seq: seq(p, depth); break;
      case ProgKind::Repeat:
        out += "repeat " + std::to_string(p.count) + " ";
        block(*p.body[0], depth);
        break;
      case ProgKind::Case: {
        out += "case ";
        if (!p.meas.empty()) {
          out += '{';
          for (std::size_t i = 0; i < p.meas.size(); ++i) {
            if (i) out += ", ";
            out += p.meas[i].first + ": " + print_expr(p.meas[i].second);
          }
          out += "} ";
        }
        out += "[" + vars_str(p.vars) + "] {";
        for (std::size_t i = 0; i < p.labels.size(); ++i) {
          if (i) out += ';';
          nl(depth + 1);
          out += p.labels[i] + ": ";
          seq(*p.body[i], depth + 2);
        }
        nl(depth);
        out += '}';
        break;
      }
      case ProgKind::If:
        out += "if ";
        if (p.op) out += print_expr(p.op) + " ";
        out += "[" + vars_str(p.vars) + "] ";
        block(*p.body[0], depth);
        if (p.body.size() > 1) {
          out += " else ";
          block(*p.body[1], depth);
        }
        break;
      case ProgKind::While:
        out += "while ";
        if (p.op) out += print_expr(p.op) + " ";
        out += "[" + vars_str(p.vars) + "] ";
        block(*p.body[0], depth);
        break;
      case ProgKind::Hole: {
        out += "hole " + p.hole_id + " (";
        std::vector<std::string> pre, post;
        for (const auto& c : p.clauses) {
          pre.push_back(print_expr(c.pre));
          post.push_back(print_expr(c.post));
        }
        out += join(pre, ", ") + " => " + join(post, ", ") + ")";
        break;
      }
    }
  }
};

}  // namespace

std::string print_program(const ProgPtr& p, const PrintOptions& opt) {
  Printer pr{opt, {}};
  pr.seq(*p, 0);
  return pr.out;
}

bool program_equal(const ProgPtr& a, const ProgPtr& b) { return print_program(a) == print_program(b); }

ProgPtr normalize(const ProgPtr& p) {
  if (p->kind == ProgKind::Seq) {
    std::vector<ProgPtr> flat;
    for (const auto& c : p->body) {
      auto n = normalize(c);
      if (n->kind == ProgKind::Seq)
        flat.insert(flat.end(), n->body.begin(), n->body.end());
      else
        flat.push_back(n);
    }
    if (flat.empty()) return pg::skip();
    if (flat.size() == 1) return flat[0];
    return pg::seq(flat);
  }
  if (p->body.empty()) return p;
  auto copy = std::make_shared<Program>(*p);
  for (auto& c : copy->body) c = normalize(c);
  return copy;
}

namespace {
void holes_rec(const ProgPtr& p, std::vector<int>& path, std::vector<HoleRef>& out) {
  if (p->kind == ProgKind::Hole) {
    out.push_back({p->hole_id, p->clauses, path});
    return;
  }
  for (std::size_t i = 0; i < p->body.size(); ++i) {
    path.push_back(static_cast<int>(i));
    holes_rec(p->body[i], path, out);
    path.pop_back();
  }
}
}  // namespace

std::vector<HoleRef> holes_of(const ProgPtr& p) {
  std::vector<HoleRef> out;
  std::vector<int> path;
  holes_rec(p, path, out);
  return out;
}

bool is_concrete(const ProgPtr& p) { return holes_of(p).empty(); }

ProgPtr child_at(const ProgPtr& p, const std::vector<int>& path) {
  ProgPtr cur = p;
  for (int i : path) {
    if (i < 0 || static_cast<std::size_t>(i) >= cur->body.size()) throw Error("invalid program path");
    cur = cur->body[i];
  }
  return cur;
}

namespace {
ProgPtr replace_rec(const ProgPtr& p, const std::vector<int>& path, std::size_t k, const ProgPtr& by) {
  if (k == path.size()) return by;
  const int i = path[k];
  if (i < 0 || static_cast<std::size_t>(i) >= p->body.size()) throw Error("invalid program path");
  auto copy = std::make_shared<Program>(*p);
  copy->body[i] = replace_rec(p->body[i], path, k + 1, by);
  return copy;
}
}  // namespace

ProgPtr replace_at(const ProgPtr& p, const std::vector<int>& path, const ProgPtr& by) {
  return replace_rec(p, path, 0, by);
}

std::vector<std::string> basis_labels(const std::vector<int>& dims) {
  std::vector<std::string> out{""};
  for (int d : dims) {
    if (d > 10) throw Error("standard-basis labels need dimension <= 10");
    std::vector<std::string> next;
    for (const auto& pre : out)
      for (int x = 0; x < d; ++x) next.push_back(pre + static_cast<char>('0' + x));
    out = std::move(next);
  }
  return out;
}

ExprPtr default_guard() { return ex::call("proj", {ex::ket({"1"})}); }

std::vector<std::pair<std::string, ExprPtr>> case_measurement(const Program& p, const VariableRegistry& reg) {
  if (!p.meas.empty()) return p.meas;
  auto idx = reg.indices_of(p.vars);
  std::vector<int> dims;
  for (int i : idx) dims.push_back(reg.vars()[i].dim);
  const bool qubits = reg.all_qubits(idx);
  const auto d = static_cast<int>(reg.dim_of(idx));
  std::vector<std::pair<std::string, ExprPtr>> out;
  int k = 0;
  for (const auto& l : basis_labels(dims)) {
    ExprPtr v = qubits ? ex::ket({l})
                       : ex::call("basis", {ex::number(k), ex::number(d)});
    out.emplace_back(l, ex::call("proj", {v}));
    ++k;
  }
  return out;
}

ProgPtr desugar(const ProgPtr& p, const VariableRegistry& reg) {
  switch (p->kind) {
    case ProgKind::Skip:
    case ProgKind::Init:
    case ProgKind::Unitary:
    case ProgKind::Hole: return p;
    case ProgKind::Seq:
    case ProgKind::Repeat: {
      auto copy = std::make_shared<Program>(*p);
      for (auto& c : copy->body) c = desugar(c, reg);
      return copy;
    }
    case ProgKind::Case: {
      auto copy = std::make_shared<Program>(*p);
      copy->meas = case_measurement(*p, reg);
      for (auto& c : copy->body) c = desugar(c, reg);
      return copy;
    }
    case ProgKind::While: {
      auto copy = std::make_shared<Program>(*p);
      if (!copy->op) copy->op = default_guard();
      copy->body[0] = desugar(p->body[0], reg);
      return copy;
    }
    case ProgKind::If: {
      ExprPtr b = p->op ? p->op : default_guard();
      std::vector<std::pair<std::string, ExprPtr>> meas{{"1", b}, {"0", ex::sub(ex::ident("I"), b)}};
      ProgPtr s1 = desugar(p->body[0], reg);
      ProgPtr s0 = p->body.size() > 1 ? desugar(p->body[1], reg) : pg::skip();
      return pg::case_general(p->vars, meas, {"1", "0"}, {s1, s0});
    }
  }
  return p;
}

}  // namespace qbc
