#include "qbc/refine/session.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "qbc/lang/lexer.hpp"
#include "qbc/lang/parser.hpp"

namespace qbc {

const char* ob_kind_name(ObKind k) {
  switch (k) {
    case ObKind::Implication: return "implication";
    case ObKind::SumImplication: return "sum-implication";
    case ObKind::SequenceBase: return "sequence-base";
    case ObKind::SequenceMonotone: return "sequence-monotone";
    case ObKind::SequenceLimit: return "sequence-limit";
    case ObKind::WeightSum: return "weight-sum";
    case ObKind::SideCondition: return "side-condition";
  }
  return "?";
}

std::string print_spec(const SpecDef& s) {
  std::string out = "spec " + s.name + " {\n  vars ";
  for (std::size_t i = 0; i < s.vars.size(); ++i) {
    out += (i ? ", " : "") + s.vars[i].name;
    if (s.vars[i].dim != 2) out += ":" + std::to_string(s.vars[i].dim);
  }
  out += ";\n  mode " + std::string(mode_name(s.mode)) + ";\n";
  for (const auto& [name, labels] : s.params.entries()) {
    out += "  param " + name + " in {";
    for (std::size_t i = 0; i < labels.size(); ++i) out += (i ? ", " : "") + labels[i];
    out += "};\n";
  }
  for (const auto& l : s.lets) out += "  " + print_let(l) + ";\n";
  out += "  hole " + s.hole + " :";
  for (std::size_t i = 0; i < s.clauses.size(); ++i)
    out += std::string(i ? ";" : "") + " pre " + print_expr(s.clauses[i].pre) + " => post " +
           print_expr(s.clauses[i].post);
  return out + "\n}\n";
}

namespace {

const ExprPtr kI = ex::ident("I");

int id_number(const std::string& id, char prefix) {
  if (id.size() < 2 || id[0] != prefix) return -1;
  for (std::size_t i = 1; i < id.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(id[i]))) return -1;
  return std::stoi(id.substr(1));
}

ExprPtr on_vars(const ExprPtr& e, const std::vector<std::string>& vars) {
  if (e->kind == ExprKind::Attach) return e;
  return ex::attach(e, vars);
}

std::pair<std::string, std::string> split_arrow(const std::string& text) {
  auto toks = tokenize(text);
  int depth = 0;
  for (const auto& t : toks) {
    if (t.kind == Tok::LParen || t.kind == Tok::LBracket || t.kind == Tok::LBrace) ++depth;
    if (t.kind == Tok::RParen || t.kind == Tok::RBracket || t.kind == Tok::RBrace) --depth;
    if (depth == 0 && t.kind == Tok::Arrow) return {trim(text.substr(0, t.begin)), trim(text.substr(t.end))};
  }
  throw ParseError("expected '=>' in '" + text + "'", 1, 1);
}

std::vector<std::pair<std::string, std::string>> parse_label_map(const std::string& raw) {
  std::string t = trim(raw);
  if (t.size() < 2 || t.front() != '{' || t.back() != '}') throw ParseError("expected {label: expr, ...}", 1, 1);
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& item : split_top(std::string_view(t).substr(1, t.size() - 2), ',')) {
    auto toks = tokenize(item);
    if (toks.size() < 3 || (toks[0].kind != Tok::Number && toks[0].kind != Tok::Ident) || toks[1].kind != Tok::Colon)
      throw ParseError("expected 'label: expr' in '" + item + "'", 1, 1);
    for (const auto& [l, _] : out)
      if (l == toks[0].text) throw ParseError("duplicate label '" + l + "'", 1, 1);
    out.emplace_back(toks[0].text, trim(item.substr(toks[1].end)));
  }
  return out;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

// --------------------------------------------------------------- session

Session::Session(SpecDef spec, SessionOptions opt) : spec_(std::move(spec)), opt_(opt) {
  if (!opt_.tol.valid()) throw RuleError("invalid tolerances");
  if (spec_.clauses.empty()) throw RuleError("specification has no clauses");
  VariableRegistry reg(spec_.vars, opt_.tol.dim_cap);
  env_ = std::make_shared<Env>();
  for (const auto& l : spec_.lets) env_->define(l);
  sem_ = std::make_unique<Semantics>(reg, env_, opt_.tol);
  const Evaluator& ev = sem_->evaluator();
  for (const auto& c : spec_.clauses)
    for (const auto& e : {c.pre, c.post})
      for (const auto& b : spec_.params.enumerate(ev.free_symbols(e))) ev.predicate(e, b, true);
  st_.program = pg::hole(spec_.hole, spec_.clauses);
  st_.params = spec_.params;
  st_.next_hole = std::max(1, id_number(spec_.hole, 'h') + 1);
}

std::vector<HoleInfo> Session::holes() const {
  std::vector<HoleInfo> out;
  for (auto& h : holes_of(st_.program)) out.push_back({h.id, h.clauses, h.path});
  return out;
}

void Session::undo() {
  if (ledger_.empty()) throw RuleError("nothing to undo");
  st_ = history_.back();
  history_.pop_back();
  ledger_.pop_back();
}

CheckResult Session::verify_constructed() const {
  if (!concrete()) throw RuleError("program still has holes");
  CheckResult all;
  all.margin = std::numeric_limits<double>::infinity();
  for (const auto& c : spec_.clauses) {
    CheckResult r = check_triple(*sem_, {c.pre, st_.program, c.post}, spec_.params, spec_.mode);
    all.diag.merge(r.diag);
    all.bindings += r.bindings;
    all.margin = std::min(all.margin, r.margin);
    if (r.cex && !all.cex) all.cex = r.cex;
  }
  all.verdict = !all.diag.converged ? Verdict::Inconclusive : all.cex ? Verdict::Fails : Verdict::Holds;
  return all;
}

std::string Session::export_script() const {
  std::string s = print_spec(spec_);
  for (const auto& st : ledger_) {
    RuleApplication a = st.app;
    a.ids = st.new_holes;
    s += print_application(a) + "\n";
  }
  return s;
}

// --------------------------------------------------------------- rules

class RuleContext {
 public:
  RuleContext(Session& s, const RuleApplication& app)
      : s_(s), app_(app), ev_(s.sem_->evaluator()), tol_(s.opt_.tol), work_(s.st_.params) {}

  StepRecord run();

 private:
  Session& s_;
  const RuleApplication& app_;
  const Evaluator& ev_;
  const Tolerances& tol_;
  ParamSpace work_;
  const RuleSpec* rule_ = nullptr;
  HoleRef hole_;
  std::vector<Obligation> obs_;
  std::vector<std::string> new_ids_;
  int next_hole_ = 0, next_j_ = 0, next_n_ = 0;

  // arguments
  const std::string& raw(const std::string& key) const {
    const RuleArg* a = app_.arg(key);
    if (!a) throw RuleError(app_.rule + ": missing argument '" + key + "'");
    return a->raw;
  }
  bool has(const std::string& key) const { return app_.arg(key) != nullptr; }
  std::vector<std::string> vars_arg() const {
    Parser p(raw("vars"));
    auto v = p.var_list();
    p.expect(Tok::End);
    s_.registry().indices_of(v);
    return v;
  }
  ExprPtr expr_arg(const std::string& key) const { return parse_expr(raw(key)); }
  ExprPtr guard_arg() const { return has("B") ? expr_arg("B") : nullptr; }
  std::vector<std::string> per_clause_raw(const std::string& text) const {
    auto parts = split_top(text, '&');
    const std::size_t n = hole_.clauses.size();
    if (parts.size() == 1) return std::vector<std::string>(n, parts[0]);
    if (parts.size() != n)
      throw RuleError(app_.rule + ": expected 1 or " + std::to_string(n) + " values separated by '&', got " +
                      std::to_string(parts.size()));
    return parts;
  }
  std::vector<ExprPtr> clause_exprs(const std::string& key) const {
    std::vector<ExprPtr> out;
    for (const auto& r : per_clause_raw(raw(key))) out.push_back(parse_expr(r));
    return out;
  }

  // fresh names
  std::string fresh_hole() {
    if (!app_.ids.empty()) {
      if (new_ids_.size() >= app_.ids.size()) throw RuleError(app_.rule + ": not enough hole ids after '->'");
      return record_id(app_.ids[new_ids_.size()]);
    }
    std::string id;
    do id = "h" + std::to_string(next_hole_++);
    while (id_taken(id));
    return record_id(id);
  }
  std::string record_id(const std::string& id) {
    if (id_taken(id)) throw RuleError("hole id '" + id + "' is already in use");
    new_ids_.push_back(id);
    if (int k = id_number(id, 'h'); k >= next_hole_) next_hole_ = k + 1;
    return id;
  }
  bool id_taken(const std::string& id) const {
    if (std::find(new_ids_.begin(), new_ids_.end(), id) != new_ids_.end()) return true;
    for (const auto& h : holes_of(s_.st_.program))
      if (h.id == id) return true;
    for (const auto& st : s_.ledger_) {
      if (st.app.hole == id) return true;
      if (std::find(st.new_holes.begin(), st.new_holes.end(), id) != st.new_holes.end()) return true;
    }
    return id == s_.spec_.hole;
  }
  bool name_taken(const std::string& n) const {
    return work_.contains(n) || s_.env_->find(n) != nullptr || n == "I" || n == "pi" || named_gate(n).has_value();
  }
  std::string fresh_symbol(char prefix, int& counter) {
    std::string n;
    do n = std::string(1, prefix) + std::to_string(counter++);
    while (name_taken(n));
    return n;
  }

  // guards
  std::pair<ExprPtr, ExprPtr> guard_full(const ExprPtr& g, const std::vector<std::string>& vars) const {
    ExprPtr b = g ? g : default_guard();
    if (b->kind == ExprKind::Attach) return {ex::sub(kI, b), b};
    return {ex::attach(ex::sub(kI, b), vars), ex::attach(b, vars)};
  }
  ExprPtr b0b1(const ExprPtr& g, const std::vector<std::string>& vars, const ExprPtr& q, const ExprPtr& r) const {
    auto [nb, b] = guard_full(g, vars);
    return ex::add(ex::call("msr", {nb, q}), ex::call("msr", {b, r}));
  }

  // obligations
  std::vector<Binding> bindings(const std::set<std::string>& syms, const ParamSpace& ps) const {
    try {
      return ps.enumerate(syms);
    } catch (const EvalError& e) {
      throw RuleError(app_.rule + ": " + e.what());
    }
  }
  std::set<std::string> syms_of(std::initializer_list<ExprPtr> es) const {
    std::set<std::string> out;
    for (const auto& e : es) {
      auto s = ev_.free_symbols(e);
      out.insert(s.begin(), s.end());
    }
    return out;
  }
  Matrix full(const ExprPtr& e, const Binding& b) const { return symmetrize(ev_.full_operator(e, b), tol_); }

  template <class F>
  void guarded(const std::string& what, F&& f) const {
    try {
      f();
    } catch (const RuleError&) {
      throw;
    } catch (const ParseError&) {
      throw;
    } catch (const ConvergenceError&) {
      throw;
    } catch (const Error& e) {
      throw RuleError(app_.rule + ": " + what + ": " + e.what());
    }
  }

  void implication(ObKind kind, const std::string& desc, const ExprPtr& lhs, const ExprPtr& rhs,
                   const ParamSpace* ps = nullptr, bool bounded = false) {
    Obligation o;
    o.kind = kind;
    o.description = desc;
    o.lhs = print_expr(lhs);
    o.rhs = print_expr(rhs);
    o.bounded = bounded;
    o.margin = std::numeric_limits<double>::infinity();
    const ParamSpace& space = ps ? *ps : work_;
    try {
      guarded(desc, [&] {
        for (const auto& b : bindings(syms_of({lhs, rhs}), space)) {
          ++o.bindings;
          LoewnerResult r = loewner_check(full(lhs, b), full(rhs, b), tol_);
          o.margin = std::min(o.margin, r.min_eig);
          if (!r.holds && !o.binding) {
            o.binding = b;
            o.witness = r.witness;
          }
        }
      });
      o.verdict = o.binding ? Verdict::Fails : Verdict::Holds;
    } catch (const ConvergenceError& e) {
      o.verdict = Verdict::Inconclusive;
      o.detail = e.what();
    }
    obs_.push_back(std::move(o));
  }

  /// Condition checked per binding; `check` returns a failure message or nothing.
  void custom(ObKind kind, const std::string& desc, const std::set<std::string>& syms,
              const std::function<std::optional<std::string>(const Binding&)>& check, bool bounded = false) {
    Obligation o;
    o.kind = kind;
    o.description = desc;
    o.bounded = bounded;
    try {
      guarded(desc, [&] {
        for (const auto& b : bindings(syms, work_)) {
          ++o.bindings;
          if (auto fail = check(b)) {
            o.binding = b;
            o.detail = *fail;
            break;
          }
        }
      });
      o.verdict = o.binding ? Verdict::Fails : Verdict::Holds;
    } catch (const ConvergenceError& e) {
      o.verdict = Verdict::Inconclusive;
      o.detail = e.what();
    }
    obs_.push_back(std::move(o));
  }

  void predicates_valid(const std::vector<std::pair<std::string, Clause>>& clauses) {
    if (clauses.empty()) return;
    std::set<std::string> syms;
    for (const auto& [_, c] : clauses) {
      auto s = syms_of({c.pre, c.post});
      syms.insert(s.begin(), s.end());
    }
    custom(ObKind::SideCondition, "new hole clauses are predicates", syms,
           [&](const Binding& b) -> std::optional<std::string> {
             for (const auto& [id, c] : clauses)
               for (const auto& e : {c.pre, c.post}) {
                 Binding local;
                 for (const auto& s : ev_.free_symbols(e)) local[s] = b.at(s);
                 try {
                   ev_.predicate(e, local, true);
                 } catch (const NotPsdError& err) {
                   return "hole " + id + ": " + err.what();
                 }
               }
             return std::nullopt;
           });
  }

  void check_program(const ProgPtr& p) const {
    guarded("statement", [&] {
      for (const auto& b : bindings(program_symbols(ev_, p), work_)) s_.sem_->lower(p, b);
    });
  }

  int integer_const(const ExprPtr& e, const std::string& what) const {
    std::optional<int> val;
    guarded(what, [&] {
      for (const auto& b : bindings(ev_.free_symbols(e), work_)) {
        int v = ev_.integer(e, b);
        if (val && *val != v) throw RuleError(app_.rule + ": " + what + " must not depend on parameters");
        val = v;
      }
    });
    return *val;
  }
  double real_const(const ExprPtr& e, const std::string& what) const {
    std::optional<double> val;
    guarded(what, [&] {
      for (const auto& b : bindings(ev_.free_symbols(e), work_)) {
        double v = ev_.real_scalar(e, b);
        if (val && *val != v) throw RuleError(app_.rule + ": " + what + " must not depend on parameters");
        val = v;
      }
    });
    return *val;
  }

  ProgPtr build();
  ProgPtr split(bool partial);
  ProgPtr repeat();
  ProgPtr case_();
  ProgPtr while_partial();
  ProgPtr while_total();
  ProgPtr boost(bool rep);
};

StepRecord Session::apply(const RuleApplication& app) {
  return RuleContext(*this, app).run();
}

StepRecord RuleContext::run() {
  rule_ = find_rule(app_.rule);
  if (!rule_) throw RuleError("unknown rule '" + app_.rule + "'");
  const Mode mode = s_.spec_.mode;
  if (mode == Mode::Total && !rule_->total) throw RuleError(app_.rule + " is not available in total mode");
  if (mode == Mode::Partial && !rule_->partial) throw RuleError(app_.rule + " is not available in partial mode");
  if (mode == Mode::Partial && s_.opt_.strict_rules && app_.rule == "HT.split")
    throw RuleError("HT.split is disabled in partial mode by --strict-rules");
  for (const auto& a : app_.args) {
    bool known = std::any_of(rule_->args.begin(), rule_->args.end(), [&](const ArgSpec& s) { return s.key == a.key; });
    if (!known) throw RuleError(app_.rule + ": unknown argument '" + a.key + "'");
  }
  for (const auto& spec : rule_->args)
    if (spec.required && !has(spec.key)) throw RuleError(app_.rule + ": missing argument '" + spec.key + "'");
  bool found = false;
  for (auto& h : holes_of(s_.st_.program))
    if (h.id == app_.hole) {
      hole_ = h;
      found = true;
    }
  if (!found) throw RuleError("unknown hole '" + app_.hole + "'");
  next_hole_ = s_.st_.next_hole;
  next_j_ = s_.st_.next_j;
  next_n_ = s_.st_.next_n;

  ProgPtr tmpl = build();
  if (!app_.ids.empty() && app_.ids.size() != new_ids_.size())
    throw RuleError(app_.rule + " creates " + std::to_string(new_ids_.size()) + " hole(s) but " +
                    std::to_string(app_.ids.size()) + " id(s) were given");

  std::vector<std::pair<std::string, Clause>> created;
  for (const auto& h : holes_of(tmpl))
    for (const auto& c : h.clauses) created.emplace_back(h.id, c);
  predicates_valid(created);

  StepRecord rec;
  rec.app = app_;
  rec.obligations = obs_;
  rec.new_holes = new_ids_;
  rec.program_before = print_program(s_.st_.program);
  const bool ok = std::all_of(obs_.begin(), obs_.end(), [](const Obligation& o) { return o.verdict == Verdict::Holds; });
  if (!ok) {
    rec.accepted = false;
    rec.program_after = rec.program_before;
    s_.rejections_.push_back(rec);
    return rec;
  }
  Session::State next = s_.st_;
  next.program = replace_at(s_.st_.program, hole_.path, tmpl);
  next.params = work_;
  next.next_hole = next_hole_;
  next.next_j = next_j_;
  next.next_n = next_n_;
  rec.accepted = true;
  rec.program_after = print_program(next.program);
  s_.history_.push_back(s_.st_);
  s_.st_ = std::move(next);
  s_.ledger_.push_back(rec);
  return rec;
}

ProgPtr RuleContext::build() {
  const std::string& r = app_.rule;
  const auto& cl = hole_.clauses;
  if (r == "H.skip") {
    for (std::size_t i = 0; i < cl.size(); ++i) implication(ObKind::Implication, "P => Q", cl[i].pre, cl[i].post);
    return pg::skip();
  }
  if (r == "H.init" || r == "H.unit") {
    auto vars = vars_arg();
    ProgPtr stmt = r == "H.init" ? pg::init(vars) : pg::unitary(vars, expr_arg("U"));
    check_program(stmt);
    for (const auto& c : cl)
      implication(ObKind::Implication, r == "H.init" ? "P => sum_x |x><0| Q |0><x|" : "P => U^dagger Q U", c.pre,
                  ex::transform("wp", stmt, {c.post}));
    return stmt;
  }
  if (r == "H.seq") {
    auto rs = clause_exprs("R");
    std::vector<Clause> a, b;
    for (std::size_t i = 0; i < cl.size(); ++i) {
      a.push_back({cl[i].pre, rs[i]});
      b.push_back({rs[i], cl[i].post});
    }
    auto ha = fresh_hole();
    auto hb = fresh_hole();
    return pg::seq({pg::hole(ha, a), pg::hole(hb, b)});
  }
  if (r == "HP.split" || r == "HT.split") return split(r == "HP.split");
  if (r == "H.repeat") return repeat();
  if (r == "H.case") return case_();
  if (r == "HP.while") return while_partial();
  if (r == "HT.while") return while_total();
  if (r == "H.sw") {
    auto ps = clause_exprs("P");
    auto qs = clause_exprs("Q");
    std::vector<Clause> nc;
    for (std::size_t i = 0; i < cl.size(); ++i) {
      implication(ObKind::Implication, "P => P'", cl[i].pre, ps[i]);
      implication(ObKind::Implication, "Q' => Q", qs[i], cl[i].post);
      nc.push_back({ps[i], qs[i]});
    }
    return pg::hole(fresh_hole(), nc);
  }
  if (r == "H.ifElse" || r == "H.if") {
    auto vars = vars_arg();
    ExprPtr g = guard_arg();
    check_program(pg::if_(vars, g, pg::skip(), pg::skip()));
    if (r == "H.ifElse") {
      auto r1 = clause_exprs("R1");
      auto r0 = clause_exprs("R0");
      std::vector<Clause> c1, c0;
      for (std::size_t i = 0; i < cl.size(); ++i) {
        implication(ObKind::SumImplication, "P => B0(R0) + B1(R1)", cl[i].pre, b0b1(g, vars, r0[i], r1[i]));
        c1.push_back({r1[i], cl[i].post});
        c0.push_back({r0[i], cl[i].post});
      }
      auto h1 = fresh_hole();
      auto h0 = fresh_hole();
      return pg::if_(vars, g, pg::hole(h1, c1), pg::hole(h0, c0));
    }
    auto rs = clause_exprs("R");
    std::vector<Clause> c1;
    for (std::size_t i = 0; i < cl.size(); ++i) {
      implication(ObKind::SumImplication, "P => B0(Q) + B1(R)", cl[i].pre, b0b1(g, vars, cl[i].post, rs[i]));
      c1.push_back({rs[i], cl[i].post});
    }
    return pg::if_(vars, g, pg::hole(fresh_hole(), c1));
  }
  if (r == "H.boostRep") return boost(true);
  if (r == "H.boostWhile") return boost(false);
  throw RuleError("rule '" + r + "' is not implemented");
}

ProgPtr RuleContext::split(bool partial) {
  const auto& cl = hole_.clauses;
  if (cl.size() != 1) throw RuleError(app_.rule + " needs a hole with a single clause");
  std::vector<Clause> fam;
  for (const auto& item : split_top(raw("family"), ',')) {
    auto [p, q] = split_arrow(item);
    fam.push_back({parse_expr(p), parse_expr(q)});
  }
  std::vector<ExprPtr> w;
  for (const auto& item : split_top(raw("weights"), ',')) w.push_back(parse_expr(item));
  if (w.size() != fam.size())
    throw RuleError(app_.rule + ": " + std::to_string(fam.size()) + " clauses but " + std::to_string(w.size()) +
                    " weights");
  ExprPtr sp, sq;
  std::set<std::string> wsyms;
  for (std::size_t g = 0; g < fam.size(); ++g) {
    ExprPtr tp = ex::mul(w[g], fam[g].pre), tq = ex::mul(w[g], fam[g].post);
    sp = sp ? ex::add(sp, tp) : tp;
    sq = sq ? ex::add(sq, tq) : tq;
    auto s = ev_.free_symbols(w[g]);
    wsyms.insert(s.begin(), s.end());
  }
  implication(ObKind::SumImplication, "P => sum p_g P_g", cl[0].pre, sp);
  implication(ObKind::SumImplication, "sum p_g Q_g => Q", sq, cl[0].post);
  custom(ObKind::WeightSum, partial ? "p_g >= 0 and sum p_g = 1" : "p_g >= 0", wsyms,
         [&](const Binding& b) -> std::optional<std::string> {
           double sum = 0;
           for (std::size_t g = 0; g < w.size(); ++g) {
             const double v = ev_.real_scalar(w[g], b);
             if (v < -tol_.psd_eps) return "weight " + std::to_string(g + 1) + " is negative (" + fmt(v) + ")";
             sum += v;
           }
           if (partial && std::abs(sum - 1.0) > 1e-9) return "weights sum to " + fmt(sum);
           return std::nullopt;
         });
  return pg::hole(fresh_hole(), fam);
}

ProgPtr RuleContext::repeat() {
  const auto& cl = hole_.clauses;
  const int n = integer_const(expr_arg("N"), "repeat count");
  if (n < 1) throw RuleError("H.repeat: repeat count must be at least 1");
  Parser ip(raw("index"));
  const std::string j = ip.expect(Tok::Ident).text;
  ip.expect(Tok::End);
  if (name_taken(j)) throw RuleError("H.repeat: index '" + j + "' clashes with an existing name");
  auto rs = clause_exprs("R");
  const std::string j1 = fresh_symbol('j', next_j_);
  ParamSpace with_j = work_;
  with_j.add(j, int_labels(0, n));
  std::vector<Clause> body;
  for (std::size_t i = 0; i < cl.size(); ++i) {
    implication(ObKind::Implication, "P => R_0", cl[i].pre, substitute(rs[i], j, ex::number(0)));
    implication(ObKind::Implication, "R_N => Q", substitute(rs[i], j, ex::number(n)), cl[i].post);
    body.push_back({substitute(rs[i], j, ex::ident(j1)), substitute(rs[i], j, ex::add(ex::ident(j1), ex::number(1)))});
  }
  work_.add(j1, int_labels(0, n - 1));
  return pg::repeat(n, pg::hole(fresh_hole(), body));
}

ProgPtr RuleContext::case_() {
  const auto& cl = hole_.clauses;
  auto vars = vars_arg();
  const bool std_meas = !has("meas") || trim(raw("meas")) == "std";
  std::vector<std::pair<std::string, ExprPtr>> meas;
  if (!std_meas)
    for (auto& [l, e] : parse_label_map(raw("meas"))) meas.emplace_back(l, parse_expr(e));
  auto pmap = parse_label_map(raw("P"));
  std::vector<std::string> labels;
  if (std_meas) {
    std::vector<int> dims;
    for (int i : s_.registry().indices_of(vars)) dims.push_back(s_.registry().vars()[i].dim);
    labels = basis_labels(dims);
  } else {
    for (const auto& m : meas) labels.push_back(m.first);
  }
  if (pmap.size() != labels.size()) throw RuleError("H.case: P must give one predicate per outcome");
  std::vector<std::vector<ExprPtr>> pw;
  for (const auto& l : labels) {
    auto it = std::find_if(pmap.begin(), pmap.end(), [&](const auto& x) { return x.first == l; });
    if (it == pmap.end()) throw RuleError("H.case: no predicate for outcome '" + l + "'");
    std::vector<ExprPtr> per;
    for (const auto& r : per_clause_raw(it->second)) per.push_back(parse_expr(r));
    pw.push_back(per);
  }
  auto skips = std::vector<ProgPtr>(labels.size(), pg::skip());
  ProgPtr probe = std_meas ? pg::case_std(vars, labels, skips) : pg::case_general(vars, meas, labels, skips);
  check_program(probe);
  auto mexprs = case_measurement(*probe, s_.registry());
  for (std::size_t i = 0; i < cl.size(); ++i) {
    ExprPtr sum;
    for (std::size_t w = 0; w < labels.size(); ++w) {
      ExprPtr m = nullptr;
      for (const auto& [l, e] : mexprs)
        if (l == labels[w]) m = e;
      ExprPtr t = ex::call("msr", {on_vars(m, vars), pw[w][i]});
      sum = sum ? ex::add(sum, t) : t;
    }
    implication(ObKind::SumImplication, "P => sum_w M_w(P_w)", cl[i].pre, sum);
  }
  std::vector<ProgPtr> branches;
  for (std::size_t w = 0; w < labels.size(); ++w) {
    std::vector<Clause> c;
    for (std::size_t i = 0; i < cl.size(); ++i) c.push_back({pw[w][i], cl[i].post});
    branches.push_back(pg::hole(fresh_hole(), c));
  }
  return std_meas ? pg::case_std(vars, labels, branches) : pg::case_general(vars, meas, labels, branches);
}

ProgPtr RuleContext::while_partial() {
  const auto& cl = hole_.clauses;
  auto vars = vars_arg();
  ExprPtr g = guard_arg();
  check_program(pg::while_(vars, g, pg::skip()));
  auto rs = clause_exprs("R");
  std::vector<Clause> body;
  for (std::size_t i = 0; i < cl.size(); ++i) {
    ExprPtr inv = b0b1(g, vars, cl[i].post, rs[i]);
    implication(ObKind::SumImplication, "P => B0(Q) + B1(R)", cl[i].pre, inv);
    body.push_back({rs[i], inv});
  }
  return pg::while_(vars, g, pg::hole(fresh_hole(), body));
}

ProgPtr RuleContext::while_total() {
  const auto& cl = hole_.clauses;
  auto vars = vars_arg();
  ExprPtr g = guard_arg();
  check_program(pg::while_(vars, g, pg::skip()));
  auto seqs = per_clause_raw(raw("seq"));
  auto lims = clause_exprs("limit");
  const std::string n1 = fresh_symbol('n', next_n_);
  std::vector<Clause> body;
  for (std::size_t i = 0; i < cl.size(); ++i) {
    auto [sym_raw, body_raw] = split_arrow(seqs[i]);
    Parser sp(sym_raw);
    const std::string n = sp.expect(Tok::Ident).text;
    sp.expect(Tok::End);
    if (name_taken(n)) throw RuleError("HT.while: sequence symbol '" + n + "' clashes with an existing name");
    ExprPtr rn = parse_expr(body_raw);
    const ExprPtr& lim = lims[i];
    ParamSpace with_n = work_;
    with_n.add(n, int_labels(0, tol_.n_check));
    implication(ObKind::SequenceBase, "R_0 = 0", substitute(rn, n, ex::number(0)), ex::number(0), &with_n);
    implication(ObKind::SequenceMonotone, "R_n => R_{n+1} for n = 0.." + std::to_string(tol_.n_check), rn,
                substitute(rn, n, ex::add(ex::ident(n), ex::number(1))), &with_n, true);
    std::set<std::string> syms = syms_of({rn, lim});
    syms.erase(n);
    custom(
        ObKind::SequenceLimit, "R_n converges to the limit", syms,
        [&, n = n](const Binding& b) -> std::optional<std::string> {
          const Matrix l = full(lim, b);
          double last = 0;
          int at = 0;
          std::vector<int> tries;
          for (int k = tol_.n_check; k <= tol_.loop_cap; k *= 2) tries.push_back(k);
          if (tries.empty() || tries.back() != tol_.loop_cap) tries.push_back(tol_.loop_cap);
          for (int k : tries) {
            Binding bk = b;
            bk[n] = std::to_string(k);
            last = frobenius(full(rn, bk) - l);
            at = k;
            if (last <= tol_.seq_conv_eps) return std::nullopt;
          }
          return "||R_N - limit|| = " + fmt(last) + " at N = " + std::to_string(at);
        },
        true);
    obs_.back().lhs = print_expr(rn);
    obs_.back().rhs = print_expr(lim);
    implication(ObKind::SumImplication, "P => B0(Q) + B1(limit)", cl[i].pre, b0b1(g, vars, cl[i].post, lim));
    body.push_back({substitute(rn, n, ex::add(ex::ident(n1), ex::number(1))),
                    b0b1(g, vars, cl[i].post, substitute(rn, n, ex::ident(n1)))});
  }
  work_.add(n1, int_labels(0, tol_.n_check));
  return pg::while_(vars, g, pg::hole(fresh_hole(), body));
}

ProgPtr RuleContext::boost(bool rep) {
  const auto& cl = hole_.clauses;
  auto vars = vars_arg();
  ExprPtr q = expr_arg("Q");
  ExprPtr eps_e = expr_arg("eps");
  const double eps = real_const(eps_e, "eps");
  double p = 1.0;
  ExprPtr p_e;
  if (rep) {
    p_e = expr_arg("p");
    p = real_const(p_e, "p");
  }
  custom(ObKind::SideCondition, "Q is a projection", ev_.free_symbols(q),
         [&](const Binding& b) -> std::optional<std::string> {
           Matrix m = ev_.local_operator(q, vars, b);
           if (!is_projection(m, tol_.projection_eps)) return "Q is not a projection";
           return std::nullopt;
         });
  custom(ObKind::SideCondition, rep ? "0 < eps < p < 1" : "0 < eps < 1", {}, [&](const Binding&) -> std::optional<std::string> {
    if (rep && !(eps > 0 && eps < p && p < 1)) return "need 0 < eps < p < 1, got eps = " + fmt(eps) + ", p = " + fmt(p);
    if (!rep && !(eps > 0 && eps < 1)) return "need 0 < eps < 1, got eps = " + fmt(eps);
    return std::nullopt;
  });
  const ExprPtr qf = on_vars(q, vars);
  const ExprPtr nq = q->kind == ExprKind::Attach ? ex::sub(kI, q) : ex::attach(ex::sub(kI, q), vars);
  // Boosted specification the hole clauses must follow from.
  std::vector<Clause> boosted;
  if (rep) boosted.push_back({ex::mul(p_e, kI), qf});
  else boosted.push_back({kI, qf});
  if (rep) boosted.push_back({kI, kI});
  for (const auto& c : cl) {
    std::size_t before = obs_.size();
    bool done = false;
    for (const auto& bc : boosted) {
      obs_.resize(before);
      implication(ObKind::Implication, "P => boosted pre", c.pre, bc.pre);
      implication(ObKind::Implication, "boosted post => Q", bc.post, c.post);
      if (obs_[before].verdict == Verdict::Holds && obs_[before + 1].verdict == Verdict::Holds) {
        done = true;
        break;
      }
    }
    if (!done) {
      obs_.resize(before);
      implication(ObKind::Implication, "P => boosted pre", c.pre, boosted[0].pre);
      implication(ObKind::Implication, "boosted post => Q", boosted[0].post, c.post);
    }
  }
  ProgPtr inner = pg::hole(fresh_hole(), {{ex::mul(eps_e, nq), qf}, {nq, kI}});
  ExprPtr guard = q->kind == ExprKind::Attach ? ex::sub(kI, q) : ex::sub(kI, q);
  if (!rep) return pg::while_(vars, guard, inner);
  int n = 0;
  if (eps > 0 && eps < p && p < 1) n = static_cast<int>(std::ceil(std::log(1 - p) / std::log(1 - eps) - 1e-12));
  return pg::repeat(std::max(n, 1), pg::if_(vars, guard, inner));
}

}  // namespace qbc
