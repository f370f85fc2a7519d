#include "qbc/refine/derive.hpp"

#include "qbc/lang/parser.hpp"

namespace qbc {

namespace {

class Deriver {
 public:
  Deriver(Session& s, Mode mode) : s_(s), mode_(mode) {}

  void run(const std::string& hole, const ProgPtr& p) {
    switch (p->kind) {
      case ProgKind::Skip: apply(hole, "H.skip", {}); return;
      case ProgKind::Init: apply(hole, "H.init", {{"vars", vars(p->vars)}}); return;
      case ProgKind::Unitary:
        apply(hole, "H.unit", {{"vars", vars(p->vars)}, {"U", print_expr(p->op)}});
        return;
      case ProgKind::Seq: {
        ProgPtr rest = p->body.size() == 2
                           ? p->body[1]
                           : pg::seq(std::vector<ProgPtr>(p->body.begin() + 1, p->body.end()));
        auto ids = apply(hole, "H.seq", {{"R", per_clause(hole, [&](const ExprPtr& q) { return wp(rest, q); })}});
        run(ids[0], p->body[0]);
        run(ids[1], rest);
        return;
      }
      case ProgKind::Repeat: {
        const std::string j = fresh("j");
        const ProgPtr& body = p->body[0];
        auto r = per_clause(hole, [&](const ExprPtr& q) {
          return ex::transform(pow_name(), body, {ex::sub(ex::number(p->count), ex::ident(j)), q});
        });
        auto ids = apply(hole, "H.repeat", {{"N", std::to_string(p->count)}, {"index", j}, {"R", r}});
        run(ids[0], body);
        return;
      }
      case ProgKind::Case: {
        std::vector<std::pair<std::string, std::string>> args{{"vars", vars(p->vars)}};
        if (p->meas.empty()) {
          args.push_back({"meas", "std"});
        } else {
          std::string m = "{";
          for (std::size_t i = 0; i < p->meas.size(); ++i)
            m += (i ? ", " : "") + p->meas[i].first + ": " + print_expr(p->meas[i].second);
          args.push_back({"meas", m + "}"});
        }
        std::string pm = "{";
        for (std::size_t i = 0; i < p->labels.size(); ++i)
          pm += (i ? ", " : "") + p->labels[i] + ": " +
                per_clause(hole, [&](const ExprPtr& q) { return wp(p->body[i], q); });
        args.push_back({"P", pm + "}"});
        auto ids = apply(hole, "H.case", args);
        for (std::size_t i = 0; i < ids.size(); ++i) run(ids[i], p->body[i]);
        return;
      }
      case ProgKind::If: {
        std::vector<std::pair<std::string, std::string>> args{{"vars", vars(p->vars)}};
        if (p->op) args.push_back({"B", print_expr(p->op)});
        const bool has_else = p->body.size() > 1 && p->body[1];
        if (has_else) {
          args.push_back({"R1", per_clause(hole, [&](const ExprPtr& q) { return wp(p->body[0], q); })});
          args.push_back({"R0", per_clause(hole, [&](const ExprPtr& q) { return wp(p->body[1], q); })});
          auto ids = apply(hole, "H.ifElse", args);
          run(ids[0], p->body[0]);
          run(ids[1], p->body[1]);
        } else {
          args.push_back({"R", per_clause(hole, [&](const ExprPtr& q) { return wp(p->body[0], q); })});
          auto ids = apply(hole, "H.if", args);
          run(ids[0], p->body[0]);
        }
        return;
      }
      case ProgKind::While: {
        std::vector<std::pair<std::string, std::string>> args{{"vars", vars(p->vars)}};
        if (p->op) args.push_back({"B", print_expr(p->op)});
        const ProgPtr& c = p->body[0];
        std::vector<std::string> ids;
        if (mode_ == Mode::Partial) {
          args.push_back({"R", per_clause(hole, [&](const ExprPtr& q) { return wp(c, wp(p, q)); })});
          ids = apply(hole, "HP.while", args);
        } else {
          const std::string n = fresh("n");
          args.push_back({"seq", per_clause(hole, [&](const ExprPtr& q) {
                            return n + " => " +
                                   print_expr(ex::transform(
                                       "wp", c,
                                       {ex::transform("wpn", p, {ex::sub(ex::ident(n), ex::number(1)), q})}));
                          })});
          args.push_back({"limit", per_clause(hole, [&](const ExprPtr& q) { return wp(c, wp(p, q)); })});
          ids = apply(hole, "HT.while", args);
        }
        run(ids[0], c);
        return;
      }
      case ProgKind::Hole: throw RuleError("derive needs a concrete program");
    }
  }

 private:
  Session& s_;
  Mode mode_;

  const char* wp_name() const { return mode_ == Mode::Partial ? "wlp" : "wp"; }
  const char* pow_name() const { return mode_ == Mode::Partial ? "wlpow" : "wpow"; }

  ExprPtr wp(const ProgPtr& p, const ExprPtr& q) const { return ex::transform(wp_name(), p, {q}); }

  static std::string vars(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s;
  }

  std::string fresh(const std::string& base) const {
    const auto& ps = s_.params();
    auto taken = [&](const std::string& n) {
      if (ps.contains(n)) return true;
      for (const auto& l : s_.spec().lets)
        if (l.name == n) return true;
      return false;
    };
    std::string n = base;
    for (int k = 0; taken(n); ++k) n = base + "_" + std::to_string(k);
    return n;
  }

  std::vector<Clause> clauses(const std::string& hole) const {
    for (const auto& h : s_.holes())
      if (h.id == hole) return h.clauses;
    throw RuleError("derive lost track of hole '" + hole + "'");
  }

  template <class F>
  std::string per_clause(const std::string& hole, F&& f) const {
    std::string out;
    const auto cl = clauses(hole);
    for (std::size_t i = 0; i < cl.size(); ++i) {
      auto v = f(cl[i].post);
      std::string text;
      if constexpr (std::is_same_v<decltype(v), std::string>) text = v;
      else text = print_expr(v);
      out += (i ? " & " : "") + text;
    }
    return out;
  }

  std::vector<std::string> apply(const std::string& hole, const std::string& rule,
                                 const std::vector<std::pair<std::string, std::string>>& args) {
    RuleApplication app;
    app.hole = hole;
    app.rule = rule;
    for (const auto& [k, v] : args) app.args.push_back({k, v});
    StepRecord rec = s_.apply(app);
    if (!rec.accepted) {
      std::string why;
      for (const auto& o : rec.obligations)
        if (o.verdict != Verdict::Holds)
          why += "\n  " + o.description + " (" + verdict_name(o.verdict) + ")" + (o.detail.empty() ? "" : ": " + o.detail);
      throw RuleError("derive: " + rule + " on " + hole + " was rejected" + why);
    }
    return rec.new_holes;
  }
};

}  // namespace

Script derive(const DeriveInput& in, SessionOptions opt) {
  if (!in.program || !is_concrete(in.program)) throw RuleError("derive needs a concrete program");
  SpecDef spec;
  spec.name = in.name;
  spec.vars = in.vars;
  spec.mode = in.mode;
  spec.params = in.params;
  spec.lets = in.lets;
  spec.hole = "h0";
  spec.clauses = {{in.pre, in.post}};
  Session s(spec, opt);
  check_program_vars(in.program, s.registry());
  CheckResult r = check_triple(s.semantics(), {in.pre, in.program, in.post}, in.params, in.mode);
  if (r.verdict == Verdict::Inconclusive)
    throw ConvergenceError("derive: triple check inconclusive" +
                           (r.diag.messages.empty() ? std::string() : ": " + r.diag.messages.front()));
  if (r.verdict == Verdict::Fails) throw DeriveRefused("derive: the triple does not hold", r);
  Deriver(s, in.mode).run("h0", in.program);
  Script out;
  out.spec = spec;
  for (const auto& st : s.ledger()) {
    RuleApplication a = st.app;
    a.ids = st.new_holes;
    out.steps.push_back({0, a});
  }
  return out;
}

}  // namespace qbc
