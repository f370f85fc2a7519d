#include "qbc/hoare/hoare.hpp"

#include <algorithm>
#include <limits>

namespace qbc {

const char* mode_name(Mode m) { return m == Mode::Total ? "total" : "partial"; }

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::optional<Mode> parse_mode(const std::string& s) {
  if (s == "total") return Mode::Total;
  if (s == "partial") return Mode::Partial;
  return std::nullopt;
}

void ParamSpace::add(std::string name, std::vector<std::string> labels) {
  if (contains(name)) throw EvalError("parameter '" + name + "' declared twice");
  if (labels.empty()) throw EvalError("parameter '" + name + "' has an empty domain");
  entries_.emplace_back(std::move(name), std::move(labels));
}

bool ParamSpace::contains(const std::string& name) const { return domain(name) != nullptr; }

const std::vector<std::string>* ParamSpace::domain(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.first == name) return &e.second;
  return nullptr;
}

std::vector<Binding> ParamSpace::enumerate(const std::set<std::string>& symbols) const {
  for (const auto& s : symbols)
    if (!contains(s)) throw EvalError("unbound symbol '" + s + "'");
  std::vector<Binding> out{Binding{}};
  for (const auto& [name, labels] : entries_) {
    if (!symbols.count(name)) continue;
    std::vector<Binding> next;
    next.reserve(out.size() * labels.size());
    for (const auto& b : out)
      for (const auto& l : labels) {
        Binding c = b;
        c[name] = l;
        next.push_back(std::move(c));
      }
    out = std::move(next);
  }
  return out;
}

std::vector<std::string> int_labels(int lo, int hi) {
  std::vector<std::string> v;
  for (int i = lo; i <= hi; ++i) v.push_back(std::to_string(i));
  return v;
}

double expectation(const Matrix& rho, const Matrix& p) {
  if (rho.rows() != p.rows() || rho.cols() != p.cols()) throw ShapeError("state and predicate differ in dimension");
  return (p * rho).trace().real();
}

LoewnerResult implies(const Matrix& p, const Matrix& q, const Tolerances& tol) { return loewner_check(p, q, tol); }

double projection_implication_value(const Matrix& p, const Matrix& q, const Tolerances& tol) {
  if (!is_projection(p, tol.projection_eps)) throw Error("fast path needs a projection");
  Matrix basis = range_basis(p, tol);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < basis.cols(); ++i) {
    Vector v = basis.col(i);
    best = std::min(best, (v.adjoint() * q * v)(0, 0).real());
  }
  return best;
}

namespace {

void collect_program_exprs(const ProgPtr& p, std::vector<ExprPtr>& out) {
  if (!p) return;
  if (p->op) out.push_back(p->op);
  for (const auto& m : p->meas) out.push_back(m.second);
  for (const auto& c : p->clauses) {
    out.push_back(c.pre);
    out.push_back(c.post);
  }
  for (const auto& b : p->body) collect_program_exprs(b, out);
}

}  // namespace

std::set<std::string> program_symbols(const Evaluator& ev, const ProgPtr& p) {
  std::vector<ExprPtr> exprs;
  collect_program_exprs(p, exprs);
  std::set<std::string> out;
  for (const auto& e : exprs) {
    auto s = ev.free_symbols(e);
    out.insert(s.begin(), s.end());
  }
  return out;
}

CheckResult check_triple(const Semantics& sem, const Triple& t, const ParamSpace& ps, Mode mode) {
  const Evaluator& ev = sem.evaluator();
  const Tolerances& tol = sem.tolerances();
  std::set<std::string> syms = ev.free_symbols(t.pre);
  for (const auto& s : ev.free_symbols(t.post)) syms.insert(s);
  for (const auto& s : program_symbols(ev, t.program)) syms.insert(s);
  CheckResult res;
  res.margin = std::numeric_limits<double>::infinity();
  const Matrix id = identity(sem.registry().dim());
  for (const Binding& b : ps.enumerate(syms)) {
    ++res.bindings;
    Matrix p = ev.predicate(t.pre, b);
    Matrix q = ev.predicate(t.post, b);
    Diagnostics d;
    LoewnerResult r;
    if (mode == Mode::Total) {
      r = loewner_check(p, sem.adjoint(t.program, q, b, &d), tol);
    } else {
      r = loewner_check(sem.adjoint(t.program, id - q, b, &d), id - p, tol);
    }
    res.diag.merge(d);
    if (r.min_eig < res.margin) res.margin = r.min_eig;
    if (!r.holds && !res.cex) res.cex = Counterexample{b, r.witness, r.min_eig};
  }
  if (!res.diag.converged)
    res.verdict = Verdict::Inconclusive;
  else
    res.verdict = res.cex ? Verdict::Fails : Verdict::Holds;
  return res;
}

CheckResult check_total(const Semantics& sem, const Triple& t, const ParamSpace& ps) {
  return check_triple(sem, t, ps, Mode::Total);
}

CheckResult check_partial(const Semantics& sem, const Triple& t, const ParamSpace& ps) {
  return check_triple(sem, t, ps, Mode::Partial);
}

}  // namespace qbc
