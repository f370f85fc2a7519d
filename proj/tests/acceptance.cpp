// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>

#include "qbc/examples/examples.hpp"
#include "qbc/lang/parser.hpp"
#include "qbc/refine/derive.hpp"
#include "support.hpp"

using namespace qbc;
using namespace qbc::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double frob(const Matrix& m) { return m.norm(); }

Matrix proj_vec(const Vector& v) { return v * v.adjoint(); }

// Phi+ over pairs (x_i, y_i): amplitude 2^{-k/2} on basis states with x = y.
// `index` maps (x, y) to a full-register index.
Vector max_entangled(std::size_t full, int k, const std::function<std::size_t(std::size_t, std::size_t)>& index) {
  Vector v = Vector::Zero(full);
  const std::size_t n = std::size_t{1} << k;
  for (std::size_t x = 0; x < n; ++x) v(index(x, x)) = 1.0 / std::sqrt(static_cast<double>(n));
  return v;
}

Outcome criterion1() {
  ProgramFile pf = parse_program_file(toss_program());
  Tolerances tol;
  tol.loop_tail_eps = 1e-12;
  Semantics sem(pf.reg, pf.env, tol);
  Rng rng(101);
  Matrix zero = Matrix::Zero(2, 2);
  zero(0, 0) = 1;
  double worst = 0, worst_term = 0;
  for (int i = 0; i < 20; ++i) {
    Matrix rho = random_state(rng, 2);
    Matrix out = sem.apply(pf.program, rho);
    worst = std::max(worst, frob(out - zero));
    worst_term = std::max(worst_term, std::abs(sem.termination_probability(pf.program, rho) - 1.0));
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "max |out - |0><0||_F = %.2e, max |term - 1| = %.2e", worst, worst_term);
  return {worst <= 1e-8 && worst_term <= 1e-8, buf};
}

Outcome criterion2() {
  Replay r = replay_script(parse_script(fair_coin_script()));
  if (!r.report.ok()) return {false, "replay: " + r.report.error};
  bool all = true;
  for (const auto& st : r.report.steps)
    for (const auto& o : st.obligations) all = all && o.verdict == Verdict::Holds;
  const auto& v = *r.report.verification;
  const Semantics& sem = r.session->semantics();
  Rng rng(7);
  Matrix out = sem.apply(r.session->program(), random_state(rng, 2));
  const double p0 = out(0, 0).real(), p1 = out(1, 1).real();
  char buf[200];
  std::snprintf(buf, sizeof buf, "obligations hold, verdict %s over %zu bindings, P(0) = %.12f, P(1) = %.12f",
                verdict_name(v.verdict), v.bindings, p0, p1);
  return {all && v.verdict == Verdict::Holds && v.bindings == 2 && r.session->mode() == Mode::Total &&
              std::abs(p0 - 0.5) <= 1e-9 && std::abs(p1 - 0.5) <= 1e-9,
          buf};
}

Outcome criterion3() {
  Replay r = replay_script(parse_script(teleport_script()));
  if (!r.report.ok()) return {false, "replay: " + r.report.error};
  const Session& s = *r.session;
  const ProgPtr& p = s.program();
  const Evaluator& ev = s.semantics().evaluator();
  // Expected listing: q, a *= (H x I) CNOT; case [a, q] { 00: I, 01: Z, 10: X, 11: X Z on b }.
  const double h = 1 / std::sqrt(2.0);
  Matrix H(2, 2), X(2, 2), Z(2, 2), I2 = Matrix::Identity(2, 2), cnot = Matrix::Zero(4, 4);
  H << h, h, h, -h;
  X << 0, 1, 1, 0;
  Z << 1, 0, 0, -1;
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1;
  Matrix hi = Matrix::Zero(4, 4);
  hi.topLeftCorner(2, 2) = h * I2;
  hi.topRightCorner(2, 2) = h * I2;
  hi.bottomLeftCorner(2, 2) = h * I2;
  hi.bottomRightCorner(2, 2) = -h * I2;
  bool shape = p->kind == ProgKind::Seq && p->body.size() == 2 && p->body[0]->kind == ProgKind::Unitary &&
               p->body[0]->vars == std::vector<std::string>{"q", "a"} && p->body[1]->kind == ProgKind::Case &&
               p->body[1]->meas.empty() && p->body[1]->labels == std::vector<std::string>{"00", "01", "10", "11"};
  if (shape) {
    shape = (ev.local_operator(p->body[0]->op, {"q", "a"}, {}) - hi * cnot).norm() < 1e-12;
    const Matrix want[4] = {I2, Z, X, X * Z};
    for (int i = 0; i < 4 && shape; ++i) {
      const ProgPtr& b = p->body[1]->body[i];
      shape = b->kind == ProgKind::Unitary && b->vars == std::vector<std::string>{"b"} &&
              (ev.local_operator(b->op, {"b"}, {}) - want[i]).norm() < 1e-12;
    }
  }
  // Registry order (q, a, b, r); input Phi+_{qr} x Phi+_{ab}.
  Vector in = Vector::Zero(16);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) in(8 * x + 4 * y + 2 * y + x) = 0.5;
  Matrix out = s.semantics().apply(p, proj_vec(in));
  Matrix target = Matrix::Zero(16, 16);  // I_qa x |Phi+><Phi+|_br
  for (int qa = 0; qa < 4; ++qa)
    for (int u = 0; u < 2; ++u)
      for (int v = 0; v < 2; ++v) target(4 * qa + 2 * u + u, 4 * qa + 2 * v + v) = 0.5;
  const double fid = (target * out).trace().real();
  const auto& ver = *r.report.verification;
  char buf[200];
  std::snprintf(buf, sizeof buf, "structure %s, fidelity %.12f, total verdict %s", shape ? "matches" : "differs", fid,
                verdict_name(ver.verdict));
  return {shape && std::abs(fid - 1) <= 1e-9 && ver.verdict == Verdict::Holds && s.mode() == Mode::Total, buf};
}

/// Statevector Grover oracle, independent of the library.
double grover_oracle(int n, const std::string& tt, int r) {
  const std::size_t N = std::size_t{1} << n;
  std::vector<double> a(N, 1.0 / std::sqrt(static_cast<double>(N)));
  for (int k = 0; k < r; ++k) {
    for (std::size_t x = 0; x < N; ++x)
      if (tt[x] == '1') a[x] = -a[x];
    double mean = 0;
    for (double v : a) mean += v;
    mean /= static_cast<double>(N);
    for (double& v : a) v = 2 * mean - v;
  }
  double s = 0;
  for (std::size_t x = 0; x < N; ++x)
    if (tt[x] == '1') s += a[x] * a[x];
  return s;
}

double solution_mass(const Session& s, const std::string& tt) {
  const std::size_t N = tt.size();
  Matrix rho = Matrix::Zero(N, N);
  rho(0, 0) = 1;
  Matrix out = s.semantics().apply(s.program(), rho);
  double m = 0;
  for (std::size_t x = 0; x < N; ++x)
    if (tt[x] == '1') m += out(x, x).real();
  return m;
}

int repeat_count(const ProgPtr& p) {
  if (!p) return -1;
  if (p->kind == ProgKind::Repeat) return p->count;
  for (const auto& b : p->body)
    if (int c = repeat_count(b); c >= 0) return c;
  return -1;
}

Outcome criterion4() {
  auto r_formula = [](int n, int t) {
    return static_cast<int>(std::lround(std::numbers::pi / (4 * std::asin(std::sqrt(t / std::pow(2.0, n)))) - 0.5));
  };
  const std::string t1 = "00010000", t2 = "00010100";
  Replay g1 = replay_script(parse_script(grover_script(3, t1)));
  Replay g2 = replay_script(parse_script(grover_script(3, t2)));
  Replay s1 = replay_script(parse_script(search_random_script(3, t1)));
  Replay s2 = replay_script(parse_script(search_random_script(3, t2)));
  if (!g1.report.ok() || !g2.report.ok() || !s1.report.ok() || !s2.report.ok())
    return {false, "replay failed: " + g1.report.error + g2.report.error + s1.report.error + s2.report.error};
  const int r1 = repeat_count(g1.session->program()), r2 = repeat_count(g2.session->program());
  const double p1 = solution_mass(*g1.session, t1), p2 = solution_mass(*g2.session, t2);
  const double o1 = grover_oracle(3, t1, 2), o2 = grover_oracle(3, t2, 1);
  const double q1 = solution_mass(*s1.session, t1), q2 = solution_mass(*s2.session, t2);
  char buf[300];
  std::snprintf(buf, sizeof buf,
                "T=1: r=%d p=%.10f (oracle %.10f); T=2: r=%d p=%.10f (oracle %.10f); sampling %.12f, %.12f", r1, p1, o1,
                r2, p2, o2, q1, q2);
  const bool ok = r1 == 2 && r_formula(3, 1) == 2 && grover_rounds(3, 1) == 2 && std::abs(p1 - o1) <= 1e-9 &&
                  std::abs(p1 - 0.9453) <= 5e-5 && p1 >= 0.875 && r2 == 1 && r_formula(3, 2) == 1 &&
                  grover_rounds(3, 2) == 1 && p2 >= 0.75 && std::abs(p2 - o2) <= 1e-9 &&
                  std::abs(q1 - 1.0 / 8) <= 1e-9 && std::abs(q2 - 2.0 / 8) <= 1e-9 &&
                  g1.report.verification->verdict == Verdict::Holds && g2.report.verification->verdict == Verdict::Holds;
  return {ok, buf};
}

Outcome criterion5() {
  Replay rep = replay_script(parse_script(boost_rep_script()));
  Replay wh = replay_script(parse_script(boost_while_script()));
  if (!rep.report.ok() || !wh.report.ok()) return {false, "replay failed: " + rep.report.error + wh.report.error};
  const int n = repeat_count(rep.session->program());
  const int oracle = static_cast<int>(std::ceil(std::log(0.1) / std::log(0.5)));
  const auto& vr = *rep.report.verification;
  const auto& vw = *wh.report.verification;
  char buf[200];
  std::snprintf(buf, sizeof buf, "boostRep N=%d (oracle %d) verdict %s; boostWhile verdict %s margin %.2e", n, oracle,
                verdict_name(vr.verdict), verdict_name(vw.verdict), vw.margin);
  return {n == 4 && oracle == 4 && vr.verdict == Verdict::Holds && vw.verdict == Verdict::Holds && vw.margin >= -1e-8 &&
              rep.session->mode() == Mode::Total && wh.session->mode() == Mode::Total,
          buf};
}

Outcome criterion6() {
  std::string detail;
  bool ok = true;
  for (int n = 1; n <= 4; ++n) {
    const auto t0 = std::chrono::steady_clock::now();
    Replay r = replay_script(parse_script(qft_script(n)));
    if (!r.report.ok()) return {false, "n=" + std::to_string(n) + ": " + r.report.error};
    const std::size_t N = std::size_t{1} << n, full = N * N;
    // Registry (q1..qn, r1..rn): index x * N + y.
    Vector in = max_entangled(full, n, [N](std::size_t x, std::size_t y) { return x * N + y; });
    Vector want = Vector::Zero(full);
    const double pi = std::numbers::pi;
    for (std::size_t k = 0; k < N; ++k)
      for (std::size_t x = 0; x < N; ++x)
        want(k * N + x) += std::polar(1.0, 2 * pi * static_cast<double>(k * x) / static_cast<double>(N)) /
                           std::sqrt(static_cast<double>(N)) * in(x * N + x);
    Matrix out = r.session->semantics().apply(r.session->program(), proj_vec(in));
    const double fid = (want.adjoint() * out * want)(0, 0).real();
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    char buf[120];
    std::snprintf(buf, sizeof buf, "%sn=%d fidelity %.12f (%.0f ms)", n > 1 ? "; " : "", n, fid, ms);
    detail += buf;
    ok = ok && fid >= 1 - 1e-9;
    if (n == 1) {
      const ProgPtr& p = r.session->program();
      const bool base = p->kind == ProgKind::Unitary && p->vars == std::vector<std::string>{"q1"} &&
                        print_expr(p->op) == "H";
      detail += base ? " [base case q1 *= H]" : " [base case is not a single H]";
      ok = ok && base;
    }
  }
  return {ok, detail};
}

// Random refinement chains built top-down. Intermediate predicates are chosen
// at random among numeric literals and intensional transformer terms, and
// weakening steps are inserted at random.
class ChainBuilder {
 public:
  ChainBuilder(Session& s, Rng& rng) : s_(s), rng_(rng) {}

  bool run(const std::string& hole, const ProgPtr& p, int sw_budget = 2) {
    const Clause cl = clause(hole);
    if (sw_budget > 0 && pick(rng_, 5) == 0) {
      auto ids = apply(hole, "H.sw", {{"P", pre_for(p, cl.post)}, {"Q", print_expr(cl.post)}});
      return !ids.empty() && run(ids[0], p, sw_budget - 1);
    }
    switch (p->kind) {
      case ProgKind::Skip: return ok(apply(hole, "H.skip", {}));
      case ProgKind::Init: return ok(apply(hole, "H.init", {{"vars", join(p->vars)}}));
      case ProgKind::Unitary: return ok(apply(hole, "H.unit", {{"vars", join(p->vars)}, {"U", print_expr(p->op)}}));
      case ProgKind::Seq: {
        const int k = 1 + pick(rng_, static_cast<int>(p->body.size()) - 1);
        auto part = [&](int lo, int hi) {
          if (hi - lo == 1) return p->body[lo];
          return pg::seq(std::vector<ProgPtr>(p->body.begin() + lo, p->body.begin() + hi));
        };
        ProgPtr a = part(0, k), b = part(k, static_cast<int>(p->body.size()));
        auto ids = apply(hole, "H.seq", {{"R", pre_for(b, cl.post)}});
        return ids.size() == 2 && run(ids[0], a) && run(ids[1], b);
      }
      case ProgKind::Case: {
        std::string pm = "{";
        for (std::size_t i = 0; i < p->labels.size(); ++i)
          pm += (i ? ", " : "") + p->labels[i] + ": " + pre_for(p->body[i], cl.post);
        auto ids = apply(hole, "H.case", {{"vars", join(p->vars)}, {"meas", "std"}, {"P", pm + "}"}});
        if (ids.size() != p->body.size()) return false;
        for (std::size_t i = 0; i < ids.size(); ++i)
          if (!run(ids[i], p->body[i])) return false;
        return true;
      }
      case ProgKind::If: {
        if (p->body.size() > 1 && p->body[1]) {
          auto ids = apply(hole, "H.ifElse",
                           {{"vars", join(p->vars)}, {"R1", pre_for(p->body[0], cl.post)}, {"R0", pre_for(p->body[1], cl.post)}});
          return ids.size() == 2 && run(ids[0], p->body[0]) && run(ids[1], p->body[1]);
        }
        auto ids = apply(hole, "H.if", {{"vars", join(p->vars)}, {"R", pre_for(p->body[0], cl.post)}});
        return ids.size() == 1 && run(ids[0], p->body[0]);
      }
      case ProgKind::While: {
        const ProgPtr& c = p->body[0];
        std::vector<std::string> ids;
        const std::string post = print_expr(cl.post);
        if (s_.mode() == Mode::Partial) {
          ids = apply(hole, "HP.while", {{"vars", join(p->vars)}, {"R", pre_for(c, ex::transform("wlp", p, {cl.post}))}});
        } else {
          const std::string n = "n" + std::to_string(++loops_) + "x";
          const std::string seq = n + " => wp{" + print_program(c) + "}(wpn{" + print_program(p) + "}(" + n + " - 1, " +
                                  post + "))";
          ids = apply(hole, "HT.while",
                      {{"vars", join(p->vars)}, {"seq", seq}, {"limit", pre_for(c, ex::transform("wp", p, {cl.post}))}});
        }
        return ids.size() == 1 && run(ids[0], c);
      }
      default: return false;
    }
  }

  std::string failure;

 private:
  Session& s_;
  Rng& rng_;
  int loops_ = 0;

  static bool ok(const std::vector<std::string>& ids) { return ids.empty(); }

  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s;
  }

  Clause clause(const std::string& hole) const {
    for (const auto& h : s_.holes())
      if (h.id == hole) return h.clauses.at(0);
    throw Error("lost hole " + hole);
  }

  /// Weakest (liberal) precondition of `q` under `p`, as text.
  std::string pre_for(const ProgPtr& p, const ExprPtr& q) {
    const Evaluator& ev = s_.semantics().evaluator();
    const bool partial = s_.mode() == Mode::Partial;
    if (ev.free_symbols(q).empty() && pick(rng_, 2)) {
      const Semantics& sem = s_.semantics();
      Matrix qm = ev.predicate(q, {}, false);
      Matrix w = sem.adjoint(p, qm);
      if (partial) w += Matrix::Identity(w.rows(), w.cols()) - sem.adjoint(p, Matrix::Identity(w.rows(), w.cols()));
      return literal((w + w.adjoint()) / 2.0);
    }
    return print_expr(ex::transform(partial ? "wlp" : "wp", p, {q}));
  }

  /// Returns the new holes, or a sentinel of one empty id when rejected.
  std::vector<std::string> apply(const std::string& hole, const std::string& rule,
                                 const std::vector<std::pair<std::string, std::string>>& args) {
    RuleApplication app;
    app.hole = hole;
    app.rule = rule;
    for (const auto& [k, v] : args) app.args.push_back({k, v});
    StepRecord rec = s_.apply(app);
    if (!rec.accepted) {
      failure = rule + " on " + hole + " rejected";
      for (const auto& o : rec.obligations)
        if (o.verdict != Verdict::Holds) failure += ": " + o.description + " " + o.detail;
      return {""};
    }
    return rec.new_holes;
  }
};

std::vector<VariableDecl> qubits(const std::vector<std::string>& names) {
  std::vector<VariableDecl> v;
  for (const auto& n : names) v.push_back({n, 2});
  return v;
}

Matrix wp_numeric(const Semantics& sem, const ProgPtr& p, const Matrix& q, Mode mode) {
  Matrix w = sem.adjoint(p, q);
  if (mode == Mode::Partial) w += Matrix::Identity(q.rows(), q.cols()) - sem.adjoint(p, Matrix::Identity(q.rows(), q.cols()));
  return (w + w.adjoint()) / 2.0;
}

Outcome criterion7() {
  Rng rng(7007);
  int pass = 0, loops = 0;
  std::string first_failure;
  for (int i = 0; i < 200; ++i) {
    std::vector<std::string> names = pick(rng, 2) ? std::vector<std::string>{"p", "q"} : std::vector<std::string>{"q"};
    ProgramGen gen(rng, names);
    ProgPtr prog = gen.program(1 + pick(rng, 3));
    loops += has_while(prog);
    const std::size_t d = std::size_t{1} << names.size();
    Matrix q = random_predicate(rng, d);
    const Mode mode = pick(rng, 3) == 0 ? Mode::Partial : Mode::Total;
    std::string why;
    try {
      VariableRegistry reg(qubits(names));
      Semantics sem(reg, std::make_shared<Env>(), Tolerances{});
      Matrix pre = wp_numeric(sem, prog, q, mode) * uniform(rng, 0.5, 1.0);
      SpecDef spec;
      spec.vars = qubits(names);
      spec.mode = mode;
      spec.clauses = {{parse_expr(literal(pre)), parse_expr(literal(q))}};
      Session s(spec);
      ChainBuilder b(s, rng);
      const bool built = b.run("h0", prog);
      if (!built) why = b.failure;
      else if (!s.concrete()) why = "holes remain";
      else if (s.verify_constructed().verdict != Verdict::Holds) why = "verify_constructed does not hold";
      else ++pass;
    } catch (const std::exception& e) {
      why = e.what();
    }
    if (!why.empty() && first_failure.empty()) first_failure = "case " + std::to_string(i) + ": " + why;
  }
  std::string detail = std::to_string(pass) + "/200 chains verified (" + std::to_string(loops) + " with loops)";
  if (!first_failure.empty()) detail += "; first failure " + first_failure;
  return {pass == 200, detail};
}

Outcome criterion8() {
  Rng rng(8008);
  int pass = 0, loops = 0;
  std::string first_failure;
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> names = pick(rng, 2) ? std::vector<std::string>{"p", "q"} : std::vector<std::string>{"q"};
    ProgramGen gen(rng, names);
    ProgPtr prog = i < 25 ? gen.program(2 + pick(rng, 2), true) : gen.program(1 + pick(rng, 3));
    if (has_while(prog)) ++loops;
    const Mode mode = pick(rng, 4) == 0 ? Mode::Partial : Mode::Total;
    std::string why;
    try {
      VariableRegistry reg(qubits(names));
      Semantics sem(reg, std::make_shared<Env>(), Tolerances{});
      Matrix q = random_predicate(rng, std::size_t{1} << names.size());
      DeriveInput in;
      in.vars = qubits(names);
      in.program = prog;
      in.post = parse_expr(literal(q));
      in.pre = parse_expr(literal(wp_numeric(sem, prog, q, mode)));
      in.mode = mode;
      const std::string text = print_script(derive(in));
      Replay r = replay_script(parse_script(text));
      if (!r.report.ok()) why = r.report.error;
      else if (!program_equal(r.session->program(), prog)) why = "program differs: " + print_program(r.session->program());
      else ++pass;
    } catch (const std::exception& e) {
      why = e.what();
    }
    if (!why.empty() && first_failure.empty()) first_failure = "case " + std::to_string(i) + ": " + why;
  }
  std::string detail = std::to_string(pass) + "/100 round trips (" + std::to_string(loops) + " with while loops)";
  if (!first_failure.empty()) detail += "; first failure " + first_failure;
  return {pass == 100 && loops >= 20, detail};
}

Outcome criterion9() {
  Rng rng(9009);
  double worst_dual = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> names = pick(rng, 2) ? std::vector<std::string>{"p", "q"} : std::vector<std::string>{"q"};
    ProgramGen gen(rng, names);
    ProgPtr prog = gen.program(1 + pick(rng, 3));
    VariableRegistry reg(qubits(names));
    Semantics sem(reg, std::make_shared<Env>(), Tolerances{});
    const std::size_t d = reg.dim();
    Matrix q = random_predicate(rng, d), rho = random_state(rng, d, uniform(rng, 0.2, 1.0));
    const cplx lhs = (q * sem.apply(prog, rho)).trace();
    const cplx rhs = (sem.adjoint(prog, q) * rho).trace();
    worst_dual = std::max(worst_dual, std::abs(lhs - rhs));
  }
  double worst_rec = 0, worst_solve = 0;
  for (int i = 0; i < 20; ++i) {
    std::vector<std::string> names = pick(rng, 2) ? std::vector<std::string>{"p", "q"} : std::vector<std::string>{"q"};
    ProgramGen gen(rng, names);
    ProgPtr w = gen.loop(3);
    VariableRegistry reg(qubits(names));
    Semantics sem(reg, std::make_shared<Env>(), Tolerances{});
    const std::size_t d = reg.dim();
    // Kraus operators of the guard measurement on the loop variable.
    const int v = reg.index_of(w->vars[0]);
    Matrix k0 = Matrix::Zero(d, d), k1 = Matrix::Zero(d, d);
    for (std::size_t x = 0; x < d; ++x) {
      const int bit = static_cast<int>((x >> (names.size() - 1 - v)) & 1);
      (bit ? k1 : k0)(x, x) = 1;
    }
    auto transfer_of = [d](const std::function<Matrix(const Matrix&)>& f) {
      Matrix t(d * d, d * d);
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i) {
          Matrix e = Matrix::Zero(d, d);
          e(i, j) = 1;
          Matrix img = f(e);
          for (std::size_t c = 0; c < d; ++c)
            for (std::size_t r = 0; r < d; ++r) t(c * d + r, j * d + i) = img(r, c);
        }
      return t;
    };
    Matrix tb0 = transfer_of([&](const Matrix& m) { return Matrix(k0 * m * k0.adjoint()); });
    Matrix tb1 = transfer_of([&](const Matrix& m) { return Matrix(k1 * m * k1.adjoint()); });
    Matrix tc = sem.superoperator(w->body[0]).transfer;
    // T_W from iterating the loop on states: images of the PSD spanning set
    // |e_i>, (e_i + e_j)/sqrt 2, (e_i + i e_j)/sqrt 2, combined linearly into E_ij.
    auto run = [&](const Vector& v) { return Matrix(sem.apply(w, v * v.adjoint())); };
    std::vector<Matrix> diag(d);
    for (std::size_t i = 0; i < d; ++i) diag[i] = run(Vector::Unit(d, i));
    Matrix tw(d * d, d * d);
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t i = 0; i < d; ++i) {
        Matrix img;
        if (i == j) {
          img = diag[i];
        } else {
          Vector a = (Vector::Unit(d, i) + Vector::Unit(d, j)) / std::sqrt(2.0);
          Vector b = (Vector::Unit(d, i) + cplx(0, 1) * Vector::Unit(d, j)) / std::sqrt(2.0);
          Matrix base = diag[i] + diag[j];
          img = 0.5 * ((2.0 * run(a) - base) + cplx(0, 1) * (2.0 * run(b) - base));
        }
        for (std::size_t c = 0; c < d; ++c)
          for (std::size_t r = 0; r < d; ++r) tw(c * d + r, j * d + i) = img(r, c);
      }
    worst_rec = std::max(worst_rec, (tw - (tb0 + tw * tc * tb1)).cwiseAbs().maxCoeff());
    worst_solve = std::max(worst_solve, (tw - sem.superoperator(w).transfer).cwiseAbs().maxCoeff());
  }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "max duality gap %.2e over 100 cases; max recurrence residual %.2e over 20 loops "
                "(iterated vs solved transfer %.2e)",
                worst_dual, worst_rec, worst_solve);
  return {worst_dual <= 1e-10 && worst_rec <= 1e-8 && worst_solve <= 1e-8, buf};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> all{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
  int failed = 0;
  for (const auto& [id, f] : all) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s  %s  [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), s);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
