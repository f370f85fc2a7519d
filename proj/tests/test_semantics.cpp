#include <gtest/gtest.h>

#include "qbc/examples/examples.hpp"
#include "qbc/lang/parser.hpp"
#include "qbc/semantics/semantics.hpp"
#include "support.hpp"

using namespace qbc;
using namespace qbc::testing;

namespace {

struct Fix {
  ProgramFile pf;
  Semantics sem;
  explicit Fix(const std::string& text, Tolerances tol = {})
      : pf(parse_program_file(text)), sem(pf.reg, pf.env, tol) {}
};

Matrix basis(std::size_t d, std::size_t i) {
  Matrix m = Matrix::Zero(d, d);
  m(i, i) = 1;
  return m;
}

}  // namespace

TEST(Semantics, SkipEchoesInput) {
  Fix f("vars q; skip");
  Rng rng(1);
  Matrix rho = random_state(rng, 2);
  EXPECT_LT((f.sem.apply(f.pf.program, rho) - rho).norm(), 1e-15);
}

TEST(Semantics, InitResets) {
  Fix f("vars p, q; q := |0>");
  Rng rng(2);
  Matrix rho = random_state(rng, 4);
  Matrix out = f.sem.apply(f.pf.program, rho);
  // Oracle: partial trace over q, then tensor |0><0|.
  Matrix want = Matrix::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) want(2 * a, 2 * b) = rho(2 * a, 2 * b) + rho(2 * a + 1, 2 * b + 1);
  EXPECT_LT((out - want).norm(), 1e-14);
}

TEST(Semantics, CaseIsMeasureThenBranch) {
  Fix f("vars q, r; case [q] { 0: skip; 1: r *= X }");
  Rng rng(3);
  Matrix rho = random_state(rng, 4);
  Matrix out = f.sem.apply(f.pf.program, rho);
  Matrix p0 = basis(4, 0) + basis(4, 1), p1 = basis(4, 2) + basis(4, 3);
  Matrix x = Matrix::Zero(4, 4);
  x(0, 0) = x(1, 1) = 1;
  x(2, 3) = x(3, 2) = 1;
  Matrix want = p0 * rho * p0 + x * p1 * rho * p1 * x.adjoint();
  EXPECT_LT((out - want).norm(), 1e-14);
}

TEST(Semantics, TossConvergesToZero) {
  Tolerances tol;
  tol.loop_tail_eps = 1e-12;
  Fix f(toss_program(), tol);
  Diagnostics d;
  Matrix out = f.sem.apply(f.pf.program, basis(2, 1), {}, &d);
  EXPECT_TRUE(d.converged);
  EXPECT_LT((out - basis(2, 0)).norm(), 1e-10);
  EXPECT_NEAR(f.sem.termination_probability(f.pf.program, basis(2, 1)), 1.0, 1e-10);
}

TEST(Semantics, NonTerminatingLoopLosesMass) {
  Fix f("vars q; while [q] { skip }");
  // Starting in |1> the loop never exits; starting in |+> half the mass leaves.
  Matrix plus = Matrix::Constant(2, 2, 0.5);
  Diagnostics d;
  Matrix out = f.sem.apply(f.pf.program, plus, {}, &d);
  EXPECT_NEAR(trace_real(out), 0.5, 1e-12);
  EXPECT_NEAR(out(0, 0).real(), 0.5, 1e-12);
}

TEST(Semantics, RepeatUnrolls) {
  Fix a("vars q; repeat 3 { q *= H }"), b("vars q; q *= H; q *= H; q *= H");
  Rng rng(4);
  Matrix rho = random_state(rng, 2);
  EXPECT_LT((a.sem.apply(a.pf.program, rho) - b.sem.apply(b.pf.program, rho)).norm(), 1e-14);
}

TEST(Semantics, SuperoperatorMatchesApply) {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    ProgramGen gen(rng, {"p", "q"});
    ProgPtr prog = gen.program(3);
    VariableRegistry reg({{"p", 2}, {"q", 2}});
    Semantics sem(reg, std::make_shared<Env>(), Tolerances{});
    Superoperator s = sem.superoperator(prog, {}, true);
    Matrix rho = random_state(rng, 4), q = random_predicate(rng, 4);
    EXPECT_LT((s.apply(rho) - sem.apply(prog, rho)).norm(), 1e-9) << print_program(prog);
    EXPECT_LT((adjoint_apply(s, q) - sem.adjoint(prog, q)).norm(), 1e-9) << print_program(prog);
    EXPECT_TRUE(s.is_cp_verified);
  }
}

TEST(Semantics, TracePreservingWithoutLoops) {
  Fix f("vars p, q; p := |0>; p, q *= CNOT; case [p] { 0: q *= H; 1: skip }");
  EXPECT_TRUE(f.sem.superoperator(f.pf.program).is_trace_preserving);
}

TEST(Semantics, RejectsBadPrograms) {
  EXPECT_THROW(Fix("vars q; q *= [[1, 1], [0, 1]]").sem.lower(parse_program_file("vars q; q *= [[1, 1], [0, 1]]").program),
               Error);
  Fix f("vars q; if 2 * I [q] { skip }");
  EXPECT_THROW(f.sem.apply(f.pf.program, basis(2, 0)), Error);
  Fix h("vars q; q *= H");
  EXPECT_THROW(h.sem.apply(pg::hole("h0", {}), basis(2, 0)), Error);
}

TEST(Semantics, StateViolation) {
  Tolerances tol;
  EXPECT_FALSE(state_violation(basis(2, 0), tol).has_value());
  EXPECT_TRUE(state_violation(2 * basis(2, 0), tol).has_value());
  EXPECT_TRUE(state_violation(-basis(2, 0), tol).has_value());
}

TEST(Semantics, SuperoperatorCapacity) {
  std::vector<VariableDecl> v;
  for (int i = 0; i < 6; ++i) v.push_back({"q" + std::to_string(i), 2});
  VariableRegistry reg(v);
  Semantics sem(reg, std::make_shared<Env>(), Tolerances{});
  EXPECT_THROW(sem.superoperator(pg::skip()), CapacityError);
}
