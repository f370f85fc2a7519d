#include <gtest/gtest.h>

#include "qbc/examples/examples.hpp"
#include "qbc/hoare/hoare.hpp"
#include "qbc/lang/parser.hpp"
#include "support.hpp"

using namespace qbc;
using namespace qbc::testing;

namespace {

CheckResult check(const std::string& prog, const std::string& pre, const std::string& post, Mode m,
                  const ParamSpace& ps = {}) {
  ProgramFile pf = parse_program_file(prog);
  Semantics sem(pf.reg, pf.env, Tolerances{});
  return check_triple(sem, {parse_expr(pre), pf.program, parse_expr(post)}, ps, m);
}

}  // namespace

TEST(Hoare, TossTotal) {
  EXPECT_EQ(check(toss_program(), "I", "proj(|0>)", Mode::Total).verdict, Verdict::Holds);
  CheckResult r = check(toss_program(), "I", "proj(|1>)", Mode::Total);
  EXPECT_EQ(r.verdict, Verdict::Fails);
  ASSERT_TRUE(r.cex.has_value());
  EXPECT_NEAR(r.cex->min_eig, -1.0, 1e-9);
  EXPECT_NEAR(r.cex->witness.norm(), 1.0, 1e-12);
}

TEST(Hoare, PartialTrivialPost) {
  for (const std::string p : {"vars q; while [q] { skip }", "vars q; q *= H", "vars q, r; case [q] { 0: r *= X; 1: skip }"})
    EXPECT_EQ(check(p, "I", "I", Mode::Partial).verdict, Verdict::Holds) << p;
}

TEST(Hoare, PartialVsTotalOnDivergence) {
  const std::string p = "vars q; while [q] { skip }";
  // From |1> nothing terminates: partially correct for any post, not totally.
  EXPECT_EQ(check(p, "proj(|1>)", "0 * I", Mode::Partial).verdict, Verdict::Holds);
  EXPECT_EQ(check(p, "proj(|1>)", "I", Mode::Total).verdict, Verdict::Fails);
}

TEST(Hoare, ParametrizedBindings) {
  ParamSpace ps;
  ps.add("x", {"0", "1"});
  CheckResult r = check("vars q; q := |0>; q *= H", "0.5 * I", "proj(|x>)", Mode::Total, ps);
  EXPECT_EQ(r.verdict, Verdict::Holds);
  EXPECT_EQ(r.bindings, 2u);
  r = check("vars q; q := |0>; q *= H", "0.6 * I", "proj(|x>)", Mode::Total, ps);
  EXPECT_EQ(r.verdict, Verdict::Fails);
  EXPECT_NEAR(r.margin, -0.1, 1e-12);
}

TEST(Hoare, UnboundSymbolIsError) {
  EXPECT_THROW(check("vars q; skip", "I", "proj(|x>)", Mode::Total), Error);
}

TEST(Hoare, ExpectationAndProjectionFastPath) {
  Tolerances tol;
  Matrix p = Matrix::Zero(2, 2), q = Matrix::Constant(2, 2, 0.5);
  p(0, 0) = 1;
  EXPECT_NEAR(expectation(q, p), 0.5, 1e-15);
  EXPECT_NEAR(projection_implication_value(p, q, tol), 0.5, 1e-12);
  EXPECT_FALSE(implies(p, q, tol).holds);
  EXPECT_TRUE(implies(0.5 * p, Matrix::Identity(2, 2), tol).holds);
}

TEST(Hoare, WeakestPreconditionIsTight) {
  // {wp(S)(Q)} S {Q} holds and any larger pre fails, for random S and Q.
  Rng rng(11);
  for (int i = 0; i < 15; ++i) {
    ProgramGen gen(rng, {"p", "q"});
    ProgPtr prog = gen.program(3);
    VariableRegistry reg({{"p", 2}, {"q", 2}});
    Semantics sem(reg, std::make_shared<Env>(), Tolerances{});
    Matrix q = random_predicate(rng, 4);
    Matrix w = sem.adjoint(prog, q);
    w = (w + w.adjoint()) / 2.0;
    CheckResult ok = check_triple(sem, {parse_expr(literal(w)), prog, parse_expr(literal(q))}, {}, Mode::Total);
    EXPECT_EQ(ok.verdict, Verdict::Holds) << print_program(prog);
    Matrix bigger = w + 1e-3 * Matrix::Identity(4, 4);
    if (predicate_violation(bigger, Tolerances{})) continue;
    CheckResult bad = check_triple(sem, {parse_expr(literal(bigger)), prog, parse_expr(literal(q))}, {}, Mode::Total);
    EXPECT_EQ(bad.verdict, Verdict::Fails) << print_program(prog);
  }
}
