#include <gtest/gtest.h>

#include "qbc/examples/examples.hpp"
#include "qbc/lang/parser.hpp"
#include "qbc/refine/derive.hpp"
#include "support.hpp"

using namespace qbc;

namespace {

SpecDef coin_spec() { return parse_script(fair_coin_script()).spec; }

RuleApplication app(const std::string& text) { return parse_application(text); }

}  // namespace

TEST(Application, ParsePrintRoundTrip) {
  const std::string s = "h0 with H.seq(R: H * proj(|x>) * H) -> h1, h2";
  RuleApplication a = app(s);
  EXPECT_EQ(a.hole, "h0");
  EXPECT_EQ(a.rule, "H.seq");
  ASSERT_EQ(a.args.size(), 1u);
  EXPECT_EQ(a.args[0].raw, "H * proj(|x>) * H");
  EXPECT_EQ(a.ids, (std::vector<std::string>{"h1", "h2"}));
  EXPECT_EQ(print_application(a), "refine " + s);
  EXPECT_THROW(app("h0 H.seq"), ParseError);
}

TEST(Application, SplitTopRespectsBrackets) {
  auto parts = split_top("msr(a, b) & {0: x, 1: y} & [[1, 0], [0, 1]]", '&');
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(trim(parts[1]), "{0: x, 1: y}");
}

TEST(Session, FairCoinChain) {
  Session s(coin_spec());
  ASSERT_EQ(s.holes().size(), 1u);
  StepRecord r = s.apply(app("h0 with H.seq(R: H * proj(|x>) * H)"));
  ASSERT_TRUE(r.accepted);
  EXPECT_EQ(r.new_holes, (std::vector<std::string>{"h1", "h2"}));
  EXPECT_TRUE(s.apply(app("h1 with H.init(vars: q)")).accepted);
  EXPECT_TRUE(s.apply(app("h2 with H.unit(vars: q; U: H)")).accepted);
  EXPECT_TRUE(s.concrete());
  EXPECT_EQ(print_program(s.program()), "q := |0>; q *= H");
  EXPECT_EQ(s.verify_constructed().verdict, Verdict::Holds);
  EXPECT_EQ(s.ledger().size(), 3u);
}

TEST(Session, RejectionLeavesStateUnchanged) {
  Session s(coin_spec());
  s.apply(app("h0 with H.seq(R: proj(|1>))"));
  const std::string before = print_program(s.program());
  StepRecord r = s.apply(app("h1 with H.init(vars: q)"));
  EXPECT_FALSE(r.accepted);
  ASSERT_FALSE(r.obligations.empty());
  const Obligation& o = r.obligations.back();
  EXPECT_EQ(o.verdict, Verdict::Fails);
  EXPECT_NEAR(o.margin, -0.5, 1e-12);
  EXPECT_EQ(print_program(s.program()), before);
  EXPECT_EQ(s.rejections().size(), 1u);
  EXPECT_EQ(s.ledger().size(), 1u);
}

TEST(Session, MalformedApplicationsThrow) {
  Session s(coin_spec());
  EXPECT_THROW(s.apply(app("h0 with H.nope")), RuleError);
  EXPECT_THROW(s.apply(app("h9 with H.skip")), RuleError);
  EXPECT_THROW(s.apply(app("h0 with H.seq")), RuleError);
  EXPECT_THROW(s.apply(app("h0 with H.unit(vars: z; U: H)")), Error);
  EXPECT_THROW(s.apply(app("h0 with H.seq(R: proj(|0>); bogus: 1)")), RuleError);
  EXPECT_THROW(s.apply(app("h0 with H.unit(vars: q; U: [[1, 1], [0, 1]])")), Error);
  EXPECT_TRUE(s.ledger().empty());
}

TEST(Session, UndoRestoresProgramAndIds) {
  Session s(coin_spec());
  s.apply(app("h0 with H.seq(R: H * proj(|x>) * H)"));
  s.apply(app("h1 with H.init(vars: q)"));
  s.undo();
  EXPECT_EQ(s.holes().size(), 2u);
  s.undo();
  EXPECT_EQ(s.holes().size(), 1u);
  EXPECT_EQ(s.holes()[0].id, "h0");
  StepRecord r = s.apply(app("h0 with H.seq(R: H * proj(|x>) * H)"));
  EXPECT_EQ(r.new_holes, (std::vector<std::string>{"h1", "h2"}));
}

TEST(Session, ExplicitIdsAndClash) {
  Session s(coin_spec());
  StepRecord r = s.apply(app("h0 with H.seq(R: H * proj(|x>) * H) -> a, b"));
  EXPECT_EQ(r.new_holes, (std::vector<std::string>{"a", "b"}));
  EXPECT_THROW(s.apply(app("a with H.seq(R: I) -> b, c")), RuleError);
}

TEST(Session, ModeRestrictions) {
  SpecDef partial = coin_spec();
  partial.mode = Mode::Partial;
  Session p(partial);
  EXPECT_THROW(p.apply(app("h0 with HT.while(vars: q; seq: n => 0 * I; limit: I)")), RuleError);
  Session t(coin_spec());
  EXPECT_THROW(t.apply(app("h0 with HP.while(vars: q; R: I)")), RuleError);
  // HT.split is an extension in partial mode that strict rules disable.
  const std::string split = "h0 with HT.split(family: 0.5 * I => proj(|x>); weights: 1)";
  Session ext(partial);
  EXPECT_NO_THROW(ext.apply(app(split)));
  SessionOptions strict;
  strict.strict_rules = true;
  Session st(partial, strict);
  EXPECT_THROW(st.apply(app(split)), RuleError);
}

TEST(Session, ExportScriptReplays) {
  Session s(coin_spec());
  s.apply(app("h0 with H.seq(R: H * proj(|x>) * H)"));
  s.apply(app("h1 with H.init(vars: q)"));
  s.apply(app("h2 with H.unit(vars: q; U: H)"));
  Replay r = replay_script(parse_script(s.export_script()));
  ASSERT_TRUE(r.report.ok()) << r.report.error;
  EXPECT_TRUE(program_equal(r.session->program(), s.program()));
}

TEST(Session, InvalidTolerances) {
  SessionOptions o;
  o.tol.psd_eps = -1;
  EXPECT_THROW(Session(coin_spec(), o), Error);
}

TEST(Script, ParsePrintRoundTrip) {
  for (const auto& e : example_catalog()) {
    if (e.file.find(".qbc") == std::string::npos) continue;
    Script a = parse_script(example_text(e.name));
    Script b = parse_script(print_script(a));
    ASSERT_EQ(a.steps.size(), b.steps.size()) << e.name;
    for (std::size_t i = 0; i < a.steps.size(); ++i)
      EXPECT_EQ(print_application(a.steps[i].app), print_application(b.steps[i].app)) << e.name;
    EXPECT_EQ(print_spec(a.spec), print_spec(b.spec)) << e.name;
  }
}

TEST(Script, ReplayReportsFirstFailure) {
  std::string text = fair_coin_script();
  text.replace(text.find("H * proj(|x>) * H"), 17, "proj(|1>)");
  Replay r = replay_script(parse_script(text));
  EXPECT_EQ(r.report.status, ReplayStatus::ObligationFailed);
  EXPECT_EQ(r.report.failed_step, 2u);
  EXPECT_NE(r.report.error.find("H.init"), std::string::npos);
}

TEST(Script, InvalidStepStatus) {
  std::string text = fair_coin_script() + "refine h7 with H.skip\n";
  Replay r = replay_script(parse_script(text));
  EXPECT_EQ(r.report.status, ReplayStatus::InvalidStep);
}

TEST(Script, MalformedSpecThrows) {
  EXPECT_THROW(parse_script("spec x { vars q; hole h0 : pre I }"), ParseError);
  EXPECT_THROW(parse_script("spec x { vars q; mode sometimes; hole h0 : pre I => post I }"), ParseError);
}

TEST(Derive, FairCoinRoundTrip) {
  DeriveInput in;
  ProgramFile pf = parse_program_file("vars q; q := |0>; q *= H");
  in.vars = pf.reg.vars();
  in.program = pf.program;
  in.params.add("x", {"0", "1"});
  in.pre = parse_expr("0.5 * I");
  in.post = parse_expr("proj(|x>)");
  Script s = derive(in);
  Replay r = replay_script(parse_script(print_script(s)));
  ASSERT_TRUE(r.report.ok()) << r.report.error;
  EXPECT_TRUE(program_equal(r.session->program(), pf.program));
}

TEST(Derive, RefusesInvalidTriple) {
  DeriveInput in;
  ProgramFile pf = parse_program_file(toss_program());
  in.vars = pf.reg.vars();
  in.program = pf.program;
  in.pre = parse_expr("I");
  in.post = parse_expr("proj(|1>)");
  try {
    derive(in);
    FAIL();
  } catch (const DeriveRefused& e) {
    EXPECT_EQ(e.result.verdict, Verdict::Fails);
    EXPECT_TRUE(e.result.cex.has_value());
  }
}

TEST(Derive, PartialModeLoops) {
  DeriveInput in;
  ProgramFile pf = parse_program_file("vars q; while [q] { skip }");
  in.vars = pf.reg.vars();
  in.program = pf.program;
  in.pre = parse_expr("I");
  in.post = parse_expr("proj(|0>)");
  in.mode = Mode::Partial;
  Replay r = replay_script(derive(in));
  ASSERT_TRUE(r.report.ok()) << r.report.error;
  EXPECT_TRUE(program_equal(r.session->program(), pf.program));
}
