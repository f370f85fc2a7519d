#include "qbc/refine/script.hpp"

#include "qbc/lang/parser.hpp"

namespace qbc {

namespace {

SpecDef parse_spec_block(Parser& p) {
  SpecDef s;
  p.expect_keyword("spec");
  s.name = p.expect(Tok::Ident).text;
  p.expect(Tok::LBrace);
  bool have_vars = false, have_hole = false;
  while (!p.at(Tok::RBrace)) {
    if (p.accept_keyword("vars")) {
      if (have_vars) p.fail("vars declared twice");
      s.vars = p.var_decls();
      have_vars = true;
    } else if (p.accept_keyword("mode")) {
      Token t = p.expect(Tok::Ident);
      auto m = parse_mode(t.text);
      if (!m) p.fail_at(t, "mode must be partial or total");
      s.mode = *m;
    } else if (p.accept_keyword("param")) {
      Token name = p.expect(Tok::Ident);
      p.expect_keyword("in");
      p.expect(Tok::LBrace);
      std::vector<std::string> labels;
      do labels.push_back(p.label());
      while (p.accept(Tok::Comma));
      p.expect(Tok::RBrace);
      if (s.params.contains(name.text)) p.fail_at(name, "parameter declared twice");
      s.params.add(name.text, labels);
    } else if (p.accept_keyword("let")) {
      s.lets.push_back(p.let_def());
    } else if (p.accept_keyword("hole")) {
      if (have_hole) p.fail("only one hole per spec");
      s.hole = p.expect(Tok::Ident).text;
      p.expect(Tok::Colon);
      do {
        p.expect_keyword("pre");
        Clause c;
        c.pre = p.expr();
        p.expect(Tok::Arrow);
        p.expect_keyword("post");
        c.post = p.expr();
        s.clauses.push_back(c);
      } while (p.at(Tok::Semi) && p.peek(1).kind == Tok::Ident && p.peek(1).text == "pre" && p.accept(Tok::Semi));
      have_hole = true;
    } else {
      p.fail("expected vars, mode, param, let or hole");
    }
    if (!p.accept(Tok::Semi) && !p.at(Tok::RBrace)) p.fail("expected ';'");
  }
  p.expect(Tok::RBrace);
  if (!have_vars) p.fail("spec has no vars");
  if (!have_hole) p.fail("spec has no hole");
  return s;
}

int paren_balance(std::string_view s) {
  int d = 0;
  for (char c : s) {
    if (c == '(' || c == '[' || c == '{') ++d;
    if (c == ')' || c == ']' || c == '}') --d;
  }
  return d;
}

std::string strip_comment(std::string_view line) {
  auto h = line.find('#');
  return trim(h == std::string_view::npos ? line : line.substr(0, h));
}

}  // namespace

SpecDef parse_spec(std::string_view text) {
  Parser p(text);
  SpecDef s = parse_spec_block(p);
  p.expect(Tok::End);
  return s;
}

Script parse_script(std::string_view text) {
  // The spec block ends at the brace matching its first '{'.
  std::size_t rest = text.size();
  int depth = 0;
  bool opened = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '{') {
      ++depth;
      opened = true;
    } else if (c == '}' && --depth == 0 && opened) {
      rest = i + 1;
      break;
    }
  }
  Script sc;
  sc.spec = parse_spec(text.substr(0, rest));
  int line = 1;
  for (std::size_t i = 0; i < rest; ++i)
    if (text[i] == '\n') ++line;
  // The remainder is line-oriented; a step continues while brackets are open.
  std::string_view body = text.substr(std::min(rest, text.size()));
  std::string pending;
  int start_line = 0;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    std::size_t nl = body.find('\n', pos);
    std::string_view raw = body.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    std::string l = strip_comment(raw);
    if (!l.empty()) {
      if (pending.empty()) start_line = line;
      pending += (pending.empty() ? "" : " ") + l;
      if (paren_balance(pending) <= 0) {
        if (pending.rfind("refine", 0) != 0 || pending.size() < 7 || !std::isspace(static_cast<unsigned char>(pending[6])))
          throw ParseError("expected 'refine <hole> with <rule>(...)'", start_line, 1);
        try {
          sc.steps.push_back({start_line, parse_application(std::string_view(pending).substr(7))});
        } catch (const ParseError& e) {
          throw ParseError(std::string(e.what()).substr(std::string(e.what()).find(": ") + 2), start_line, 1);
        }
        pending.clear();
      }
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
    ++line;
  }
  if (!pending.empty()) throw ParseError("unbalanced brackets in refine step", start_line, 1);
  return sc;
}

std::string print_script(const Script& s) {
  std::string out = print_spec(s.spec);
  for (const auto& st : s.steps) out += print_application(st.app) + "\n";
  return out;
}

const char* replay_status_name(ReplayStatus s) {
  switch (s) {
    case ReplayStatus::Ok: return "ok";
    case ReplayStatus::ObligationFailed: return "obligation-failed";
    case ReplayStatus::Inconclusive: return "inconclusive";
    case ReplayStatus::InvalidStep: return "invalid-step";
  }
  return "?";
}

Replay replay_script(const Script& s, SessionOptions opt) {
  Replay r;
  r.session = std::make_unique<Session>(s.spec, opt);
  ReplayReport& rep = r.report;
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    const auto& st = s.steps[i];
    auto fail = [&](ReplayStatus status, std::string msg) {
      rep.status = status;
      rep.failed_step = i + 1;
      rep.failed_line = st.line;
      rep.error = "step " + std::to_string(i + 1) + " (line " + std::to_string(st.line) + "): " + msg;
    };
    StepRecord rec;
    try {
      rec = r.session->apply(st.app);
    } catch (const ParseError& e) {
      fail(ReplayStatus::InvalidStep, e.what());
      break;
    } catch (const ConvergenceError& e) {
      fail(ReplayStatus::Inconclusive, e.what());
      break;
    } catch (const Error& e) {
      fail(ReplayStatus::InvalidStep, e.what());
      break;
    }
    rep.steps.push_back(rec);
    if (!rec.accepted) {
      bool inconclusive = false;
      std::string which;
      for (const auto& o : rec.obligations) {
        if (o.verdict == Verdict::Holds) continue;
        if (o.verdict == Verdict::Inconclusive) inconclusive = true;
        if (which.empty()) which = o.description;
      }
      fail(inconclusive ? ReplayStatus::Inconclusive : ReplayStatus::ObligationFailed,
           st.app.rule + " obligation not discharged: " + which);
      break;
    }
  }
  rep.final_program = print_program(r.session->program());
  if (rep.ok() && r.session->concrete()) {
    try {
      rep.verification = r.session->verify_constructed();
      if (rep.verification->verdict == Verdict::Fails) {
        rep.status = ReplayStatus::ObligationFailed;
        rep.error = "constructed program does not satisfy the specification";
      } else if (rep.verification->verdict == Verdict::Inconclusive) {
        rep.status = ReplayStatus::Inconclusive;
        rep.error = "verification inconclusive";
      }
    } catch (const ConvergenceError& e) {
      rep.status = ReplayStatus::Inconclusive;
      rep.error = e.what();
    }
  }
  return r;
}

}  // namespace qbc
