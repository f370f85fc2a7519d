// qbc: command-line front end for the workbench.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qbc/examples/examples.hpp"
#include "qbc/lang/parser.hpp"
#include "qbc/refine/derive.hpp"
#include "qbc/report/report.hpp"
#include "qbc/server/server.hpp"

namespace fs = std::filesystem;
using namespace qbc;

namespace {

enum Exit { kOk = 0, kObligation = 1, kInvalid = 2, kInconclusive = 3 };

struct Config {
  bool json = false;
  int precision = 6;
  bool strict_rules = false;
  double psd_eps = -1, trace_eps = -1, loop_tail_eps = -1, seq_conv_eps = -1;
  int loop_cap = -1, n_check = -1;
};

SessionOptions session_options(const Config& c) {
  SessionOptions o;
  if (const char* env = std::getenv("QBC_TOL")) {
    char* end = nullptr;
    double v = std::strtod(env, &end);
    if (end == env || *end || v < 0) throw Error("QBC_TOL must be a non-negative number");
    o.tol.psd_eps = v;
  }
  if (c.psd_eps >= 0) o.tol.psd_eps = c.psd_eps;
  if (c.trace_eps >= 0) o.tol.trace_eps = c.trace_eps;
  if (c.loop_tail_eps >= 0) o.tol.loop_tail_eps = c.loop_tail_eps;
  if (c.seq_conv_eps >= 0) o.tol.seq_conv_eps = c.seq_conv_eps;
  if (c.loop_cap > 0) o.tol.loop_cap = c.loop_cap;
  if (c.n_check > 0) o.tol.n_check = c.n_check;
  o.strict_rules = c.strict_rules;
  return o;
}

ReportOptions report_options(const Config& c) {
  ReportOptions r;
  r.precision = c.precision;
  return r;
}

/// Reads a file, falling back to a bundled example of that name.
std::string read_input(const std::string& path) {
  if (fs::exists(path)) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }
  const std::string stem = fs::path(path).filename().string();
  if (find_example(stem)) return example_text(stem);
  throw Error("cannot read '" + path + "'");
}

/// Program text from a file, a bundled name, or inline source.
ProgramFile load_program(const std::string& arg, const std::string& vars, const SessionOptions& o) {
  std::string text;
  try {
    text = read_input(arg);
  } catch (const Error&) {
    text = arg;
    if (text.find("vars") == std::string::npos) text = "vars " + vars + ";\n" + text;
  }
  return parse_program_file(text, o.tol.dim_cap);
}

int exit_for(Verdict v) {
  return v == Verdict::Holds ? kOk : v == Verdict::Fails ? kObligation : kInconclusive;
}

void emit(const Config& c, const Json& j, const std::string& text) {
  if (c.json) std::cout << j.dump(2) << "\n";
  else std::cout << text;
}

int cmd_check(const Config& c, const std::string& path) {
  Script sc = parse_script(read_input(path));
  Replay r = replay_script(sc, session_options(c));
  const auto& reg = r.session->registry();
  emit(c, replay_json(r.report, reg, report_options(c)), replay_text(r.report, reg, report_options(c)));
  switch (r.report.status) {
    case ReplayStatus::Ok: return kOk;
    case ReplayStatus::ObligationFailed: return kObligation;
    case ReplayStatus::Inconclusive: return kInconclusive;
    case ReplayStatus::InvalidStep: return kInvalid;
  }
  return kInvalid;
}

Mode mode_arg(const std::string& s) {
  auto m = parse_mode(s);
  if (!m) throw ParseError("mode must be partial or total", 1, 1);
  return *m;
}

int cmd_verify(const Config& c, const std::string& path, const std::string& vars, const std::string& pre,
               const std::string& post, const std::string& mode) {
  SessionOptions o = session_options(c);
  ProgramFile pf = load_program(path, vars, o);
  Semantics sem(pf.reg, pf.env, o.tol);
  Triple t{parse_expr(pre), pf.program, parse_expr(post)};
  CheckResult r = check_triple(sem, t, ParamSpace{}, mode_arg(mode));
  emit(c, check_json(r, pf.reg, report_options(c)), check_text(r, pf.reg, report_options(c)));
  return exit_for(r.verdict);
}

int cmd_simulate(const Config& c, const std::string& path, const std::string& vars, const std::string& state) {
  SessionOptions o = session_options(c);
  ProgramFile pf = load_program(path, vars, o);
  Semantics sem(pf.reg, pf.env, o.tol);
  std::string st = state;
  if (st.empty()) {
    st = "proj(|";
    for (std::size_t i = 0; i < pf.reg.size(); ++i) st += "0";
    st += ">)";
  }
  Matrix rho = sem.evaluator().full_operator(parse_expr(st), {});
  if (auto v = state_violation(rho, o.tol)) throw Error("input is not a partial density operator: " + *v);
  Diagnostics d;
  Matrix out = sem.apply(pf.program, rho, {}, &d);
  const double term = trace_real(out);
  const ReportOptions ro = report_options(c);
  Json j;
  j["program"] = print_program(pf.program);
  j["input"] = matrix_json(rho);
  j["state"] = matrix_json(out);
  j["state_text"] = format_matrix(out, pf.reg, ro);
  j["termination"] = term;
  j["converged"] = d.converged;
  j["iterations"] = d.max_iterations;
  j["diagnostics"] = d.messages;
  std::ostringstream os;
  os << "state: " << format_matrix(out, pf.reg, ro) << "\n"
     << "termination: " << format_number(term, c.precision) << "\n";
  for (const auto& m : d.messages) os << "warning: " << m << "\n";
  emit(c, j, os.str());
  return d.converged ? kOk : kInconclusive;
}

int cmd_derive(const Config& c, const std::string& path, const std::string& vars, const std::string& pre,
               const std::string& post, const std::string& mode, const std::string& name,
               const std::string& out) {
  SessionOptions o = session_options(c);
  std::string text;
  try {
    text = read_input(path);
  } catch (const Error&) {
    text = path;
    if (text.find("vars") == std::string::npos) text = "vars " + vars + ";\n" + text;
  }
  ProgramFile pf = parse_program_file(text, o.tol.dim_cap);
  DeriveInput in;
  in.name = name;
  in.vars = pf.reg.vars();
  for (const auto& l : pf.env->defs()) in.lets.push_back(l);
  in.program = pf.program;
  in.pre = parse_expr(pre);
  in.post = parse_expr(post);
  in.mode = mode_arg(mode);
  try {
    Script s = derive(in, o);
    const std::string script = print_script(s);
    if (!out.empty()) {
      std::ofstream f(out, std::ios::binary);
      if (!f) throw Error("cannot write '" + out + "'");
      f << script;
    }
    if (c.json) std::cout << Json{{"script", script}, {"steps", s.steps.size()}, {"out", out}}.dump(2) << "\n";
    else if (out.empty()) std::cout << script;
    else std::cout << "wrote " << s.steps.size() << " step(s) to " << out << "\n";
    return kOk;
  } catch (const DeriveRefused& e) {
    if (c.json) {
      Json j = check_json(e.result, pf.reg, report_options(c));
      j["error"] = e.what();
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "refused: " << e.what() << "\n" << check_text(e.result, pf.reg, report_options(c));
    }
    return kObligation;
  }
}

int cmd_examples(const Config& c, const std::string& write_dir, const std::string& run) {
  if (!write_dir.empty()) {
    fs::create_directories(write_dir);
    for (const auto& e : example_catalog()) {
      std::ofstream f(fs::path(write_dir) / e.file, std::ios::binary);
      f << example_text(e.name);
    }
    std::cout << "wrote " << example_catalog().size() << " file(s) to " << write_dir << "\n";
    return kOk;
  }
  if (!run.empty()) {
    if (!find_example(run)) throw Error("unknown example '" + run + "'");
    ExampleRun r = run_example(run, session_options(c));
    Json j;
    j["name"] = r.name;
    j["report"] = replay_json(r.report, r.session->registry(), report_options(c));
    Json ms = Json::array();
    for (const auto& m : r.measurements) ms.push_back({{"name", m.name}, {"value", m.value}, {"note", m.note}});
    j["measurements"] = ms;
    std::ostringstream os;
    os << replay_text(r.report, r.session->registry(), report_options(c));
    for (const auto& m : r.measurements)
      os << m.name << " = " << format_number(m.value, c.precision) << (m.note.empty() ? "" : "  (" + m.note + ")")
         << "\n";
    emit(c, j, os.str());
    switch (r.report.status) {
      case ReplayStatus::Ok: return kOk;
      case ReplayStatus::ObligationFailed: return kObligation;
      case ReplayStatus::Inconclusive: return kInconclusive;
      case ReplayStatus::InvalidStep: return kInvalid;
    }
  }
  Json j = Json::array();
  std::ostringstream os;
  for (const auto& e : example_catalog()) {
    j.push_back({{"name", e.name}, {"file", e.file}, {"summary", e.summary}});
    os << e.name << "  " << e.file << "  " << e.summary << "\n";
  }
  emit(c, j, os.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qbc: correctness-by-construction workbench for quantum while programs"};
  app.require_subcommand(1);
  Config c;
  app.add_flag("--json", c.json, "machine-readable output");
  app.add_option("--precision", c.precision, "significant digits in reports")->check(CLI::Range(1, 17));
  app.add_flag("--strict-rules", c.strict_rules, "disable rule extensions");
  app.add_option("--psd-eps", c.psd_eps, "Loewner slack")->check(CLI::NonNegativeNumber);
  app.add_option("--trace-eps", c.trace_eps, "trace slack")->check(CLI::NonNegativeNumber);
  app.add_option("--loop-tail-eps", c.loop_tail_eps, "loop truncation threshold")->check(CLI::NonNegativeNumber);
  app.add_option("--seq-conv-eps", c.seq_conv_eps, "sequence limit slack")->check(CLI::NonNegativeNumber);
  app.add_option("--loop-cap", c.loop_cap, "maximum while iterations")->check(CLI::PositiveNumber);
  app.add_option("--n-check", c.n_check, "monotonicity checks for sequence rules")->check(CLI::PositiveNumber);

  std::string path, pre = "I", post = "I", mode = "total", vars = "q", state, out, name = "derived";
  std::string write_dir, run;
  int port = 8787;
  std::string host = "127.0.0.1", snapshot_dir;

  auto* check = app.add_subcommand("check", "replay a .qbc script");
  check->add_option("script", path, "script file or bundled example")->required();

  auto* verify = app.add_subcommand("verify", "check a triple for a concrete program");
  verify->add_option("program", path, "program file or inline source")->required();
  verify->add_option("--pre", pre, "precondition");
  verify->add_option("--post", post, "postcondition");
  verify->add_option("--mode", mode, "partial or total");
  verify->add_option("--vars", vars, "registry for inline source");

  auto* simulate = app.add_subcommand("simulate", "run a program on a state");
  simulate->add_option("program", path, "program file or inline source")->required();
  simulate->add_option("--state", state, "input partial density operator (default |0...0>)");
  simulate->add_option("--vars", vars, "registry for inline source");

  auto* der = app.add_subcommand("derive", "build a refinement script for a valid triple");
  der->add_option("program", path, "program file or inline source")->required();
  der->add_option("--pre", pre, "precondition");
  der->add_option("--post", post, "postcondition");
  der->add_option("--mode", mode, "partial or total");
  der->add_option("--vars", vars, "registry for inline source");
  der->add_option("--name", name, "spec name");
  der->add_option("--out", out, "script path");

  auto* ex = app.add_subcommand("examples", "list, write or run bundled examples");
  ex->add_option("--write", write_dir, "write every bundled file to this directory");
  ex->add_option("--run", run, "replay and measure one example");

  auto* serve = app.add_subcommand("serve", "start the HTTP session service");
  serve->add_option("--port", port, "port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", host, "bind address");
  serve->add_option("--snapshot-dir", snapshot_dir, "write session snapshots here on shutdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInvalid;
  }

  try {
    if (*check) return cmd_check(c, path);
    if (*verify) return cmd_verify(c, path, vars, pre, post, mode);
    if (*simulate) return cmd_simulate(c, path, vars, state);
    if (*der) return cmd_derive(c, path, vars, pre, post, mode, name, out);
    if (*ex) return cmd_examples(c, write_dir, run);
    if (*serve) {
      ServerOptions so;
      so.session = session_options(c);
      so.snapshot_dir = snapshot_dir;
      return run_server(host, port, so);
    }
  } catch (const ConvergenceError& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return kInconclusive;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}
