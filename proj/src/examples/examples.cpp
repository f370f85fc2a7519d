#include "qbc/examples/examples.hpp"

#include <cmath>

#include "qbc/lang/parser.hpp"

namespace qbc {

namespace {

std::string qubits(const std::string& prefix, int from, int to) {
  std::string s;
  for (int i = from; i <= to; ++i) s += (i > from ? ", " : "") + prefix + std::to_string(i);
  return s;
}

std::string step(const std::string& hole, const std::string& rule, const std::string& args,
                 const std::string& ids = "") {
  std::string s = "refine " + hole + " with " + rule;
  if (!args.empty()) s += "(" + args + ")";
  if (!ids.empty()) s += " -> " + ids;
  return s + "\n";
}

}  // namespace

std::string fair_coin_script() {
  return "# fair coin: 0.5 I => |x><x| for x in {0, 1}\n"
         "spec fair_coin {\n"
         "  vars q;\n"
         "  mode total;\n"
         "  param x in {0, 1};\n"
         "  hole h0 : pre 0.5 * I => post proj(|x>)\n"
         "}\n" +
         step("h0", "H.seq", "R: H * proj(|x>) * H", "h1, h2") + step("h1", "H.init", "vars: q") +
         step("h2", "H.unit", "vars: q; U: H");
}

std::string toss_script() {
  return "# toss a qubit until the outcome is 0\n"
         "spec toss {\n"
         "  vars q;\n"
         "  mode total;\n"
         "  hole h0 : pre I => post proj(|0>)\n"
         "}\n" +
         step("h0", "H.seq", "R: proj(|+>)", "h1, h2") +
         step("h2", "HT.while", "vars: q; seq: n => select(n, 0, I - 2^(1 - n) * proj(|->)); limit: I", "h3") +
         step("h3", "HT.split", "family: proj(|+>) => proj(|0>), proj(|->) => proj(|1>); weights: 1, 1 - 2^(-n1)",
              "h4") +
         step("h4", "H.unit", "vars: q; U: H") + step("h1", "H.seq", "R: proj(|0>)", "h5, h6") +
         step("h5", "H.init", "vars: q") + step("h6", "H.unit", "vars: q; U: H");
}

std::string toss_program() {
  return "# toss a qubit until the outcome is 0\n"
         "vars q;\n"
         "q := |0>;\n"
         "q *= H;\n"
         "while [q] {\n"
         "  q *= H\n"
         "}\n";
}

std::string teleport_script() {
  std::string s =
      "# teleport q to b through the shared pair (a, b); r is a reference\n"
      "spec teleport {\n"
      "  vars q, a, b, r;\n"
      "  mode total;\n"
      "  let phi = (|00> + |11>) / sqrt(2);\n"
      "  let bell(u) = adj(kron(u, id(2))) * proj(phi) * kron(u, id(2));\n"
      "  hole h0 : pre proj(phi) @ (q, r) * proj(phi) @ (a, b) => post proj(phi) @ (b, r)\n"
      "}\n";
  const char* labels[] = {"00", "01", "10", "11"};
  const char* bob[] = {"id(2)", "Z", "X", "X * Z"};
  std::string p, map;
  for (int i = 0; i < 4; ++i) {
    std::string term = std::string("proj(|") + labels[i] + ">) @ (a, q) * bell(" + bob[i] + ") @ (b, r)";
    p += (i ? " + " : "") + term;
    map += std::string(i ? ", " : "") + labels[i] + ": " + term;
  }
  s += step("h0", "H.seq", "R: " + p, "h1, h2");
  s += step("h2", "H.case", "vars: a, q; meas: std; P: {" + map + "}", "h3, h4, h5, h6");
  s += step("h1", "H.unit", "vars: q, a; U: kron(H, id(2)) * CNOT");
  const char* gates[] = {"I", "Z", "X", "X * Z"};
  for (int i = 0; i < 4; ++i) s += step("h" + std::to_string(3 + i), "H.unit", std::string("vars: b; U: ") + gates[i]);
  return s;
}

int grover_rounds(int n, int t) {
  const double ups = std::asin(std::sqrt(static_cast<double>(t) / std::ldexp(1.0, n)));
  return static_cast<int>(std::lround(M_PI / (4 * ups) - 0.5));
}

std::string grover_script(int n, const std::string& tt) {
  const std::string q = qubits("q", 1, n);
  const std::string hn = "kronpow(H, " + std::to_string(n) + ")";
  std::string s = "# Grover search: rotate the uniform state onto the solutions\n"
                  "spec grover {\n"
                  "  vars " + q + ";\n"
                  "  mode total;\n"
                  "  let tt = " + tt + ";\n"
                  "  let size = 2^" + std::to_string(n) + ";\n"
                  "  let nsol = tr(solutions(tt));\n"
                  "  let ups = arcsin(sqrt(nsol / size));\n"
                  "  let delta = 2 * ups;\n"
                  "  let r = round(pi / (4 * ups) - 1 / 2);\n"
                  "  let th(t) = cos(t) * unmarked(tt) + sin(t) * marked(tt);\n"
                  "  let p = cos(pi / 2 - r * delta - ups)^2;\n"
                  "  hole h0 : pre p * I => post solutions(tt)\n"
                  "}\n";
  s += step("h0", "H.sw", "P: p * I; Q: proj(th(pi / 2))", "h1");
  s += step("h1", "H.seq", "R: proj(th(pi / 2 - r * delta))", "h2, h3");
  s += step("h3", "H.repeat", "N: r; index: j; R: proj(th(pi / 2 - (r - j) * delta))", "h4");
  s += step("h4", "H.seq", "R: proj(th(-(pi / 2 - (r - j1) * delta)))", "h5, h6");
  s += step("h5", "H.unit", "vars: " + q + "; U: phase_oracle(tt)");
  s += step("h6", "H.unit", "vars: " + q + "; U: 2 * proj(uniform(" + std::to_string(n) + ")) - I");
  s += step("h2", "H.seq", "R: " + hn + " * proj(th(pi / 2 - r * delta)) * " + hn, "h7, h8");
  s += step("h7", "H.init", "vars: " + q);
  s += step("h8", "H.unit", "vars: " + q + "; U: " + hn);
  return s;
}

std::string search_random_script(int n, const std::string& tt) {
  const std::string q = qubits("q", 1, n);
  const std::string hn = "kronpow(H, " + std::to_string(n) + ")";
  return "# search by sampling a uniformly random bitstring\n"
         "spec search_random {\n"
         "  vars " + q + ";\n"
         "  mode total;\n"
         "  let tt = " + tt + ";\n"
         "  let size = 2^" + std::to_string(n) + ";\n"
         "  let nsol = tr(solutions(tt));\n"
         "  hole h0 : pre nsol / size * I => post solutions(tt)\n"
         "}\n" +
         step("h0", "H.seq", "R: " + hn + " * solutions(tt) * " + hn, "h1, h2") + step("h1", "H.init", "vars: " + q) +
         step("h2", "H.unit", "vars: " + q + "; U: " + hn);
}

std::string qft_script(int n) {
  auto qs = [](int k) { return qubits("q", 1, k); };
  std::string s = "# QFT_" + std::to_string(n) + " on q1..q" + std::to_string(n) +
                  ", specified on half of a maximally entangled state\n"
                  "spec qft" + std::to_string(n) + " {\n"
                  "  vars " + qubits("q", 1, n) + ", " + qubits("r", 1, n) + ";\n"
                  "  mode total;\n"
                  "  let phi = (|00> + |11>) / sqrt(2);\n"
                  "  let Phi = ";
  for (int j = 1; j <= n; ++j)
    s += (j > 1 ? " * " : "") + std::string("proj(phi) @ (r") + std::to_string(j) + ", q" + std::to_string(j) + ")";
  s += ";\n";
  for (int k = 1; k <= n; ++k)
    s += "  let Psi" + std::to_string(k) + " = QFT(" + std::to_string(k) + ") @ (" + qs(k) + ") * Phi * adj(QFT(" +
         std::to_string(k) + ")) @ (" + qs(k) + ");\n";
  s += "  hole h0 : pre Phi => post Psi" + std::to_string(n) + "\n}\n";

  int next = 1;
  auto fresh = [&] { return "h" + std::to_string(next++); };
  std::string cur = "h0";
  for (int k = n; k >= 2; --k) {
    const std::string a = fresh(), b = fresh();
    s += step(cur, "H.seq", "R: Psi" + std::to_string(k - 1), a + ", " + b);
    // Gates of the step from QFT_{k-1} to QFT_k: swaps, controlled phases, H.
    std::vector<std::pair<std::string, std::string>> gates;
    for (int j = k; j >= 2; --j)
      gates.push_back({"SWAP", "q" + std::to_string(j) + ", q" + std::to_string(j - 1)});
    for (int j = 2; j <= k; ++j) gates.push_back({"CRz(" + std::to_string(j) + ")", "q1, q" + std::to_string(j)});
    gates.push_back({"H", "q1"});
    std::string hole = b, left, right;
    for (std::size_t t = 0; t + 1 < gates.size(); ++t) {
      left = gates[t].first + " @ (" + gates[t].second + ")" + (left.empty() ? "" : " * " + left);
      right += (right.empty() ? "" : " * ") + ("adj(" + gates[t].first + ") @ (" + gates[t].second + ")");
      const std::string x = fresh(), y = fresh();
      s += step(hole, "H.seq", "R: " + left + " * Psi" + std::to_string(k - 1) + " * " + right, x + ", " + y);
      s += step(x, "H.unit", "vars: " + gates[t].second + "; U: " + gates[t].first);
      hole = y;
    }
    s += step(hole, "H.unit", "vars: q1; U: H");
    cur = a;
  }
  s += step(cur, "H.unit", "vars: q1; U: H");
  return s;
}

std::string boost_rep_script() {
  return "# boost a fair coin to success probability 0.9 by repetition\n"
         "spec boost_rep {\n"
         "  vars q;\n"
         "  mode total;\n"
         "  hole h0 : pre 0.9 * I => post proj(|0>) @ (q); pre I => post I\n"
         "}\n" +
         step("h0", "H.boostRep", "vars: q; Q: proj(|0>); eps: 0.5; p: 0.9", "h1") +
         step("h1", "H.seq", "R: proj(|+>) & I", "h2, h3") + step("h2", "H.init", "vars: q") +
         step("h3", "H.unit", "vars: q; U: H");
}

std::string boost_while_script() {
  return "# repeat a fair coin until it succeeds\n"
         "spec boost_while {\n"
         "  vars q;\n"
         "  mode total;\n"
         "  hole h0 : pre I => post proj(|0>) @ (q)\n"
         "}\n" +
         step("h0", "H.boostWhile", "vars: q; Q: proj(|0>); eps: 0.5", "h1") +
         step("h1", "H.seq", "R: proj(|+>) & I", "h2, h3") + step("h2", "H.init", "vars: q") +
         step("h3", "H.unit", "vars: q; U: H");
}

const std::vector<ExampleInfo>& example_catalog() {
  static const std::vector<ExampleInfo> cat = {
      {"fair_coin", "fair_coin.qbc", "fair coin from |0> and one Hadamard"},
      {"toss", "toss.qbc", "coin toss until zero via HT.while and HT.split"},
      {"teleport", "teleport.qbc", "teleportation with Bell measurement and Pauli corrections"},
      {"grover", "grover.qbc", "Grover search, 3 qubits, 1 solution"},
      {"grover_t2", "grover_t2.qbc", "Grover search, 3 qubits, 2 solutions"},
      {"search_random", "search_random.qbc", "search by uniform sampling, 3 qubits, 1 solution"},
      {"qft3", "qft3.qbc", "recursive QFT on 3 qubits"},
      {"boost_rep", "boost_rep.qbc", "H.boostRep around the fair coin"},
      {"boost_while", "boost_while.qbc", "H.boostWhile around the fair coin"},
      {"toss_program", "toss.qw", "coin toss until zero as a plain program"},
  };
  return cat;
}

const ExampleInfo* find_example(const std::string& name) {
  for (const auto& e : example_catalog())
    if (e.name == name || e.file == name) return &e;
  return nullptr;
}

std::string example_text(const std::string& name) {
  const ExampleInfo* e = find_example(name);
  if (!e) throw Error("unknown example '" + name + "'");
  const std::string& n = e->name;
  if (n == "fair_coin") return fair_coin_script();
  if (n == "toss") return toss_script();
  if (n == "teleport") return teleport_script();
  if (n == "grover") return grover_script(3, "00010000");
  if (n == "grover_t2") return grover_script(3, "00010100");
  if (n == "search_random") return search_random_script(3, "00010000");
  if (n == "qft3") return qft_script(3);
  if (n == "boost_rep") return boost_rep_script();
  if (n == "boost_while") return boost_while_script();
  return toss_program();
}

namespace {

struct Probe {
  std::string state;
  std::vector<std::pair<std::string, std::string>> observables;
};

Probe probe_for(const std::string& name) {
  if (name == "fair_coin") return {"proj(|0>)", {{"P(0)", "proj(|0>)"}, {"P(1)", "proj(|1>)"}}};
  if (name == "toss") return {"proj(|1>)", {{"P(0)", "proj(|0>)"}}};
  if (name == "teleport")
    return {"proj(phi) @ (q, r) * proj(phi) @ (a, b)", {{"fidelity", "proj(phi) @ (b, r)"}}};
  if (name == "grover" || name == "grover_t2" || name == "search_random")
    return {"proj(basis(0, size))", {{"success", "solutions(tt)"}}};
  if (name.rfind("qft", 0) == 0) return {"Phi", {{"fidelity", "Psi" + name.substr(3)}}};
  if (name == "boost_rep" || name == "boost_while") return {"proj(|1>)", {{"success", "proj(|0>)"}}};
  return {};
}

int first_repeat(const ProgPtr& p) {
  if (p->kind == ProgKind::Repeat) return p->count;
  for (const auto& c : p->body)
    if (c)
      if (int r = first_repeat(c); r >= 0) return r;
  return -1;
}

}  // namespace

std::vector<Measurement> measure_example(const std::string& name, const Session& s) {
  std::vector<Measurement> out;
  if (!s.concrete()) return out;
  const ExampleInfo* e = find_example(name);
  Probe pr = probe_for(e ? e->name : s.spec().name);
  if (pr.state.empty()) return out;
  const Semantics& sem = s.semantics();
  const Evaluator& ev = sem.evaluator();
  Matrix rho = ev.full_operator(parse_expr(pr.state), {});
  Diagnostics d;
  Matrix out_rho = sem.apply(s.program(), rho, {}, &d);
  for (const auto& [label, obs] : pr.observables)
    out.push_back({label, expectation(out_rho, ev.full_operator(parse_expr(obs), {})), ""});
  out.push_back({"termination", trace_real(out_rho), d.converged ? "" : "not converged"});
  if (int r = first_repeat(s.program()); r >= 0) out.push_back({"repetitions", static_cast<double>(r), ""});
  if (name == "grover" || name == "grover_t2") {
    const double t = ev.real_scalar(parse_expr("nsol / size"), {});
    out.push_back({"bound", 1.0 - t, "1 - T/N"});
  }
  return out;
}

ExampleRun run_example(const std::string& name, SessionOptions opt) {
  const ExampleInfo* e = find_example(name);
  if (!e || e->file.size() < 4 || e->file.substr(e->file.size() - 4) != ".qbc")
    throw Error("unknown example script '" + name + "'");
  ExampleRun run;
  run.name = e->name;
  Replay r = replay_script(parse_script(example_text(e->name)), opt);
  run.session = std::move(r.session);
  run.report = std::move(r.report);
  if (run.report.ok()) run.measurements = measure_example(e->name, *run.session);
  return run;
}

}  // namespace qbc
