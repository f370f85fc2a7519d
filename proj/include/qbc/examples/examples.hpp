#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qbc/refine/script.hpp"

namespace qbc {

// Script generators. Each returns the text of a .qbc file.
std::string fair_coin_script();
std::string toss_script();
std::string teleport_script();
/// Grover search over n qubits with truth table `tt` (2^n characters).
std::string grover_script(int n, const std::string& tt);
std::string search_random_script(int n, const std::string& tt);
/// QFT_n on q1..qn, specified on half of a maximally entangled state with r1..rn.
std::string qft_script(int n);
std::string boost_rep_script();
std::string boost_while_script();

/// The coin toss until zero as a .qw program.
std::string toss_program();

/// Number of repetitions r chosen for Grover search with T solutions among 2^n.
int grover_rounds(int n, int t);

struct ExampleInfo {
  std::string name;
  std::string file;  // file name under scripts/
  std::string summary;
};

const std::vector<ExampleInfo>& example_catalog();
const ExampleInfo* find_example(const std::string& name);
/// Generated text of a bundled file (script or program).
std::string example_text(const std::string& name);

struct Measurement {
  std::string name;
  double value = 0.0;
  std::string note;
};

struct ExampleRun {
  std::string name;
  std::unique_ptr<Session> session;
  ReplayReport report;
  std::vector<Measurement> measurements;
  bool ok() const { return report.ok(); }
};

/// Replays the bundled script and simulates the final program.
ExampleRun run_example(const std::string& name, SessionOptions opt = {});

/// Measurements for a session built from an example script.
std::vector<Measurement> measure_example(const std::string& name, const Session& s);

}  // namespace qbc
