#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qbc/refine/rules.hpp"

namespace qbc {

/// The initial specification: one hole with a list of clauses.
struct SpecDef {
  std::string name = "spec";
  std::vector<VariableDecl> vars;
  Mode mode = Mode::Total;
  ParamSpace params;
  std::vector<LetDef> lets;
  std::string hole = "h0";
  std::vector<Clause> clauses;
};

std::string print_spec(const SpecDef& s);

enum class ObKind { Implication, SumImplication, SequenceBase, SequenceMonotone, SequenceLimit, WeightSum, SideCondition };

const char* ob_kind_name(ObKind k);

struct Obligation {
  ObKind kind = ObKind::Implication;
  std::string description;
  std::string lhs, rhs;  // printed expressions (empty for side conditions)
  Verdict verdict = Verdict::Holds;
  double margin = 0.0;
  std::size_t bindings = 0;
  std::optional<Binding> binding;  // first failing binding
  Vector witness;
  std::string detail;
  bool bounded = false;  // bounded certificate only
};

struct HoleInfo {
  std::string id;
  std::vector<Clause> clauses;
  std::vector<int> path;
};

struct StepRecord {
  RuleApplication app;
  std::vector<Obligation> obligations;
  std::vector<std::string> new_holes;
  bool accepted = false;
  std::string program_before, program_after;
};

struct SessionOptions {
  Tolerances tol;
  bool strict_rules = false;
};

/// Single-writer refinement state machine. Not thread-safe; callers serialize.
class Session {
 public:
  Session(SpecDef spec, SessionOptions opt = {});

  const SpecDef& spec() const { return spec_; }
  Mode mode() const { return spec_.mode; }
  const SessionOptions& options() const { return opt_; }
  const Semantics& semantics() const { return *sem_; }
  const VariableRegistry& registry() const { return sem_->registry(); }

  const ProgPtr& program() const { return st_.program; }
  const ParamSpace& params() const { return st_.params; }
  std::vector<HoleInfo> holes() const;
  bool concrete() const { return is_concrete(st_.program); }

  /// Checks obligations; on success replaces the hole. Rejected applications
  /// leave the session unchanged and are logged. Throws RuleError or
  /// ParseError for malformed applications.
  StepRecord apply(const RuleApplication& app);

  void undo();

  const std::vector<StepRecord>& ledger() const { return ledger_; }
  const std::vector<StepRecord>& rejections() const { return rejections_; }

  /// Checks the original specification against the current (concrete) program.
  CheckResult verify_constructed() const;

  std::string export_script() const;

 private:
  struct State {
    ProgPtr program;
    ParamSpace params;
    int next_hole = 1;
    int next_j = 1;
    int next_n = 1;
  };

  SpecDef spec_;
  SessionOptions opt_;
  std::shared_ptr<Env> env_;
  std::unique_ptr<Semantics> sem_;
  State st_;
  std::vector<State> history_;
  std::vector<StepRecord> ledger_;
  std::vector<StepRecord> rejections_;

  friend class RuleContext;
};

}  // namespace qbc
