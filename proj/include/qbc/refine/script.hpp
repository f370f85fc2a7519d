#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qbc/refine/session.hpp"

namespace qbc {

struct ScriptStep {
  int line = 0;
  RuleApplication app;
};

/// A parsed .qbc file: one spec block followed by `refine` lines.
struct Script {
  SpecDef spec;
  std::vector<ScriptStep> steps;
};

Script parse_script(std::string_view text);
/// Parses `spec NAME { ... }` on its own.
SpecDef parse_spec(std::string_view text);

std::string print_script(const Script& s);

enum class ReplayStatus { Ok, ObligationFailed, Inconclusive, InvalidStep };

const char* replay_status_name(ReplayStatus s);

struct ReplayReport {
  ReplayStatus status = ReplayStatus::Ok;
  std::vector<StepRecord> steps;  // accepted steps, then the failing one if any
  std::optional<std::size_t> failed_step;  // 1-based
  int failed_line = 0;
  std::string error;
  std::optional<CheckResult> verification;  // when the final program is concrete
  std::string final_program;

  bool ok() const { return status == ReplayStatus::Ok; }
};

struct Replay {
  std::unique_ptr<Session> session;
  ReplayReport report;
};

/// Applies every step in order and stops at the first failure. Throws
/// ParseError or RuleError only when the spec itself is invalid.
Replay replay_script(const Script& s, SessionOptions opt = {});

}  // namespace qbc
