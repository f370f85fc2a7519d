#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qbc/hoare/hoare.hpp"

namespace qbc {

/// Malformed rule application: unknown rule or hole, bad arguments, wrong
/// dimensions, rule not allowed in the session mode.
class RuleError : public Error {
 public:
  using Error::Error;
};

enum class ArgKind {
  Vars,     // q, a
  Expr,     // predicate expression, one per clause separated by '&'
  Operator, // operator expression (unitary, guard, local projection)
  Scalar,   // real number expression
  Symbol,   // identifier
  Family,   // P1 => Q1, P2 => Q2
  Weights,  // w1, w2
  Meas,     // std | {l: E, ...}
  LabelMap, // {l: E, ...}
  Sequence, // n => E, one per clause separated by '&'
};

const char* arg_kind_name(ArgKind k);

struct ArgSpec {
  std::string key;
  ArgKind kind;
  bool required = true;
  std::string doc;
};

struct RuleSpec {
  std::string name;
  std::vector<ArgSpec> args;
  bool partial = true;  // allowed in partial mode
  bool total = true;    // allowed in total mode
  int holes = 0;        // holes created (-1: depends on arguments)
  std::string doc;
};

const std::vector<RuleSpec>& rule_catalog();
const RuleSpec* find_rule(const std::string& name);

struct RuleArg {
  std::string key;
  std::string raw;  // source text, kept verbatim for export
};

struct RuleApplication {
  std::string hole;
  std::string rule;
  std::vector<RuleArg> args;
  std::vector<std::string> ids;  // explicit ids for the new holes (optional)

  const RuleArg* arg(const std::string& key) const;
};

/// `refine h with RULE(k: v; ...) -> a, b`, args in schema order.
std::string print_application(const RuleApplication& a);

/// Parses the text after `refine` up to the end of the line.
RuleApplication parse_application(std::string_view text);

/// Splits on top-level occurrences of `sep` (outside brackets and kets).
std::vector<std::string> split_top(std::string_view text, char sep);

std::string trim(std::string_view s);

}  // namespace qbc
