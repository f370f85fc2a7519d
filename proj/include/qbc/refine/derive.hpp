#pragma once

#include <string>

#include "qbc/refine/script.hpp"

namespace qbc {

/// Raised when the triple handed to derive does not hold.
class DeriveRefused : public Error {
 public:
  DeriveRefused(const std::string& msg, CheckResult r) : Error(msg), result(std::move(r)) {}
  CheckResult result;
};

struct DeriveInput {
  std::string name = "derived";
  std::vector<VariableDecl> vars;
  std::vector<LetDef> lets;
  ParamSpace params;
  ProgPtr program;
  ExprPtr pre, post;
  Mode mode = Mode::Total;
};

/// Builds a refinement script that reconstructs `program` from the spec
/// {pre} _ {post}, choosing weakest intermediate predicates.
Script derive(const DeriveInput& in, SessionOptions opt = {});

}  // namespace qbc
