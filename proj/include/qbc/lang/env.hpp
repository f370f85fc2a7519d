#pragma once

#include <map>
#include <string>
#include <vector>

#include "qbc/lang/ast.hpp"

namespace qbc {

/// `let name(params) = body`, expanded by name at evaluation time.
struct LetDef {
  std::string name;
  std::vector<std::string> params;
  ExprPtr body;
};

class Env {
 public:
  void define(LetDef d);
  const LetDef* find(const std::string& name) const;
  const std::vector<LetDef>& defs() const { return defs_; }
  bool empty() const { return defs_.empty(); }

 private:
  std::vector<LetDef> defs_;
  std::map<std::string, std::size_t> index_;
};

std::string print_let(const LetDef& d);

}  // namespace qbc
