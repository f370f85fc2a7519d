#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qbc/lang/ast.hpp"
#include "qbc/lang/env.hpp"
#include "qbc/lang/lexer.hpp"
#include "qbc/linalg/registry.hpp"

namespace qbc {

/// Recursive-descent parser over a token stream. Shared by the program,
/// expression, .qw and .qbc front ends.
class Parser {
 public:
  explicit Parser(std::string_view src);

  const Token& peek(std::size_t k = 0) const;
  bool at(Tok t) const { return peek().kind == t; }
  bool at_keyword(std::string_view kw) const;
  Token next();
  Token expect(Tok t);
  void expect_keyword(std::string_view kw);
  bool accept(Tok t);
  bool accept_keyword(std::string_view kw);
  [[noreturn]] void fail(const std::string& msg) const;
  [[noreturn]] void fail_at(const Token& t, const std::string& msg) const;

  ExprPtr expr();
  ProgPtr program();
  std::vector<std::string> var_list();
  /// `q, a:3` style declarations; qubits unless a dimension is given.
  std::vector<VariableDecl> var_decls();
  /// `name = expr` or `name(a, b) = expr` (after the `let` keyword).
  LetDef let_def();
  std::string label();

  std::string_view source() const { return src_; }
  std::size_t position() const { return i_; }
  /// Raw source text from token `from` up to (excluding) the current token.
  std::string slice_from(std::size_t from) const;

 private:
  std::string src_;
  std::vector<Token> toks_;
  std::size_t i_ = 0;

  ExprPtr sum();
  ExprPtr term();
  ExprPtr unary();
  ExprPtr power();
  ExprPtr postfix();
  ExprPtr primary();
  ExprPtr matrix_literal();
  std::vector<ExprPtr> call_args();

  ProgPtr stmt();
  ProgPtr block();
  bool at_branch_label() const;
  std::vector<std::string> bracket_vars();
};

ExprPtr parse_expr(std::string_view text);

/// Parses a program and checks that every variable it names is in `reg`.
/// Unnamed holes receive fresh ids h1, h2, ... .
ProgPtr parse_program(std::string_view text, const VariableRegistry& reg);

/// Parses without a registry; variable names are not checked.
ProgPtr parse_program_unchecked(std::string_view text);

void check_program_vars(const ProgPtr& p, const VariableRegistry& reg);

/// Variables in order of first appearance.
std::vector<std::string> program_variables(const ProgPtr& p);

/// Gives fresh ids to holes with an empty id; throws on duplicates.
ProgPtr name_holes(const ProgPtr& p);

/// A .qw file: optional `vars`, `let` headers followed by a program.
/// Without a `vars` header, variables are qubits in order of appearance.
struct ProgramFile {
  VariableRegistry reg;
  std::shared_ptr<const Env> env;
  ProgPtr program;
};

ProgramFile parse_program_file(std::string_view text, std::size_t dim_cap = 1024);

}  // namespace qbc
