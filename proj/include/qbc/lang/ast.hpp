#pragma once

#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qbc/linalg/registry.hpp"

namespace qbc {

struct Expr;
struct Program;
using ExprPtr = std::shared_ptr<const Expr>;
using ProgPtr = std::shared_ptr<const Program>;

enum class ExprKind {
  Number,
  Imag,
  Ident,
  Call,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Attach,     // e @ (q, a)
  MatrixLit,  // [[a, b], [c, d]]
  Ket,        // |01>, ket(x, 0), bra(...)
  Transform,  // wp{prog}(args), wlp, wpn, wpow, wlpow
};

/// Node of the predicate / operator DSL. Immutable once built.
struct Expr {
  ExprKind kind = ExprKind::Number;
  std::string text;               // number lexeme, identifier, call or transformer name
  std::vector<ExprPtr> args;      // operands, call arguments, matrix entries (row-major)
  std::vector<std::string> vars;  // attach variables or ket parts
  int rows = 0, cols = 0;         // matrix literal shape
  bool bra = false;
  ProgPtr prog;                   // transformer body
};

namespace ex {
ExprPtr number(double v);
ExprPtr number_lexeme(std::string lexeme);
ExprPtr imag(std::string lexeme);
ExprPtr ident(std::string name);
ExprPtr call(std::string name, std::vector<ExprPtr> args);
ExprPtr neg(ExprPtr a);
ExprPtr binary(ExprKind k, ExprPtr a, ExprPtr b);
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b);
ExprPtr attach(ExprPtr a, std::vector<std::string> vars);
ExprPtr ket(std::vector<std::string> parts, bool bra = false);
ExprPtr matrix(int rows, int cols, std::vector<ExprPtr> entries);
ExprPtr transform(std::string name, ProgPtr prog, std::vector<ExprPtr> args);
}  // namespace ex

std::string print_expr(const ExprPtr& e);
bool expr_equal(const ExprPtr& a, const ExprPtr& b);

/// Replaces every free identifier `name` by `by` (call heads untouched).
ExprPtr substitute(const ExprPtr& e, const std::string& name, const ExprPtr& by);

/// Identifier and call-head names occurring in e (not inside transformer programs).
std::set<std::string> identifiers(const ExprPtr& e);

enum class ProgKind { Skip, Init, Unitary, Seq, Repeat, Case, If, While, Hole };

struct Clause {
  ExprPtr pre, post;
};

/// Quantum while program with holes.
///
/// Case: `meas` empty means a standard-basis measurement on `vars`.
/// If/While: `op` is the guard B (null means |1><1| on a single qubit).
/// If: body[0] is the then-branch, body[1] the optional else-branch.
struct Program {
  ProgKind kind = ProgKind::Skip;
  std::vector<std::string> vars;
  ExprPtr op;
  std::vector<std::pair<std::string, ExprPtr>> meas;
  std::vector<std::string> labels;
  std::vector<ProgPtr> body;
  int count = 0;
  std::string hole_id;
  std::vector<Clause> clauses;
};

namespace pg {
ProgPtr skip();
ProgPtr init(std::vector<std::string> vars);
ProgPtr unitary(std::vector<std::string> vars, ExprPtr u);
ProgPtr seq(std::vector<ProgPtr> items);
ProgPtr repeat(int n, ProgPtr body);
ProgPtr case_std(std::vector<std::string> vars, std::vector<std::string> labels, std::vector<ProgPtr> branches);
ProgPtr case_general(std::vector<std::string> vars, std::vector<std::pair<std::string, ExprPtr>> meas,
                     std::vector<std::string> labels, std::vector<ProgPtr> branches);
ProgPtr if_(std::vector<std::string> vars, ExprPtr guard, ProgPtr then_branch, ProgPtr else_branch = nullptr);
ProgPtr while_(std::vector<std::string> vars, ExprPtr guard, ProgPtr body);
ProgPtr hole(std::string id, std::vector<Clause> clauses);
}  // namespace pg

struct PrintOptions {
  bool multiline = false;
  int indent = 2;
};

std::string print_program(const ProgPtr& p, const PrintOptions& opt = {});

/// Structural equality; sequences are compared after flattening.
bool program_equal(const ProgPtr& a, const ProgPtr& b);

/// Flattens nested sequences and collapses singleton sequences.
ProgPtr normalize(const ProgPtr& p);

struct HoleRef {
  std::string id;
  std::vector<Clause> clauses;
  std::vector<int> path;
};

std::vector<HoleRef> holes_of(const ProgPtr& p);
bool is_concrete(const ProgPtr& p);
ProgPtr child_at(const ProgPtr& p, const std::vector<int>& path);
ProgPtr replace_at(const ProgPtr& p, const std::vector<int>& path, const ProgPtr& by);

/// Standard-basis labels for the given per-variable dimensions ("00", "01", ...).
std::vector<std::string> basis_labels(const std::vector<int>& dims);

/// Removes if-sugar and implicit measurements. Needs the registry to name
/// standard-basis outcomes.
ProgPtr desugar(const ProgPtr& p, const VariableRegistry& reg);

/// Guard used when an if/while omits one: |1><1|.
ExprPtr default_guard();

/// Explicit measurement operators of a case node (standard basis if implicit).
std::vector<std::pair<std::string, ExprPtr>> case_measurement(const Program& p, const VariableRegistry& reg);

}  // namespace qbc
